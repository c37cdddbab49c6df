"""Design matrices, the weighted least-squares solve and SII weight tables."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .combinatorics import MASK_DTYPE, bernoulli, lambda_row, masks_of_size, popcount
from .values import InteractionValues, masks_up_to


def build_design_matrix(coalitions, order: int, n: int) -> np.ndarray:
    """``X[T, S] = lambda(|S|, |T & S|)`` for all ``|S| = order`` in ascending mask order."""
    if order < 1:
        raise ValueError("interaction order must be >= 1")
    rows = np.asarray(coalitions, dtype=MASK_DTYPE)
    cols = masks_of_size(n, order)
    lam = lambda_row(order)
    return lam[popcount(rows[:, None] & cols[None, :])]


def build_stacked_design_matrix(coalitions, max_order: int, n: int) -> np.ndarray:
    """Horizontal stack of the design matrices of orders ``1..max_order``."""
    return np.hstack([build_design_matrix(coalitions, ell, n) for ell in range(1, max_order + 1)])


def solve_wls(X: np.ndarray, y: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Minimize ``sum_T w_T (y_T - X_T phi)^2``.

    Solved through the SVD of ``sqrt(W) X`` rather than the normal equations:
    rows carrying ``mu_inf`` push the condition number of ``X^T W X`` to
    ``mu_inf^2``-scale otherwise. Rank-deficient systems (fewer coalitions than
    unknowns) get the minimum-norm minimizer.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty 2-d design matrix")
    if y.shape != (X.shape[0],) or weights.shape != (X.shape[0],):
        raise ValueError("response and weights must have one entry per row")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(weights))):
        raise ValueError("non-finite input to weighted least squares")
    if np.any(weights <= 0):
        raise ValueError("row weights must be positive")
    root = np.sqrt(weights)
    phi, *_ = np.linalg.lstsq(X * root[:, None], y * root, rcond=None)
    return phi


def solve_wls_limit(
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    infinite: np.ndarray,
    infinite_weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Limit of :func:`solve_wls` as the weight of the ``infinite`` rows grows without bound.

    That limit is a lexicographic least-squares problem: fit the infinite rows
    first (relative weights ``infinite_weights``, default equal), then fit the
    remaining rows with their finite ``weights`` inside the null space of the
    first fit. Entries of ``weights`` on infinite rows are ignored.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    infinite = np.asarray(infinite, dtype=bool)
    finite = ~infinite
    if not infinite.any():
        return solve_wls(X, y, weights)
    Xo, yo = X[infinite], y[infinite]
    if infinite_weights is not None:
        root = np.sqrt(np.asarray(infinite_weights, dtype=float))
        Xo, yo = Xo * root[:, None], yo * root
    _, sv, vt = np.linalg.svd(Xo, full_matrices=True)
    rank = int(np.sum(sv > sv.max() * max(Xo.shape) * np.finfo(float).eps)) if sv.size else 0
    base = vt[:rank].T @ ((vt[:rank] @ Xo.T @ yo) / sv[:rank] ** 2) if rank else np.zeros(X.shape[1])
    null = vt[rank:].T
    if null.shape[1] == 0 or not finite.any():
        return base
    root = np.sqrt(np.asarray(weights, dtype=float)[finite])
    z, *_ = np.linalg.lstsq((X[finite] @ null) * root[:, None], (y[finite] - X[finite] @ base) * root, rcond=None)
    return base + null @ z


@dataclass
class WlsSystem:
    """Rows are coalitions, columns interactions; see :func:`solve_wls`."""

    X: np.ndarray
    y: np.ndarray
    weights: np.ndarray

    def solve(self) -> np.ndarray:
        return solve_wls(self.X, self.y, self.weights)

    def precision_matrix(self) -> np.ndarray:
        """Explicit ``(X^T W X)^{-1}``."""
        return np.linalg.inv(self.X.T @ (self.weights[:, None] * self.X))


def conjectured_precision_matrix(n: int, k: int) -> np.ndarray:
    """Closed-form limit of ``(X_k^T W_k X_k)^{-1}`` as ``mu_inf -> inf``.

    Entry ``(S1, S2)`` is ``(-1)^(k - i) / (n - k + 1) / C(n - k, k - i)`` with
    ``i = |S1 & S2|``.
    """
    if k < 1 or n < 2 * k:
        raise ValueError(f"closed form needs n >= 2k and k >= 1, got n={n}, k={k}")
    table = np.array(
        [(-1) ** (k - i) / (n - k + 1) / math.comb(n - k, k - i) for i in range(k + 1)]
    )
    cols = masks_of_size(n, k)
    return table[popcount(cols[:, None] & cols[None, :])]


@lru_cache(maxsize=None)
def _sii_weight_table(n: int, s: int) -> np.ndarray:
    # table[t, r] for coalition size t and intersection size r
    out = np.zeros((n + 1, s + 1))
    denom = math.factorial(n - s + 1)
    for t in range(n + 1):
        for r in range(min(s, t) + 1):
            if t - r > n - s:
                continue
            out[t, r] = (-1) ** (s - r) * (math.factorial(n - t - s + r) * math.factorial(t - r)) / denom
    out.setflags(write=False)
    return out


def sii_subset_weight(n: int, S: int, T: int) -> float:
    """Coefficient of ``nu(T)`` in the SII of ``S``:
    ``(-1)^(s-r) (n-t-s+r)! (t-r)! / (n-s+1)!`` with ``r = |T & S|``."""
    S, T = int(S), int(T)
    s = S.bit_count()
    if s == 0:
        raise ValueError("interaction must be nonempty")
    return float(_sii_weight_table(n, s)[T.bit_count(), (S & T).bit_count()])


def sii_weight_matrix(coalitions, order: int, n: int) -> np.ndarray:
    """``Q[S, T]`` for all ``|S| = order`` (rows) and the given coalitions (columns)."""
    rows = masks_of_size(n, order)
    cols = np.asarray(coalitions, dtype=MASK_DTYPE)
    table = _sii_weight_table(n, order)
    return table[popcount(cols)[None, :], popcount(rows[:, None] & cols[None, :])]


def aggregate_sii_to_ksii(sii: InteractionValues, k: int | None = None) -> InteractionValues:
    """k-SII from SII: ``Phi_k(S) = sum_{S <= S', |S'| <= k} B_{|S'| - |S|} phi(S')``."""
    k = sii.order if k is None else k
    n = sii.n
    if k > sii.order:
        raise ValueError(f"SII only available up to order {sii.order}, need {k}")
    phis = {ell: sii.at_order(ell) for ell in range(1, k + 1)}
    out = {}
    for s in range(1, k + 1):
        rows = masks_of_size(n, s)
        acc = phis[s].copy()
        for top in range(s + 1, k + 1):
            b = float(bernoulli(top - s))
            if b == 0.0:
                continue
            cols = masks_of_size(n, top)
            for lo in range(0, len(rows), 2048):
                block = rows[lo:lo + 2048, None]
                contains = (block & cols[None, :]) == block
                acc[lo:lo + 2048] += b * (contains @ phis[top])
        out[s] = acc
    return InteractionValues.from_orders(n, "kSII", out)


def ksii_aggregation_matrix(n: int, k: int) -> np.ndarray:
    """Dense ``Z_k`` over all interactions of size ``1..k``; only for small ``n``."""
    masks = masks_up_to(n, k)
    sizes = popcount(masks)
    contains = (masks[:, None] & masks[None, :]) == masks[:, None]
    diff = sizes[None, :] - sizes[:, None]
    bern = np.array([float(bernoulli(d)) for d in range(k)])
    return np.where(contains & (diff >= 0), bern[np.clip(diff, 0, k - 1)], 0.0)
