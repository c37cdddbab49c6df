"""Brute-force ground truth over all ``2^n`` coalitions.

Every routine here evaluates the game on the full power set once and works
from the resulting table, so it is limited to ``n <= 20`` unless forced.
Games are centered (``nu(empty) = 0``) before any index is computed.
"""
from __future__ import annotations

import math
from typing import Union

import numpy as np

from .combinatorics import MASK_DTYPE, CoalitionLike, as_mask, bernoulli, masks_of_size, popcount
from .games import Game
from .values import InteractionValues
from .wls import aggregate_sii_to_ksii, build_design_matrix

EXACT_LIMIT = 20

GameOrTable = Union[Game, np.ndarray]


def _table(game: GameOrTable, force: bool = False) -> tuple[int, np.ndarray]:
    if isinstance(game, Game):
        if game.n > EXACT_LIMIT and not force:
            raise ValueError(f"exact computation needs 2^{game.n} evaluations (limit n={EXACT_LIMIT}); pass force=True")
        values = game.all_values(force=force)
        n = game.n
    else:
        values = np.asarray(game, dtype=float)
        n = int(values.size).bit_length() - 1
        if values.size != 1 << n:
            raise ValueError("value table length must be a power of two")
    return n, values - values[0]


def discrete_derivative(game: Game, S: CoalitionLike, T: CoalitionLike = 0) -> float:
    """``Delta_S(T) = sum_{L <= S} (-1)^(|S|-|L|) nu(T | L)`` for disjoint ``S``, ``T``."""
    S, T = as_mask(S, game.n), as_mask(T, game.n)
    if S == 0:
        raise ValueError("S must be nonempty")
    if S & T:
        raise ValueError("S and T must be disjoint")
    subs = _submasks(S)
    signs = np.where((S.bit_count() - popcount(subs)) % 2 == 0, 1.0, -1.0)
    return float(np.sum(signs * game(subs | np.uint64(T))))


def _submasks(S: int) -> np.ndarray:
    out = []
    sub = S
    while True:
        out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & S
    return np.array(sorted(out), dtype=MASK_DTYPE)


def _sii_from_table(n: int, values: np.ndarray, k: int) -> dict[int, float]:
    everything = np.arange(1 << n, dtype=MASK_DTYPE)
    sizes = popcount(everything)
    out = {}
    for s in range(1, k + 1):
        weights = np.array(
            [math.factorial(n - s - t) * math.factorial(t) / math.factorial(n - s + 1) for t in range(n - s + 1)]
        )
        for S in masks_of_size(n, s).tolist():
            outside = everything[(everything & np.uint64(S)) == 0]
            delta = np.zeros(len(outside))
            for L in _submasks(S).tolist():
                sign = 1.0 if (s - L.bit_count()) % 2 == 0 else -1.0
                delta += sign * values[(outside | np.uint64(L)).astype(np.int64)]
            out[S] = float(np.sum(weights[sizes[outside.astype(np.int64)]] * delta))
    return out


def exact_sii(game: GameOrTable, k: int, force: bool = False) -> InteractionValues:
    """Shapley interaction index of every ``S`` with ``1 <= |S| <= k``, from its definition
    as a weighted average of discrete derivatives."""
    n, values = _table(game, force)
    if not 1 <= k <= n:
        raise ValueError(f"order must lie in 1..{n}")
    return InteractionValues(n, k, "SII", _sii_from_table(n, values, k))


def exact_sv(game: GameOrTable, force: bool = False) -> InteractionValues:
    return exact_sii(game, 1, force)


def exact_ksii(game: GameOrTable, k: int, force: bool = False) -> InteractionValues:
    """k-Shapley values via the explicit Bernoulli-weighted sum over supersets."""
    return aggregate_sii_to_ksii(exact_sii(game, k, force), k)


def ksii_recursive(sii: InteractionValues, k: int) -> InteractionValues:
    """k-SII by the order recursion ``Phi_k = Phi_{k-1} + B_{k-|S|} * sum_{S' > S, |S'|=k} phi(S')``."""
    n = sii.n
    if k > sii.order:
        raise ValueError(f"SII only available up to order {sii.order}")
    phi: dict[int, float] = {}
    for j in range(1, k + 1):
        top = masks_of_size(n, j)
        prev = dict(phi)
        phi = {}
        for s in range(1, j):
            b = float(bernoulli(j - s))
            for S in masks_of_size(n, s).tolist():
                above = top[(top & np.uint64(S)) == np.uint64(S)]
                phi[S] = prev[S] + b * sum(sii.values[m] for m in above.tolist())
        for S in top.tolist():
            phi[S] = sii.values[S]
    return InteractionValues(n, k, "kSII", phi)


def moebius_transform(game: GameOrTable, force: bool = False) -> InteractionValues:
    """``a(S) = sum_{T <= S} (-1)^(|S|-|T|) nu(T)`` for all nonempty ``S``."""
    n, values = _table(game, force)
    a = values.copy()
    idx = np.arange(1 << n)
    for i in range(n):
        bit = 1 << i
        upper = idx[(idx & bit) != 0]
        a[upper] -= a[upper ^ bit]
    return InteractionValues(n, n, "Moebius", {m: float(a[m]) for m in range(1, 1 << n)})


def k_additive_approx(sii: InteractionValues, T: CoalitionLike, k: int) -> float:
    """``nu_hat_k(T) = sum_{l<=k} sum_{|S|=l} phi(S) lambda(l, |S & T|)``; ``nu_hat_1`` sums the SV in ``T``."""
    mask = as_mask(T, sii.n)
    return float(k_additive_approx_many(sii, np.array([mask], dtype=MASK_DTYPE), k)[0])


def k_additive_approx_many(sii: InteractionValues, coalitions, k: int) -> np.ndarray:
    if k > sii.order or any(ell not in sii.orders() for ell in range(1, k + 1)):
        raise ValueError(f"SII orders 1..{k} required, have {sii.orders()}")
    coalitions = np.asarray(coalitions, dtype=MASK_DTYPE)
    out = np.zeros(len(coalitions))
    for ell in range(1, k + 1):
        out += build_design_matrix(coalitions, ell, sii.n) @ sii.at_order(ell)
    return out


def k_additive_from_ksii(ksii: InteractionValues, T: CoalitionLike) -> float:
    """``sum_{S <= T} Phi_k(S)`` directly from k-SII values."""
    mask = as_mask(T, ksii.n)
    return float(sum(v for m, v in ksii.values.items() if m & ~mask == 0))
