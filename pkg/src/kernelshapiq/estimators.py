"""SII estimators: KernelSHAP-IQ, its inconsistent variant, permutation sampling and SHAP-IQ."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .combinatorics import MASK_DTYPE, kernel_weights, masks_of_size, popcount
from .games import Game
from .sampling import FORCED_COALITIONS, SamplingBatch, default_sampling_weights, sample_batch
from .values import InteractionValues
from .wls import (
    aggregate_sii_to_ksii,
    build_design_matrix,
    build_stacked_design_matrix,
    sii_weight_matrix,
    solve_wls,
    solve_wls_limit,
)

DEFAULT_MU_INF = 1e6


@dataclass(frozen=True)
class EstimatorConfig:
    order: int
    budget: int
    mu_inf: float = DEFAULT_MU_INF
    sampling_weights: Optional[tuple[float, ...]] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not self.mu_inf >= 1:
            raise ValueError("mu_inf must be >= 1 (inf selects the exact limit)")
        if self.budget < FORCED_COALITIONS:
            raise ValueError(f"budget must be at least {FORCED_COALITIONS}")

    def weights_for(self, n: int) -> np.ndarray:
        if self.sampling_weights is None:
            return default_sampling_weights(n)
        return np.asarray(self.sampling_weights, dtype=float)


class Estimate(NamedTuple):
    sii: InteractionValues
    ksii: InteractionValues


def _evaluate_batch(game: Game, batch: SamplingBatch) -> np.ndarray:
    y = game(batch.masks)
    empty = np.flatnonzero(batch.masks == 0)
    return y - y[empty[0]] if len(empty) else y


def _finish(n, phis, method, config: EstimatorConfig, batch: Optional[SamplingBatch] = None, **extra) -> Estimate:
    meta = {"method": method, "budget": config.budget, "seed": config.seed, "mu_inf": config.mu_inf}
    if batch is not None:
        meta.update(q0=batch.q0, n_samples=batch.n_samples, evaluations=len(batch))
    meta.update(extra)
    sii = InteractionValues.from_orders(n, "SII", phis, **meta)
    ksii = aggregate_sii_to_ksii(sii, config.order)
    ksii.metadata = dict(meta)
    return Estimate(sii, ksii)


def _fit(X: np.ndarray, y: np.ndarray, mu: np.ndarray, w: np.ndarray) -> np.ndarray:
    # mu_inf = inf: solve the exact limit, the infinite rows weighted among themselves by w
    infinite = np.isinf(mu)
    if infinite.any():
        return solve_wls_limit(X, y, np.where(infinite, 1.0, mu * w), infinite, w[infinite])
    return solve_wls(X, y, mu * w)


def _check_order(n: int, k: int):
    if k > n:
        raise ValueError(f"order {k} exceeds the player count {n}")


def kernelshap_iq(game: Game, config: EstimatorConfig) -> Estimate:
    """KernelSHAP-IQ: one coalition batch, then one weighted regression per order on the
    residuals left by the lower orders.

    Orders 1 and 2 are plain WLS fits with kernel weights ``mu_l(t) * w_T``;
    ``mu_inf = inf`` solves the limit problem exactly instead.
    From order 3 on, coalitions outside ``l <= t <= n - l`` enter through their
    exact SII weights and are zeroed in the regression target.
    """
    n, k = game.n, config.order
    _check_order(n, k)
    batch = sample_batch(config.budget, config.weights_for(n), n, config.seed)
    y = _evaluate_batch(game, batch)
    sizes = batch.sizes
    phis = {}
    for ell in range(1, k + 1):
        X = build_design_matrix(batch.masks, ell, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mu = kernel_weights(ell, n, config.mu_inf)
        if ell <= 2:
            phi = _fit(X, y, mu[sizes], batch.weights)
        else:
            band = (sizes >= ell) & (sizes <= n - ell)
            outside = ~band
            Q = sii_weight_matrix(batch.masks[outside], ell, n)
            phi = Q @ (batch.weights[outside] * y[outside]) + _fit(X, np.where(band, y, 0.0), mu[sizes], batch.weights)
        phis[ell] = phi
        y = y - X @ phi
    return _finish(n, phis, "kernelshapiq", config, batch)


def inconsistent_kernelshap_iq(game: Game, config: EstimatorConfig) -> Estimate:
    """All orders ``1..k`` fitted jointly in one stacked regression with order-1 kernel weights."""
    n, k = game.n, config.order
    _check_order(n, k)
    batch = sample_batch(config.budget, config.weights_for(n), n, config.seed)
    y = _evaluate_batch(game, batch)
    X = build_stacked_design_matrix(batch.masks, k, n)
    stacked = _fit(X, y, kernel_weights(1, n, config.mu_inf)[batch.sizes], batch.weights)
    phis, start = {}, 0
    for ell in range(1, k + 1):
        width = len(masks_of_size(n, ell))
        phis[ell] = stacked[start:start + width]
        start += width
    return _finish(n, phis, "inconsistent", config, batch)


def shap_iq_sii(game: Game, config: EstimatorConfig) -> Estimate:
    """SHAP-IQ: ``phi(S) ~ sum_T w_T * omega(S, T) * nu(T)`` over the sampled batch.

    Enumerated border coalitions contribute exactly; sampled ones are
    importance-weighted, so the full budget reproduces the exact SII.
    """
    n, k = game.n, config.order
    _check_order(n, k)
    batch = sample_batch(config.budget, config.weights_for(n), n, config.seed)
    wy = batch.weights * _evaluate_batch(game, batch)
    phis = {ell: sii_weight_matrix(batch.masks, ell, n) @ wy for ell in range(1, k + 1)}
    return _finish(n, phis, "shapiq", config, batch)


def _window_plan(k: int):
    # per window size s: submask bit patterns (as index subsets of the window) with signs
    plan = {}
    for s in range(1, k + 1):
        subs = np.arange(1 << s)
        signs = np.where((s - np.bitwise_count(subs.astype(np.uint64))) % 2 == 0, 1.0, -1.0)
        plan[s] = (subs, signs)
    return plan


def permutation_sampling_sii(game: Game, config: EstimatorConfig) -> Estimate:
    """Permutation sampling for SII.

    Averages ``1[S consecutive in pi] * Delta_S(prefix before S)`` over the
    sampled orderings and divides by the probability ``(n-s+1) / C(n, s)``
    that a size-``s`` set is consecutive, which makes every estimate unbiased
    (an ``S`` never seen consecutively contributes zero rather than being
    dropped). Evaluations are cached within the run and charged once; a
    permutation whose new evaluations would overrun the budget is dropped whole.
    """
    n, k = game.n, config.order
    _check_order(n, k)
    rng = np.random.default_rng(config.seed)
    plan = _window_plan(k)
    cache: dict[int, float] = {}
    index = {ell: {m: i for i, m in enumerate(masks_of_size(n, ell).tolist())} for ell in range(1, k + 1)}
    sums = {ell: np.zeros(len(index[ell])) for ell in range(1, k + 1)}
    n_perms = 0
    while True:
        perm = rng.permutation(n)
        bits = [1 << int(p) for p in perm]
        prefix = [0] * (n + 1)
        for i, b in enumerate(bits):
            prefix[i + 1] = prefix[i] | b
        windows = []
        needed = set()
        for s in range(1, k + 1):
            subs, _ = plan[s]
            for i in range(n - s + 1):
                members = bits[i:i + s]
                coalitions = [prefix[i] | sum(members[j] for j in range(s) if sub >> j & 1) for sub in subs.tolist()]
                windows.append((s, sum(members), coalitions))
                needed.update(coalitions)
        fresh = [m for m in needed if m not in cache]
        if len(cache) + len(fresh) > config.budget:
            break
        if fresh:
            cache.update(zip(fresh, game(np.array(fresh, dtype=MASK_DTYPE)).tolist()))
        for s, S, coalitions in windows:
            delta = float(np.dot(plan[s][1], [cache[m] for m in coalitions]))
            sums[s][index[s][S]] += delta
        n_perms += 1
        if len(cache) >= 1 << n and n_perms >= config.budget:
            break
    phis = {}
    for ell, total in sums.items():
        p_consecutive = (n - ell + 1) / math.comb(n, ell)
        phis[ell] = total / (n_perms * p_consecutive) if n_perms else np.zeros_like(total)
    return _finish(n, phis, "permutation", config, evaluations=len(cache), n_permutations=n_perms)


ESTIMATORS = {
    "kernelshapiq": kernelshap_iq,
    "inconsistent": inconsistent_kernelshap_iq,
    "permutation": permutation_sampling_sii,
    "shapiq": shap_iq_sii,
}


def estimate(method: str, game: Game, config: EstimatorConfig) -> Estimate:
    try:
        fn = ESTIMATORS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(ESTIMATORS)}") from None
    return fn(game, config)
