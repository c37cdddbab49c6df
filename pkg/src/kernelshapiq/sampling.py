"""Budgeted coalition sampling with the border trick.

Small and large coalition sizes whose expected draw count would exceed the
number of coalitions of that size are enumerated outright (weight 1). The
remaining middle band ``q0 <= t <= n - q0`` is sampled: a size is drawn from
the renormalized size weights, then a uniform coalition of that size. Sampled
coalitions carry importance weights ``count_T / (n_samples * p(T))`` so that
``sum_T w_T f(T)`` is a Monte Carlo estimate of the band sum ``sum_T f(T)``.

The empty and the grand coalition are always included, which costs two budget
units.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .combinatorics import MASK_DTYPE, masks_of_size, popcount

FORCED_COALITIONS = 2


def default_sampling_weights(n: int) -> np.ndarray:
    """Size weights ``q(t) ~ 1 / (t (n - t))`` for ``1 <= t <= n - 1``; zero at both ends."""
    q = np.zeros(n + 1)
    t = np.arange(1, n)
    q[1:n] = 1.0 / (t * (n - t))
    total = q.sum()
    return q / total if total > 0 else q


def _check_weights(q, n) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (n + 1,):
        raise ValueError(f"sampling weights need length n+1={n + 1}, got {q.shape}")
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise ValueError("sampling weights must be finite and non-negative")
    if not np.any(q > 0) and n > 1:
        raise ValueError("sampling weights are all zero")
    return q


def compute_sampling_order(budget: int, q, n: int) -> int:
    """Border-trick split point ``q0``.

    Sizes ``t < q0`` and ``t > n - q0`` are enumerated. Sizes 0 and n are
    always enumerated (when ``budget >= 2``), so ``q0 >= 1`` from then on and
    each further size pair ``(t, n - t)`` is promoted while the expected number
    of draws under the weights renormalized to the current band covers every
    coalition of that size.
    """
    q = _check_weights(q, n)
    if budget < FORCED_COALITIONS:
        return 0
    q0, b = 1, budget - FORCED_COALITIONS
    for t in range(1, n // 2 + 1):
        band = q[q0:n - q0 + 1].sum()
        if band <= 0:
            break
        size = math.comb(n, t)
        cost = size if t == n - t else 2 * size
        if b * q[t] / band >= size and b * q[n - t] / band >= size and b >= cost:
            q0 += 1
            b -= cost
        else:
            break
    return q0


@dataclass
class SamplingBatch:
    """Distinct coalitions with their adjustment weights.

    The first ``n_deterministic`` entries of ``masks`` are the enumerated
    border sizes (weight 1); the rest were drawn from the middle band.
    """

    n: int
    masks: np.ndarray
    weights: np.ndarray
    q0: int
    n_samples: int
    n_deterministic: int
    size_probs: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.masks)

    @property
    def sizes(self) -> np.ndarray:
        return popcount(self.masks)

    @property
    def sampled(self) -> np.ndarray:
        """Boolean mask of the Monte Carlo part."""
        out = np.zeros(len(self.masks), dtype=bool)
        out[self.n_deterministic:] = True
        return out

    def in_band(self) -> np.ndarray:
        t = self.sizes
        return (t >= self.q0) & (t <= self.n - self.q0)

    def to_dict(self) -> dict:
        return {
            "q0": self.q0,
            "n_samples": self.n_samples,
            "coalitions": [{"mask": int(m), "weight": float(w)} for m, w in zip(self.masks, self.weights)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _uniform_subsets(rng: np.random.Generator, n: int, sizes: np.ndarray) -> np.ndarray:
    order = np.argsort(rng.random((len(sizes), n)), axis=1)
    picked = np.zeros((len(sizes), n), dtype=bool)
    np.put_along_axis(picked, order, np.arange(n)[None, :] < sizes[:, None], axis=1)
    bits = np.left_shift(np.uint64(1), np.arange(n, dtype=MASK_DTYPE))
    return np.bitwise_or.reduce(np.where(picked, bits[None, :], np.uint64(0)), axis=1)


def sample_batch(budget: int, q=None, n: Optional[int] = None, seed=None) -> SamplingBatch:
    """Draw ``budget`` distinct coalitions (or all of them if fewer exist).

    ``q`` defaults to :func:`default_sampling_weights`. Repeated draws of a
    coalition are not charged again; they raise its weight instead.
    """
    if n is None:
        raise TypeError("player count n is required")
    if n > 62:
        raise ValueError("sampling supports at most 62 players")
    q = default_sampling_weights(n) if q is None else _check_weights(q, n)
    if budget < FORCED_COALITIONS:
        raise ValueError(f"budget {budget} cannot cover the empty and grand coalition")
    budget = min(budget, 1 << n)
    q0 = compute_sampling_order(budget, q, n)

    det = [masks_of_size(n, t) for t in range(0, n + 1) if t < q0 or t > n - q0]
    det_masks = np.sort(np.concatenate(det)) if det else np.zeros(0, dtype=MASK_DTYPE)
    remaining = budget - len(det_masks)
    if remaining < 0:
        raise ValueError(f"budget {budget} smaller than the {len(det_masks)} deterministic coalitions")

    band_sizes = np.arange(q0, n - q0 + 1)
    size_probs = np.zeros(n + 1)
    band_mass = q[band_sizes].sum() if len(band_sizes) else 0.0
    if band_mass > 0:
        size_probs[band_sizes] = q[band_sizes] / band_mass
    band_total = sum(math.comb(n, int(t)) for t in band_sizes if size_probs[t] > 0)

    rng = np.random.default_rng(seed)
    counts: dict[int, int] = {}
    draws = 0
    target = min(remaining, band_total)
    while len(counts) < target:
        chunk = int(1.25 * (target - len(counts))) + 16
        sizes = rng.choice(n + 1, size=chunk, p=size_probs)
        for mask in _uniform_subsets(rng, n, sizes).tolist():
            draws += 1
            counts[mask] = counts.get(mask, 0) + 1
            if len(counts) >= target:
                break

    sampled = np.array(list(counts), dtype=MASK_DTYPE)
    if len(sampled):
        t = popcount(sampled)
        p = size_probs[t] / np.array([math.comb(n, int(s)) for s in t], dtype=float)
        sampled_w = np.array(list(counts.values()), dtype=float) / (draws * p)
    else:
        sampled_w = np.zeros(0)
    return SamplingBatch(
        n=n,
        masks=np.concatenate([det_masks, sampled]),
        weights=np.concatenate([np.ones(len(det_masks)), sampled_w]),
        q0=q0,
        n_samples=draws,
        n_deterministic=len(det_masks),
        size_probs=size_probs,
    )
