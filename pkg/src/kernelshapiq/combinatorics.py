"""Coalitions as bitmasks, Bernoulli numbers and the lambda / mu weight functions."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Union

import numpy as np

MAX_PLAYERS = 64
EXHAUSTIVE_LIMIT = 30

MASK_DTYPE = np.uint64


@dataclass(frozen=True, order=True)
class Coalition:
    """A subset of the players ``{1, ..., n}`` stored as a bitmask.

    Bit ``i - 1`` of ``mask`` is set iff player ``i`` is a member.
    """

    mask: int
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_PLAYERS:
            raise ValueError(f"player count must lie in [1, {MAX_PLAYERS}], got {self.n}")
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} has bits outside of {self.n} players")

    @classmethod
    def from_players(cls, players: Iterable[int], n: int) -> "Coalition":
        mask = 0
        for p in players:
            if not 1 <= p <= n:
                raise ValueError(f"player {p} outside of 1..{n}")
            mask |= 1 << (p - 1)
        return cls(mask, n)

    @classmethod
    def empty(cls, n: int) -> "Coalition":
        return cls(0, n)

    @classmethod
    def grand(cls, n: int) -> "Coalition":
        return cls((1 << n) - 1, n)

    @property
    def players(self) -> tuple[int, ...]:
        return mask_to_players(self.mask)

    def size(self) -> int:
        return self.mask.bit_count()

    def __len__(self) -> int:
        return self.size()

    def __contains__(self, player: int) -> bool:
        return bool(self.mask >> (player - 1) & 1) if player >= 1 else False

    def __iter__(self) -> Iterator[int]:
        return iter(self.players)

    def _other(self, other: "Coalition") -> int:
        if other.n != self.n:
            raise ValueError("coalitions over different player sets")
        return other.mask

    def __or__(self, other: "Coalition") -> "Coalition":
        return Coalition(self.mask | self._other(other), self.n)

    def __and__(self, other: "Coalition") -> "Coalition":
        return Coalition(self.mask & self._other(other), self.n)

    def __sub__(self, other: "Coalition") -> "Coalition":
        return Coalition(self.mask & ~self._other(other), self.n)

    def issubset(self, other: "Coalition") -> bool:
        return self.mask & ~self._other(other) == 0

    def isdisjoint(self, other: "Coalition") -> bool:
        return self.mask & self._other(other) == 0

    def __repr__(self) -> str:
        return f"Coalition({set(self.players) or '{}'}, n={self.n})"


CoalitionLike = Union[Coalition, int, Iterable[int]]


def as_mask(c: CoalitionLike, n: Optional[int] = None) -> int:
    """Normalize a coalition, raw mask or iterable of 1-based players to a mask."""
    if isinstance(c, Coalition):
        return c.mask
    if isinstance(c, (int, np.integer)):
        return int(c)
    mask = 0
    for p in c:
        if p < 1 or (n is not None and p > n):
            raise ValueError(f"player {p} outside of 1..{n}")
        mask |= 1 << (int(p) - 1)
    return mask


def mask_to_players(mask: int) -> tuple[int, ...]:
    players = []
    i = 1
    while mask:
        if mask & 1:
            players.append(i)
        mask >>= 1
        i += 1
    return tuple(players)


def popcount(masks) -> np.ndarray:
    return np.bitwise_count(np.asarray(masks, dtype=MASK_DTYPE)).astype(np.int64)


@lru_cache(maxsize=None)
def _masks_of_size(n: int, s: int) -> np.ndarray:
    masks = [sum(1 << i for i in combo) for combo in itertools.combinations(range(n), s)]
    arr = np.array(sorted(masks), dtype=MASK_DTYPE)
    arr.setflags(write=False)
    return arr


def masks_of_size(n: int, s: int) -> np.ndarray:
    """All masks with exactly ``s`` of ``n`` bits set, ascending."""
    if s < 0 or s > n:
        return np.zeros(0, dtype=MASK_DTYPE)
    return _masks_of_size(n, s)


def all_masks(n: int, force: bool = False) -> np.ndarray:
    _check_exhaustive(n, force)
    return np.arange(1 << n, dtype=MASK_DTYPE)


def _check_exhaustive(n: int, force: bool, limit: int = EXHAUSTIVE_LIMIT):
    if n > MAX_PLAYERS:
        raise ValueError(f"at most {MAX_PLAYERS} players are supported")
    if n > limit and not force:
        raise ValueError(f"refusing to enumerate 2^{n} coalitions (limit n={limit}); pass force=True")


def enumerate_subsets(
    n: int,
    size_filter: Union[None, int, tuple[int, int], range] = None,
    force: bool = False,
) -> Iterator[Coalition]:
    """Yield every coalition of ``n`` players once, in ascending mask order.

    ``size_filter`` is a single size, an inclusive ``(lo, hi)`` pair or a range.
    """
    if size_filter is None:
        _check_exhaustive(n, force)
        for mask in range(1 << n):
            yield Coalition(mask, n)
        return
    if isinstance(size_filter, int):
        sizes = {size_filter}
    elif isinstance(size_filter, range):
        sizes = set(size_filter)
    else:
        lo, hi = size_filter
        sizes = set(range(lo, hi + 1))
    sizes = {s for s in sizes if 0 <= s <= n}
    total = sum(math.comb(n, s) for s in sizes)
    if total > 1 << EXHAUSTIVE_LIMIT and not force:
        raise ValueError(f"refusing to enumerate {total} coalitions; pass force=True")
    if n <= 62:
        merged = np.sort(np.concatenate([masks_of_size(n, s) for s in sizes] or [np.zeros(0, MASK_DTYPE)]))
        for mask in merged:
            yield Coalition(int(mask), n)
    else:
        merged = sorted(sum(1 << i for i in c) for s in sizes for c in itertools.combinations(range(n), s))
        for mask in merged:
            yield Coalition(mask, n)


# --- exact rational weights -------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli(m: int) -> Fraction:
    """Bernoulli number ``B_m`` with the ``B_1 = -1/2`` convention."""
    if m < 0:
        raise ValueError("Bernoulli index must be non-negative")
    if m == 0:
        return Fraction(1)
    if m > 1 and m % 2 == 1:
        return Fraction(0)
    # sum_{r=0}^{m} C(m+1, r) B_r = 0
    acc = sum((math.comb(m + 1, r) * bernoulli(r) for r in range(m)), Fraction(0))
    return -acc / (m + 1)


def bernoulli_table(m_max: int) -> list[Fraction]:
    return [bernoulli(m) for m in range(m_max + 1)]


@lru_cache(maxsize=None)
def lambda_weight(k: int, ell: int) -> Fraction:
    """Weight ``lambda(k, ell) = sum_{r=1}^{ell} C(ell, r) B_{k-r}`` of the iterative approximation."""
    if not 0 <= ell <= k:
        raise ValueError(f"need 0 <= ell <= k, got k={k}, ell={ell}")
    return sum((math.comb(ell, r) * bernoulli(k - r) for r in range(1, ell + 1)), Fraction(0))


def lambda_row(k: int) -> np.ndarray:
    """Float vector ``[lambda(k, 0), ..., lambda(k, k)]``."""
    return np.array([float(lambda_weight(k, ell)) for ell in range(k + 1)])


def kernel_weight_mu(k: int, t: int, n: int, mu_inf: float = 1e6) -> float:
    """Row weight ``mu_k(t)``: inverse binomial inside ``k <= t <= n - k``, ``mu_inf`` outside."""
    if n < 2 * k:
        warnings.warn(
            f"n={n} < 2k={2 * k}: empty finite band, every size gets mu_inf",
            RuntimeWarning,
            stacklevel=2,
        )
    if k <= t <= n - k:
        return 1.0 / math.comb(n - 2 * k, t - k)
    return float(mu_inf)


def kernel_weights(k: int, n: int, mu_inf: float = 1e6) -> np.ndarray:
    """``mu_k(t)`` for ``t = 0..n``."""
    if n < 2 * k:
        warnings.warn(
            f"n={n} < 2k={2 * k}: empty finite band, every size gets mu_inf",
            RuntimeWarning,
            stacklevel=2,
        )
    out = np.full(n + 1, float(mu_inf))
    for t in range(k, n - k + 1):
        out[t] = 1.0 / math.comb(n - 2 * k, t - k)
    return out
