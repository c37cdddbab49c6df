"""Cooperative games: the value-oracle interface, SOUMs, lookup tables and centering."""
from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .combinatorics import MASK_DTYPE, Coalition, CoalitionLike, all_masks, as_mask, mask_to_players, popcount

_BITMAP_LIMIT = 24


class Game:
    """Value oracle ``nu: P(N) -> R`` over ``n`` players.

    Subclasses implement ``_evaluate`` on an array of masks. Calling the game
    charges the evaluation counter once per distinct coalition ever requested;
    repeated requests for a coalition are free.
    """

    def __init__(self, n: int):
        if not 1 <= n <= 64:
            raise ValueError(f"player count must lie in [1, 64], got {n}")
        self.n = n
        self._lock = threading.Lock()
        self._count = 0
        self._seen_bitmap = np.zeros(1 << n, dtype=bool) if n <= _BITMAP_LIMIT else None
        self._seen_set: set[int] = set()

    def _evaluate(self, masks: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def eval_counter(self) -> int:
        return self._count

    def reset_counter(self):
        with self._lock:
            self._count = 0
            if self._seen_bitmap is not None:
                self._seen_bitmap[:] = False
            self._seen_set.clear()

    def _charge(self, masks: np.ndarray):
        with self._lock:
            if self._seen_bitmap is not None:
                idx = masks.astype(np.int64)
                fresh = np.unique(idx[~self._seen_bitmap[idx]])
                self._seen_bitmap[fresh] = True
                self._count += len(fresh)
            else:
                for m in np.unique(masks):
                    m = int(m)
                    if m not in self._seen_set:
                        self._seen_set.add(m)
                        self._count += 1

    def __call__(self, masks) -> np.ndarray:
        masks = np.atleast_1d(np.asarray(masks, dtype=MASK_DTYPE))
        if masks.size and int(masks.max()) >> self.n:
            raise ValueError(f"mask outside of {self.n} players")
        self._charge(masks)
        return np.asarray(self._evaluate(masks), dtype=float)

    def value(self, coalition: CoalitionLike) -> float:
        return float(self(np.array([as_mask(coalition, self.n)], dtype=MASK_DTYPE))[0])

    def all_values(self, force: bool = False) -> np.ndarray:
        """Values of all ``2^n`` coalitions indexed by mask."""
        if self.n > 20 and not force:
            raise ValueError(f"refusing 2^{self.n} evaluations (limit n=20); pass force=True")
        return self(all_masks(self.n, force=force))


class FunctionGame(Game):
    """Wraps a scalar callable ``fn(mask) -> float``."""

    def __init__(self, n: int, fn: Callable[[int], float]):
        super().__init__(n)
        self.fn = fn

    def _evaluate(self, masks):
        return np.array([self.fn(int(m)) for m in masks], dtype=float)


class SoumGame(Game):
    """Sum of unanimity models ``nu(T) = sum_m a_m * 1[R_m subset of T]``."""

    def __init__(self, n: int, terms: Sequence[tuple[CoalitionLike, float]]):
        super().__init__(n)
        subsets, coefs = [], []
        for subset, coef in terms:
            mask = as_mask(subset, n)
            if mask == 0:
                raise ValueError("unanimity terms need a nonempty subset")
            if mask >> n:
                raise ValueError(f"term subset outside of {n} players")
            subsets.append(mask)
            coefs.append(float(coef))
        self.subsets = np.array(subsets, dtype=MASK_DTYPE)
        self.coefficients = np.array(coefs, dtype=float)
        self.dummy_players: tuple[int, ...] = ()

    @property
    def terms(self) -> list[tuple[Coalition, float]]:
        return [(Coalition(int(m), self.n), float(a)) for m, a in zip(self.subsets, self.coefficients)]

    def _evaluate(self, masks):
        out = np.zeros(len(masks))
        # chunk to bound the (coalitions x terms) temporary
        step = max(1, 2**22 // max(1, len(self.subsets)))
        for lo in range(0, len(masks), step):
            block = masks[lo:lo + step, None]
            hit = (block & self.subsets[None, :]) == self.subsets[None, :]
            out[lo:lo + step] = hit @ self.coefficients
        return out

    def exact_sii(self, max_order: int):
        """Closed-form SII of all interactions up to ``max_order``; no evaluations charged."""
        return soum_exact_sii(self, max_order)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"subset": list(mask_to_players(int(m))), "coefficient": float(a)}
                for m, a in zip(self.subsets, self.coefficients)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SoumGame":
        try:
            n = int(data["n"])
            terms = [(tuple(t["subset"]), float(t["coefficient"])) for t in data["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed SOUM description: {exc}") from exc
        return cls(n, terms)


def soum_evaluate(game: SoumGame, coalition: CoalitionLike) -> float:
    return float(game._evaluate(np.array([as_mask(coalition, game.n)], dtype=MASK_DTYPE))[0])


def soum_exact_sii(game: SoumGame, max_order: int):
    """SII of a SOUM: ``sum_m a_m * 1[S subset of R_m] / (|R_m| - |S| + 1)``."""
    from .values import InteractionValues
    from .combinatorics import masks_of_size

    if not 1 <= max_order <= game.n:
        raise ValueError(f"order must lie in 1..{game.n}")
    sizes = popcount(game.subsets)
    entries = {}
    for s in range(1, max_order + 1):
        cols = masks_of_size(game.n, s)
        for lo in range(0, len(cols), 4096):
            block = cols[lo:lo + 4096, None]
            inside = (block & game.subsets[None, :]) == block
            vals = (inside * (game.coefficients / np.maximum(sizes - s + 1, 1))[None, :]).sum(axis=1)
            entries.update(zip(block[:, 0].tolist(), vals.tolist()))
    return InteractionValues(game.n, max_order, "SII", entries)


def generate_soum(
    n: int,
    m_terms: int = 50,
    max_interaction_size: Optional[int] = 4,
    n_dummy: int = 0,
    seed: Optional[int] = None,
) -> SoumGame:
    """Random SOUM with uniform ``[0, 1]`` coefficients.

    Term sizes are uniform over ``1..max_interaction_size`` (``None`` means all
    non-dummy players) and members are uniform given the size. ``n_dummy``
    randomly chosen players never enter a term.
    """
    if m_terms < 1:
        raise ValueError("need at least one term")
    if not 0 <= n_dummy < n:
        raise ValueError(f"need 0 <= n_dummy < n, got n_dummy={n_dummy}, n={n}")
    informative = n - n_dummy
    if max_interaction_size is None:
        max_interaction_size = informative
    if not 1 <= max_interaction_size <= informative:
        raise ValueError(
            f"max_interaction_size={max_interaction_size} infeasible with {informative} informative players"
        )
    rng = np.random.default_rng(seed)
    players = rng.permutation(n)
    pool = np.sort(players[n_dummy:])
    sizes = rng.integers(1, max_interaction_size + 1, size=m_terms)
    coefs = rng.uniform(0.0, 1.0, size=m_terms)
    terms = []
    for size, coef in zip(sizes, coefs):
        members = rng.choice(pool, size=int(size), replace=False)
        terms.append((int(sum(1 << int(i) for i in members)), float(coef)))
    game = SoumGame(n, terms)
    game.dummy_players = tuple(sorted(int(i) + 1 for i in players[:n_dummy]))
    return game


class LookupGame(Game):
    """Game backed by a table of all ``2^n`` values indexed by mask."""

    def __init__(self, n: int, values: Iterable[float]):
        super().__init__(n)
        values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        if values.ndim != 1 or len(values) != 1 << n:
            raise ValueError(f"lookup table needs exactly 2^{n} = {1 << n} values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("lookup table contains non-finite values")
        self.values = values
        self.values.setflags(write=False)

    def _evaluate(self, masks):
        return self.values[masks.astype(np.int64)]

    @classmethod
    def from_game(cls, game: Game, force: bool = False) -> "LookupGame":
        return cls(game.n, game.all_values(force=force))

    def to_dict(self) -> dict:
        return {"n": self.n, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "LookupGame":
        if not isinstance(data, dict) or "n" not in data or "values" not in data:
            raise ValueError("lookup game JSON needs keys 'n' and 'values'")
        n = data["n"]
        if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= 30:
            raise ValueError(f"invalid player count {n!r}")
        vals = data["values"]
        if not isinstance(vals, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals
        ):
            raise ValueError("'values' must be a list of numbers")
        return cls(n, np.array(vals, dtype=float))


def random_lookup_game(n: int, seed: Optional[int] = None, centered: bool = True) -> LookupGame:
    """Lookup game with i.i.d. standard normal values (``nu(empty) = 0`` if centered)."""
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(1 << n)
    if centered:
        vals[0] = 0.0
    return LookupGame(n, vals)


def store_lookup_game(game: LookupGame, path: Union[str, Path]):
    Path(path).write_text(json.dumps(game.to_dict()))


def load_lookup_game(path: Union[str, Path]) -> LookupGame:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return LookupGame.from_dict(data)


def store_soum(game: SoumGame, path: Union[str, Path]):
    Path(path).write_text(json.dumps(game.to_dict()))


def load_soum(path: Union[str, Path]) -> SoumGame:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return SoumGame.from_dict(data)


def load_game(path: Union[str, Path]) -> Game:
    """Load either JSON game format, dispatching on the ``values`` / ``terms`` key."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(data, dict) and "terms" in data:
        return SoumGame.from_dict(data)
    return LookupGame.from_dict(data)


class CenteredGame(Game):
    """``nu'(T) = nu(T) - nu(empty)``; exactly zero on the empty coalition."""

    def __init__(self, inner: Game):
        super().__init__(inner.n)
        self.inner = inner
        self.offset = float(inner(np.zeros(1, dtype=MASK_DTYPE))[0])

    def _evaluate(self, masks):
        out = self.inner(masks) - self.offset
        out[masks == 0] = 0.0
        return out


def center(game: Game) -> Game:
    """Mean-center a game. SOUMs already vanish on the empty set and are returned as-is."""
    if isinstance(game, (SoumGame, CenteredGame)):
        return game
    return CenteredGame(game)


__all__ = [
    "Game",
    "FunctionGame",
    "SoumGame",
    "LookupGame",
    "CenteredGame",
    "center",
    "soum_evaluate",
    "soum_exact_sii",
    "generate_soum",
    "random_lookup_game",
    "load_lookup_game",
    "store_lookup_game",
    "load_soum",
    "store_soum",
    "load_game",
]
