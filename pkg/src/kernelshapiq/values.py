"""Container for interaction scores keyed by coalition mask, with JSON I/O."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .combinatorics import MASK_DTYPE, CoalitionLike, as_mask, mask_to_players, masks_of_size

INDEX_KINDS = ("SII", "kSII", "Moebius")


@dataclass
class InteractionValues:
    """Scores for coalitions of size ``1..order``.

    ``values`` maps integer masks to floats. Lookups accept a
    :class:`~kernelshapiq.combinatorics.Coalition`, a raw mask or an iterable of
    1-based players.
    """

    n: int
    order: int
    index: str
    values: dict[int, float]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.index not in INDEX_KINDS:
            raise ValueError(f"unknown index kind {self.index!r}")
        for mask in self.values:
            size = int(mask).bit_count()
            if not 1 <= size <= self.order or mask >> self.n:
                raise ValueError(f"coalition {mask_to_players(mask)} invalid for order {self.order}, n={self.n}")

    @classmethod
    def from_orders(cls, n: int, index: str, arrays: dict[int, np.ndarray], **metadata) -> "InteractionValues":
        """Build from per-order vectors laid out in ascending mask order."""
        values = {}
        for ell, vec in arrays.items():
            masks = masks_of_size(n, ell)
            if len(vec) != len(masks):
                raise ValueError(f"order {ell}: expected {len(masks)} values, got {len(vec)}")
            values.update(zip(masks.tolist(), np.asarray(vec, dtype=float).tolist()))
        return cls(n, max(arrays), index, values, dict(metadata))

    def __getitem__(self, key: CoalitionLike) -> float:
        return self.values[as_mask(key, self.n)]

    def get(self, key: CoalitionLike, default: float = 0.0) -> float:
        return self.values.get(as_mask(key, self.n), default)

    def __len__(self) -> int:
        return len(self.values)

    def orders(self) -> list[int]:
        return sorted({m.bit_count() for m in self.values})

    def at_order(self, ell: int) -> np.ndarray:
        """Vector of order-``ell`` scores in ascending mask order; raises if incomplete."""
        masks = masks_of_size(self.n, ell)
        try:
            return np.array([self.values[m] for m in masks.tolist()], dtype=float)
        except KeyError as exc:
            raise KeyError(f"order {ell} incomplete: missing {mask_to_players(exc.args[0])}") from None

    def stacked(self, max_order: Optional[int] = None) -> np.ndarray:
        """Concatenation of ``at_order(1), ..., at_order(max_order)``."""
        max_order = self.order if max_order is None else max_order
        return np.concatenate([self.at_order(ell) for ell in range(1, max_order + 1)])

    def total(self) -> float:
        return float(np.sum(np.fromiter(self.values.values(), dtype=float)))

    def restrict(self, max_order: int) -> "InteractionValues":
        kept = {m: v for m, v in self.values.items() if m.bit_count() <= max_order}
        return InteractionValues(self.n, max_order, self.index, kept, dict(self.metadata))

    def to_dict(self) -> dict:
        entries = [
            {"subset": list(mask_to_players(m)), "value": float(v)}
            for m, v in sorted(self.values.items(), key=lambda kv: (kv[0].bit_count(), kv[0]))
        ]
        out = {"n": self.n, "order": self.order, "index": self.index, "entries": entries}
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "InteractionValues":
        try:
            n = int(data["n"])
            values = {as_mask(e["subset"], n): float(e["value"]) for e in data["entries"]}
            return cls(n, int(data["order"]), data["index"], values, dict(data.get("metadata", {})))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed interaction-values JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def save(self, path: Union[str, Path]):
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "InteractionValues":
        return cls.from_dict(json.loads(Path(path).read_text()))


def masks_up_to(n: int, k: int) -> np.ndarray:
    """Masks of sizes ``1..k``, grouped by size and ascending within each size."""
    if k < 1:
        return np.zeros(0, dtype=MASK_DTYPE)
    return np.concatenate([masks_of_size(n, ell) for ell in range(1, k + 1)])
