"""Estimation-quality metrics against ground truth, per interaction order."""
from __future__ import annotations

import numpy as np

from .combinatorics import masks_of_size
from .values import InteractionValues


def _aligned(estimates: InteractionValues, ground_truth: InteractionValues, order: int):
    if estimates.n != ground_truth.n:
        raise ValueError("estimates and ground truth cover different player counts")
    try:
        return estimates.at_order(order), ground_truth.at_order(order)
    except KeyError as exc:
        raise ValueError(f"key mismatch at order {order}: {exc}") from None


def mse(estimates: InteractionValues, ground_truth: InteractionValues, order: int) -> float:
    """Mean squared error over all ``C(n, order)`` interactions."""
    est, gt = _aligned(estimates, ground_truth, order)
    return float(np.mean((est - gt) ** 2))


def top_m(values: np.ndarray, masks: np.ndarray, m: int) -> set[int]:
    """Masks of the ``m`` largest ``|value|``; ties go to the smaller mask."""
    order = np.lexsort((masks, -np.abs(values)))
    return set(masks[order[:m]].tolist())


def prec_at_10(estimates: InteractionValues, ground_truth: InteractionValues, order: int, m: int = 10) -> float:
    """Share of the true top-``m`` interactions (by absolute value) recovered by the estimate.

    With fewer than ``m`` interactions at this order all of them are compared
    and the share is taken over that count.
    """
    est, gt = _aligned(estimates, ground_truth, order)
    masks = masks_of_size(estimates.n, order)
    m = min(m, len(masks))
    if m == 0:
        return 1.0
    return len(top_m(est, masks, m) & top_m(gt, masks, m)) / m
