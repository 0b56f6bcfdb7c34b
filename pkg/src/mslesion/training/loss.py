"""Soft Dice loss."""

from __future__ import annotations

import numpy as np

from mslesion.autodiff.tensor import Tensor, record_op
from mslesion.exceptions import ShapeMismatchError


def dice_loss(p: Tensor, g: Tensor | np.ndarray) -> Tensor:
    """``1 - 2·Σ g·p / (Σ g² + Σ p²)``, summed over the whole batch.

    Defined as 0 when both sums vanish (empty prediction of an empty target).
    """
    target = g.data if isinstance(g, Tensor) else np.asarray(g)
    if target.shape != p.shape:
        raise ShapeMismatchError(f"dice_loss shapes differ: {p.shape} vs {target.shape}")
    target = target.astype(p.dtype, copy=False)

    inter = float((target * p.data).sum())
    union = float((target * target).sum() + (p.data * p.data).sum())
    loss = 0.0 if union == 0.0 else 1.0 - 2.0 * inter / union

    def backward_fn(grad: np.ndarray) -> tuple[np.ndarray]:
        if union == 0.0:
            return (np.zeros_like(p.data),)
        dp = -2.0 * (target * union - inter * 2.0 * p.data) / (union * union)
        return ((grad * dp).astype(p.dtype),)

    return record_op(np.asarray(loss, dtype=p.dtype), (p,), backward_fn)
