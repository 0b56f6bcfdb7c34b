"""Step-decay learning-rate schedule."""

from __future__ import annotations

from decimal import Decimal

from mslesion.models.config import TrainConfig


def lr_at(step: int, cfg: TrainConfig | None = None) -> float:
    """``lr0 · decay ** floor(step / decay_steps)``.

    Evaluated in decimal so that e.g. 1e-4 · 0.95² is exactly 9.025e-05.
    """
    cfg = cfg or TrainConfig()
    if step < 0:
        raise ValueError(f"step must be non-negative, got {step}")
    k = step // cfg.decay_steps
    return float(Decimal(repr(cfg.lr0)) * Decimal(repr(cfg.decay)) ** k)
