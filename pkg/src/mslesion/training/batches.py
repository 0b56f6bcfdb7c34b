"""Epoch-wise shuffling of the pooled multi-plane slice set."""

from __future__ import annotations

from typing import TYPE_CHECKING, TypeVar

import numpy as np

from mslesion.exceptions import TrainingError

if TYPE_CHECKING:
    from collections.abc import Sequence

T = TypeVar("T")


def make_batches(
    samples: Sequence[T], batch_size: int, seed: int, epoch: int = 0,
) -> list[list[T]]:
    """Shuffle ``samples`` with a per-(seed, epoch) stream and chunk them.

    The last batch may be short. Every sample appears exactly once.
    """
    if not samples:
        raise TrainingError("cannot batch an empty sample list")
    if batch_size < 1:
        raise TrainingError(f"batch_size must be positive, got {batch_size}")
    rng = np.random.default_rng([seed, epoch])
    order = rng.permutation(len(samples))
    return [
        [samples[i] for i in order[start:start + batch_size]]
        for start in range(0, len(order), batch_size)
    ]
