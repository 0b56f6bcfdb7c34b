"""Full network forward pass, thresholding and batched slice inference."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mslesion.autodiff import ops
from mslesion.autodiff.tensor import Tensor
from mslesion.exceptions import MissingModalityError, ShapeMismatchError
from mslesion.network.blocks import encoder_forward, head_forward, mmff_forward, msfu_forward

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from mslesion.models.slices import SliceSample
    from mslesion.network.params import ModelParams


def _as_batch(value: Tensor | np.ndarray, size: int, dtype: np.dtype) -> Tensor:
    """Accept S×S, N×S×S or N×1×S×S and return an N×1×S×S tensor."""
    data = value.data if isinstance(value, Tensor) else np.asarray(value)
    if data.ndim == 2:
        data = data[None, None]
    elif data.ndim == 3:
        data = data[:, None]
    if data.ndim != 4 or data.shape[1:] != (1, size, size):
        raise ShapeMismatchError(f"modality input must be {size}×{size}, got shape {data.shape}")
    if isinstance(value, Tensor) and value.data is data and data.dtype == dtype:
        return value
    return Tensor(np.ascontiguousarray(data, dtype=dtype))


def stack_inputs(
    params: ModelParams, inputs: Mapping[str, Tensor | np.ndarray],
) -> dict[str, Tensor]:
    """Bind inputs to branches by modality name, in configured modality order."""
    config = params.config
    missing = [m for m in config.modalities if m not in inputs]
    if missing:
        raise MissingModalityError(
            f"missing modalities {missing}; model expects {config.modalities}"
        )
    dtype = next(iter(params.tensors.values())).dtype
    batches = [_as_batch(inputs[m], config.input_size, dtype) for m in config.modalities]
    if len({b.shape[0] for b in batches}) != 1:
        raise ShapeMismatchError("modality inputs have different batch sizes")
    if config.stacked:
        return {"stacked": ops.concat_channels(batches)}
    return dict(zip(config.modalities, batches, strict=True))


def model_forward(
    params: ModelParams,
    inputs: Mapping[str, Tensor | np.ndarray],
    *,
    training: bool = False,
) -> Tensor:
    """Map per-modality S×S inputs to an N×2×S×S softmax (channel 1 = lesion)."""
    branch_inputs = stack_inputs(params, inputs)
    levels = {
        branch: encoder_forward(params, branch, x, training=training)
        for branch, x in branch_inputs.items()
    }
    fused = [
        mmff_forward(params, level, {b: feats[level - 1] for b, feats in levels.items()},
                     training=training)
        for level in range(1, 6)
    ]
    h = fused[4]
    for level in range(4, 0, -1):
        h = msfu_forward(params, level, h, fused[level - 1], training=training)
    return head_forward(params, h, training=training)


def binarize(prob: Tensor | np.ndarray, tau: float = 0.5) -> np.ndarray:
    """Threshold the lesion probability strictly above ``tau``.

    A 4-D N×2×H×W input is reduced to its lesion channel; lower-rank inputs
    are taken to be lesion probabilities already.
    """
    data = prob.data if isinstance(prob, Tensor) else np.asarray(prob)
    if data.ndim == 4:
        data = data[:, 1]
    return (data > tau).astype(np.uint8)


def predict_lesion_probability(
    params: ModelParams, samples: Sequence[SliceSample], batch_size: int = 32,
) -> list[np.ndarray]:
    """Eval-mode lesion probability (S×S) for each sample, in input order."""
    out: list[np.ndarray] = []
    for start in range(0, len(samples), batch_size):
        chunk = samples[start:start + batch_size]
        inputs = {m: np.stack([s.inputs[m] for s in chunk]) for m in params.config.modalities}
        prob = model_forward(params, inputs, training=False)
        out.extend(np.array(prob.data[i, 1]) for i in range(len(chunk)))
    return out
