"""Forward passes of the encoder branches, MMFF fusion, MSFU upsampling and head."""

from __future__ import annotations

from typing import TYPE_CHECKING

from mslesion.autodiff import ops
from mslesion.exceptions import ModelError, ShapeMismatchError
from mslesion.network.layout import bottleneck_names, encoder_prefix, pool_padding

if TYPE_CHECKING:
    from collections.abc import Mapping

    from mslesion.autodiff.tensor import Tensor
    from mslesion.network.params import ModelParams


def _bn(params: ModelParams, layer: str, x: Tensor, training: bool) -> Tensor:
    gamma, beta, stats = params.bn(layer)
    return ops.batchnorm2d(
        x, gamma, beta, stats,
        training=training,
        momentum=params.config.bn_momentum,
        eps=params.config.bn_eps,
    )


def _conv(
    params: ModelParams, layer: str, x: Tensor, *, stride: int = 1, padding: int = 0,
) -> Tensor:
    w, b = params.conv(layer)
    return ops.conv2d(x, w, b, stride=stride, padding=padding)


def conv_bn(
    params: ModelParams, layer: str, x: Tensor, training: bool, *,
    stride: int = 1, padding: int = 0, activate: bool = True,
) -> Tensor:
    """Encoder style: conv, batch norm, optional ReLU."""
    out = _bn(params, layer, _conv(params, layer, x, stride=stride, padding=padding), training)
    return ops.relu(out) if activate else out


def bn_conv(
    params: ModelParams, layer: str, x: Tensor, training: bool, *, padding: int = 0,
) -> Tensor:
    """Decoder style: batch norm and ReLU before the conv."""
    return _conv(params, layer, ops.relu(_bn(params, layer, x, training)), padding=padding)


def bn_upconv(params: ModelParams, layer: str, x: Tensor, training: bool) -> Tensor:
    w, b = params.conv(layer)
    return ops.conv_transpose2d(ops.relu(_bn(params, layer, x, training)), w, b, stride=2)


def bottleneck(
    params: ModelParams, name: str, x: Tensor, stride: int, training: bool,
) -> Tensor:
    out = conv_bn(params, f"{name}.conv1", x, training)
    out = conv_bn(params, f"{name}.conv2", out, training, stride=stride, padding=1)
    out = conv_bn(params, f"{name}.conv3", out, training, activate=False)
    shortcut = f"{name}.shortcut"
    if f"{shortcut}.conv.w" in params:
        skip = conv_bn(params, shortcut, x, training, stride=stride, activate=False)
    else:
        skip = x
    return ops.relu(ops.add(out, skip))


def encoder_forward(
    params: ModelParams, branch: str, x: Tensor, *, training: bool = False,
) -> list[Tensor]:
    """Run one encoder branch and return its five level outputs, finest first."""
    config = params.config
    if branch not in config.branches:
        raise ModelError(f"unknown branch {branch!r}; model has {config.branches}")
    size = config.input_size
    expected = (config.branch_channels, size, size)
    if x.data.ndim != 4 or x.shape[1:] != expected:
        raise ShapeMismatchError(f"branch {branch} expects N×{expected} input, got {x.shape}")

    prefix = encoder_prefix(config, branch)
    h = conv_bn(params, f"{prefix}.stem", x, training, stride=2, padding=3)
    levels = [h]
    h = ops.maxpool2d(h, kernel=3, stride=2, padding=pool_padding(h.shape[2]))
    for level in range(2, 6):
        for block in range(config.stage_depths[level - 2]):
            stride = 2 if level > 2 and block == 0 else 1
            h = bottleneck(params, bottleneck_names(prefix, level, block), h, stride, training)
        levels.append(h)
    return levels


def mmff_forward(
    params: ModelParams, level: int, features: Mapping[str, Tensor], *, training: bool = False,
) -> Tensor:
    """Fuse same-level branch features: per branch halve (1×1), adapt (3×3), then concat."""
    if not 1 <= level <= 5:
        raise ModelError(f"level must be in 1..5, got {level}")
    branches = params.config.branches
    if set(features) != set(branches):
        raise ModelError(f"MMFF expects features for {branches}, got {sorted(features)}")
    shapes = {features[b].shape for b in branches}
    if len(shapes) != 1:
        raise ShapeMismatchError(
            f"MMFF level {level} features disagree in shape: {sorted(shapes)}"
        )

    outs = []
    for branch in branches:
        name = f"mmff{level}.{branch}"
        h = bn_conv(params, f"{name}.reduce", features[branch], training)
        outs.append(bn_conv(params, f"{name}.adapt", h, training, padding=1))
    return outs[0] if len(outs) == 1 else ops.concat_channels(outs)


def msfu_forward(
    params: ModelParams, level: int, low: Tensor, high: Tensor, *, training: bool = False,
) -> Tensor:
    """Upsample ``low`` to ``high``'s grid and fuse them into the level-``level`` decoder map."""
    if not 1 <= level <= 4:
        raise ModelError(f"MSFU level must be in 1..4, got {level}")
    hh, hw = high.shape[2], high.shape[3]
    if not (low.shape[2] < hh and low.shape[3] < hw):
        raise ModelError(f"MSFU low map {low.shape[2:]} is not coarser than high map {(hh, hw)}")

    name = f"msfu{level}"
    h = bn_conv(params, f"{name}.reduce", low, training)
    h = ops.fit_spatial(bn_upconv(params, f"{name}.up", h, training), hh, hw)
    h = bn_conv(params, f"{name}.fuse", ops.concat_channels([h, high]), training)
    return bn_conv(params, f"{name}.adapt", h, training, padding=1)


def head_forward(params: ModelParams, x: Tensor, *, training: bool = False) -> Tensor:
    """Restore the S×S grid from level-1 resolution and emit two-class probabilities."""
    size = params.config.input_size
    h = ops.fit_spatial(bn_upconv(params, "head.up", x, training), size, size)
    logits = bn_conv(params, "head.out", h, training, padding=1)
    return ops.softmax_channels(logits)
