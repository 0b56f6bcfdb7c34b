"""Minimal dense tensor engine with reverse-mode differentiation."""

from mslesion.autodiff.ops import (
    add,
    batchnorm2d,
    concat_channels,
    conv2d,
    conv_transpose2d,
    fit_spatial,
    maxpool2d,
    mul,
    relu,
    softmax_channels,
    sum_all,
    take_channels,
)
from mslesion.autodiff.optim import AdamState, adam_step
from mslesion.autodiff.tensor import RunningStats, Tape, Tensor, backward, gradients, record_op

__all__ = [
    "AdamState",
    "RunningStats",
    "Tape",
    "Tensor",
    "adam_step",
    "add",
    "backward",
    "batchnorm2d",
    "concat_channels",
    "conv2d",
    "conv_transpose2d",
    "fit_spatial",
    "gradients",
    "maxpool2d",
    "mul",
    "record_op",
    "relu",
    "softmax_channels",
    "sum_all",
    "take_channels",
]
