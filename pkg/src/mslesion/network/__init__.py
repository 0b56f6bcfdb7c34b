"""Multi-branch encoder-decoder with MMFF fusion and MSFU upsampling."""

from mslesion.network.blocks import encoder_forward, mmff_forward, msfu_forward
from mslesion.network.model import binarize, model_forward
from mslesion.network.params import ModelParams, build_model

__all__ = [
    "ModelParams",
    "binarize",
    "build_model",
    "encoder_forward",
    "mmff_forward",
    "model_forward",
    "msfu_forward",
]
