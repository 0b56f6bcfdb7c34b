"""Three-plane inference and MPR reconstruction of one case."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict

from mslesion.constants import DEFAULT_THRESHOLD
from mslesion.core.fusion import mpr_reconstruct
from mslesion.core.slicer import assemble_plane_volume, extract_slices, pad_size
from mslesion.exceptions import SliceError
from mslesion.models.enums import FusionMethod, SlicePlane
from mslesion.models.volume import Volume3D
from mslesion.network.model import predict_lesion_probability

if TYPE_CHECKING:
    from mslesion.models.volume import MultiModalCase
    from mslesion.network.params import ModelParams


class CasePrediction(BaseModel):
    """Per-plane lesion probabilities, their mean and the fused binary mask."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    case_id: str
    plane_probs: dict[SlicePlane, Volume3D]
    mean_prob: Volume3D
    mask: Volume3D


def predict_planes(
    params: ModelParams, case: MultiModalCase, batch_size: int = 32,
) -> dict[SlicePlane, Volume3D]:
    """Lesion-probability volume assembled from each plane's slice predictions."""
    size = params.config.input_size
    if size < pad_size(case.dims):
        raise SliceError(
            f"model input size {size} is smaller than case {case.case_id} dims {case.dims}"
        )
    planes: dict[SlicePlane, Volume3D] = {}
    for plane in SlicePlane:
        samples = extract_slices(case, plane, size)
        probs = predict_lesion_probability(params, samples, batch_size)
        planes[plane] = assemble_plane_volume(
            [(s.index, p.astype(np.float32)) for s, p in zip(samples, probs, strict=True)],
            plane, case.dims, size, spacing=case.spacing,
        )
    return planes


def predict_case(
    params: ModelParams,
    case: MultiModalCase,
    method: FusionMethod = FusionMethod.MAJORITY_VOTE,
    *,
    threshold: float = DEFAULT_THRESHOLD,
    batch_size: int = 32,
) -> CasePrediction:
    planes = predict_planes(params, case, batch_size)
    mean = np.mean([planes[p].voxels for p in SlicePlane], axis=0).astype(np.float32)
    return CasePrediction(
        case_id=case.case_id,
        plane_probs=planes,
        mean_prob=Volume3D(voxels=mean, spacing=case.spacing),
        mask=mpr_reconstruct(planes, method, threshold),
    )
