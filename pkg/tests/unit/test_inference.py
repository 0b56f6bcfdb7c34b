"""Tests for three-plane inference."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from mslesion.core.fusion import mpr_reconstruct
from mslesion.core.inference import predict_case, predict_planes
from mslesion.exceptions import SliceError
from mslesion.models.enums import FusionMethod, SlicePlane
from mslesion.network.params import build_model
from mslesion.volio.phantom import generate_phantom

if TYPE_CHECKING:
    from mslesion.models.config import ModelConfig


class TestPredictPlanes:
    def test_one_probability_volume_per_plane(self, tiny_model_config, phantom_case):
        planes = predict_planes(build_model(tiny_model_config), phantom_case, batch_size=16)
        assert list(planes) == list(SlicePlane)
        for vol in planes.values():
            assert vol.dims == phantom_case.dims
            assert vol.voxels.dtype == np.float32
            assert 0.0 <= float(vol.voxels.min()) <= float(vol.voxels.max()) <= 1.0

    def test_input_size_too_small(self, tiny_model_config: ModelConfig, tiny_phantom_spec):
        big = generate_phantom(tiny_phantom_spec.model_copy(update={"dims": (30, 16, 16)}))
        with pytest.raises(SliceError, match="smaller than"):
            predict_planes(build_model(tiny_model_config), big)


class TestPredictCase:
    @pytest.mark.parametrize("method", list(FusionMethod))
    def test_mask_is_the_mpr_fusion(self, tiny_model_config, phantom_case, method):
        pred = predict_case(build_model(tiny_model_config), phantom_case, method, batch_size=16)
        assert pred.case_id == phantom_case.case_id
        assert pred.mask.is_binary
        expected = mpr_reconstruct(pred.plane_probs, method)
        np.testing.assert_array_equal(pred.mask.voxels, expected.voxels)

    def test_mean_probability(self, tiny_model_config, phantom_case):
        pred = predict_case(build_model(tiny_model_config), phantom_case, batch_size=16)
        stacked = np.mean([pred.plane_probs[p].voxels for p in SlicePlane], axis=0)
        np.testing.assert_allclose(pred.mean_prob.voxels, stacked, rtol=1e-6)
        assert pred.mean_prob.spacing == phantom_case.spacing
