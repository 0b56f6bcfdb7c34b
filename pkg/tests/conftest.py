"""Shared fixtures for the mslesion test suite."""

from __future__ import annotations

from typing import TYPE_CHECKING

import pytest
import tomli_w

from mslesion.core.engine import SegmentationEngine
from mslesion.models.config import EvalConfig, ModelConfig, RunConfig, TrainConfig
from mslesion.models.volume import MultiModalCase, PhantomSpec
from mslesion.volio.phantom import generate_phantom

if TYPE_CHECKING:
    from pathlib import Path


@pytest.fixture()
def tiny_phantom_spec() -> PhantomSpec:
    return PhantomSpec(
        dims=(16, 16, 16),
        lesion_count_range=(2, 3),
        lesion_radius_range_mm=(1.5, 3.0),
        noise_sigma=0.02,
        seed=11,
    )


@pytest.fixture()
def tiny_model_config() -> ModelConfig:
    """Smallest network that runs the full five-level pipeline on 16³ phantoms."""
    return ModelConfig(
        input_size=24,
        stem_width=4,
        width_multipliers=(1, 2, 2, 4, 4),
        stage_depths=(1, 1, 1, 1),
        seed=3,
    )


@pytest.fixture()
def tiny_train_config() -> TrainConfig:
    return TrainConfig(lr0=1e-3, batch_size=8, max_epochs=2, eval_batch_size=16, seed=5)


@pytest.fixture()
def tiny_run_config(
    tiny_model_config: ModelConfig,
    tiny_train_config: TrainConfig,
    tiny_phantom_spec: PhantomSpec,
) -> RunConfig:
    return RunConfig(
        model=tiny_model_config,
        train=tiny_train_config,
        eval=EvalConfig(),
        phantom=tiny_phantom_spec,
    )


@pytest.fixture()
def phantom_case(tiny_phantom_spec: PhantomSpec) -> MultiModalCase:
    return generate_phantom(tiny_phantom_spec)


@pytest.fixture()
def project(tmp_path: Path, tiny_run_config: RunConfig) -> Path:
    """Working directory holding a tiny ``mslesion.toml``."""
    (tmp_path / "mslesion.toml").write_text(
        tomli_w.dumps(tiny_run_config.model_dump(mode="json")), encoding="utf-8",
    )
    return tmp_path


@pytest.fixture()
def dataset(project: Path) -> Path:
    """Four tiny phantom cases with two simulated raters each; returns the manifest path."""
    engine = SegmentationEngine(project)
    return engine.make_phantoms(project / "data", 4, raters=2)

