"""Result and report models."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from mslesion.models.volume import Volume3D

METRIC_COLUMNS: tuple[str, ...] = ("dsc", "ppv", "ltpr", "lfpr", "vd", "sd_mm", "hd_mm")


class LesionComponent(BaseModel):
    """One connected lesion of a mask."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: int
    voxels: np.ndarray  # (n, 3) integer voxel indices
    volume_mm3: float

    @property
    def size(self) -> int:
        return int(self.voxels.shape[0])


class StapleResult(BaseModel):
    """Consensus and per-rater performance estimated by STAPLE."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    consensus: Volume3D
    sensitivity: list[float]
    specificity: list[float]
    iterations: int
    converged: bool
    degenerate: bool = False


class CaseMetrics(BaseModel):
    """All evaluation metrics of one segmentation against one reference."""

    case_id: str
    rater: str = "truth"
    dsc: float
    ppv: float | None = None
    ltpr: float | None = None
    lfpr: float | None = None
    vd: float | None = None
    sd_mm: float | None = None
    hd_mm: float | None = None
    seg_volume_mm3: float = 0.0
    ref_volume_mm3: float = 0.0


class MetricsReport(BaseModel):
    """Per-case metrics plus aggregate means (missing values ignored)."""

    cases: list[CaseMetrics] = Field(default_factory=list)
    means: dict[str, float | None] = Field(default_factory=dict)
    sc: float | None = None
    notes: list[str] = Field(default_factory=list)


class EpochRecord(BaseModel):
    epoch: int
    step: int
    lr: float
    loss: float


class ValidationRecord(BaseModel):
    epoch: int
    dsc: float


class TrainReport(BaseModel):
    """Training curve and best-epoch selection of one run."""

    epochs: list[EpochRecord] = Field(default_factory=list)
    validation: list[ValidationRecord] = Field(default_factory=list)
    best_epoch: int | None = None
    best_dsc: float | None = None
    checkpoint: str | None = None
    train_slices: int = 0


class AblationRow(BaseModel):
    """One row of the modality-ablation table."""

    variant: str
    kind: str
    modalities: list[str]
    means: dict[str, float | None]
    best_epoch: int | None = None


class LesionRegression(BaseModel):
    """Least-squares fit of segmented against reference lesion volumes."""

    slope: float
    intercept: float
    pearson_r: float
    pairs: list[tuple[float, float]]  # (reference mm³, segmented mm³)
