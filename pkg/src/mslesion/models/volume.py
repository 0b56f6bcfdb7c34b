"""Volume, case and phantom models."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mslesion.models.enums import ElementKind

Spacing = tuple[float, float, float]
Dims = tuple[int, int, int]


class Volume3D(BaseModel):
    """Dense 3D scalar grid indexed ``[x, y, z]`` with spacing in millimetres.

    Only float32 and uint8 element kinds are allowed. The voxel array is
    copied and frozen on construction.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    voxels: np.ndarray
    spacing: Spacing = (1.0, 1.0, 1.0)

    @field_validator("voxels")
    @classmethod
    def _check_voxels(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 3 or min(v.shape) < 1:
            raise ValueError(f"voxels must be a non-empty 3D array, got shape {v.shape}")
        if v.dtype not in (np.float32, np.uint8):
            raise ValueError(f"unsupported voxel dtype {v.dtype}; use float32 or uint8")
        arr = np.array(v, copy=True)
        arr.setflags(write=False)
        return arr

    @field_validator("spacing")
    @classmethod
    def _check_spacing(cls, v: Spacing) -> Spacing:
        if any(s <= 0 for s in v):
            raise ValueError(f"spacing must be strictly positive, got {v}")
        return (float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def from_array(cls, data: np.ndarray, spacing: Spacing = (1.0, 1.0, 1.0)) -> Volume3D:
        """Build a volume, mapping bool/integer data to uint8 and floats to float32."""
        arr = np.asarray(data)
        if arr.dtype == np.bool_ or np.issubdtype(arr.dtype, np.integer):
            arr = arr.astype(np.uint8)
        else:
            arr = arr.astype(np.float32)
        return cls(voxels=arr, spacing=spacing)

    @property
    def dims(self) -> Dims:
        nx, ny, nz = self.voxels.shape
        return (int(nx), int(ny), int(nz))

    @property
    def kind(self) -> ElementKind:
        return ElementKind.UINT8 if self.voxels.dtype == np.uint8 else ElementKind.FLOAT32

    @property
    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz

    @property
    def is_binary(self) -> bool:
        """True for uint8 volumes holding only 0/1."""
        return self.kind is ElementKind.UINT8 and bool(np.all(self.voxels <= 1))

    def mask(self) -> np.ndarray:
        """Boolean view of a mask volume."""
        return self.voxels.astype(bool)

    def same_grid(self, other: Volume3D) -> bool:
        return self.dims == other.dims and self.spacing == other.spacing


class MultiModalCase(BaseModel):
    """One subject: named modality volumes plus an optional binary truth mask."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    case_id: str
    modalities: dict[str, Volume3D]
    truth: Volume3D | None = None

    @model_validator(mode="after")
    def _check_grid(self) -> MultiModalCase:
        if not self.modalities:
            raise ValueError("a case needs at least one modality")
        members = list(self.modalities.values())
        if self.truth is not None:
            members.append(self.truth)
            if not self.truth.is_binary:
                raise ValueError(f"truth of case {self.case_id!r} is not a binary uint8 mask")
        ref = members[0]
        for vol in members[1:]:
            if not vol.same_grid(ref):
                raise ValueError(f"case {self.case_id!r} mixes volume dims or spacings")
        return self

    @property
    def dims(self) -> Dims:
        return next(iter(self.modalities.values())).dims

    @property
    def spacing(self) -> Spacing:
        return next(iter(self.modalities.values())).spacing


class PhantomSpec(BaseModel):
    """Parameters of a synthetic multi-modal phantom."""

    model_config = ConfigDict(frozen=True)

    dims: Dims = (64, 64, 64)
    spacing: Spacing = (1.0, 1.0, 1.0)
    lesion_count_range: tuple[int, int] = (3, 6)
    lesion_radius_range_mm: tuple[float, float] = (2.0, 6.0)
    noise_sigma: float = Field(default=0.05, ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_ranges(self) -> PhantomSpec:
        if min(self.dims) < 16:
            raise ValueError(f"phantom dims must be >= 16 per axis, got {self.dims}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be strictly positive")
        lo, hi = self.lesion_count_range
        if lo < 0 or hi < lo:
            raise ValueError(f"invalid lesion_count_range {self.lesion_count_range}")
        rlo, rhi = self.lesion_radius_range_mm
        if rlo <= 0 or rhi < rlo:
            raise ValueError(f"invalid lesion_radius_range_mm {self.lesion_radius_range_mm}")
        return self
