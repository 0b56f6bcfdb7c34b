"""2D slice sample model."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from mslesion.models.enums import SlicePlane


class SliceSample(BaseModel):
    """One zero-padded S×S slice of every modality (and the truth) of a case."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    case_id: str
    plane: SlicePlane
    index: int
    inputs: dict[str, np.ndarray]
    target: np.ndarray | None = None
    crop_offsets: tuple[int, int]
    slice_shape: tuple[int, int]

    @model_validator(mode="after")
    def _check(self) -> SliceSample:
        shapes = {a.shape for a in self.inputs.values()}
        if self.target is not None:
            shapes.add(self.target.shape)
        if len(shapes) != 1:
            raise ValueError(f"slice arrays disagree in shape: {sorted(shapes)}")
        (size_r, size_c), = shapes
        if size_r != size_c:
            raise ValueError(f"slices must be square, got {(size_r, size_c)}")
        r0, c0 = self.crop_offsets
        h, w = self.slice_shape
        if r0 < 0 or c0 < 0 or r0 + h > size_r or c0 + w > size_c:
            raise ValueError("crop offsets place the slice outside the padded square")
        return self

    @property
    def size(self) -> int:
        return next(iter(self.inputs.values())).shape[0]

    @property
    def has_lesion(self) -> bool:
        return self.target is not None and bool(self.target.any())
