"""Slice preparation and plane-volume reassembly.

Slicing axes: axial → z, coronal → y, sagittal → x. A slice keeps the two
remaining axes in (row, col) order, e.g. an axial slice of an ``[x, y, z]``
volume is ``voxels[:, :, k]`` with rows = x and cols = y. Each slice is centred
in an S×S zero field at offset ``floor((S - d) / 2)`` per in-plane axis.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mslesion.exceptions import SliceError
from mslesion.models.enums import SlicePlane
from mslesion.models.slices import SliceSample
from mslesion.models.volume import Dims, Spacing, Volume3D

if TYPE_CHECKING:
    from collections.abc import Sequence

    from mslesion.models.volume import MultiModalCase


def pad_size(dims: Dims) -> int:
    """Side of the square every slice is padded to."""
    if min(dims) < 1:
        raise SliceError(f"dims must be positive, got {dims}")
    return max(dims)


def in_plane_shape(dims: Dims, plane: SlicePlane) -> tuple[int, int]:
    """(rows, cols) of a slice of a volume with ``dims`` along ``plane``."""
    rest = [d for axis, d in enumerate(dims) if axis != plane.axis]
    return rest[0], rest[1]


def centre_offsets(shape: tuple[int, int], size: int) -> tuple[int, int]:
    return (size - shape[0]) // 2, (size - shape[1]) // 2


def _pad(slice2d: np.ndarray, size: int, offsets: tuple[int, int], dtype: type) -> np.ndarray:
    out = np.zeros((size, size), dtype=dtype)
    r0, c0 = offsets
    out[r0:r0 + slice2d.shape[0], c0:c0 + slice2d.shape[1]] = slice2d
    return out


def extract_slices(case: MultiModalCase, plane: SlicePlane, size: int) -> list[SliceSample]:
    """Cut every slice of ``case`` along ``plane`` and zero-pad it to size×size."""
    shape = in_plane_shape(case.dims, plane)
    if size < max(shape):
        raise SliceError(f"pad size {size} is smaller than the {plane} slice shape {shape}")
    offsets = centre_offsets(shape, size)
    axis = plane.axis

    samples: list[SliceSample] = []
    for k in range(case.dims[axis]):
        inputs = {
            name: _pad(np.take(vol.voxels, k, axis=axis), size, offsets, np.float32)
            for name, vol in case.modalities.items()
        }
        target = None
        if case.truth is not None:
            target = _pad(np.take(case.truth.voxels, k, axis=axis), size, offsets, np.uint8)
        samples.append(SliceSample(
            case_id=case.case_id, plane=plane, index=k, inputs=inputs, target=target,
            crop_offsets=offsets, slice_shape=shape,
        ))
    return samples


def select_training_slices(samples: Sequence[SliceSample]) -> list[SliceSample]:
    """Keep the samples whose target contains at least one lesion pixel."""
    kept: list[SliceSample] = []
    for sample in samples:
        if sample.target is None:
            raise SliceError(
                f"sample {sample.case_id}/{sample.plane}/{sample.index} has no target"
            )
        if sample.target.any():
            kept.append(sample)
    return kept


def assemble_plane_volume(
    preds: Sequence[tuple[int, np.ndarray]],
    plane: SlicePlane,
    dims: Dims,
    size: int,
    *,
    spacing: Spacing = (1.0, 1.0, 1.0),
) -> Volume3D:
    """Un-pad per-slice predictions and stack them back along the plane axis."""
    axis = plane.axis
    shape = in_plane_shape(dims, plane)
    if size < max(shape):
        raise SliceError(f"pad size {size} is smaller than the {plane} slice shape {shape}")
    r0, c0 = centre_offsets(shape, size)

    by_index: dict[int, np.ndarray] = {}
    for index, pred in preds:
        if index in by_index:
            raise SliceError(f"duplicate prediction for {plane} index {index}")
        if pred.shape != (size, size):
            raise SliceError(f"prediction shape {pred.shape} != {(size, size)}")
        by_index[index] = pred
    missing = set(range(dims[axis])) - set(by_index)
    extra = set(by_index) - set(range(dims[axis]))
    if missing or extra:
        raise SliceError(
            f"{plane} predictions must cover indices 0..{dims[axis] - 1}; "
            f"missing {sorted(missing)[:5]}, unexpected {sorted(extra)[:5]}"
        )

    first = next(iter(by_index.values()))
    dtype = np.uint8 if first.dtype in (np.uint8, np.bool_) else np.float32
    stacked = np.stack(
        [by_index[k][r0:r0 + shape[0], c0:c0 + shape[1]] for k in range(dims[axis])],
        axis=axis,
    )
    return Volume3D(voxels=stacked.astype(dtype), spacing=spacing)
