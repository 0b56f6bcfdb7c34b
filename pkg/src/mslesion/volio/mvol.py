"""MVOL codec: one ASCII header line followed by a raw little-endian payload.

Header: ``MVOL1 nx ny nz sx sy sz kind\\n`` with kind in {f32, u8}. The payload
is row-major with x varying fastest, no padding, no compression.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from mslesion.constants import MVOL_MAGIC
from mslesion.exceptions import (
    DimsMismatchError,
    InvariantViolationError,
    MalformedHeaderError,
    UnsupportedElementKindError,
    VolumeError,
)
from mslesion.models.enums import ElementKind
from mslesion.models.volume import Volume3D

if TYPE_CHECKING:
    from pathlib import Path

MAX_HEADER_BYTES = 256


def encode_volume(v: Volume3D) -> bytes:
    """Serialise a volume to MVOL bytes."""
    if v.kind is ElementKind.UINT8 and not v.is_binary:
        raise InvariantViolationError("uint8 mask volumes may only contain 0 and 1")
    nx, ny, nz = v.dims
    sx, sy, sz = v.spacing
    header = f"{MVOL_MAGIC} {nx} {ny} {nz} {sx!r} {sy!r} {sz!r} {v.kind.value}\n"
    payload = np.asarray(v.voxels, dtype=v.kind.dtype).tobytes(order="F")
    return header.encode("ascii") + payload


def decode_volume(data: bytes) -> Volume3D:
    """Parse MVOL bytes into a volume."""
    newline = data.find(b"\n", 0, MAX_HEADER_BYTES)
    if newline < 0:
        raise MalformedHeaderError("MVOL header line missing or too long")
    try:
        tokens = data[:newline].decode("ascii").split(" ")
    except UnicodeDecodeError as exc:
        raise MalformedHeaderError("MVOL header is not ASCII") from exc
    if len(tokens) != 8 or tokens[0] != MVOL_MAGIC:
        raise MalformedHeaderError(f"expected '{MVOL_MAGIC} nx ny nz sx sy sz kind'")
    try:
        dims = tuple(int(t) for t in tokens[1:4])
        spacing = tuple(float(t) for t in tokens[4:7])
    except ValueError as exc:
        raise MalformedHeaderError(f"non-numeric header field: {exc}") from exc
    if min(dims) < 1 or not all(math.isfinite(s) and s > 0 for s in spacing):
        raise MalformedHeaderError(f"invalid dims {dims} or spacing {spacing}")
    try:
        kind = ElementKind(tokens[7])
    except ValueError:
        raise UnsupportedElementKindError(f"unsupported element kind {tokens[7]!r}") from None

    payload = data[newline + 1:]
    count = dims[0] * dims[1] * dims[2]
    if len(payload) != count * kind.itemsize:
        raise DimsMismatchError(
            f"header declares {count} elements of {kind.value}, "
            f"payload holds {len(payload) / kind.itemsize:g}"
        )
    flat = np.frombuffer(payload, dtype=kind.dtype)
    voxels = flat.reshape(dims, order="F").astype(flat.dtype.newbyteorder("="))
    if kind is ElementKind.UINT8 and np.any(voxels > 1):
        raise InvariantViolationError("uint8 mask payload contains values other than 0/1")
    return Volume3D(voxels=voxels, spacing=(spacing[0], spacing[1], spacing[2]))


def write_volume(v: Volume3D, path: Path) -> None:
    """Write a volume as an MVOL file."""
    data = encode_volume(v)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise VolumeError(f"cannot write {path}: {exc}") from exc


def read_volume(path: Path) -> Volume3D:
    """Read an MVOL file."""
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise VolumeError(f"cannot read {path}: {exc}") from exc
    return decode_volume(data)
