"""Parameter checkpoints.

Layout: ``MCKPT1 <manifest-bytes>\\n``, a JSON manifest listing ``(name, shape)``
entries in payload order, then the concatenated little-endian float32 arrays.
Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import os
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ValidationError

from mslesion.constants import CKPT_MAGIC
from mslesion.exceptions import CheckpointError

if TYPE_CHECKING:
    from collections.abc import Mapping
    from pathlib import Path


class CheckpointEntry(BaseModel):
    name: str
    shape: list[int]


class CheckpointManifest(BaseModel):
    entries: list[CheckpointEntry]


def encode_checkpoint(arrays: Mapping[str, np.ndarray]) -> bytes:
    manifest = CheckpointManifest(entries=[
        CheckpointEntry(name=name, shape=list(arr.shape)) for name, arr in arrays.items()
    ])
    body = manifest.model_dump_json().encode("utf-8")
    payload = b"".join(np.asarray(a, dtype="<f4").tobytes(order="C") for a in arrays.values())
    return f"{CKPT_MAGIC} {len(body)}\n".encode("ascii") + body + payload


def decode_checkpoint(data: bytes) -> dict[str, np.ndarray]:
    newline = data.find(b"\n")
    header = data[:newline].decode("ascii", errors="replace").split(" ") if newline > 0 else []
    if len(header) != 2 or header[0] != CKPT_MAGIC or not header[1].isdigit():
        raise CheckpointError("not an MCKPT1 checkpoint")
    start = newline + 1
    end = start + int(header[1])
    try:
        manifest = CheckpointManifest.model_validate_json(data[start:end])
    except ValidationError as exc:
        raise CheckpointError(f"corrupted checkpoint manifest: {exc}") from exc

    arrays: dict[str, np.ndarray] = {}
    offset = end
    for entry in manifest.entries:
        count = int(np.prod(entry.shape, dtype=np.int64))
        chunk = data[offset:offset + 4 * count]
        if len(chunk) != 4 * count:
            raise CheckpointError(f"checkpoint payload truncated at {entry.name}")
        arrays[entry.name] = np.frombuffer(chunk, dtype="<f4").astype(np.float32).reshape(
            entry.shape
        )
        offset += 4 * count
    if offset != len(data):
        raise CheckpointError("checkpoint has trailing bytes after the last entry")
    return arrays


def save_checkpoint(path: Path, arrays: Mapping[str, np.ndarray]) -> Path:
    """Atomically write named arrays to ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode_checkpoint(arrays))
    os.replace(tmp, path)
    return path


def load_checkpoint(path: Path) -> dict[str, np.ndarray]:
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    return decode_checkpoint(path.read_bytes())
