"""Read/write the YAML dataset manifest and load the cases it lists."""

from __future__ import annotations

from typing import TYPE_CHECKING

import yaml
from pydantic import ValidationError

from mslesion.constants import MVOL_SUFFIX, TRUTH_NAME
from mslesion.exceptions import ManifestError, VolumeError
from mslesion.models.manifest import CaseEntry, DatasetManifest
from mslesion.models.volume import MultiModalCase
from mslesion.volio.mvol import read_volume, write_volume

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from mslesion.models.volume import Volume3D


def read_manifest(path: Path) -> DatasetManifest:
    if not path.exists():
        raise ManifestError(f"Dataset manifest not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        return DatasetManifest.model_validate(data)
    except (yaml.YAMLError, ValidationError) as exc:
        raise ManifestError(f"Invalid dataset manifest {path}: {exc}") from exc


def write_manifest(path: Path, manifest: DatasetManifest) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        yaml.safe_dump(manifest.model_dump(), default_flow_style=False, sort_keys=False),
        encoding="utf-8",
    )
    return path


def _entry(manifest: DatasetManifest, case_id: str) -> CaseEntry:
    try:
        return manifest.cases[case_id]
    except KeyError:
        raise ManifestError(f"Case {case_id!r} is not in the dataset manifest") from None


def _read(root: Path, relative: str) -> Volume3D:
    try:
        return read_volume(root / relative)
    except VolumeError as exc:
        raise ManifestError(f"Cannot read {relative}: {exc}") from exc


def load_case(
    manifest_path: Path,
    manifest: DatasetManifest,
    case_id: str,
    modalities: Sequence[str] | None = None,
) -> MultiModalCase:
    """Read the modality volumes (optionally a subset) and truth of one case."""
    entry = _entry(manifest, case_id)
    root = manifest_path.parent
    names = list(modalities) if modalities is not None else list(entry.modalities)
    missing = [m for m in names if m not in entry.modalities]
    if missing:
        raise ManifestError(f"Case {case_id!r} has no modality {missing}")
    volumes = {name: _read(root, entry.modalities[name]) for name in names}
    truth = _read(root, entry.truth) if entry.truth else None
    try:
        return MultiModalCase(case_id=case_id, modalities=volumes, truth=truth)
    except ValidationError as exc:
        raise ManifestError(f"Case {case_id!r} is inconsistent: {exc}") from exc


def load_references(
    manifest_path: Path, manifest: DatasetManifest, case_id: str,
) -> dict[str, Volume3D]:
    """Rater masks (``rater1``, ``rater2``, ...) of a case, or its truth when none are listed."""
    entry = _entry(manifest, case_id)
    root = manifest_path.parent
    if entry.raters:
        return {f"rater{i}": _read(root, rel) for i, rel in enumerate(entry.raters, start=1)}
    if entry.truth:
        return {TRUTH_NAME: _read(root, entry.truth)}
    raise ManifestError(f"Case {case_id!r} has neither truth nor rater masks")


def write_case(
    root: Path, case: MultiModalCase, raters: Sequence[Volume3D] = (),
) -> CaseEntry:
    """Write a case under ``root/<case_id>/`` and return its manifest entry."""
    case_dir = root / case.case_id
    modalities = {}
    for name, vol in case.modalities.items():
        write_volume(vol, case_dir / f"{name}{MVOL_SUFFIX}")
        modalities[name] = f"{case.case_id}/{name}{MVOL_SUFFIX}"
    truth = None
    if case.truth is not None:
        write_volume(case.truth, case_dir / f"{TRUTH_NAME}{MVOL_SUFFIX}")
        truth = f"{case.case_id}/{TRUTH_NAME}{MVOL_SUFFIX}"
    rater_paths = []
    for i, mask in enumerate(raters, start=1):
        write_volume(mask, case_dir / f"rater{i}{MVOL_SUFFIX}")
        rater_paths.append(f"{case.case_id}/rater{i}{MVOL_SUFFIX}")
    return CaseEntry(modalities=modalities, truth=truth, raters=rater_paths)
