"""Directory layout conventions for a run directory."""

from __future__ import annotations

import os
from typing import TYPE_CHECKING

from mslesion.constants import (
    ABLATION_TSV_FILE,
    MEMBERS_DIR,
    METRICS_JSON_FILE,
    METRICS_TSV_FILE,
    MVOL_SUFFIX,
    PREDICTIONS_DIR,
    REPORTS_DIR,
    RUN_MANIFEST_FILE,
)

if TYPE_CHECKING:
    from pathlib import Path


def get_run_manifest_path(run_dir: Path) -> Path:
    return run_dir / RUN_MANIFEST_FILE


def get_members_dir(run_dir: Path) -> Path:
    return run_dir / MEMBERS_DIR


def get_member_dir(run_dir: Path, split_name: str) -> Path:
    return get_members_dir(run_dir) / safe_name(split_name)


def get_predictions_dir(run_dir: Path) -> Path:
    return run_dir / PREDICTIONS_DIR


def get_prediction_path(run_dir: Path, case_id: str) -> Path:
    return get_predictions_dir(run_dir) / f"{safe_name(case_id)}{MVOL_SUFFIX}"


def get_reports_dir(run_dir: Path) -> Path:
    return run_dir / REPORTS_DIR


def get_metrics_tsv_path(run_dir: Path) -> Path:
    return get_reports_dir(run_dir) / METRICS_TSV_FILE


def get_metrics_json_path(run_dir: Path) -> Path:
    return get_reports_dir(run_dir) / METRICS_JSON_FILE


def get_ablation_tsv_path(run_dir: Path) -> Path:
    return get_reports_dir(run_dir) / ABLATION_TSV_FILE


def ensure_layout(run_dir: Path) -> None:
    """Create the run directory structure if it doesn't exist."""
    for path in (get_members_dir(run_dir), get_predictions_dir(run_dir), get_reports_dir(run_dir)):
        path.mkdir(parents=True, exist_ok=True)


def safe_name(name: str) -> str:
    """File-system safe rendering of a split, variant or case name."""
    return "".join(ch if ch.isalnum() or ch in "-_.+" else "_" for ch in name)


def write_text_atomic(path: Path, text: str) -> None:
    """Write ``text`` to a temporary sibling and rename it over ``path``."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
