"""Tab-separated and JSON report emission.

Reports carry no timestamps; identical inputs give byte-identical files.
Missing metric values are written as ``NA``.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from mslesion.constants import MISSING_VALUE
from mslesion.core.hasher import hash_outputs
from mslesion.models.manifest import RunManifest
from mslesion.models.reports import METRIC_COLUMNS
from mslesion.storage.layout import get_reports_dir, get_run_manifest_path

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from mslesion.models.config import RunConfig
    from mslesion.models.reports import AblationRow, MetricsReport

CASE_COLUMNS = ("case_id", "rater", *METRIC_COLUMNS, "seg_volume_mm3", "ref_volume_mm3")
ABLATION_COLUMNS = ("variant", "kind", "modalities", *METRIC_COLUMNS, "best_epoch")


def format_value(value: float | int | str | None) -> str:
    if value is None:
        return MISSING_VALUE
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _row(values: Sequence[float | int | str | None]) -> str:
    return "\t".join(format_value(v) for v in values) + "\n"


def render_metrics_tsv(report: MetricsReport) -> str:
    """Per-case rows, a ``mean`` row, then the overall score and its notes when defined."""
    lines = ["\t".join(CASE_COLUMNS) + "\n"]
    for case in report.cases:
        lines.append(_row([getattr(case, column) for column in CASE_COLUMNS]))
    lines.append(_row(["mean", "", *(report.means.get(c) for c in METRIC_COLUMNS), None, None]))
    if report.sc is not None:
        lines.append(f"# sc\t{format_value(report.sc)}\n")
    lines.extend(f"# note\t{note}\n" for note in report.notes)
    return "".join(lines)


def render_ablation_tsv(rows: Sequence[AblationRow]) -> str:
    lines = ["\t".join(ABLATION_COLUMNS) + "\n"]
    for row in rows:
        lines.append(_row([
            row.variant, row.kind, "+".join(row.modalities),
            *(row.means.get(c) for c in METRIC_COLUMNS),
            row.best_epoch,
        ]))
    return "".join(lines)


def write_metrics_report(report: MetricsReport, tsv_path: Path, json_path: Path) -> None:
    tsv_path.parent.mkdir(parents=True, exist_ok=True)
    tsv_path.write_text(render_metrics_tsv(report), encoding="utf-8")
    json_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")


def write_ablation_report(rows: Sequence[AblationRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_ablation_tsv(rows), encoding="utf-8")


def write_run_manifest(
    run_dir: Path,
    command: str,
    config: RunConfig,
    failures: Sequence[str] = (),
) -> Path:
    """Write ``run.json``: the config snapshot plus a digest of every report file."""
    reports = get_reports_dir(run_dir)
    manifest = RunManifest(
        command=command,
        config=config.model_dump(mode="json"),
        outputs=hash_outputs(run_dir, reports.glob("*")) if reports.exists() else {},
        failures=list(failures),
    )
    path = get_run_manifest_path(run_dir)
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
