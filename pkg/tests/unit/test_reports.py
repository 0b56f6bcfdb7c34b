"""Tests for TSV/JSON report emission."""

from __future__ import annotations

import hashlib
import json
from typing import TYPE_CHECKING

from mslesion.harness.reports import (
    ABLATION_COLUMNS,
    CASE_COLUMNS,
    format_value,
    render_ablation_tsv,
    render_metrics_tsv,
    write_ablation_report,
    write_metrics_report,
    write_run_manifest,
)
from mslesion.models.manifest import RunManifest
from mslesion.models.reports import AblationRow, CaseMetrics, MetricsReport
from mslesion.storage.layout import get_metrics_json_path, get_metrics_tsv_path

if TYPE_CHECKING:
    from pathlib import Path

    from mslesion.models.config import RunConfig


def _report(sc: float | None = 71.25) -> MetricsReport:
    cases = [
        CaseMetrics(case_id="p1", dsc=0.5, ppv=None, vd=0.25, seg_volume_mm3=4.0,
                    ref_volume_mm3=8.0),
        CaseMetrics(case_id="p2", rater="rater1", dsc=1.0, ppv=1.0),
    ]
    means = {"dsc": 0.75, "ppv": 1.0, "ltpr": None, "lfpr": None, "vd": 0.25,
             "sd_mm": None, "hd_mm": None}
    return MetricsReport(cases=cases, means=means, sc=sc)


class TestFormatValue:
    def test_missing(self):
        assert format_value(None) == "NA"

    def test_float_has_six_decimals(self):
        assert format_value(0.5) == "0.500000"
        assert format_value(1 / 3) == "0.333333"

    def test_int_and_str(self):
        assert format_value(3) == "3"
        assert format_value("flair+t2") == "flair+t2"


class TestMetricsTsv:
    def test_rows(self):
        lines = render_metrics_tsv(_report()).splitlines()
        assert lines[0].split("\t") == list(CASE_COLUMNS)
        assert lines[1].split("\t") == [
            "p1", "truth", "0.500000", "NA", "NA", "NA", "0.250000", "NA", "NA",
            "4.000000", "8.000000",
        ]
        assert lines[2].startswith("p2\trater1\t1.000000\t1.000000\t")
        assert lines[3].split("\t")[:4] == ["mean", "", "0.750000", "1.000000"]
        assert lines[3].endswith("\tNA\tNA")
        assert lines[4] == "# sc\t71.250000"

    def test_notes_follow_the_score(self):
        report = _report().model_copy(update={"notes": ["LFPR undefined for p1/truth"]})
        lines = render_metrics_tsv(report).splitlines()
        assert lines[-2:] == ["# sc\t71.250000", "# note\tLFPR undefined for p1/truth"]

    def test_no_score_line_without_score(self):
        assert "# sc" not in render_metrics_tsv(_report(sc=None))

    def test_write_is_deterministic(self, tmp_path: Path):
        tsv, js = get_metrics_tsv_path(tmp_path), get_metrics_json_path(tmp_path)
        write_metrics_report(_report(), tsv, js)
        first = (tsv.read_bytes(), js.read_bytes())
        write_metrics_report(_report(), tsv, js)
        assert (tsv.read_bytes(), js.read_bytes()) == first
        assert MetricsReport.model_validate_json(js.read_text()) == _report()


class TestAblationTsv:
    def test_rows(self, tmp_path: Path):
        rows = [
            AblationRow(variant="MB:flair+t2", kind="MB", modalities=["flair", "t2"],
                        means={"dsc": 0.6}, best_epoch=3),
            AblationRow(variant="SB:flair", kind="SB", modalities=["flair"], means={}),
        ]
        text = render_ablation_tsv(rows)
        lines = text.splitlines()
        assert lines[0].split("\t") == list(ABLATION_COLUMNS)
        assert lines[1].split("\t")[:4] == ["MB:flair+t2", "MB", "flair+t2", "0.600000"]
        assert lines[1].endswith("\t3")
        assert lines[2].endswith("\tNA")
        path = tmp_path / "reports" / "ablation.tsv"
        write_ablation_report(rows, path)
        assert path.read_text() == text


class TestRunManifest:
    def test_hashes_report_files(self, tmp_path: Path, tiny_run_config: RunConfig):
        write_metrics_report(
            _report(), get_metrics_tsv_path(tmp_path), get_metrics_json_path(tmp_path),
        )
        path = write_run_manifest(tmp_path, "evaluate", tiny_run_config, failures=["x"])
        manifest = RunManifest.model_validate_json(path.read_text())
        assert manifest.command == "evaluate"
        assert manifest.failures == ["x"]
        assert list(manifest.outputs) == ["reports/metrics.json", "reports/metrics.tsv"]
        digest = hashlib.sha256(get_metrics_tsv_path(tmp_path).read_bytes()).hexdigest()
        assert manifest.outputs["reports/metrics.tsv"] == digest
        assert manifest.config == json.loads(tiny_run_config.model_dump_json())

    def test_without_reports(self, tmp_path: Path, tiny_run_config: RunConfig):
        path = write_run_manifest(tmp_path, "train", tiny_run_config)
        assert RunManifest.model_validate_json(path.read_text()).outputs == {}
