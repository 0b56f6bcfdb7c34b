"""Integration tests for the mslesion CLI."""

from __future__ import annotations

from typing import TYPE_CHECKING

import pytest
from typer.testing import CliRunner

from mslesion.cli.app import app
from mslesion.storage.manifest_store import read_manifest
from mslesion.volio.mvol import read_volume

if TYPE_CHECKING:
    from pathlib import Path

runner = CliRunner()


@pytest.fixture()
def cli_project(project: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    monkeypatch.chdir(project)
    result = runner.invoke(app, ["--out", "data", "phantom", "-n", "4", "--raters", "2"])
    assert result.exit_code == 0, result.output
    return project


@pytest.mark.integration
class TestPhantomCommand:
    def test_writes_dataset(self, cli_project: Path):
        manifest = read_manifest(cli_project / "data" / "manifest.yaml")
        assert manifest.ids == ["phantom-11", "phantom-12", "phantom-13", "phantom-14"]
        assert manifest.cases["phantom-11"].raters == [
            "phantom-11/rater1.mvol", "phantom-11/rater2.mvol",
        ]

    def test_size_and_seed(self, project: Path, monkeypatch: pytest.MonkeyPatch):
        monkeypatch.chdir(project)
        result = runner.invoke(
            app, ["--seed", "3", "--out", "big", "phantom", "-n", "1", "--size", "20"],
        )
        assert result.exit_code == 0
        assert read_volume(project / "big" / "phantom-3" / "flair.mvol").dims == (20, 20, 20)

    def test_invalid_size(self, project: Path, monkeypatch: pytest.MonkeyPatch):
        monkeypatch.chdir(project)
        result = runner.invoke(app, ["--out", "x", "phantom", "--size", "8"])
        assert result.exit_code == 1


@pytest.mark.integration
class TestFuseCommand:
    def test_fuses_rater_masks(self, cli_project: Path):
        inputs = [f"data/phantom-11/rater{i}.mvol" for i in (1, 2)] + [
            "data/phantom-11/truth.mvol",
        ]
        result = runner.invoke(app, ["--fusion", "staple", "fuse", *inputs, "--output", "f.mvol"])
        assert result.exit_code == 0, result.output
        fused = read_volume(cli_project / "f.mvol")
        assert fused.is_binary
        assert fused.dims == (16, 16, 16)

    def test_mismatched_inputs(self, cli_project: Path):
        runner.invoke(app, ["--seed", "1", "--out", "other", "phantom", "-n", "1", "--size", "18"])
        result = runner.invoke(app, [
            "fuse", "data/phantom-11/truth.mvol", "other/phantom-1/truth.mvol",
            "--output", "f.mvol",
        ])
        assert result.exit_code == 1


@pytest.mark.integration
class TestEvaluateCommand:
    def test_scores_truth_against_raters(self, cli_project: Path):
        preds = cli_project / "preds"
        preds.mkdir()
        for case_id in ("phantom-11", "phantom-12"):
            truth = cli_project / "data" / case_id / "truth.mvol"
            (preds / f"{case_id}.mvol").write_bytes(truth.read_bytes())
        result = runner.invoke(app, ["--out", "ev", "evaluate", "preds", "data/manifest.yaml"])
        assert result.exit_code == 0, result.output
        tsv = (cli_project / "ev" / "reports" / "metrics.tsv").read_text().splitlines()
        assert len(tsv) == 1 + 4 + 1 + 1
        assert tsv[-1].startswith("# sc\t")
        assert (cli_project / "ev" / "run.json").exists()

    def test_missing_manifest(self, cli_project: Path):
        result = runner.invoke(app, ["evaluate", "preds", "nope.yaml"])
        assert result.exit_code == 1


@pytest.mark.integration
class TestTrainingCommands:
    def test_train_then_predict(self, cli_project: Path):
        result = runner.invoke(app, [
            "--out", "model", "train", "data/manifest.yaml",
            "--train", "phantom-11,phantom-12", "--val", "phantom-13",
        ])
        assert result.exit_code == 0, result.output
        assert (cli_project / "model" / "model.ckpt").exists()

        result = runner.invoke(app, [
            "--out", "run", "predict", "model", "data/manifest.yaml", "--cases", "phantom-14",
        ])
        assert result.exit_code == 0, result.output
        assert (cli_project / "run" / "predictions" / "phantom-14.mvol").exists()

    def test_train_with_overlapping_sets(self, cli_project: Path):
        result = runner.invoke(app, [
            "train", "data/manifest.yaml", "--train", "phantom-11", "--val", "phantom-11",
        ])
        assert result.exit_code == 1

    def test_crossval_loso_ensemble(self, cli_project: Path):
        result = runner.invoke(app, [
            "--out", "cv", "crossval", "data/manifest.yaml",
            "--protocol", "loso-ensemble", "--test", "phantom-14",
        ])
        assert result.exit_code == 0, result.output
        assert (cli_project / "cv" / "predictions" / "phantom-14.mvol").exists()
        assert (cli_project / "cv" / "reports" / "metrics.tsv").exists()

    def test_crossval_rejects_small_kfold(self, cli_project: Path):
        result = runner.invoke(app, [
            "crossval", "data/manifest.yaml", "--protocol", "nested-kfold", "-k", "3",
        ])
        assert result.exit_code == 1

    def test_ablate_rejects_bad_variant(self, cli_project: Path):
        result = runner.invoke(app, ["ablate", "data/manifest.yaml", "--variant", "XX:flair"])
        assert result.exit_code == 1
