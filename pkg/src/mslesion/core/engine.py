"""SegmentationEngine: the orchestrator behind every CLI command."""

from __future__ import annotations

import tomllib
from typing import TYPE_CHECKING

import tomli_w
from pydantic import ValidationError

from mslesion.constants import CONFIG_FILE, MANIFEST_FILE, MVOL_SUFFIX
from mslesion.core.fusion import average_fusion, fuse_binary
from mslesion.core.inference import predict_case
from mslesion.exceptions import ConfigError, ConfigNotFoundError
from mslesion.harness.ablation import run_ablation
from mslesion.harness.plans import (
    plan_loso_ensemble,
    plan_nested_kfold,
    plan_nested_loso,
)
from mslesion.harness.reports import write_metrics_report, write_run_manifest
from mslesion.harness.runner import CaseCache, evaluate_masks, load_member, run_plan
from mslesion.logging import get_logger
from mslesion.models.config import RunConfig
from mslesion.models.enums import Connectivity, FusionMethod, Protocol
from mslesion.models.manifest import DatasetManifest
from mslesion.models.volume import PhantomSpec
from mslesion.storage.layout import (
    ensure_layout,
    get_metrics_json_path,
    get_metrics_tsv_path,
    get_prediction_path,
)
from mslesion.storage.manifest_store import read_manifest, write_case, write_manifest
from mslesion.training import trainer
from mslesion.volio.mvol import read_volume, write_volume
from mslesion.volio.phantom import generate_phantom, rater_masks

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from mslesion.harness.runner import RunOutcome
    from mslesion.models.plan import ExperimentPlan, Variant
    from mslesion.models.reports import AblationRow, MetricsReport
    from mslesion.models.volume import Volume3D
    from mslesion.training.trainer import TrainResult

logger = get_logger(__name__)


class SegmentationEngine:
    """Central orchestrator for all mslesion operations.

    ``root`` is the working directory holding ``mslesion.toml``; relative run
    and manifest paths given to the engine are resolved against it.
    """

    def __init__(
        self,
        root: Path,
        *,
        config_file: Path | None = None,
        seed: int | None = None,
        fusion: FusionMethod | None = None,
        connectivity: Connectivity | None = None,
    ) -> None:
        self.root = root.resolve()
        self.config_file = self._resolve(config_file) if config_file else self.root / CONFIG_FILE
        self._explicit_config = config_file is not None
        self.seed = seed
        self.fusion = fusion
        self.connectivity = connectivity

    def _resolve(self, path: Path) -> Path:
        return path if path.is_absolute() else self.root / path

    # -- configuration ---------------------------------------------------

    def init(self, *, overwrite: bool = False) -> RunConfig:
        """Write a default ``mslesion.toml`` and return it."""
        if self.config_file.exists() and not overwrite:
            raise ConfigError(f"Config already exists at {self.config_file}; use --force")
        config = RunConfig()
        self.config_file.parent.mkdir(parents=True, exist_ok=True)
        self.config_file.write_text(
            tomli_w.dumps(config.model_dump(mode="json")), encoding="utf-8",
        )
        return config

    def load_config(self) -> RunConfig:
        """Load and validate the TOML config file."""
        if not self.config_file.exists():
            raise ConfigNotFoundError(
                f"No mslesion config found at {self.config_file}. Run 'mslesion init' first."
            )
        with open(self.config_file, "rb") as f:
            try:
                data = tomllib.load(f)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"Malformed config {self.config_file}: {exc}") from exc
        try:
            return RunConfig.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(f"Invalid config {self.config_file}: {exc}") from exc

    def config(self) -> RunConfig:
        """Config file (defaults when absent and not given explicitly) with CLI overrides."""
        if self.config_file.exists() or self._explicit_config:
            config = self.load_config()
        else:
            logger.debug("No config at %s; using defaults", self.config_file)
            config = RunConfig()
        if self.seed is not None:
            config = config.with_seed(self.seed)
        updates = {}
        if self.fusion is not None:
            updates["fusion"] = self.fusion
        if self.connectivity is not None:
            updates["connectivity"] = self.connectivity
        if updates:
            config = config.model_copy(update={"eval": config.eval.model_copy(update=updates)})
        return config

    # -- data --------------------------------------------------------------

    def make_phantoms(
        self, out_dir: Path, count: int, *, raters: int = 0, spec: PhantomSpec | None = None,
    ) -> Path:
        """Write ``count`` phantom cases (seeds ``seed .. seed+count-1``) and their manifest."""
        if count < 1:
            raise ConfigError(f"phantom count must be positive, got {count}")
        out_dir = self._resolve(out_dir)
        base = spec or self.config().phantom
        manifest = DatasetManifest()
        for i in range(count):
            case = generate_phantom(base.model_copy(update={"seed": base.seed + i}))
            masks = rater_masks(case.truth, raters, base.seed + i) if case.truth else []
            manifest.cases[case.case_id] = write_case(out_dir, case, masks)
        path = write_manifest(out_dir / MANIFEST_FILE, manifest)
        logger.info("Wrote %d phantom cases to %s", count, out_dir)
        return path

    # -- single-model workflow ---------------------------------------------

    def train(
        self,
        manifest_path: Path,
        train_ids: Sequence[str],
        val_ids: Sequence[str],
        out_dir: Path,
    ) -> TrainResult:
        config = self.config()
        manifest_path = self._resolve(manifest_path)
        cases = CaseCache(manifest_path, read_manifest(manifest_path), config.model.modalities)
        return trainer.train(
            config.model,
            cases.many(train_ids),
            cases.many(val_ids),
            config.train,
            fusion=config.eval.fusion,
            out_dir=self._resolve(out_dir),
        )

    def predict(
        self,
        model_dir: Path,
        manifest_path: Path,
        case_ids: Sequence[str] | None,
        out_dir: Path,
    ) -> list[Path]:
        """MPR-fused masks of the listed cases (all cases if None) from a trained model."""
        config = self.config()
        member = load_member(self._resolve(model_dir))
        if member is None:
            raise ConfigError(f"No trained model in {model_dir}")
        params, _ = member
        manifest_path = self._resolve(manifest_path)
        manifest = read_manifest(manifest_path)
        cases = CaseCache(manifest_path, manifest, params.config.modalities)
        out_dir = self._resolve(out_dir)
        written = []
        for case_id in case_ids or manifest.ids:
            pred = predict_case(
                params, cases.get(case_id), config.eval.fusion,
                threshold=config.eval.threshold, batch_size=config.train.eval_batch_size,
            )
            path = get_prediction_path(out_dir, case_id)
            write_volume(pred.mask, path)
            written.append(path)
        return written

    def evaluate(self, pred_dir: Path, manifest_path: Path, out_dir: Path) -> MetricsReport:
        """Score every ``<case>.mvol`` under ``pred_dir`` whose case is in the manifest."""
        config = self.config()
        manifest_path = self._resolve(manifest_path)
        manifest = read_manifest(manifest_path)
        pred_dir = self._resolve(pred_dir)
        masks = {
            case_id: read_volume(pred_dir / f"{case_id}{MVOL_SUFFIX}")
            for case_id in manifest.ids
            if (pred_dir / f"{case_id}{MVOL_SUFFIX}").exists()
        }
        report = evaluate_masks(masks, manifest_path, manifest, config.eval.connectivity)
        out_dir = self._resolve(out_dir)
        ensure_layout(out_dir)
        write_metrics_report(report, get_metrics_tsv_path(out_dir), get_metrics_json_path(out_dir))
        write_run_manifest(out_dir, "evaluate", config)
        return report

    # -- experiments -------------------------------------------------------

    def plan(
        self,
        protocol: Protocol,
        manifest_path: Path,
        *,
        k: int = 4,
        test_ids: Sequence[str] = (),
    ) -> ExperimentPlan:
        config = self.config()
        ids = read_manifest(self._resolve(manifest_path)).ids
        fusion, seed = config.eval.fusion, config.train.seed
        if protocol is Protocol.NESTED_LOSO:
            return plan_nested_loso(ids, fusion, seed)
        if protocol is Protocol.NESTED_KFOLD:
            return plan_nested_kfold(ids, k, fusion, seed)
        train_ids = [i for i in ids if i not in set(test_ids)]
        return plan_loso_ensemble(train_ids, test_ids, fusion, seed)

    def crossval(self, plan: ExperimentPlan, manifest_path: Path, run_dir: Path) -> RunOutcome:
        """Run ``plan``; failed folds are listed in the outcome, not raised."""
        return run_plan(
            plan, self._resolve(manifest_path), self.config(), self._resolve(run_dir),
        )

    def ablate(
        self, manifest_path: Path, variants: Sequence[Variant], run_dir: Path,
    ) -> list[AblationRow]:
        return run_ablation(
            self._resolve(manifest_path), variants, self.config(), self._resolve(run_dir),
        )

    def fuse(self, inputs: Sequence[Path], out_path: Path, method: FusionMethod) -> Volume3D:
        """Fuse mask (or, for averaging, probability) volumes into one binary mask."""
        volumes = [read_volume(self._resolve(p)) for p in inputs]
        if method is FusionMethod.AVERAGING:
            fused = average_fusion(volumes, self.config().eval.threshold)
        else:
            fused = fuse_binary(volumes, method)
        write_volume(fused, self._resolve(out_path))
        return fused
