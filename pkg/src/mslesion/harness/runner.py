"""Execute an experiment plan: train members, predict, fuse, evaluate, report."""

from __future__ import annotations

from collections import defaultdict
from typing import TYPE_CHECKING

from pydantic import BaseModel, Field

from mslesion.autodiff.checkpoint import load_checkpoint
from mslesion.constants import (
    MEMBER_DIGEST_FILE,
    MODEL_CONFIG_FILE,
    MODEL_FILE,
    TRAIN_REPORT_FILE,
)
from mslesion.core.fusion import fuse_members
from mslesion.core.hasher import hash_content
from mslesion.core.inference import CasePrediction, predict_case
from mslesion.core.metrics import aggregate, evaluate_case
from mslesion.exceptions import MemberFailedError, MslesionError
from mslesion.harness.plans import validate_plan
from mslesion.harness.reports import write_metrics_report, write_run_manifest
from mslesion.logging import get_logger
from mslesion.models.config import ModelConfig, TrainConfig
from mslesion.models.enums import FusionMethod
from mslesion.models.reports import CaseMetrics, MetricsReport, TrainReport
from mslesion.network.params import ModelParams, build_model
from mslesion.storage.layout import (
    ensure_layout,
    get_member_dir,
    get_metrics_json_path,
    get_metrics_tsv_path,
    get_prediction_path,
    write_text_atomic,
)
from mslesion.storage.manifest_store import load_case, load_references, read_manifest
from mslesion.training import trainer
from mslesion.volio.mvol import write_volume

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence
    from pathlib import Path

    from mslesion.models.config import RunConfig
    from mslesion.models.enums import Connectivity
    from mslesion.models.manifest import DatasetManifest
    from mslesion.models.plan import ExperimentPlan, Split
    from mslesion.models.volume import MultiModalCase, Volume3D

logger = get_logger(__name__)


class RunOutcome(BaseModel):
    """Fused test predictions, their metrics and any failed members."""

    report: MetricsReport
    predictions: dict[str, str] = Field(default_factory=dict)
    failures: list[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


class CaseCache:
    """Loads each case of a manifest at most once."""

    def __init__(
        self,
        manifest_path: Path,
        manifest: DatasetManifest,
        modalities: Sequence[str] | None = None,
    ) -> None:
        self.manifest_path = manifest_path
        self.manifest = manifest
        self.modalities = modalities
        self._cases: dict[str, MultiModalCase] = {}

    def get(self, case_id: str) -> MultiModalCase:
        if case_id not in self._cases:
            self._cases[case_id] = load_case(
                self.manifest_path, self.manifest, case_id, self.modalities,
            )
        return self._cases[case_id]

    def many(self, case_ids: Sequence[str]) -> list[MultiModalCase]:
        return [self.get(i) for i in case_ids]


def load_member(member_dir: Path) -> tuple[ModelParams, TrainReport] | None:
    """Parameters and report of a completed member, or None if it has not finished."""
    files = [member_dir / name for name in (MODEL_FILE, MODEL_CONFIG_FILE, TRAIN_REPORT_FILE)]
    if not all(f.exists() for f in files):
        return None
    ckpt, model_cfg, report = files
    params = build_model(ModelConfig.model_validate_json(model_cfg.read_text(encoding="utf-8")))
    params.load_arrays(load_checkpoint(ckpt))
    return params, TrainReport.model_validate_json(report.read_text(encoding="utf-8"))


class MemberRecipe(BaseModel):
    """Everything that determines a trained member."""

    model: ModelConfig
    train: TrainConfig
    fusion: FusionMethod
    train_ids: list[str]
    validation_ids: list[str]


def member_digest(split: Split, config: RunConfig) -> str:
    recipe = MemberRecipe(
        model=config.model,
        train=config.train,
        fusion=config.eval.fusion,
        train_ids=list(split.train),
        validation_ids=list(split.validation),
    )
    return hash_content(recipe.model_dump_json())


def train_member(
    split: Split,
    config: RunConfig,
    cases: CaseCache,
    member_dir: Path,
) -> tuple[ModelParams, TrainReport]:
    """Train one member, or reuse it if a previous run completed it with the same recipe.

    Any error raised while training is reported as :class:`MemberFailedError` so
    the caller can abandon just this member's fold.
    """
    digest = member_digest(split, config)
    digest_path = member_dir / MEMBER_DIGEST_FILE
    stored = digest_path.read_text(encoding="utf-8").strip() if digest_path.exists() else None
    if stored == digest:
        done = load_member(member_dir)
        if done is not None:
            logger.info("Member %s already trained; reusing its checkpoint", split.name)
            return done
    elif stored is not None or (member_dir / TRAIN_REPORT_FILE).exists():
        logger.warning("Member %s was trained with different settings; retraining", split.name)

    digest_path.unlink(missing_ok=True)
    logger.info(
        "Training member %s: %d train, %d validation subjects",
        split.name, len(split.train), len(split.validation),
    )
    try:
        result = trainer.train(
            config.model,
            cases.many(split.train),
            cases.many(split.validation),
            config.train,
            fusion=config.eval.fusion,
            out_dir=member_dir,
        )
    except MemberFailedError:
        raise
    except Exception as exc:
        raise MemberFailedError(str(exc) or type(exc).__name__) from exc
    member_dir.mkdir(parents=True, exist_ok=True)
    write_text_atomic(digest_path, digest + "\n")
    return result.params, result.report


def evaluate_masks(
    masks: Mapping[str, Volume3D],
    manifest_path: Path,
    manifest: DatasetManifest,
    connectivity: Connectivity,
) -> MetricsReport:
    """Score every predicted case against each of its references, in case-id order."""
    rows: list[CaseMetrics] = []
    for case_id in sorted(masks):
        for rater, ref in load_references(manifest_path, manifest, case_id).items():
            rows.append(evaluate_case(case_id, masks[case_id], ref, connectivity, rater=rater))
    return aggregate(rows)


def run_plan(
    plan: ExperimentPlan,
    manifest_path: Path,
    config: RunConfig,
    run_dir: Path,
    *,
    command: str = "crossval",
) -> RunOutcome:
    """Train every member of ``plan``, fuse members per outer fold and evaluate.

    A failing member abandons its own fold only; the failure is listed in the
    outcome and in ``run.json``. Completed members are reused on re-runs.
    """
    manifest = read_manifest(manifest_path)
    validate_plan(plan, manifest.ids)
    ensure_layout(run_dir)
    cases = CaseCache(manifest_path, manifest, config.model.modalities)
    threshold = config.eval.threshold

    masks: dict[str, Volume3D] = {}
    predictions: dict[str, str] = {}
    failures: list[str] = []
    for fold, splits in plan.folds().items():
        member_preds: dict[str, list[CasePrediction]] = defaultdict(list)
        try:
            for split in splits:
                params, _ = train_member(split, config, cases, get_member_dir(run_dir, split.name))
                for case_id in split.test:
                    member_preds[case_id].append(predict_case(
                        params, cases.get(case_id), plan.fusion,
                        threshold=threshold, batch_size=config.train.eval_batch_size,
                    ))
        except MslesionError as exc:
            logger.error("Fold %s abandoned: member %s failed: %s", fold, split.name, exc)
            failures.append(f"{split.name}: {exc}")
            continue

        for case_id, preds in member_preds.items():
            mask = fuse_members(
                plan.fusion,
                [p.mask for p in preds],
                [p.mean_prob for p in preds],
                threshold,
            )
            path = get_prediction_path(run_dir, case_id)
            write_volume(mask, path)
            masks[case_id] = mask
            predictions[case_id] = path.relative_to(run_dir).as_posix()

    report = evaluate_masks(masks, manifest_path, manifest, config.eval.connectivity)
    write_metrics_report(report, get_metrics_tsv_path(run_dir), get_metrics_json_path(run_dir))
    write_run_manifest(run_dir, command, config, failures)
    return RunOutcome(report=report, predictions=predictions, failures=failures)
