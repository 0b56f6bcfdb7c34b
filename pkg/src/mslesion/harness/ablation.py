"""Modality ablation: SB (stacked) and MB (branched) variants on one fixed split."""

from __future__ import annotations

from typing import TYPE_CHECKING

from mslesion.core.inference import predict_case
from mslesion.exceptions import MissingModalityError, PlanError
from mslesion.harness.plans import default_split_sizes, plan_fixed_split, validate_plan
from mslesion.harness.reports import write_ablation_report, write_run_manifest
from mslesion.harness.runner import CaseCache, evaluate_masks, train_member
from mslesion.logging import get_logger
from mslesion.models.enums import VariantKind
from mslesion.models.plan import ExperimentPlan, Split
from mslesion.models.reports import AblationRow
from mslesion.storage.layout import ensure_layout, get_ablation_tsv_path, get_member_dir
from mslesion.storage.manifest_store import read_manifest

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from mslesion.models.config import ModelConfig, RunConfig
    from mslesion.models.manifest import DatasetManifest
    from mslesion.models.plan import Variant

logger = get_logger(__name__)


def variant_model_config(base: ModelConfig, variant: Variant) -> ModelConfig:
    """``base`` restricted to the variant's modalities, stacked for SB."""
    stacked = variant.kind is VariantKind.SB
    return base.model_copy(update={
        "modalities": list(variant.modalities),
        "stacked": stacked,
        "share_weights": False if stacked else base.share_weights,
    })


def _check_modalities(
    manifest: DatasetManifest, split: Split, variants: Sequence[Variant],
) -> None:
    for variant in variants:
        for case_id in sorted(split.ids):
            available = manifest.cases[case_id].modalities
            missing = [m for m in variant.modalities if m not in available]
            if missing:
                raise MissingModalityError(
                    f"variant {variant.name} needs {missing}, absent from case {case_id}"
                )


def run_ablation(
    manifest_path: Path,
    variants: Sequence[Variant],
    config: RunConfig,
    run_dir: Path,
    split: Split | None = None,
) -> list[AblationRow]:
    """Train one model per variant on the same split and tabulate its test metrics."""
    if not variants:
        raise PlanError("ablation needs at least one variant")
    manifest = read_manifest(manifest_path)
    if split is None:
        sizes = default_split_sizes(len(manifest.ids))
        split = plan_fixed_split(manifest.ids, *sizes, seed=config.train.seed).splits[0]
    validate_plan(ExperimentPlan(protocol="ablation", splits=[split]), manifest.ids)
    _check_modalities(manifest, split, variants)
    ensure_layout(run_dir)

    rows: list[AblationRow] = []
    for variant in variants:
        cfg = config.model_copy(update={"model": variant_model_config(config.model, variant)})
        cases = CaseCache(manifest_path, manifest, variant.modalities)
        member = split.model_copy(update={"name": variant.name})
        params, report = train_member(member, cfg, cases, get_member_dir(run_dir, variant.name))
        masks = {
            case_id: predict_case(
                params, cases.get(case_id), cfg.eval.fusion,
                threshold=cfg.eval.threshold, batch_size=cfg.train.eval_batch_size,
            ).mask
            for case_id in split.test
        }
        metrics = evaluate_masks(masks, manifest_path, manifest, cfg.eval.connectivity)
        logger.info("Variant %s: test DSC %s", variant.name, metrics.means.get("dsc"))
        rows.append(AblationRow(
            variant=variant.name,
            kind=variant.kind.value,
            modalities=list(variant.modalities),
            means=metrics.means,
            best_epoch=report.best_epoch,
        ))

    write_ablation_report(rows, get_ablation_tsv_path(run_dir))
    write_run_manifest(run_dir, "ablate", config)
    return rows


DEFAULT_VARIANTS: tuple[str, ...] = (
    "SB:flair",
    "SB:t1",
    "SB:t2",
    "SB:flair+t1+t2",
    "MB:flair+t1",
    "MB:flair+t2",
    "MB:t1+t2",
    "MB:flair+t1+t2",
)
