"""Mini-batch training with validation-driven best-model retention."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict

from mslesion.autodiff import ops
from mslesion.autodiff.checkpoint import save_checkpoint
from mslesion.autodiff.optim import AdamState, adam_step
from mslesion.autodiff.tensor import Tape
from mslesion.constants import (
    MODEL_CONFIG_FILE,
    MODEL_FILE,
    TRAIN_LOG_FILE,
    TRAIN_REPORT_FILE,
)
from mslesion.core.inference import predict_case
from mslesion.core.metrics import dsc
from mslesion.core.slicer import extract_slices, pad_size, select_training_slices
from mslesion.exceptions import EmptyTrainingPoolError, TrainingError
from mslesion.logging import get_logger
from mslesion.models.enums import FusionMethod, SlicePlane
from mslesion.models.reports import EpochRecord, TrainReport, ValidationRecord
from mslesion.network.model import model_forward
from mslesion.network.params import ModelParams, build_model
from mslesion.storage.layout import write_text_atomic
from mslesion.training.batches import make_batches
from mslesion.training.loss import dice_loss
from mslesion.training.schedule import lr_at

if TYPE_CHECKING:
    from collections.abc import Sequence

    from mslesion.models.config import ModelConfig, TrainConfig
    from mslesion.models.slices import SliceSample
    from mslesion.models.volume import MultiModalCase

logger = get_logger(__name__)

LOG_COLUMNS = ("epoch", "step", "lr", "loss", "val_dsc")


class TrainResult(BaseModel):
    """Training curve plus the parameters of the best validation epoch."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    report: TrainReport
    params: ModelParams


def training_pool(cases: Sequence[MultiModalCase], size: int) -> list[SliceSample]:
    """Lesion-bearing slices of every case along all three planes."""
    pool: list[SliceSample] = []
    for case in cases:
        if size < pad_size(case.dims):
            raise TrainingError(f"input size {size} cannot hold case {case.case_id} {case.dims}")
        for plane in SlicePlane:
            pool.extend(select_training_slices(extract_slices(case, plane, size)))
    return pool


def train_step(
    params: ModelParams, batch: Sequence[SliceSample], state: AdamState, lr: float,
) -> float:
    """One forward/backward/Adam update on ``batch``; returns the batch loss."""
    inputs = {m: np.stack([s.inputs[m] for s in batch]) for m in params.config.modalities}
    targets = np.stack([s.target for s in batch])[:, None]
    with Tape() as tape:
        prob = model_forward(params, inputs, training=True)
        loss = dice_loss(ops.take_channels(prob, 1), targets)
    tape.backward(loss)
    grads = {name: t.grad_or_zeros() for name, t in params.tensors.items()}
    adam_step(params.tensors, grads, state, lr)
    return loss.item()


def validate(
    params: ModelParams,
    cases: Sequence[MultiModalCase],
    fusion: FusionMethod = FusionMethod.MAJORITY_VOTE,
    batch_size: int = 32,
) -> float:
    """Mean 3D DSC of the MPR-fused predictions against each case's truth."""
    scores = []
    for case in cases:
        if case.truth is None:
            raise TrainingError(f"validation case {case.case_id} has no truth mask")
        pred = predict_case(params, case, fusion, batch_size=batch_size)
        scores.append(dsc(pred.mask, case.truth))
    return float(np.mean(scores))


def _log_line(record: EpochRecord, val: float | None) -> str:
    val_text = "" if val is None else f"{val:.6f}"
    return f"{record.epoch}\t{record.step}\t{record.lr!r}\t{record.loss:.6f}\t{val_text}\n"


def write_outputs(out_dir: Path, result: TrainResult, log_lines: Sequence[str]) -> None:
    """Write the member files; the report goes last and marks the member complete."""
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out_dir / MODEL_FILE, result.params.state_arrays())
    write_text_atomic(
        out_dir / MODEL_CONFIG_FILE, result.params.config.model_dump_json(indent=2) + "\n",
    )
    write_text_atomic(out_dir / TRAIN_LOG_FILE, "\t".join(LOG_COLUMNS) + "\n" + "".join(log_lines))
    write_text_atomic(out_dir / TRAIN_REPORT_FILE, result.report.model_dump_json(indent=2) + "\n")


def train(
    model_cfg: ModelConfig,
    train_cases: Sequence[MultiModalCase],
    val_cases: Sequence[MultiModalCase],
    cfg: TrainConfig,
    *,
    fusion: FusionMethod = FusionMethod.MAJORITY_VOTE,
    out_dir: Path | None = None,
) -> TrainResult:
    """Train a model and keep the parameters of its best validation epoch.

    Validation runs every ``cfg.val_every`` epochs and after the last one; the
    first epoch reaching the maximum validation DSC wins. When ``out_dir`` is
    given the best checkpoint, the JSON report and the tab-separated curve are
    written there.
    """
    train_ids = {c.case_id for c in train_cases}
    overlap = train_ids & {c.case_id for c in val_cases}
    if overlap:
        raise TrainingError(f"cases in both training and validation: {sorted(overlap)}")
    if not val_cases:
        raise TrainingError("training needs at least one validation case")

    pool = training_pool(train_cases, model_cfg.input_size)
    if not pool:
        raise EmptyTrainingPoolError("no lesion-bearing slices in the training cases")
    logger.info("Training on %d slices from %d cases", len(pool), len(train_cases))

    params = build_model(model_cfg)
    state = AdamState(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, eps=cfg.adam_eps)
    report = TrainReport(train_slices=len(pool))
    best: ModelParams | None = None
    log_lines: list[str] = []
    step = 0

    for epoch in range(1, cfg.max_epochs + 1):
        losses = []
        lr = lr_at(step, cfg)
        for batch in make_batches(pool, cfg.batch_size, cfg.seed, epoch):
            lr = lr_at(step, cfg)
            losses.append(train_step(params, batch, state, lr))
            step += 1
        record = EpochRecord(epoch=epoch, step=step, lr=lr, loss=float(np.mean(losses)))
        report.epochs.append(record)

        val: float | None = None
        if epoch % cfg.val_every == 0 or epoch == cfg.max_epochs:
            val = validate(params, val_cases, fusion, cfg.eval_batch_size)
            report.validation.append(ValidationRecord(epoch=epoch, dsc=val))
            if report.best_dsc is None or val > report.best_dsc:
                report.best_dsc, report.best_epoch = val, epoch
                best = params.copy()
            logger.info("Epoch %d: loss %.4f, validation DSC %.4f", epoch, record.loss, val)
        else:
            logger.info("Epoch %d: loss %.4f", epoch, record.loss)
        log_lines.append(_log_line(record, val))

    assert best is not None
    if out_dir is not None:
        report.checkpoint = MODEL_FILE
    result = TrainResult(report=report, params=best)
    if out_dir is not None:
        write_outputs(Path(out_dir), result, log_lines)
    return result
