"""Run configuration models."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from mslesion.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    BN_EPS,
    BN_MOMENTUM,
    DEFAULT_BATCH_SIZE,
    DEFAULT_CONNECTIVITY,
    DEFAULT_DECAY,
    DEFAULT_DECAY_STEPS,
    DEFAULT_LR0,
    DEFAULT_MAX_EPOCHS,
    DEFAULT_THRESHOLD,
    PHANTOM_MODALITIES,
    SCHEMA_VERSION,
)
from mslesion.models.enums import Connectivity, FusionMethod
from mslesion.models.volume import PhantomSpec

NUM_LEVELS = 5


class ModelConfig(BaseModel):
    """Architecture hyperparameters of the multi-branch encoder-decoder.

    ``width_multipliers`` scale ``stem_width`` for each of the five encoder
    levels; level 1 is the stem output. Full ResNet50 scale is
    ``stem_width=64, width_multipliers=(1, 4, 8, 16, 32), stage_depths=(3, 4, 6, 3)``.
    """

    modalities: list[str] = Field(default_factory=lambda: list(PHANTOM_MODALITIES))
    stacked: bool = False
    input_size: int = Field(default=64, ge=20)
    stem_width: int = Field(default=8, ge=2)
    width_multipliers: tuple[int, ...] = (1, 2, 4, 8, 16)
    stage_depths: tuple[int, ...] = (1, 1, 1, 1)
    share_weights: bool = False
    seed: int = 0
    bn_momentum: float = Field(default=BN_MOMENTUM, gt=0.0, lt=1.0)
    bn_eps: float = Field(default=BN_EPS, gt=0.0)

    @model_validator(mode="after")
    def _check(self) -> ModelConfig:
        if not self.modalities:
            raise ValueError("modalities must be non-empty")
        if len(set(self.modalities)) != len(self.modalities):
            raise ValueError(f"duplicate modality names in {self.modalities}")
        if len(self.width_multipliers) != NUM_LEVELS:
            raise ValueError(f"width_multipliers needs {NUM_LEVELS} entries")
        if len(self.stage_depths) != NUM_LEVELS - 1:
            raise ValueError(f"stage_depths needs {NUM_LEVELS - 1} entries")
        if any(m < 1 for m in self.width_multipliers) or any(d < 1 for d in self.stage_depths):
            raise ValueError("width multipliers and stage depths must be positive")
        if any(w % 2 for w in self.level_widths):
            raise ValueError(f"level widths must be even to halve, got {self.level_widths}")
        if self.stacked and self.share_weights:
            raise ValueError("a stacked single branch has no weights to share")
        from mslesion.network.layout import encoder_resolutions

        levels = encoder_resolutions(self.input_size)
        if any(a <= b for a, b in zip(levels, levels[1:], strict=False)):
            raise ValueError(
                f"input_size {self.input_size} is too small: level resolutions {levels} "
                "must strictly decrease"
            )
        return self

    @property
    def branches(self) -> list[str]:
        """Encoder branch names: one per modality, or a single stacked branch."""
        return ["stacked"] if self.stacked else list(self.modalities)

    @property
    def branch_channels(self) -> int:
        return len(self.modalities) if self.stacked else 1

    @property
    def level_widths(self) -> tuple[int, ...]:
        return tuple(self.stem_width * m for m in self.width_multipliers)

    @property
    def fused_widths(self) -> tuple[int, ...]:
        """Channels emitted by the MMFF block of each level."""
        n = len(self.branches)
        return tuple(n * (w // 2) for w in self.level_widths)

    @property
    def decoder_widths(self) -> tuple[int, ...]:
        """Channels emitted by the MSFU blocks, coarsest first (levels 4..1)."""
        fused = self.fused_widths
        widths: list[int] = []
        low = fused[-1]
        for high in reversed(fused[:-1]):
            low = max(1, (max(1, low // 2) + high) // 2)
            widths.append(low)
        return tuple(widths)


class TrainConfig(BaseModel):
    """Optimisation schedule and validation cadence."""

    lr0: float = Field(default=DEFAULT_LR0, gt=0.0)
    decay: float = Field(default=DEFAULT_DECAY, gt=0.0, le=1.0)
    decay_steps: int = Field(default=DEFAULT_DECAY_STEPS, ge=1)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)
    max_epochs: int = Field(default=DEFAULT_MAX_EPOCHS, ge=1)
    seed: int = 0
    val_every: int = Field(default=1, ge=1)
    eval_batch_size: int = Field(default=32, ge=1)
    adam_beta1: float = Field(default=ADAM_BETA1, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=ADAM_BETA2, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=ADAM_EPS, gt=0.0)


class EvalConfig(BaseModel):
    """Reconstruction and scoring options."""

    fusion: FusionMethod = FusionMethod.MAJORITY_VOTE
    connectivity: Connectivity = Connectivity(DEFAULT_CONNECTIVITY)
    threshold: float = Field(default=DEFAULT_THRESHOLD, ge=0.0, le=1.0)


class RunConfig(BaseModel):
    """Root configuration file model (``mslesion.toml``)."""

    schema_version: int = SCHEMA_VERSION
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    phantom: PhantomSpec = Field(default_factory=PhantomSpec)

    def with_seed(self, seed: int) -> RunConfig:
        """Copy with model, training and phantom seeds replaced."""
        return self.model_copy(update={
            "model": self.model.model_copy(update={"seed": seed}),
            "train": self.train.model_copy(update={"seed": seed}),
            "phantom": self.phantom.model_copy(update={"seed": seed}),
        })
