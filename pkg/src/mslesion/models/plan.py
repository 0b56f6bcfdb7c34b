"""Experiment plan models."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from mslesion.models.enums import FusionMethod, VariantKind


class Split(BaseModel):
    """One training run: disjoint train/validation/test subject ids."""

    name: str
    train: list[str]
    validation: list[str]
    test: list[str] = Field(default_factory=list)
    fold: str = "0"

    @model_validator(mode="after")
    def _disjoint(self) -> Split:
        tr, va, te = set(self.train), set(self.validation), set(self.test)
        overlap = (tr & va) | (tr & te) | (va & te)
        if overlap:
            raise ValueError(f"split {self.name!r} reuses ids across sets: {sorted(overlap)}")
        return self

    @property
    def ids(self) -> set[str]:
        return set(self.train) | set(self.validation) | set(self.test)


class ExperimentPlan(BaseModel):
    """A list of splits plus the fusion method used to merge planes and members."""

    protocol: str
    splits: list[Split]
    fusion: FusionMethod = FusionMethod.MAJORITY_VOTE
    seed: int = 0

    def folds(self) -> dict[str, list[Split]]:
        """Group splits by outer fold, preserving plan order."""
        grouped: dict[str, list[Split]] = {}
        for split in self.splits:
            grouped.setdefault(split.fold, []).append(split)
        return grouped


class Variant(BaseModel):
    """Modality-ablation variant, parsed from ``KIND:mod+mod``."""

    kind: VariantKind
    modalities: list[str]

    @property
    def name(self) -> str:
        return f"{self.kind.value}:{'+'.join(self.modalities)}"

    @classmethod
    def parse(cls, text: str) -> Variant:
        kind, _, mods = text.partition(":")
        names = [m for m in mods.split("+") if m]
        if not names:
            raise ValueError(f"variant {text!r} names no modality")
        return cls(kind=VariantKind(kind.strip().upper()), modalities=names)
