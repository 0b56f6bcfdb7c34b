"""Dataset and run manifest models."""

from __future__ import annotations

from pydantic import BaseModel, Field


class CaseEntry(BaseModel):
    """File locations of one case, relative to the manifest directory."""

    modalities: dict[str, str]
    truth: str | None = None
    raters: list[str] = Field(default_factory=list)


class DatasetManifest(BaseModel):
    """Index of cases: id → modality files, truth and optional rater masks."""

    schema_version: int = 1
    cases: dict[str, CaseEntry] = Field(default_factory=dict)

    @property
    def ids(self) -> list[str]:
        return list(self.cases)


class RunManifest(BaseModel):
    """Description of one run directory."""

    schema_version: int = 1
    command: str
    config: dict = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
    failures: list[str] = Field(default_factory=list)
