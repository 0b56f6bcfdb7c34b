"""Global CLI options shared by every command."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import typer

from mslesion.core.engine import SegmentationEngine
from mslesion.models.enums import Connectivity, FusionMethod


@dataclass(frozen=True)
class CliState:
    config: Path | None = None
    seed: int | None = None
    out: Path = Path("run")
    fusion: FusionMethod | None = None
    connectivity: Connectivity | None = None
    verbose: bool = False

    def engine(self) -> SegmentationEngine:
        return SegmentationEngine(
            Path.cwd(),
            config_file=self.config,
            seed=self.seed,
            fusion=self.fusion,
            connectivity=self.connectivity,
        )


def get_state(ctx: typer.Context) -> CliState:
    """State stored by the app callback (defaults when a command runs standalone)."""
    obj = ctx.find_root().obj
    return obj if isinstance(obj, CliState) else CliState()


def split_ids(text: str | None) -> list[str]:
    """Parse a comma-separated id list."""
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]
