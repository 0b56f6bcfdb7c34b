"""mslesion fuse command."""

from __future__ import annotations

from pathlib import Path

import typer

from mslesion.cli.formatting import print_error, print_success
from mslesion.cli.state import get_state
from mslesion.exceptions import MslesionError
from mslesion.models.enums import FusionMethod


def fuse(
    ctx: typer.Context,
    inputs: list[Path] = typer.Argument(..., help="Mask or probability volumes (.mvol)"),
    output: Path = typer.Option(..., "--output", help="Fused mask path"),
) -> None:
    """Fuse several volumes with the global --fusion method (majority vote by default)."""
    state = get_state(ctx)
    method = state.fusion or FusionMethod.MAJORITY_VOTE
    try:
        fused = state.engine().fuse(inputs, output, method)
        print_success(
            f"Fused {len(inputs)} volume(s) with {method.value}: "
            f"{int(fused.voxels.sum())} foreground voxels -> {output}"
        )
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
