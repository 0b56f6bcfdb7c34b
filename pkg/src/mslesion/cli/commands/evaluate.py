"""mslesion evaluate command."""

from __future__ import annotations

from pathlib import Path

import typer

from mslesion.cli.formatting import print_error, print_metrics_table
from mslesion.cli.state import get_state
from mslesion.exceptions import MslesionError


def evaluate(
    ctx: typer.Context,
    predictions: Path = typer.Argument(..., help="Directory of <case>.mvol masks"),
    manifest: Path = typer.Argument(..., help="Dataset manifest (YAML)"),
) -> None:
    """Score predicted masks against every reference and write reports under --out."""
    state = get_state(ctx)
    try:
        report = state.engine().evaluate(predictions, manifest, state.out)
        print_metrics_table(report)
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
