"""mslesion train command."""

from __future__ import annotations

from pathlib import Path

import typer

from mslesion.cli.formatting import print_error, print_success, print_train_report
from mslesion.cli.state import get_state, split_ids
from mslesion.exceptions import MslesionError


def train(
    ctx: typer.Context,
    manifest: Path = typer.Argument(..., help="Dataset manifest (YAML)"),
    train_ids: str = typer.Option(..., "--train", help="Comma-separated training case ids"),
    val_ids: str = typer.Option(..., "--val", help="Comma-separated validation case ids"),
) -> None:
    """Train one model and keep its best validation checkpoint under --out."""
    state = get_state(ctx)
    try:
        engine = state.engine()
        result = engine.train(manifest, split_ids(train_ids), split_ids(val_ids), state.out)
        print_train_report(result.report)
        print_success(f"Model written to {state.out}")
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
