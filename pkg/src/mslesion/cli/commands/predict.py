"""mslesion predict command."""

from __future__ import annotations

from pathlib import Path

import typer

from mslesion.cli.formatting import print_error, print_success
from mslesion.cli.state import get_state, split_ids
from mslesion.exceptions import MslesionError


def predict(
    ctx: typer.Context,
    model_dir: Path = typer.Argument(..., help="Directory of a trained model"),
    manifest: Path = typer.Argument(..., help="Dataset manifest (YAML)"),
    cases: str | None = typer.Option(None, "--cases", help="Comma-separated case ids"),
) -> None:
    """Segment cases with MPR fusion and write <out>/predictions/<case>.mvol."""
    state = get_state(ctx)
    try:
        paths = state.engine().predict(model_dir, manifest, split_ids(cases) or None, state.out)
        print_success(f"Wrote {len(paths)} prediction(s) to {state.out}")
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
