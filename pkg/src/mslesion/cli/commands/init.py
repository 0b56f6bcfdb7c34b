"""mslesion init command."""

from __future__ import annotations

import typer

from mslesion.cli.formatting import print_error, print_success
from mslesion.cli.state import get_state
from mslesion.exceptions import MslesionError


def init(
    ctx: typer.Context,
    force: bool = typer.Option(False, "--force", help="Overwrite an existing config"),
) -> None:
    """Write a default mslesion.toml."""
    try:
        engine = get_state(ctx).engine()
        config = engine.init(overwrite=force)
        print_success(f"Wrote {engine.config_file}")
        print_success(
            f"Model: {len(config.model.branches)} branches, input {config.model.input_size}px; "
            f"fusion: {config.eval.fusion.value}"
        )
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
