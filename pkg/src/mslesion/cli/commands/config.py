"""mslesion config show/get commands."""

from __future__ import annotations

from typing import Any

import typer

from mslesion.cli.formatting import print_config_table, print_error
from mslesion.cli.state import get_state
from mslesion.exceptions import MslesionError

config_app = typer.Typer(name="config", help="Inspect the effective configuration.")


@config_app.command("show")
def config_show(ctx: typer.Context) -> None:
    """Show the effective configuration (file plus global overrides)."""
    try:
        cfg = get_state(ctx).engine().config()
        print_config_table(cfg.model_dump(mode="json"))
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc


@config_app.command("get")
def config_get(
    ctx: typer.Context,
    key: str = typer.Argument(..., help="Config key (dot notation), e.g. train.lr0"),
) -> None:
    """Get a config value."""
    try:
        data: Any = get_state(ctx).engine().config().model_dump(mode="json")
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
    for part in key.split("."):
        if not isinstance(data, dict) or part not in data:
            print_error(f"Key not found: {key}")
            raise typer.Exit(1)
        data = data[part]
    typer.echo(data)
