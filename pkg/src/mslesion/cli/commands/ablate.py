"""mslesion ablate command."""

from __future__ import annotations

from pathlib import Path

import typer

from mslesion.cli.formatting import print_ablation_table, print_error
from mslesion.cli.state import get_state
from mslesion.exceptions import MslesionError
from mslesion.harness.ablation import DEFAULT_VARIANTS
from mslesion.models.plan import Variant


def ablate(
    ctx: typer.Context,
    manifest: Path = typer.Argument(..., help="Dataset manifest (YAML)"),
    variant: list[str] | None = typer.Option(
        None, "--variant", help="KIND:mod+mod, e.g. SB:flair or MB:flair+t1+t2 (repeatable)",
    ),
) -> None:
    """Compare single-branch and multi-branch modality combinations on one fixed split."""
    state = get_state(ctx)
    try:
        variants = [Variant.parse(v) for v in (variant or DEFAULT_VARIANTS)]
    except ValueError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
    try:
        rows = state.engine().ablate(manifest, variants, state.out)
        print_ablation_table(rows)
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
