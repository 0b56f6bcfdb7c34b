"""mslesion crossval command."""

from __future__ import annotations

from pathlib import Path

import typer

from mslesion.cli.formatting import print_error, print_failures, print_metrics_table
from mslesion.cli.state import get_state, split_ids
from mslesion.exceptions import MslesionError
from mslesion.models.enums import Protocol


def crossval(
    ctx: typer.Context,
    manifest: Path = typer.Argument(..., help="Dataset manifest (YAML)"),
    protocol: Protocol = typer.Option(Protocol.NESTED_LOSO, "--protocol", help="Split protocol"),
    k: int = typer.Option(4, "-k", help="Folds for nested-kfold"),
    test_ids: str | None = typer.Option(
        None, "--test", help="Held-out test ids for loso-ensemble (comma-separated)",
    ),
) -> None:
    """Run a cross-validation protocol end to end (resumable) into --out."""
    state = get_state(ctx)
    try:
        engine = state.engine()
        plan = engine.plan(protocol, manifest, k=k, test_ids=split_ids(test_ids))
        outcome = engine.crossval(plan, manifest, state.out)
    except MslesionError as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
    print_metrics_table(outcome.report, title=f"{protocol.value} ({len(plan.splits)} members)")
    if not outcome.ok:
        print_failures(outcome.failures)
        raise typer.Exit(1)
