"""mslesion phantom command."""

from __future__ import annotations

import typer

from mslesion.cli.formatting import print_error, print_success
from mslesion.cli.state import get_state
from mslesion.exceptions import MslesionError


def phantom(
    ctx: typer.Context,
    count: int = typer.Option(12, "--count", "-n", help="Number of cases"),
    raters: int = typer.Option(0, "--raters", help="Simulated rater masks per case"),
    size: int | None = typer.Option(None, "--size", help="Cubic phantom side in voxels"),
) -> None:
    """Generate a synthetic phantom dataset and its manifest under --out."""
    state = get_state(ctx)
    try:
        engine = state.engine()
        spec = engine.config().phantom
        if size is not None:
            spec = spec.model_validate({**spec.model_dump(), "dims": (size, size, size)})
        path = engine.make_phantoms(state.out, count, raters=raters, spec=spec)
        print_success(f"Wrote {count} cases; manifest: {path}")
    except (MslesionError, ValueError) as exc:
        print_error(str(exc))
        raise typer.Exit(1) from exc
