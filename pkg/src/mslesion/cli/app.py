"""Typer app root."""

from __future__ import annotations

from pathlib import Path

import typer

from mslesion.cli.commands.ablate import ablate
from mslesion.cli.commands.config import config_app
from mslesion.cli.commands.crossval import crossval
from mslesion.cli.commands.evaluate import evaluate
from mslesion.cli.commands.fuse import fuse
from mslesion.cli.commands.init import init
from mslesion.cli.commands.phantom import phantom
from mslesion.cli.commands.predict import predict
from mslesion.cli.commands.train import train
from mslesion.cli.state import CliState
from mslesion.logging import setup_logging
from mslesion.models.enums import Connectivity, FusionMethod

app = typer.Typer(
    name="mslesion",
    help="Multi-branch slice-based MS lesion segmentation.",
    no_args_is_help=True,
)


@app.callback()
def main_options(
    ctx: typer.Context,
    config: Path | None = typer.Option(None, "--config", "-c", help="Config file (TOML)"),
    seed: int | None = typer.Option(None, "--seed", help="Override model/train/phantom seeds"),
    out: Path = typer.Option(Path("run"), "--out", "-o", help="Output (run) directory"),
    fusion: FusionMethod | None = typer.Option(None, "--fusion", help="Label fusion method"),
    connectivity: int | None = typer.Option(
        None, "--connectivity", help="Lesion connectivity: 6, 18 or 26",
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    setup_logging(verbose=verbose)
    conn = None
    if connectivity is not None:
        try:
            conn = Connectivity(connectivity)
        except ValueError as exc:
            raise typer.BadParameter("connectivity must be 6, 18 or 26") from exc
    ctx.obj = CliState(
        config=config, seed=seed, out=out, fusion=fusion, connectivity=conn, verbose=verbose,
    )


app.command("init")(init)
app.command("phantom")(phantom)
app.command("train")(train)
app.command("predict")(predict)
app.command("evaluate")(evaluate)
app.command("crossval")(crossval)
app.command("ablate")(ablate)
app.command("fuse")(fuse)
app.add_typer(config_app)


def main() -> None:
    app()
