"""Rich tables and messages for CLI output."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

from rich.table import Table

from mslesion.cli.console import console, err_console
from mslesion.harness.reports import format_value
from mslesion.models.reports import METRIC_COLUMNS

if TYPE_CHECKING:
    from collections.abc import Sequence

    from mslesion.models.reports import AblationRow, MetricsReport, TrainReport


def print_success(message: str) -> None:
    """Print a success message."""
    console.print(f"[green]{message}[/green]")


def print_error(message: str) -> None:
    """Print an error message."""
    err_console.print(f"[red]Error: {message}[/red]")


def print_warning(message: str) -> None:
    err_console.print(f"[yellow]{message}[/yellow]")


def print_config_table(config_data: dict[str, Any]) -> None:
    """Render config as a table."""
    table = Table(title="Configuration", show_header=True, header_style="bold cyan")
    table.add_column("Key", style="dim")
    table.add_column("Value")

    def _flatten(data: dict[str, Any], prefix: str = "") -> None:
        for k, v in data.items():
            key = f"{prefix}.{k}" if prefix else k
            if isinstance(v, dict):
                _flatten(v, key)
            else:
                table.add_row(key, str(v))

    _flatten(config_data)
    console.print(table)


def print_metrics_table(report: MetricsReport, title: str = "Metrics") -> None:
    table = Table(title=title, show_header=True, header_style="bold cyan")
    table.add_column("Case", style="dim")
    table.add_column("Rater", style="dim")
    for column in METRIC_COLUMNS:
        table.add_column(column.upper(), justify="right")
    for case in report.cases:
        table.add_row(
            case.case_id, case.rater,
            *(format_value(getattr(case, c)) for c in METRIC_COLUMNS),
        )
    table.add_row(
        "[bold]mean[/bold]", "",
        *(format_value(report.means.get(c)) for c in METRIC_COLUMNS),
    )
    console.print(table)
    if report.sc is not None:
        console.print(f"Overall score (SC): [bold]{report.sc:.2f}[/bold]")
    for note in report.notes:
        print_warning(note)


def print_train_report(report: TrainReport) -> None:
    table = Table(title="Training", show_header=True, header_style="bold cyan")
    table.add_column("Epoch", justify="right")
    table.add_column("Step", justify="right")
    table.add_column("LR", justify="right")
    table.add_column("Loss", justify="right")
    table.add_column("Val DSC", justify="right")
    val = {v.epoch: v.dsc for v in report.validation}
    for rec in report.epochs:
        table.add_row(
            str(rec.epoch), str(rec.step), f"{rec.lr:.3e}", f"{rec.loss:.4f}",
            format_value(val.get(rec.epoch)),
        )
    console.print(table)
    if report.best_epoch is not None and report.best_dsc is not None:
        console.print(f"Best epoch {report.best_epoch}: validation DSC {report.best_dsc:.4f}")


def print_ablation_table(rows: Sequence[AblationRow]) -> None:
    table = Table(title="Modality ablation", show_header=True, header_style="bold cyan")
    table.add_column("Variant")
    for column in METRIC_COLUMNS:
        table.add_column(column.upper(), justify="right")
    for row in rows:
        table.add_row(row.variant, *(format_value(row.means.get(c)) for c in METRIC_COLUMNS))
    console.print(table)


def print_failures(failures: Sequence[str]) -> None:
    print_warning(f"{len(failures)} member(s) failed; their folds were skipped")
    for failure in failures:
        print_error(f"member failed: {failure}")
