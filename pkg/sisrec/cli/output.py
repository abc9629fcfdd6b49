"""Output formatting module for CLI with Rich styling."""

from collections.abc import Iterable

from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from sisrec.schemas import (
    CheckResult,
    DetectionResult,
    EstimatePayload,
    FilterPayload,
    RiskReport,
)


def _fmt(value: float | None) -> str:
    return "[dim]n/a[/dim]" if value is None else f"{value:.4g}"


def _flag(ok: bool) -> str:
    return "[green]✓ pass[/green]" if ok else "[red]✗ fail[/red]"


class OutputFormatter:
    """
    Format and display CLI output with Rich styling.

    Human-facing output goes to stderr so that JSON written to stdout stays
    machine-readable.
    """

    def __init__(self, console: Console | None = None):
        """
        Initialize the output formatter.

        Args:
            console: Rich Console instance. If None, creates one on stderr.
        """
        self.console = console or Console(stderr=True)

    def _table(self, title: str, columns: Iterable[str]) -> Table:
        table = Table(
            title=title,
            show_header=True,
            header_style="bold cyan",
            border_style="cyan",
        )
        for i, name in enumerate(columns):
            table.add_column(name, style="cyan" if i == 0 else "white", no_wrap=i == 0)
        return table

    def display_success(self, message: str) -> None:
        """
        Show success message with checkmark.

        Args:
            message: Success message to display
        """
        self.console.print(f"[green]✓[/green] {message}")

    def display_error(self, message: str, details: str | None = None) -> None:
        """
        Show error message with error symbol and optional details.

        Args:
            message: Brief error description
            details: Optional detailed error information
        """
        self.console.print(f"[red]✗ Error:[/red] {message}")
        if details:
            self.console.print(f"[dim]Details: {details}[/dim]")

    def display_error_panel(self, title: str, message: str) -> None:
        """Show an unexpected library failure in a red panel."""
        panel = Panel(message, title=f"[bold red]{title}[/bold red]", border_style="red")
        self.console.print(panel)

    def display_info(self, message: str) -> None:
        """Show informational message."""
        self.console.print(f"[blue]ℹ[/blue] {message}")

    def display_warning(self, message: str) -> None:
        """Show warning message."""
        self.console.print(f"[yellow]⚠[/yellow] {message}")

    def display_certificates(self, payload: FilterPayload) -> None:
        """
        Display the norm certificates of a constructed filter.

        Args:
            payload: Filter with its ``certificates`` block
        """
        cert = payload.certificates
        kind = "One-sided" if payload.causal else "Two-sided"
        table = self._table(f"{kind} hybrid filter (m={payload.m})", ["Norm", "Measured", "Cap"])
        for norm, cap in (("l1", "R1"), ("l2", "R2"), ("linf", "Rinf")):
            table.add_row(norm, _fmt(float(cert[norm])), _fmt(float(cert[cap])))
        table.add_row("support size", str(payload.support_size), "")
        table.add_row("interpolation error", _fmt(payload.interpolation_error), "")
        table.add_row("interpolant sup", _fmt(payload.interpolant_sup), "")
        table.add_row("interpolant weights", payload.interpolant_weights, "")

        self.console.print()
        self.console.print(table)
        if cert.get("passed"):
            self.display_success("All certificates hold")
        else:
            self.display_warning("At least one certificate exceeds its cap")

    def display_estimate(self, payload: EstimatePayload) -> None:
        """Summarize a denoising run."""
        hi = payload.lo + len(payload.re) - 1
        table = self._table(f"Estimate ({payload.mode})", ["Field", "Value"])
        table.add_row("window", f"[{payload.lo}, {hi}]")
        table.add_row("filter fits", str(payload.fits))
        table.add_row("objective", _fmt(payload.objective))
        table.add_row("solver iterations", str(payload.trace_length))
        table.add_row("converged", "✓ Yes" if payload.converged else "✗ No")
        table.add_row("risk bound", _fmt(payload.risk_bound))
        self.console.print()
        self.console.print(table)

    def display_detection(self, result: DetectionResult) -> None:
        """Show the detection decision."""
        if result.reject:
            verdict = "[bold red]signal present[/bold red]"
        else:
            verdict = "[green]noise only[/green]"
        self.console.print(
            f"statistic {result.statistic:.4g} vs threshold {result.threshold:.4g}: {verdict}"
        )

    def display_risk_report(self, report: RiskReport) -> None:
        """
        Display per-(n, s) summaries of a Monte Carlo run.

        Args:
            report: Completed risk or detection report
        """
        if report.summaries:
            table = self._table(
                f"Risk ({report.config.estimator_mode}, sigma={report.config.sigma})",
                ["n", "s", "Trials", "Failures", "Quantile", "Median", "Bound", "Headroom"],
            )
            for row in report.summaries:
                table.add_row(
                    str(row.n),
                    str(row.s),
                    str(row.trials),
                    str(row.failures),
                    _fmt(row.quantile),
                    _fmt(row.median),
                    _fmt(row.bound),
                    _fmt(row.headroom),
                )
            self.console.print()
            self.console.print(table)
        if report.detection:
            table = self._table(
                f"Detection (sigma={report.config.sigma}, delta={report.config.delta})",
                ["n", "s", "Trials", "Threshold", "Type I", "Type II"],
            )
            for det in report.detection:
                table.add_row(
                    str(det.n),
                    str(det.s),
                    str(det.trials),
                    _fmt(det.threshold),
                    f"{det.type_i} ({det.type_i_rate:.1%})",
                    f"{det.type_ii} ({det.type_ii_rate:.1%})",
                )
            self.console.print()
            self.console.print(table)
        self.console.print(
            f"[dim]{len(report.records)} records, {report.failures} failures, "
            f"{report.wall_clock_seconds:.1f}s[/dim]"
        )

    def display_checks(self, results: list[CheckResult]) -> None:
        """Display the inequality-check suite as a table."""
        table = self._table("Inequality checks", ["Check", "Measured", "Bound", "Slack", "Status"])
        for r in results:
            table.add_row(r.name, _fmt(r.measured), _fmt(r.bound), _fmt(r.slack), _flag(r.passed))
        self.console.print()
        self.console.print(table)
        failed = [r.name for r in results if not r.passed]
        if failed:
            self.display_error(f"{len(failed)} check(s) failed", ", ".join(failed))
        else:
            self.display_success(f"All {len(results)} checks passed")

    def create_progress_context(self, description: str, total: int | None = None) -> Progress:
        """
        Create a progress context for long-running operations.

        Args:
            description: Label shown next to the spinner
            total: Number of steps; None shows a spinner only

        Returns:
            Progress instance with one task already added
        """
        columns = [SpinnerColumn(), TextColumn("[progress.description]{task.description}")]
        if total is not None:
            columns += [BarColumn(), MofNCompleteColumn()]
        progress = Progress(*columns, console=self.console, transient=True)
        progress.add_task(description, total=total)
        return progress
