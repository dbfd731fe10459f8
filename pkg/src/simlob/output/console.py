"""Rich console output for simulation, training and calibration results."""

from collections.abc import Mapping

from rich.console import Console as RichConsole
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.table import Table

from simlob.models.analytics import ErrorDistribution, StylizedFactsReport
from simlob.models.calibration import CalibrationResult
from simlob.models.network import EpochStats, SweepPoint
from simlob.models.params import PgpsParams


class Console:
    """Wrapper for rich console output."""

    def __init__(self, verbose: bool = False, quiet: bool = False):
        self.console = RichConsole()
        self.verbose = verbose
        self.quiet = quiet

    def print(self, *args, **kwargs):
        """Print to console (respects quiet mode)."""
        if not self.quiet:
            self.console.print(*args, **kwargs)

    def print_verbose(self, *args, **kwargs):
        """Print only in verbose mode."""
        if self.verbose and not self.quiet:
            self.console.print(*args, **kwargs)

    def print_error(self, message: str):
        self.console.print(f"[red]Error:[/red] {message}")

    def print_warning(self, message: str):
        self.console.print(f"[yellow]Warning:[/yellow] {message}")

    def print_success(self, message: str):
        if not self.quiet:
            self.console.print(f"[green]{message}[/green]")

    def create_progress(self) -> Progress:
        """Create a progress bar context."""
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=self.console,
            disable=self.quiet,
        )

    def print_header(self, title: str, subtitle: str = ""):
        if self.quiet:
            return
        body = f"[bold blue]{title}[/bold blue]"
        if subtitle:
            body += f"\n[dim]{subtitle}[/dim]"
        self.console.print()
        self.console.print(Panel(body, expand=False))
        self.console.print()

    def print_mapping(self, title: str, rows: Mapping[str, object]):
        """Two-column metric/value table."""
        if self.quiet:
            return
        table = Table(title=title, show_header=False, expand=False)
        table.add_column("Metric", style="dim")
        table.add_column("Value")
        for key, value in rows.items():
            table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
        self.console.print(table)
        self.console.print()

    def print_params(self, params: PgpsParams, title: str = "PGPS parameters"):
        self.print_mapping(title, params.model_dump())

    def print_facts(self, report: StylizedFactsReport):
        if self.quiet:
            return
        table = Table(title="Stylized facts", expand=False)
        table.add_column("Statistic")
        table.add_column("A", justify="right")
        table.add_column("B", justify="right")
        table.add_column("|A - B|", justify="right")
        table.add_row("LogR Wasserstein", "", "", f"{report.logret_wasserstein:.6g}")
        for label, field, delta in (
            ("AutoCorr", "autocorrelation", report.autocorr_delta),
            ("Vol. Clust.", "volatility_clustering", report.vol_clustering_delta),
            ("Vol-Vol Corr", "volume_volatility_correlation", report.vol_vol_corr_delta),
        ):
            table.add_row(
                label,
                f"{getattr(report.a, field):.6g}",
                f"{getattr(report.b, field):.6g}",
                f"{delta:.6g}",
            )
        self.console.print(table)
        self.print_verbose(f"[dim]Lag {report.lag}; {report.estimators['deltas']}[/dim]")
        self.console.print()

    def print_error_distribution(self, dist: ErrorDistribution):
        rows: dict[str, object] = {
            "Segments": dist.count,
            "Mean Err_r": dist.mean,
            "Std": dist.std,
            "Mode": dist.mode,
            **dist.quantiles,
        }
        if dist.precedence_violation_rate is not None:
            rows["Precedence violations"] = dist.precedence_violation_rate
        self.print_mapping("Reconstruction errors", rows)

    def print_epoch(self, stats: EpochStats):
        self.print_verbose(
            f"Epoch {stats.epoch}: train {stats.train_error:.6f}, "
            f"test {stats.test_error:.6f} ({stats.seconds:.1f}s)"
        )

    def print_sweep(self, points: list[SweepPoint]):
        if self.quiet:
            return
        table = Table(title="Sensitivity sweep", expand=False)
        table.add_column("Blocks", justify="right")
        table.add_column("Latent length", justify="right")
        table.add_column("Test Err_r", justify="right")
        table.add_column("Best epoch", justify="right")
        for p in points:
            table.add_row(
                str(p.n_blocks), str(p.latent_len), f"{p.test_error:.6g}", str(p.best_epoch)
            )
        self.console.print(table)
        self.console.print()

    def print_calibration(self, result: CalibrationResult):
        if self.quiet:
            return
        self.print_params(result.best_params, title=f"Calibrated parameters ({result.objective})")
        rows: dict[str, object] = {
            "Best objective": result.best_value,
            "Evaluations": result.evaluations,
            "Failed evaluations": result.failures,
            "Wall time (s)": round(result.wall_time, 2),
        }
        if result.report is not None:
            rows["Err_r"] = result.report.err_r
            rows["Mid-price objective"] = result.report.midprice_objective
            if result.report.latent_objective is not None:
                rows["Latent objective"] = result.report.latent_objective
        self.print_mapping("Calibration", rows)
        if result.report is not None and result.report.facts is not None:
            self.print_facts(result.report.facts)

    def print_output_path(self, path: str, label: str = "Saved to"):
        if not self.quiet:
            self.console.print(f"[green]{label}:[/green] {path}")
