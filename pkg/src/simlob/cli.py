"""CLI interface for SimLOB."""

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import typer
from rich.logging import RichHandler

from simlob import __version__
from simlob.exceptions import SimLOBError
from simlob.models.book import FIELDS_PER_LEVEL
from simlob.output.console import Console

app = typer.Typer(
    name="simlob",
    help="Simulate limit order books, learn their representations and calibrate simulators",
    add_completion=False,
)

console = Console()


def setup_logging(verbose: bool = False, debug: bool = False) -> None:
    """Configure root logging once, through rich."""
    from simlob.config import get_config

    if debug:
        level = logging.DEBUG
    elif verbose:
        level = logging.INFO
    else:
        level = getattr(logging, get_config().log_level, logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=debug, show_path=debug)],
        force=True,
    )


def version_callback(value: bool):
    """Print version and exit."""
    if value:
        console.print(f"simlob version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        "-V",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit",
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
    debug: bool = typer.Option(False, "--debug", help="Debug logging"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Minimal output"),
):
    """SimLOB - LOB simulation, representation learning and calibration."""
    setup_logging(verbose, debug)
    console.verbose = verbose or debug
    console.quiet = quiet


@contextmanager
def _contract_errors() -> Iterator[None]:
    """Report library errors and leave with status 1."""
    try:
        yield
    except SimLOBError as e:
        console.print_error(str(e))
        raise typer.Exit(1) from e
    except KeyboardInterrupt:
        console.print_warning("Cancelled")
        raise typer.Exit(1) from None


def _read_series(path: Path, tick_size: int = 1):
    from simlob.lob.io import read_lobs, read_lobs_csv

    if path.suffix.lower() == ".csv":
        return read_lobs_csv(path, tick_size)
    return read_lobs(path)


def _int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(
            f"expected comma-separated integers, got {text!r}", param_hint=flag
        ) from None
    if not values:
        raise typer.BadParameter("needs at least one value", param_hint=flag)
    return values


def _model_config(
    tau: int,
    n_features: int,
    n_blocks: int,
    latent: int,
    d_model: int,
    heads: int,
    positional_encoding: bool,
    seed: int,
):
    from simlob.config import get_config
    from simlob.models.base import build_model
    from simlob.models.network import ModelConfig

    return build_model(
        ModelConfig,
        {
            "tau": tau,
            "n_features": n_features,
            "n_blocks": n_blocks,
            "latent_len": latent,
            "d_model": d_model,
            "heads": heads,
            "positional_encoding": positional_encoding,
            "dtype": get_config().dtype,
            "seed": seed,
        },
    )


@app.command()
def simulate(
    out: Path = typer.Option(..., "--out", "-o", help="Output LOBS1 file"),
    preset: str | None = typer.Option(
        None, "--preset", help="Target parameter tuple, data-1 ... data-10"
    ),
    config: Path | None = typer.Option(
        None, "--config", help="Flat key=value file with PGPS parameters and simulator settings"
    ),
    steps: int | None = typer.Option(None, "--steps", help="Recorded steps (overrides config)"),
    seed: int | None = typer.Option(None, "--seed", help="Simulation seed (overrides config)"),
    csv: bool = typer.Option(False, "--csv", help="Also write a CSV copy next to the output"),
):
    """Run the PGPS simulator and write the snapshot series.

    Parameters come from --preset, from --config, or default to the centre of the
    calibration box.

    Examples:
        simlob simulate --preset data-1 --steps 3600 --out data-1.lobs
        simlob simulate --config sim.env --out run.lobs --csv
    """
    from simlob.config import load_sim_file
    from simlob.lob.io import write_lobs, write_lobs_csv
    from simlob.models.base import build_model
    from simlob.models.params import TARGET_TUPLES, PgpsParams, SimConfig
    from simlob.sim.pgps import simulate as run_simulation

    with _contract_errors():
        if preset is not None and config is not None:
            raise typer.BadParameter("use either --preset or --config", param_hint="--preset")
        params, sim_config = PgpsParams.midpoint(), SimConfig()
        if config is not None:
            params, sim_config = load_sim_file(config)
        elif preset is not None:
            if preset not in TARGET_TUPLES:
                raise typer.BadParameter(
                    f"unknown preset {preset!r}; choose from {', '.join(TARGET_TUPLES)}",
                    param_hint="--preset",
                )
            params = TARGET_TUPLES[preset]
        overrides = {k: v for k, v in {"horizon": steps, "seed": seed}.items() if v is not None}
        if overrides:
            sim_config = build_model(SimConfig, {**sim_config.model_dump(), **overrides})

        console.print_params(params)
        series = run_simulation(params, sim_config)
        write_lobs(out, series)
        console.print_output_path(str(out))
        if csv:
            csv_path = write_lobs_csv(out.with_suffix(".csv"), series)
            console.print_output_path(str(csv_path))


@app.command("gen-data")
def gen_data(
    out: Path = typer.Option(..., "--out", "-o", help="Dataset directory"),
    tuples: int = typer.Option(2000, "--tuples", help="Number of parameter tuples"),
    steps: int = typer.Option(50_000, "--steps", help="Recorded steps per tuple"),
    split: float = typer.Option(0.8, "--split", help="Training share of each tuple's segments"),
    seed: int = typer.Option(0, "--seed", help="Corpus seed"),
    tau: int = typer.Option(100, "--tau", help="Segment length"),
    workers: int | None = typer.Option(None, "--workers", help="Parallel simulations"),
):
    """Simulate random parameter tuples into a segmented, normalized corpus.

    Examples:
        simlob gen-data --tuples 20 --steps 5000 --out corpus
    """
    from simlob.data.dataset import build_dataset

    with _contract_errors():
        with console.create_progress() as progress:
            task = progress.add_task("Simulating tuples...", total=tuples)
            manifest = build_dataset(
                out,
                n_tuples=tuples,
                steps=steps,
                split=split,
                seed=seed,
                tau=tau,
                workers=workers,
                on_tuple_done=lambda _: progress.advance(task),
            )
        console.print_mapping(
            "Dataset",
            {
                "Tuples": manifest.n_param_tuples,
                "Segments per tuple": manifest.segments_per_tuple,
                "Train segments": manifest.count("train"),
                "Test segments": manifest.count("test"),
                "Price centre": manifest.norm.price_center,
                "Price scale": manifest.norm.price_scale,
            },
        )
        console.print_output_path(str(out / "manifest.json"), label="Manifest")


@app.command()
def train(
    data: Path | None = typer.Option(None, "--data", help="Dataset directory or manifest"),
    out: Path = typer.Option(Path("model.slob"), "--out", "-o", help="Checkpoint path"),
    epochs: int = typer.Option(200, "--epochs", help="Training epochs"),
    batch: int = typer.Option(128, "--batch", help="Batch size"),
    lr: float = typer.Option(1e-4, "--lr", help="Adam learning rate"),
    n_blocks: int = typer.Option(2, "--L", "--blocks", help="Transformer blocks per side"),
    latent: int = typer.Option(128, "--latent", help="Latent vector length"),
    d_model: int = typer.Option(256, "--d-model", help="Model width"),
    heads: int = typer.Option(8, "--heads", help="Attention heads"),
    positional_encoding: bool = typer.Option(
        False, "--positional-encoding", help="Add sinusoidal positions before the blocks"
    ),
    micro_batches: int = typer.Option(1, "--micro-batches", help="Gradient micro-batches"),
    seed: int = typer.Option(0, "--seed", help="Initialization and shuffling seed"),
    history: Path | None = typer.Option(None, "--history", help="Write epoch history JSON"),
    verify: bool = typer.Option(
        False, "--verify", help="Finite-difference check of the toy model's gradients first"
    ),
):
    """Train a SimLOB autoencoder on a generated corpus.

    Examples:
        simlob train --data corpus --epochs 20 --L 2 --latent 32 --d-model 64 --out m.slob
        simlob train --verify
    """
    from simlob.data.dataset import load_manifest
    from simlob.network.checkpoint import save_checkpoint
    from simlob.network.training import train_from_manifest, verify_gradients
    from simlob.output.writers import write_json_report

    with _contract_errors():
        if verify:
            check = verify_gradients(seed=seed)
            console.print_mapping(
                "Gradient check",
                {
                    "Max relative error": check.max_rel_error,
                    "Worst parameter": check.worst_parameter or "-",
                    "Entries checked": check.checked,
                },
            )
            if not check.passed():
                console.print_error("Gradient check failed")
                raise typer.Exit(1)
            console.print_success("Gradient check passed")
            if data is None:
                return
        if data is None:
            raise typer.BadParameter("required unless only --verify is given", param_hint="--data")

        manifest = load_manifest(data)
        root = data if data.is_dir() else data.parent
        console.print_header("Training SimLOB", f"{manifest.n_param_tuples} tuples, tau={manifest.tau}")
        config = _model_config(
            manifest.tau,
            manifest.depth * FIELDS_PER_LEVEL,
            n_blocks,
            latent,
            d_model,
            heads,
            positional_encoding,
            seed,
        )
        with console.create_progress() as progress:
            task = progress.add_task("Training...", total=epochs)

            def on_epoch(stats):
                progress.advance(task)
                console.print_epoch(stats)

            result = train_from_manifest(
                manifest,
                root,
                config,
                epochs=epochs,
                batch_size=batch,
                lr=lr,
                seed=seed,
                micro_batches=micro_batches,
                checkpoint_path=out,
                on_epoch=on_epoch,
            )
        console.print_mapping(
            "Training",
            {
                "Parameters": result.model.num_parameters(),
                "Initial test Err_r": result.initial_test_error,
                "Best test Err_r": result.best_test_error,
                "Best epoch": result.best_epoch,
            },
        )
        save_checkpoint(out, result.model)
        console.print_output_path(str(out), label="Checkpoint")
        if history is not None:
            write_json_report(result.history, history)
            console.print_output_path(str(history), label="History")


@app.command()
def encode(
    model_path: Path = typer.Option(..., "--model", help="SLOB1 checkpoint"),
    in_path: Path = typer.Option(..., "--in", help="LOBS1 (or CSV) series"),
    out: Path = typer.Option(..., "--out", "-o", help="Latent vectors CSV"),
):
    """Encode every full window of a series into latent vectors."""
    from simlob.calibration.objectives import encode_windows
    from simlob.network.checkpoint import load_checkpoint
    from simlob.output.writers import write_latents_csv

    with _contract_errors():
        model = load_checkpoint(model_path)
        series = _read_series(in_path)
        latents = encode_windows(model, series)
        starts = series.times[:: model.config.tau][: len(latents)].tolist()
        write_latents_csv(out, latents, starts)
        console.print(f"Encoded {len(latents)} windows of {model.config.tau} steps")
        console.print_output_path(str(out))


@app.command()
def reconstruct(
    model_path: Path = typer.Option(..., "--model", help="SLOB1 checkpoint"),
    in_path: Path = typer.Option(..., "--in", help="LOBS1 (or CSV) series"),
    report: Path = typer.Option(..., "--report", help="Per-window error CSV"),
    midprice: Path | None = typer.Option(
        None, "--midprice", help="Original vs reconstructed mid-price CSV"
    ),
    bins: int = typer.Option(50, "--bins", help="Histogram bins"),
):
    """Reconstruct every full window of a series and report the errors."""
    from simlob.analytics.errors import error_distribution
    from simlob.calibration.objectives import windows
    from simlob.data.dataset import invert_normalizer
    from simlob.network.checkpoint import load_checkpoint
    from simlob.output.writers import write_error_distribution_csv, write_midprice_csv

    with _contract_errors():
        model = load_checkpoint(model_path)
        series = _read_series(in_path)
        tau = model.config.tau
        segments = windows(series, tau, model.norm)
        dist = error_distribution(model, segments, bins=bins)
        console.print_error_distribution(dist)
        write_error_distribution_csv(report, dist)
        console.print_output_path(str(report))

        if midprice is not None:
            rebuilt = model.reconstruct(segments).astype(np.float64)
            if model.norm is not None:
                rebuilt = invert_normalizer(rebuilt, model.norm)
            raw = windows(series, tau, None)
            flat_raw = raw.reshape(-1, raw.shape[-1])
            flat_rebuilt = rebuilt.reshape(-1, rebuilt.shape[-1])
            write_midprice_csv(
                midprice,
                (flat_raw[:, 0] + flat_raw[:, 2]) / 2,
                (flat_rebuilt[:, 0] + flat_rebuilt[:, 2]) / 2,
                series.times[: len(flat_raw)].tolist(),
            )
            console.print_output_path(str(midprice))


@app.command()
def calibrate(
    target: Path = typer.Option(..., "--target", help="Target LOBS1 (or CSV) series"),
    out: Path = typer.Option(..., "--out", "-o", help="Result JSON"),
    objective: str = typer.Option(
        "latent", "--objective", help="midprice, rawlob or latent"
    ),
    model_path: Path | None = typer.Option(
        None, "--model", help="SLOB1 checkpoint (required for latent)"
    ),
    pop: int = typer.Option(40, "--pop", help="Swarm size"),
    iters: int = typer.Option(100, "--iters", help="PSO iterations"),
    seed: int = typer.Option(0, "--seed", help="Swarm seed"),
    sim_seed: int = typer.Option(0, "--sim-seed", help="Simulator seed"),
    per_evaluation_seeds: bool = typer.Option(
        False,
        "--per-evaluation-seeds",
        help="Give every evaluation its own simulator seed instead of a shared one",
    ),
    config: Path | None = typer.Option(
        None, "--config", help="Flat key=value simulator settings (parameters are ignored)"
    ),
    tau: int = typer.Option(100, "--tau", help="Window length when no model is given"),
    workers: int | None = typer.Option(None, "--workers", help="Parallel evaluations"),
    trace: Path | None = typer.Option(None, "--trace", help="Best-value trace CSV"),
):
    """Search PGPS parameters reproducing a target series with PSO.

    Examples:
        simlob calibrate --target data-1.lobs --objective latent --model m.slob --out r.json
        simlob calibrate --target data-1.lobs --objective midprice --pop 10 --iters 5 --out r.json
    """
    from simlob.calibration.evaluate import evaluate_calibration
    from simlob.calibration.pso import pso_calibrate
    from simlob.config import load_sim_file
    from simlob.models.calibration import OBJECTIVES, CalibrationTask
    from simlob.models.params import SimConfig
    from simlob.network.checkpoint import load_checkpoint
    from simlob.output.writers import write_json_report, write_trace_csv

    if objective not in OBJECTIVES:
        raise typer.BadParameter(
            f"choose from {', '.join(OBJECTIVES)}", param_hint="--objective"
        )
    with _contract_errors():
        series = _read_series(target)
        model = load_checkpoint(model_path) if model_path is not None else None
        sim_config = load_sim_file(config)[1] if config is not None else SimConfig()
        console.print_header(
            "Calibrating PGPS", f"objective={objective}, {pop} particles x {iters} iterations"
        )
        task = CalibrationTask(
            target=series,
            objective=objective,  # type: ignore[arg-type]
            model=model,
            population=pop,
            iterations=iters,
            seed=seed,
            sim_seed=sim_seed,
            common_random_numbers=not per_evaluation_seeds,
            tau=tau,
            sim_config=sim_config,
        )
        with console.create_progress() as progress:
            bar = progress.add_task("Calibrating...", total=iters)
            result = pso_calibrate(
                task, workers=workers, on_iteration=lambda *_: progress.advance(bar)
            )
        result.report = evaluate_calibration(
            series,
            result.best_params,
            seed=sim_seed,
            sim_config=sim_config,
            model=model,
            norm=task.norm,
            tau=task.tau,
        )
        console.print_calibration(result)
        write_json_report(result, out)
        console.print_output_path(str(out))
        if trace is not None:
            write_trace_csv(trace, result.trace)
            console.print_output_path(str(trace))


@app.command()
def report(
    model_path: Path = typer.Option(..., "--model", help="SLOB1 checkpoint"),
    test: Path = typer.Option(..., "--test", help="Dataset directory or manifest"),
    out: Path = typer.Option(Path("errors.csv"), "--out", "-o", help="Per-segment error CSV"),
    histogram: Path | None = typer.Option(
        None, "--histogram", help="Histogram CSV (default: <out>-histogram.csv)"
    ),
    bins: int = typer.Option(50, "--bins", help="Histogram bins"),
):
    """Reconstruction error distribution over a corpus's test split."""
    from simlob.analytics.errors import error_distribution
    from simlob.data.dataset import load_manifest, load_segments, stack_segments
    from simlob.network.checkpoint import load_checkpoint
    from simlob.output.writers import write_error_distribution_csv, write_histogram_csv

    with _contract_errors():
        model = load_checkpoint(model_path)
        manifest = load_manifest(test)
        root = test if test.is_dir() else test.parent
        segments = stack_segments(load_segments(manifest, root, "test"))
        dist = error_distribution(model, segments, bins=bins)
        console.print_error_distribution(dist)
        histogram = histogram or out.with_name(f"{out.stem}-histogram.csv")
        write_error_distribution_csv(out, dist)
        write_histogram_csv(histogram, dist)
        console.print_output_path(str(out))
        console.print_output_path(str(histogram))


@app.command()
def facts(
    in_path: Path = typer.Option(..., "--in", help="First LOBS1 (or CSV) series"),
    vs: Path = typer.Option(..., "--vs", help="Second LOBS1 (or CSV) series"),
    out: Path = typer.Option(Path("facts.csv"), "--out", "-o", help="Stylized facts CSV"),
    lag: int = typer.Option(1, "--lag", help="Autocorrelation lag"),
):
    """Compare the stylized facts of two series."""
    from simlob.analytics.stylized_facts import compare_stylized_facts
    from simlob.output.writers import write_facts_csv

    with _contract_errors():
        result = compare_stylized_facts(_read_series(in_path), _read_series(vs), lag)
        console.print_facts(result)
        write_facts_csv(out, result)
        console.print_output_path(str(out))


@app.command()
def attention(
    model_path: Path = typer.Option(..., "--model", help="SLOB1 checkpoint"),
    in_path: Path = typer.Option(..., "--in", help="LOBS1 (or CSV) series"),
    out: Path = typer.Option(..., "--out", "-o", help="Attention matrices CSV"),
    window: int = typer.Option(0, "--window", help="Index of the full window to inspect"),
    block: int = typer.Option(0, "--block", help="Encoder block"),
):
    """Export one encoder block's attention weights for one window."""
    from simlob.calibration.objectives import windows
    from simlob.network.checkpoint import load_checkpoint
    from simlob.network.interpret import export_attention
    from simlob.output.writers import write_attention_csv

    with _contract_errors():
        model = load_checkpoint(model_path)
        series = _read_series(in_path)
        tau = model.config.tau
        segments = windows(series, tau, model.norm)
        if not 0 <= window < len(segments):
            raise typer.BadParameter(
                f"series has {len(segments)} full windows", param_hint="--window"
            )
        if not 0 <= block < model.config.n_blocks:
            raise typer.BadParameter(
                f"model has {model.config.n_blocks} encoder blocks", param_hint="--block"
            )
        export = export_attention(model, segments[window], block)
        raw = windows(series, tau, None)[window]
        export.mid_prices = (raw[:, 0] + raw[:, 2]) / 2
        write_attention_csv(out, export)
        console.print_output_path(str(out))


@app.command()
def importance(
    model_path: Path = typer.Option(..., "--model", help="SLOB1 checkpoint"),
    out: Path = typer.Option(..., "--out", "-o", help="Feature importance CSV"),
    top_k: int = typer.Option(2, "--top-k", help="Model units to explain"),
    threshold: float = typer.Option(1.0, "--threshold", help="Minimum |weight| to list"),
):
    """Export feature-extraction weight magnitudes and the dominant units' inputs."""
    from simlob.network.checkpoint import load_checkpoint
    from simlob.network.interpret import dominant_latent_features, export_feature_importance
    from simlob.output.writers import write_feature_importance_csv

    with _contract_errors():
        model = load_checkpoint(model_path)
        write_feature_importance_csv(out, export_feature_importance(model))
        for unit in dominant_latent_features(model, top_k, threshold):
            console.print_mapping(
                f"Unit h{unit.latent_index} (mean |w| {unit.importance:.4g})",
                dict(unit.contributors) or {"(none above threshold)": ""},
            )
        console.print_output_path(str(out))


@app.command()
def sweep(
    data: Path = typer.Option(..., "--data", help="Dataset directory or manifest"),
    out: Path = typer.Option(Path("sweep.csv"), "--out", "-o", help="Sweep result CSV"),
    blocks: str = typer.Option("2,4,6,8", "--blocks", help="Comma-separated block counts"),
    latents: str = typer.Option(
        "64,128,256,512", "--latents", help="Comma-separated latent lengths"
    ),
    epochs: int = typer.Option(200, "--epochs", help="Training epochs per model"),
    batch: int = typer.Option(128, "--batch", help="Batch size"),
    lr: float = typer.Option(1e-4, "--lr", help="Adam learning rate"),
    d_model: int = typer.Option(256, "--d-model", help="Model width"),
    heads: int = typer.Option(8, "--heads", help="Attention heads"),
    seed: int = typer.Option(0, "--seed", help="Initialization and shuffling seed"),
):
    """Train one model per (blocks, latent length) pair and compare test errors."""
    from simlob.data.dataset import load_manifest, load_segments, stack_segments
    from simlob.network.training import sensitivity_sweep
    from simlob.output.writers import write_sweep_csv

    block_list = _int_list(blocks, "--blocks")
    latent_list = _int_list(latents, "--latents")
    with _contract_errors():
        manifest = load_manifest(data)
        root = data if data.is_dir() else data.parent
        base = _model_config(
            manifest.tau,
            manifest.depth * FIELDS_PER_LEVEL,
            block_list[0],
            latent_list[0],
            d_model,
            heads,
            False,
            seed,
        )
        points = sensitivity_sweep(
            stack_segments(load_segments(manifest, root, "train")),
            stack_segments(load_segments(manifest, root, "test")),
            base,
            blocks=block_list,
            latents=latent_list,
            norm=manifest.norm,
            epochs=epochs,
            batch_size=batch,
            lr=lr,
            seed=seed,
        )
        console.print_sweep(points)
        write_sweep_csv(out, points)
        console.print_output_path(str(out))


def cli_dispatch(argv: list[str] | None = None) -> int:
    """Run the CLI on argv and return the exit status: 0 ok, 1 contract error, 2 usage."""
    command = typer.main.get_command(app)
    try:
        command.main(args=argv, prog_name="simlob", standalone_mode=True)
    except SystemExit as e:
        # click reports usage errors, aborts and typer.Exit through the exit code
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1
    except SimLOBError as e:
        console.print_error(str(e))
        return 1
    return 0


def run() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    run()
