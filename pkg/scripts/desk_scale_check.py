#!/usr/bin/env python3
"""Run the desk-scale experiments and print what they measured.

Usage:
    # Install package first (recommended)
    pip install -e .

    # Then run every check, or pick some
    python scripts/desk_scale_check.py --all
    python scripts/desk_scale_check.py --representation --seeds 1 --workers 4
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

try:
    from simlob import __version__
except ImportError:
    # Fallback for development without install
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
    from simlob import __version__

from simlob.calibration.objectives import ObjectiveEvaluator
from simlob.calibration.pso import pso_calibrate
from simlob.config import Config, set_config
from simlob.data.dataset import build_dataset, load_segments, stack_segments
from simlob.models.calibration import CalibrationTask
from simlob.models.network import ModelConfig
from simlob.models.params import TARGET_TUPLES, PgpsParams, SimConfig, bounds_arrays
from simlob.network.autoencoder import SimLOB
from simlob.network.training import evaluate, train
from simlob.sim.pgps import simulate
from simlob.utils.seeding import child_rng


def setup_logging(verbose: bool = False, debug: bool = False) -> None:
    """Configure logging based on verbosity level."""
    if debug:
        level = logging.DEBUG
    elif verbose:
        level = logging.INFO
    else:
        level = logging.WARNING

    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def banner(title: str) -> None:
    print(f"\n{'='*50}")
    print(title)
    print("=" * 50)


def desk_model_config(seed: int) -> ModelConfig:
    return ModelConfig(
        tau=100, d_model=64, n_blocks=2, latent_len=32, heads=8, dtype="float32", seed=seed
    )


def column_mean_baseline(segments: np.ndarray) -> float:
    means = segments.mean(axis=1, keepdims=True)
    return float(((segments - means) ** 2).mean())


def build_corpus(root: Path):
    banner("Building 20 x 5000-step corpus")
    started = time.perf_counter()
    manifest = build_dataset(root, n_tuples=20, steps=5000, split=0.8, seed=0, tau=100)
    train_data = stack_segments(load_segments(manifest, root, "train"))
    test_data = stack_segments(load_segments(manifest, root, "test"))
    print(f"Train segments: {len(train_data)}, test segments: {len(test_data)}")
    print(f"Took {time.perf_counter() - started:.1f}s")
    return manifest, train_data, test_data


def check_representation(corpus, seeds: int, epochs: int) -> tuple[bool, SimLOB]:
    """Mean test Err_r at most half the column-mean baseline, for every seed."""
    banner("Representation quality")
    manifest, train_data, test_data = corpus
    baseline = column_mean_baseline(test_data)
    print(f"Column-mean baseline Err_r: {baseline:.6f}")

    ok = True
    first_model = None
    for seed in range(seeds):
        started = time.perf_counter()
        model = SimLOB(desk_model_config(seed), norm=manifest.norm)
        result = train(
            model, train_data, test_data, epochs=epochs, batch_size=32, lr=1e-3, seed=seed
        )
        error = evaluate(model, test_data)
        passed = error <= 0.5 * baseline
        ok &= passed
        if first_model is None:
            first_model = model
        print(
            f"seed {seed}: initial {result.initial_test_error:.6f} -> best {error:.6f} "
            f"(epoch {result.best_epoch}, {time.perf_counter() - started:.0f}s) "
            f"{'PASS' if passed else 'FAIL'}"
        )
    return ok, first_model


def check_calibration(model: SimLOB, seeds: int, workers: int) -> bool:
    """PSO halves the initial best latent objective in most seeds."""
    banner("Calibration smoke (data-1, pop 8, 10 iterations)")
    target = simulate(TARGET_TUPLES["data-1"], SimConfig(horizon=3600, seed=11))
    successes = 0
    for seed in range(seeds):
        task = CalibrationTask(
            target=target,
            objective="latent",
            model=model,
            population=8,
            iterations=10,
            seed=seed,
            sim_seed=11,
        )
        result = pso_calibrate(task, workers=workers)
        halved = result.trace[-1] <= 0.5 * result.trace[0]
        successes += halved
        print(
            f"seed {seed}: {result.trace[0]:.4g} -> {result.trace[-1]:.4g} "
            f"in {result.wall_time:.0f}s, {result.failures} failures "
            f"{'PASS' if halved else 'miss'}"
        )
        print(f"  best params: {result.best_params.model_dump()}")
    return successes * 3 >= seeds * 2


def check_ranking(model: SimLOB, candidates: int = 100) -> bool:
    """The generating tuple beats at least 95% of random tuples on the latent objective."""
    banner("Latent ranking")
    config = SimConfig(horizon=1000, seed=5)
    shared = config.model_copy(update={"seed": 6})
    truth = TARGET_TUPLES["data-1"]
    evaluator = ObjectiveEvaluator("latent", simulate(truth, config), model=model)
    true_score = evaluator(simulate(truth, shared))

    rng = child_rng(2024, 0)
    lower, upper = bounds_arrays()
    beaten = 0
    for _ in range(candidates):
        params = PgpsParams.from_vector(lower + (upper - lower) * rng.random(len(lower)))
        beaten += true_score < evaluator(simulate(params, shared))
    print(f"True tuple objective {true_score:.4g} beats {beaten}/{candidates} random tuples")
    return beaten >= 0.95 * candidates


def main() -> int:
    parser = argparse.ArgumentParser(description="Desk-scale SimLOB experiments")
    parser.add_argument("--all", action="store_true", help="Run every check")
    parser.add_argument("--representation", action="store_true", help="Training quality")
    parser.add_argument("--calibration", action="store_true", help="PSO smoke run")
    parser.add_argument("--ranking", action="store_true", help="Latent ranking")
    parser.add_argument("--seeds", type=int, default=3, help="Seeds per experiment")
    parser.add_argument("--epochs", type=int, default=20, help="Training epochs")
    parser.add_argument("--workers", type=int, default=8, help="Parallel simulations")
    parser.add_argument("--workdir", type=Path, default=None, help="Keep the corpus here")
    parser.add_argument("-v", "--verbose", action="store_true", help="Info logging")
    parser.add_argument("--debug", action="store_true", help="Debug logging")
    args = parser.parse_args()

    setup_logging(args.verbose, args.debug)
    set_config(Config(workers=args.workers))
    if args.all:
        args.representation = args.calibration = args.ranking = True
    if not (args.representation or args.calibration or args.ranking):
        parser.error("choose --all or at least one check")

    print(f"simlob {__version__}")
    results: dict[str, bool] = {}
    with tempfile.TemporaryDirectory() as scratch:
        root = args.workdir or Path(scratch) / "corpus"
        corpus = build_corpus(root)
        # The later checks need a trained model, so it is always trained once
        ok, model = check_representation(
            corpus, args.seeds if args.representation else 1, args.epochs
        )
        if args.representation:
            results["representation"] = ok
        if args.calibration:
            results["calibration"] = check_calibration(model, args.seeds, args.workers)
        if args.ranking:
            results["ranking"] = check_ranking(model)

    banner("Summary")
    for name, passed in results.items():
        print(f"{name:16s} {'PASS' if passed else 'FAIL'}")
    return 0 if all(results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
