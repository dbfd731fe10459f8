"""Synthetic training corpus: sample parameters, simulate, segment, split, normalize, persist.

Shards store raw integer snapshots (LOBS1); normalization is applied at load time from the
NormStats recorded in the manifest, which are fitted on the training split only.
"""

import hashlib
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from simlob.exceptions import ParameterError, PersistenceError, SimLOBError, SimulationError
from simlob.lob.io import read_lobs, write_lobs
from simlob.models.book import DEFAULT_DEPTH, FIELDS_PER_LEVEL, LobSeries
from simlob.models.dataset import (
    DEFAULT_TAU,
    DatasetManifest,
    NormStats,
    Segment,
    ShardInfo,
    Split,
)
from simlob.models.params import PgpsParams, SimConfig, bounds_arrays
from simlob.sim.pgps import simulate
from simlob.utils.parallel import parallel_map
from simlob.utils.seeding import child_rng, child_seed

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SHARD_DIR = "shards"
MAX_SIM_ATTEMPTS = 3

# Stream keys for child generators
_SAMPLE_STREAM = 0
_SPLIT_STREAM = 1
_RESAMPLE_STREAM = 2
_SIM_STREAM = 3


def sample_param_tuples(n: int, seed: int = 0) -> list[PgpsParams]:
    """Draw n tuples, each coordinate uniform within its calibration bounds.

    Raises:
        ParameterError: If n is not positive
    """
    if n <= 0:
        raise ParameterError(f"n must be positive, got {n}")
    lower, upper = bounds_arrays()
    draws = child_rng(seed, _SAMPLE_STREAM).random((n, lower.size))
    return [PgpsParams.from_vector(row) for row in lower + (upper - lower) * draws]


def segment_series(
    series: LobSeries | np.ndarray,
    tau: int = DEFAULT_TAU,
    stride: int | None = None,
    source_index: int = 0,
) -> list[Segment]:
    """Cut consecutive windows of `tau` steps every `stride` steps (default tau).

    A trailing remainder shorter than tau is dropped; a series shorter than tau gives [].
    """
    if tau <= 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    stride = tau if stride is None else stride
    if stride <= 0:
        raise ParameterError(f"stride must be positive, got {stride}")

    values = series.values if isinstance(series, LobSeries) else np.asarray(series)
    return [
        Segment(values=values[start : start + tau], source=(source_index, start))
        for start in range(0, values.shape[0] - tau + 1, stride)
    ]


# ---------------------------------------------------------------- normalization


@dataclass
class _Moments:
    """Count, mean and sum of squared deviations, mergeable across workers."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "_Moments":
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(values.size, mean, float(((values - mean) ** 2).sum()))

    def merge(self, other: "_Moments") -> "_Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta**2 * self.n * other.n / n
        return _Moments(n, mean, m2)

    def center_scale(self, label: str) -> tuple[float, float]:
        std = float(np.sqrt(self.m2 / self.n)) if self.n else 0.0
        if std == 0.0:
            logger.warning("Zero variance in %s columns; using scale 1", label)
            std = 1.0
        return self.mean, std


def _split_moments(values: np.ndarray) -> tuple[_Moments, _Moments]:
    """Moments of price columns and of volume columns of (..., width) data."""
    values = np.asarray(values)
    return _Moments.of(values[..., 0::2]), _Moments.of(values[..., 1::2])


def _stats_from_moments(prices: _Moments, volumes: _Moments) -> NormStats:
    price_center, price_scale = prices.center_scale("price")
    volume_center, volume_scale = volumes.center_scale("volume")
    return NormStats(
        price_center=price_center,
        price_scale=price_scale,
        volume_center=volume_center,
        volume_scale=volume_scale,
    )


def fit_normalizer(segments: Sequence[Segment] | np.ndarray) -> NormStats:
    """Population mean/std of all price entries and of all volume entries.

    Raises:
        ParameterError: If there are no segments
    """
    if len(segments) == 0:
        raise ParameterError("Cannot fit a normalizer on an empty training set")
    if isinstance(segments, np.ndarray):
        data = segments
    else:
        data = np.stack([s.values for s in segments])
    return _stats_from_moments(*_split_moments(data))


def apply_normalizer(data: Segment | np.ndarray, stats: NormStats) -> Segment | np.ndarray:
    """Map prices to (p - price_center) / price_scale and volumes likewise."""
    if isinstance(data, Segment):
        return Segment(apply_normalizer(data.values, stats), data.source, normalized=True)
    values = np.asarray(data, dtype=np.float64)
    center, scale = stats.column_affine(values.shape[-1])
    return (values - center) / scale


def invert_normalizer(data: Segment | np.ndarray, stats: NormStats) -> Segment | np.ndarray:
    """Inverse of apply_normalizer."""
    if isinstance(data, Segment):
        return Segment(invert_normalizer(data.values, stats), data.source, normalized=False)
    values = np.asarray(data, dtype=np.float64)
    center, scale = stats.column_affine(values.shape[-1])
    return values * scale + center


# -------------------------------------------------------------------- building


@dataclass(frozen=True)
class _TupleJob:
    index: int
    params: PgpsParams
    sim_config: SimConfig
    tau: int
    split: float
    seed: int
    root: Path


@dataclass
class _TupleResult:
    index: int
    params: PgpsParams
    shards: list[ShardInfo]
    segments: int
    price_moments: _Moments
    volume_moments: _Moments


def _resample(seed: int, index: int, attempt: int) -> PgpsParams:
    lower, upper = bounds_arrays()
    draws = child_rng(seed, _RESAMPLE_STREAM, index, attempt).random(lower.size)
    return PgpsParams.from_vector(lower + (upper - lower) * draws)


def _simulate_checked(params: PgpsParams, config: SimConfig) -> LobSeries:
    try:
        return simulate(params, config)
    except SimLOBError as e:
        raise SimulationError(f"Simulation failed for {params}: {e}") from e
    except Exception as e:  # noqa: BLE001
        raise SimulationError(f"Unexpected simulator failure for {params}: {e!r}") from e


def _simulate_with_retries(job: _TupleJob) -> tuple[PgpsParams, LobSeries]:
    """Simulate the job's tuple, resampling parameters after each failure."""
    params = job.params
    try:
        for attempt in Retrying(
            stop=stop_after_attempt(MAX_SIM_ATTEMPTS),
            retry=retry_if_exception_type(SimulationError),
        ):
            with attempt:
                number = attempt.retry_state.attempt_number
                if number > 1:
                    params = _resample(job.seed, job.index, number)
                    logger.warning(
                        "Tuple %d: retry %d with resampled parameters", job.index, number - 1
                    )
                config = job.sim_config.model_copy(
                    update={"seed": child_seed(job.seed, _SIM_STREAM, job.index, number)}
                )
                series = _simulate_checked(params, config)
    except RetryError as e:
        raise SimulationError(
            f"Tuple {job.index} failed after {MAX_SIM_ATTEMPTS} attempts"
        ) from e.last_attempt.exception()
    return params, series


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_shard(
    job: _TupleJob, split: Split, segments: list[Segment], tick_size: int
) -> ShardInfo:
    relative = Path(SHARD_DIR) / f"tuple-{job.index:05d}-{split}.lobs"
    path = job.root / relative
    if segments:
        values = np.concatenate([s.values for s in segments])
        times = np.concatenate([np.arange(s.source[1], s.source[1] + s.tau) for s in segments])
    else:
        values = np.zeros((0, job.sim_config.depth * FIELDS_PER_LEVEL), dtype=np.int64)
        times = np.zeros(0, dtype=np.uint32)
    write_lobs(path, LobSeries(values=values, times=times, tick_size=tick_size))
    return ShardInfo(
        path=relative.as_posix(),
        split=split,
        tuple_index=job.index,
        count=len(segments),
        offsets=[s.source[1] for s in segments],
        sha256=_sha256(path),
    )


def _generate_tuple(job: _TupleJob) -> _TupleResult:
    """Worker: simulate one tuple, split its segments, write its two shards."""
    params, series = _simulate_with_retries(job)
    segments = segment_series(series, job.tau, source_index=job.index)

    order = child_rng(job.seed, _SPLIT_STREAM, job.index).permutation(len(segments))
    n_train = int(round(job.split * len(segments)))
    train = [segments[i] for i in sorted(order[:n_train])]
    test = [segments[i] for i in sorted(order[n_train:])]

    prices, volumes = _Moments(), _Moments()
    if train:
        prices, volumes = _split_moments(np.stack([s.values for s in train]))

    shards = [
        _write_shard(job, "train", train, series.tick_size),
        _write_shard(job, "test", test, series.tick_size),
    ]
    logger.debug("Tuple %d: %d train / %d test segments", job.index, len(train), len(test))
    return _TupleResult(job.index, params, shards, len(segments), prices, volumes)


def build_dataset(
    out_dir: Path,
    n_tuples: int = 2000,
    steps: int = 50_000,
    split: float = 0.8,
    seed: int = 0,
    tau: int = DEFAULT_TAU,
    sim_config: SimConfig | None = None,
    workers: int | None = None,
    on_tuple_done: Callable[[int], None] | None = None,
) -> DatasetManifest:
    """Generate the corpus into out_dir and write its manifest.

    Each tuple is simulated for `steps` recorded steps (sim_config supplies the remaining
    settings), cut into non-overlapping tau-step segments and split per tuple under `seed`.
    Shards are written by the workers; the manifest is merged here.

    Returns:
        The manifest, also saved as out_dir/manifest.json
    """
    if not 0.0 <= split <= 1.0:
        raise ParameterError(f"split must be in [0, 1], got {split}")
    if steps < tau:
        raise ParameterError(f"steps ({steps}) must be at least tau ({tau})")

    base = (sim_config or SimConfig()).model_copy(update={"horizon": steps})
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        _TupleJob(i, params, base, tau, split, seed, out_dir)
        for i, params in enumerate(sample_param_tuples(n_tuples, seed))
    ]
    logger.info("Generating %d tuples x %d steps into %s", n_tuples, steps, out_dir)

    results = parallel_map(
        _generate_tuple,
        jobs,
        workers=workers,
        on_done=(lambda i, _: on_tuple_done(i)) if on_tuple_done else None,
    )

    prices, volumes = _Moments(), _Moments()
    for result in results:
        prices = prices.merge(result.price_moments)
        volumes = volumes.merge(result.volume_moments)
    if prices.n == 0:
        raise ParameterError("Training split is empty; cannot fit the normalizer")

    manifest = DatasetManifest(
        n_param_tuples=n_tuples,
        segments_per_tuple=steps // tau,
        split_fraction=split,
        seed=seed,
        tau=tau,
        steps=steps,
        warmup=base.warmup,
        depth=base.depth,
        tick_size=base.tick_size,
        norm=_stats_from_moments(prices, volumes),
        params=[r.params for r in results],
        shards=[shard for r in results for shard in r.shards],
    )
    save_manifest(manifest, out_dir)
    logger.info(
        "Dataset ready: %d train / %d test segments",
        manifest.count("train"),
        manifest.count("test"),
    )
    return manifest


# --------------------------------------------------------------------- loading


def save_manifest(manifest: DatasetManifest, out_dir: Path) -> Path:
    path = out_dir / MANIFEST_NAME
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def load_manifest(path: Path) -> DatasetManifest:
    """Load a manifest from a file or from a dataset directory.

    Raises:
        PersistenceError: If missing or malformed
    """
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        return DatasetManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise PersistenceError(f"Cannot read manifest: {e}", path=str(path)) from e
    except ValueError as e:
        raise PersistenceError(f"Malformed manifest: {e}", path=str(path)) from e


def verify_manifest(manifest: DatasetManifest, root: Path) -> None:
    """Check every shard's sha256 against the manifest.

    Raises:
        PersistenceError: On a missing shard or checksum mismatch
    """
    for shard in manifest.shards:
        path = root / shard.path
        if not path.exists():
            raise PersistenceError("Shard missing", path=str(path))
        if _sha256(path) != shard.sha256:
            raise PersistenceError("Shard checksum mismatch", path=str(path))


def load_segments(
    manifest: DatasetManifest, root: Path, split: Split = "train", normalized: bool = True
) -> list[Segment]:
    """Read all segments of one split, in shard then offset order."""
    segments: list[Segment] = []
    for shard in manifest.shards_for(split):
        series = read_lobs(root / shard.path)
        if len(series) != shard.count * manifest.tau:
            raise PersistenceError(
                f"Shard holds {len(series)} rows, expected {shard.count * manifest.tau}",
                path=str(root / shard.path),
            )
        for k, offset in enumerate(shard.offsets):
            values = series.values[k * manifest.tau : (k + 1) * manifest.tau]
            segment = Segment(values=values, source=(shard.tuple_index, offset))
            segments.append(apply_normalizer(segment, manifest.norm) if normalized else segment)
    return segments


def stack_segments(segments: Sequence[Segment], dtype: str | np.dtype = np.float64) -> np.ndarray:
    """Stack segments into an (N, tau, width) array."""
    if not segments:
        return np.zeros((0, DEFAULT_TAU, FIELDS_PER_LEVEL * DEFAULT_DEPTH), dtype=dtype)
    return np.stack([s.values for s in segments]).astype(dtype)
