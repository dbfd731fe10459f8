"""JSON and CSV writers for reports and plot data.

CSV files may start with `# key: value` metadata lines describing how the numbers were
computed; the header row follows them.
"""

import csv
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, is_dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from simlob.models.analytics import ErrorDistribution, StylizedFactsReport
from simlob.models.network import SweepPoint
from simlob.network.interpret import AttentionExport, FeatureImportance


def serialize_for_json(obj: Any) -> Any:
    """Convert objects (pydantic models, dataclasses, numpy values) to JSON-serializable form."""
    if isinstance(obj, (datetime, date)):
        return obj.isoformat()
    elif isinstance(obj, BaseModel):
        return serialize_for_json(obj.model_dump())
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.generic):
        return obj.item()
    elif isinstance(obj, Path):
        return str(obj)
    elif isinstance(obj, dict):
        return {k: serialize_for_json(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [serialize_for_json(item) for item in obj]
    elif is_dataclass(obj) and not isinstance(obj, type):
        return serialize_for_json(asdict(obj))
    elif isinstance(obj, float) and not np.isfinite(obj):
        # JSON has no inf/nan literals
        return str(obj)
    return obj


def write_json_report(report: Any, output_path: Path) -> Path:
    """Write any report object as pretty JSON, creating parent directories."""
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(serialize_for_json(report), f, indent=2, ensure_ascii=False)
    return output_path


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in (metadata or {}).items():
            f.write(f"# {key}: {value}\n")
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def read_csv_rows(path: Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """(metadata, header, rows) of a file written by write_csv."""
    metadata: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as f:
        lines = f.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# ") and not body:
            key, _, value = line[2:].partition(": ")
            metadata[key] = value
        else:
            body.append(line)
    parsed = list(csv.reader(body))
    return metadata, parsed[0], parsed[1:]


def write_facts_csv(path: Path, report: StylizedFactsReport) -> Path:
    """One row per statistic: value on A, value on B and the reported difference."""
    rows = [
        ["logret_wasserstein", "", "", report.logret_wasserstein],
        ["autocorrelation", report.a.autocorrelation, report.b.autocorrelation,
         report.autocorr_delta],
        ["volatility_clustering", report.a.volatility_clustering,
         report.b.volatility_clustering, report.vol_clustering_delta],
        ["volume_volatility_correlation", report.a.volume_volatility_correlation,
         report.b.volume_volatility_correlation, report.vol_vol_corr_delta],
        ["return_mean", report.a.return_mean, report.b.return_mean,
         abs(report.a.return_mean - report.b.return_mean)],
        ["return_std", report.a.return_std, report.b.return_std,
         abs(report.a.return_std - report.b.return_std)],
    ]
    metadata = {"lag": report.lag, **report.estimators}
    return write_csv(path, ["statistic", "a", "b", "delta"], rows, metadata)


def write_error_distribution_csv(path: Path, dist: ErrorDistribution) -> Path:
    """Per-segment errors, with the summary statistics as metadata."""
    metadata: dict[str, Any] = {
        "segments": dist.count,
        "mean": dist.mean,
        "std": dist.std,
        "mode": dist.mode,
        **dist.quantiles,
    }
    if dist.precedence_violation_rate is not None:
        metadata["precedence_violation_rate"] = dist.precedence_violation_rate
    return write_csv(path, ["segment", "err_r"], enumerate(dist.errors), metadata)


def write_histogram_csv(path: Path, dist: ErrorDistribution) -> Path:
    edges = dist.histogram_edges
    rows = (
        [edges[i], edges[i + 1], count] for i, count in enumerate(dist.histogram_counts)
    )
    return write_csv(path, ["bin_start", "bin_end", "count"], rows, {"mode": dist.mode})


def write_latents_csv(path: Path, latents: np.ndarray, times: Sequence[int] | None = None) -> Path:
    """One row per window: its first source step and its latent vector."""
    latents = np.atleast_2d(latents)
    times = list(times) if times is not None else list(range(len(latents)))
    header = ["window_start"] + [f"z{i}" for i in range(latents.shape[1])]
    rows = ([t, *row.tolist()] for t, row in zip(times, latents))
    return write_csv(path, header, rows)


def write_attention_csv(path: Path, export: AttentionExport) -> Path:
    """Attention matrices stacked by head; each row is one query step."""
    heads, tau, _ = export.weights.shape
    header = ["head", "step", "mid_price"] + [f"k{j}" for j in range(tau)]
    rows = (
        [h, t, float(export.mid_prices[t]), *export.weights[h, t].tolist()]
        for h in range(heads)
        for t in range(tau)
    )
    return write_csv(path, header, rows, {"heads": heads, "tau": tau})


def write_feature_importance_csv(path: Path, importance: FeatureImportance) -> Path:
    """Mean |weight| per input feature, then per model unit."""
    rows = [
        ["feature", i, label, float(v)]
        for i, (label, v) in enumerate(
            zip(importance.feature_labels, importance.feature_importance)
        )
    ]
    rows += [
        ["unit", i, f"h{i}", float(v)] for i, v in enumerate(importance.latent_importance)
    ]
    return write_csv(path, ["kind", "index", "label", "mean_abs_weight"], rows)


def write_midprice_csv(
    path: Path, original: np.ndarray, reconstructed: np.ndarray, times: Sequence[int] | None = None
) -> Path:
    """Original vs reconstructed mid-price series for plotting."""
    times = list(times) if times is not None else list(range(len(original)))
    rows = (
        [t, float(a), float(b)] for t, a, b in zip(times, original, reconstructed)
    )
    return write_csv(path, ["time", "original", "reconstructed"], rows)


def write_sweep_csv(path: Path, points: Sequence[SweepPoint]) -> Path:
    rows = ([p.n_blocks, p.latent_len, p.test_error, p.best_epoch] for p in points)
    return write_csv(path, ["n_blocks", "latent_len", "test_error", "best_epoch"], rows)


def write_trace_csv(path: Path, trace: Sequence[float]) -> Path:
    return write_csv(path, ["iteration", "best_value"], enumerate(trace))
