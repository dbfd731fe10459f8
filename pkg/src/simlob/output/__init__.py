"""Output formatters for SimLOB."""

from simlob.output.console import Console
from simlob.output.writers import (
    read_csv_rows,
    serialize_for_json,
    write_attention_csv,
    write_csv,
    write_error_distribution_csv,
    write_facts_csv,
    write_feature_importance_csv,
    write_histogram_csv,
    write_json_report,
    write_latents_csv,
    write_midprice_csv,
    write_sweep_csv,
    write_trace_csv,
)

__all__ = [
    "Console",
    "read_csv_rows",
    "serialize_for_json",
    "write_attention_csv",
    "write_csv",
    "write_error_distribution_csv",
    "write_facts_csv",
    "write_feature_importance_csv",
    "write_histogram_csv",
    "write_json_report",
    "write_latents_csv",
    "write_midprice_csv",
    "write_sweep_csv",
    "write_trace_csv",
]
