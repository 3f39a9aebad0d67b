"""Figure scripts for covband outputs.

Read-only consumers of the simulation harness's trace CSVs, summary
JSONs, and partition snapshots; one script per plot kind. Inputs are
never modified and figures carry no timestamps, so reruns reproduce
identical files.
"""

from .io import SchemaError, TraceTable, load_summary_json, load_trace_csv, load_tree_snapshot
from .partition_map import plot_partition_map
from .regret_curve import plot_regret_curve
from .scaling_fit import plot_scaling_fit

__all__ = [
    "SchemaError",
    "TraceTable",
    "load_summary_json",
    "load_trace_csv",
    "load_tree_snapshot",
    "plot_partition_map",
    "plot_regret_curve",
    "plot_scaling_fit",
]

__version__ = "0.1.0"
