"""Mean regret curves with confidence bands, one series per run."""

from __future__ import annotations

import argparse
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import load_trace_csv


def plot_regret_curve(in_csv, out_path=None):
    """Render mean cumulative regret vs t for every run in the CSV."""
    table = load_trace_csv(in_csv)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for run_id in table.run_ids:
        times, matrix = table.series(run_id)
        values = np.asarray(matrix)
        mean = values.mean(axis=0)
        reps = values.shape[0]
        sd = values.std(axis=0, ddof=1) if reps > 1 else np.zeros_like(mean)
        half = 1.96 * sd / math.sqrt(reps)
        (line,) = ax.plot(times, mean, label=run_id)
        ax.fill_between(times, mean - half, mean + half, alpha=0.25, color=line.get_color())
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    fig.tight_layout()
    if out_path is not None:
        fig.savefig(out_path, dpi=120)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True, help="trace CSV")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    plot_regret_curve(args.input, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
