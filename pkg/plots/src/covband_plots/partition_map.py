"""Live-partition maps from tree snapshots (one or two dimensions)."""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib import cm, colors, patches

from .io import load_tree_snapshot


def _bounds(entry: dict) -> tuple[list[float], list[float]]:
    side = 2.0 ** -entry["depth"]
    lo = [(c - 1) * side for c in entry["coords"]]
    hi = [c * side for c in entry["coords"]]
    return lo, hi


def plot_partition_map(in_json, out_path=None):
    """Draw the live bins, colored by how many arms each still carries."""
    snap = load_tree_snapshot(in_json)
    d = snap["d"]
    if d > 2:
        raise ValueError(f"partition maps need d <= 2, snapshot has d={d}")
    bins = snap["live_bins"]
    max_arms = max((len(b["active_arms"]) for b in bins), default=1)
    norm = colors.Normalize(vmin=1, vmax=max(2, max_arms))
    cmap = cm.viridis
    fig, ax = plt.subplots(figsize=(7, 4.5 if d == 2 else 2.5))
    for entry in bins:
        lo, hi = _bounds(entry)
        color = cmap(norm(len(entry["active_arms"])))
        if d == 1:
            rect = patches.Rectangle((lo[0], 0.0), hi[0] - lo[0], 1.0,
                                     facecolor=color, edgecolor="black", linewidth=0.6)
        else:
            rect = patches.Rectangle((lo[0], lo[1]), hi[0] - lo[0], hi[1] - lo[1],
                                     facecolor=color, edgecolor="black", linewidth=0.6)
        ax.add_patch(rect)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("x1")
    if d == 2:
        ax.set_ylabel("x2")
    else:
        ax.set_yticks([])
    fig.colorbar(cm.ScalarMappable(norm=norm, cmap=cmap), ax=ax, label="surviving arms")
    fig.tight_layout()
    if out_path is not None:
        fig.savefig(out_path, dpi=120)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True, help="tree snapshot JSON")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    plot_partition_map(args.input, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
