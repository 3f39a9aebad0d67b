"""Log-log regret growth against horizon, annotated with the fitted slope."""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, load_summary_json


def annotation_text(label: str, entry: dict) -> str:
    text = f"{label}: fitted slope {entry['slope']:.2f}"
    if "theory_slope" in entry:
        text += f" (target {entry['theory_slope']:.2f})"
    return text


def plot_scaling_fit(in_json, out_path=None):
    """Render per-policy final regret vs n with the fitted power law."""
    doc = load_summary_json(in_json)
    scaling = doc.get("scaling")
    runs = doc.get("runs")
    if not scaling or not runs:
        raise SchemaError(f"{in_json}: summary lacks a fitted exponent block")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    lines = []
    for label, entry in sorted(scaling.items()):
        points = [(r["n"], r["final"]["mean"]) for r in runs[label]]
        ns = np.asarray([p[0] for p in points], dtype=float)
        means = np.asarray([p[1] for p in points], dtype=float)
        (dots,) = ax.plot(ns, means, "o", label=label)
        grid = np.geomspace(ns.min(), ns.max(), 64)
        ax.plot(
            grid,
            np.exp(entry["intercept"]) * grid ** entry["slope"],
            "-",
            color=dots.get_color(),
        )
        lines.append(annotation_text(label, entry))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("mean final regret")
    ax.legend()
    ax.text(
        0.02,
        0.98,
        "\n".join(lines),
        transform=ax.transAxes,
        va="top",
        fontsize=9,
        bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8},
    )
    fig.tight_layout()
    if out_path is not None:
        fig.savefig(out_path, dpi=120)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True, help="sweep summary JSON")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    plot_scaling_fit(args.input, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
