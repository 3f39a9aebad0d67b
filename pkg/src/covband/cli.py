"""Command-line entry point: run spec files, sweeps, and check suites."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .harness import (
    RunConfig,
    peeling_check,
    run_many,
    run_once_with_policy,
    run_sweep,
    static_regret_bound,
    write_json,
    write_trace_csv,
)
from .machines import build_machine
from .partition import AdaptiveTree, BinId, bin_of


def _default_seed(args_seed, spec_seed) -> int:
    if args_seed is not None:
        return args_seed
    if spec_seed is not None:
        return int(spec_seed)
    return int(os.environ.get("COVBAND_SEED", "0"))


def _run_config_from_doc(doc: dict, args) -> RunConfig:
    return RunConfig(
        machine=doc["machine"],
        policy=doc["policy"],
        n=int(doc["n"]),
        horizon_mode=doc.get("horizon_mode", "fixed"),
        reps=int(args.reps if args.reps is not None else doc.get("reps", 1)),
        base_seed=_default_seed(args.seed, doc.get("base_seed")),
        checkpoints=tuple(doc["checkpoints"]) if "checkpoints" in doc else None,
        realized_rewards=bool(doc.get("realized_rewards", False)),
        name=doc.get("name", ""),
    )


def _emit(outdir: Path, stem: str, summaries, doc: dict, fmt: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    if fmt in ("csv", "both"):
        write_trace_csv(outdir / f"{stem}.csv", summaries)
    if fmt in ("json", "both"):
        write_json(outdir / f"{stem}.json", doc)


def _cmd_run(args) -> int:
    doc = json.loads(Path(args.spec).read_text())
    outdir = Path(args.out)
    if "sweep" in doc:
        sw = doc["sweep"]
        result = run_sweep(
            machine_spec=sw["machine"],
            policy_specs=sw["policies"],
            n_values=sw["n_values"],
            reps=int(args.reps if args.reps is not None else sw.get("reps", 1)),
            base_seed=_default_seed(args.seed, sw.get("base_seed")),
            horizon_mode=sw.get("horizon_mode", "fixed"),
            n_jobs=args.threads,
        )
        stem = doc.get("name", "sweep")
        flat = [s for batch in result.summaries.values() for s in batch]
        _emit(outdir, stem, flat, result.to_dict(), args.format)
        return 0
    config = _run_config_from_doc(doc, args)
    summary = run_many(config, n_jobs=args.threads)
    _emit(outdir, config.run_id, [summary], summary.to_dict(), args.format)
    if config.policy.get("policy") == "abse" and not config.policy.get("params", {}).get("doubling"):
        _, policy = run_once_with_policy(config, 0)
        write_json(outdir / f"{config.run_id}_tree.json", policy.snapshot())
    return 0


# ---------------------------------------------------------------------------
# Check suites
# ---------------------------------------------------------------------------


def _check_partition(args) -> bool:
    rng = np.random.default_rng(_default_seed(args.seed, None))
    ok = True
    for trial in range(20):
        d = int(rng.integers(1, 4))
        tree = AdaptiveTree(d, max_depth=5)
        for _ in range(40):
            live = tree.live_bins()
            b = live[int(rng.integers(len(live)))]
            if b.depth < tree.max_depth:
                tree.burst(b)
        finest = 2**tree.max_depth
        total = sum((finest // b.per_side) ** d for b in tree.live_bins())
        if total != finest**d:
            print(f"[partition] volume conservation FAILED (d={d})")
            ok = False
        pts = rng.random((500, d))
        for x in pts:
            covering = [b for b in tree.live_bins() if b.contains(x)]
            if len(covering) != 1 or covering[0] != tree.live_bin_of(x):
                print(f"[partition] live-partition exactness FAILED at {x}")
                ok = False
                break
    for x in np.random.default_rng(1).random((200, 2)):
        if bin_of(x, 8) != BinId(8, bin_of(x, 8).coords):
            ok = False
    print(f"[partition] {'PASS' if ok else 'FAIL'}")
    return ok


def _check_lemma(args) -> bool:
    reps = args.reps if args.reps is not None else 20000
    delta = 0.2
    rng = np.random.default_rng(_default_seed(args.seed, None))
    freq = peeling_check(
        T=512,
        delta=delta,
        bounds=(-0.5, 0.5),
        distribution={"kind": "coin", "scale": 0.5},
        reps=reps,
        rng=rng,
    )
    limit = delta + 3.0 * math.sqrt(delta * (1 - delta) / reps)
    ok = freq <= limit
    print(f"[lemma] crossing frequency {freq:.4f} vs limit {limit:.4f}: {'PASS' if ok else 'FAIL'}")
    return ok


def _check_static(args) -> bool:
    reps = args.reps if args.reps is not None else 500
    config = RunConfig(
        machine={"family": "static", "params": {"means": [0.5, 0.7]}},
        policy={"policy": "se", "params": {"gamma": 1.0}},
        n=20000,
        reps=reps,
        base_seed=_default_seed(args.seed, None),
    )
    summary = run_many(config, n_jobs=args.threads)
    bound = static_regret_bound(config.n, (0.2, 0.0))
    ok = summary.final_mean <= bound
    print(f"[static] mean regret {summary.final_mean:.1f} vs bound {bound:.1f}: {'PASS' if ok else 'FAIL'}")
    return ok


def _check_scaling(args) -> bool:
    reps = args.reps if args.reps is not None else 100
    result = run_sweep(
        machine_spec={"family": "power_gap", "params": {"alpha": 0.5, "L": 1.0}, "d": 1, "K": 2},
        policy_specs=[{"policy": "abse"}],
        n_values=[2**k for k in range(12, 19)],
        reps=reps,
        base_seed=_default_seed(args.seed, None),
        n_jobs=args.threads,
    )
    fit = result.scaling["abse"]
    ok = abs(fit["slope"] - fit["theory_slope"]) <= 0.15
    print(
        f"[scaling] fitted slope {fit['slope']:.3f} vs theory {fit['theory_slope']:.2f} "
        f"(tolerance 0.15): {'PASS' if ok else 'FAIL'}"
    )
    return ok


_SUITES = {
    "partition": _check_partition,
    "lemma": _check_lemma,
    "static": _check_static,
    "scaling": _check_scaling,
}


def _cmd_check(args) -> int:
    suite = _SUITES.get(args.suite)
    if suite is None:
        print(f"unknown suite {args.suite!r}; choose from {sorted(_SUITES)}", file=sys.stderr)
        return 2
    return 0 if suite(args) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covband", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="base seed (default: spec, then $COVBAND_SEED)")
        p.add_argument("--reps", type=int, default=None, help="override replication count")
        p.add_argument("--threads", type=int, default=1, help="worker processes for replications")

    run = sub.add_parser("run", help="run a single-run or sweep spec file")
    run.add_argument("--spec", required=True, help="path to the JSON experiment spec")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--format", choices=["csv", "json", "both"], default="both")
    common(run)
    run.set_defaults(fn=_cmd_run)

    sweep = sub.add_parser("sweep", help="run a sweep spec file (alias of run for sweep specs)")
    sweep.add_argument("--spec", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--format", choices=["csv", "json", "both"], default="both")
    common(sweep)
    sweep.set_defaults(fn=_cmd_run)

    check = sub.add_parser("check", help="run a named verification suite")
    check.add_argument("suite", help=f"one of {sorted(_SUITES)}")
    common(check)
    check.set_defaults(fn=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
