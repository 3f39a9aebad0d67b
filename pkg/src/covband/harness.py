"""Simulation harness: seeded runs, replications, bounds, and fits.

A run pairs a machine spec with a policy spec and simulates the
interaction loop, accumulating pseudo-regret from the machine's mean
functions (not realized rewards) at a checkpoint grid. Replications use
independent derived streams, so aggregates are bit-identical across
repeated invocations and across worker counts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from .machines import CovariateMachine, StaticMachine, build_machine, oracle_arm
from .policies import ABSEPolicy, BSEPolicy, DoublingPolicy, bins_per_side
from .se import SEConfig, SEState, UCBPolicy, floored_log

COV_STREAM, REWARD_STREAM, HORIZON_STREAM = 0, 1, 2

_BLOCK = 8192


def stream(base_seed: int, rep: int, role: int) -> np.random.Generator:
    """Independent generator for one (replication, role) pair."""
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(rep, role)))


def default_checkpoints(n: int) -> tuple[int, ...]:
    """Geometric grid ceil(n * 2**-j) plus n itself."""
    pts = {n}
    j = 1
    while True:
        v = math.ceil(n / 2**j)
        pts.add(v)
        if v <= 1:
            break
        j += 1
    return tuple(sorted(pts))


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one batch of replications."""

    machine: dict
    policy: dict
    n: int
    horizon_mode: str = "fixed"
    reps: int = 1
    base_seed: int = 0
    checkpoints: tuple[int, ...] | None = None
    realized_rewards: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.horizon_mode not in ("fixed", "poisson"):
            raise ValueError(f"unknown horizon mode {self.horizon_mode!r}")
        if self.checkpoints is not None:
            cks = tuple(int(c) for c in self.checkpoints)
            if list(cks) != sorted(set(cks)):
                raise ValueError("checkpoints must be strictly increasing")
            if cks[-1] != self.n:
                raise ValueError("the last checkpoint must equal n")
            object.__setattr__(self, "checkpoints", cks)

    def resolved_checkpoints(self) -> tuple[int, ...]:
        return self.checkpoints if self.checkpoints is not None else default_checkpoints(self.n)

    @property
    def run_id(self) -> str:
        return self.name or config_digest(self)


def config_digest(config: RunConfig) -> str:
    doc = asdict(config)
    doc.pop("name", None)
    blob = json.dumps(doc, sort_keys=True, default=str).encode()
    return hashlib.sha1(blob).hexdigest()[:12]


@dataclass(frozen=True)
class RegretTrace:
    """Checkpointed cumulative pseudo-regret of one replication."""

    times: tuple[int, ...]
    values: tuple[float, ...]
    base_seed: int
    rep: int
    horizon: int
    final: float


# ---------------------------------------------------------------------------
# Policy registry (machine-facing plumbing)
# ---------------------------------------------------------------------------


class OraclePolicy:
    """Pulls a best arm at every step; zero-regret reference."""

    def __init__(self, machine):
        self._machine = machine
        self._best = machine.best_arm() if isinstance(machine, StaticMachine) else None

    def act(self, x) -> int:
        return oracle_arm(self._machine, x)

    def feed(self, reward: float) -> None:
        pass

    def next_arm(self) -> int:
        return self._best

    def update(self, reward: float) -> None:
        pass

    @property
    def locked(self) -> bool:
        return self._best is not None

    @property
    def sole_arm(self) -> int | None:
        return self._best


class FixedArmPolicy:
    """Pulls one arm forever."""

    def __init__(self, arm: int, n_arms: int):
        if not 1 <= arm <= n_arms:
            raise ValueError(f"arm {arm} out of range 1..{n_arms}")
        self.arm = arm

    def act(self, x) -> int:
        return self.arm

    def feed(self, reward: float) -> None:
        pass

    def next_arm(self) -> int:
        return self.arm

    def update(self, reward: float) -> None:
        pass

    locked = True

    @property
    def sole_arm(self) -> int:
        return self.arm


def build_policy(spec: dict, machine, n: int):
    """Build a policy from its spec document {policy, params} for one machine."""
    kind = spec.get("policy")
    params = dict(spec.get("params", {}))
    doubling = bool(params.pop("doubling", False))
    n_arms = machine.n_arms
    is_static = isinstance(machine, StaticMachine)

    if kind == "se":
        if not is_static:
            raise ValueError("the se policy runs on static machines")
        gamma = float(params.pop("gamma", 1.0))

        def factory(h):
            return SEState(range(1, n_arms + 1), SEConfig(horizon=float(h), gamma=gamma))

    elif kind == "ucb":
        if not is_static:
            raise ValueError("the ucb policy runs on static machines")

        def factory(h):
            return UCBPolicy(n_arms)

    elif kind == "bse":
        if is_static:
            raise ValueError("the bse policy needs a covariate machine")
        beta = params.pop("beta", None)
        beta = machine.class_params.beta if beta is None else float(beta)
        m_fixed = params.pop("M", None)

        def factory(h):
            m = int(m_fixed) if m_fixed is not None else bins_per_side(h, n_arms, machine.d, beta)
            return BSEPolicy(h, n_arms, machine.d, m)

    elif kind == "abse":
        if is_static:
            raise ValueError("the abse policy needs a covariate machine")
        beta = params.pop("beta", None)
        beta = machine.class_params.beta if beta is None else float(beta)
        L = params.pop("L", None)
        L = machine.class_params.L if L is None else float(L)

        def factory(h):
            return ABSEPolicy(h, n_arms, machine.d, beta, L)

    elif kind == "oracle":

        def factory(h):
            return OraclePolicy(machine)

    elif kind == "fixed":
        arm = int(params.pop("arm"))

        def factory(h):
            return FixedArmPolicy(arm, n_arms)

    else:
        raise ValueError(f"unknown policy {kind!r}")

    if params:
        raise ValueError(f"unknown params {sorted(params)} for policy {kind!r}")
    return DoublingPolicy(factory) if doubling else factory(n)


# ---------------------------------------------------------------------------
# Single replication
# ---------------------------------------------------------------------------


def _record(values: list[float], times, ti: int, t: int, reg: float) -> int:
    while ti < len(times) and t == times[ti]:
        values.append(reg)
        ti += 1
    return ti


def _simulate_static(machine, policy, N, times, realized, rew_rng):
    means = machine.means
    law = machine.reward_law
    bernoulli = law.kind == "bernoulli"
    w = law.halfwidth
    best = max(means)
    gaps = [best - m for m in means]
    best_arm = machine.best_arm()
    can_lock = not realized and hasattr(policy, "locked")

    values: list[float] = []
    reg = 0.0
    t = 0
    ti = 0
    buf: list[float] = []
    bi = 0
    while t < N:
        if can_lock and policy.locked:
            # Only one arm will ever be pulled again, so the remaining
            # pseudo-regret is linear in t; the skipped reward draws feed
            # nothing downstream.
            g = gaps[policy.sole_arm - 1]
            while ti < len(times):
                values.append(reg + g * (min(times[ti], N) - t))
                ti += 1
            reg += g * (N - t)
            t = N
            break
        if bi == len(buf):
            buf = rew_rng.random(min(_BLOCK, N - t)).tolist()
            bi = 0
        u = buf[bi]
        bi += 1
        arm = policy.next_arm()
        mean_a = means[arm - 1]
        y = (1.0 if u < mean_a else 0.0) if bernoulli else mean_a + w * (2.0 * u - 1.0)
        policy.update(y)
        if realized:
            y_star = law.draw(means[best_arm - 1], rew_rng.random())
            reg += y_star - y
        else:
            reg += gaps[arm - 1]
        t += 1
        ti = _record(values, times, ti, t, reg)
    while ti < len(times):
        values.append(reg)
        ti += 1
    return values, reg


def _simulate_covariate(machine, policy, N, times, realized, cov_rng, rew_rng):
    law = machine.reward_law
    bernoulli = law.kind == "bernoulli"
    w = law.halfwidth

    values: list[float] = []
    reg = 0.0
    t = 0
    ti = 0
    while t < N:
        m = min(_BLOCK, N - t)
        X = machine.draw_covariates(cov_rng, m)
        F = machine.mean_matrix(X)
        tops = F.max(axis=1).tolist()
        us = rew_rng.random(m).tolist()
        xs = X.tolist()
        rows = F.tolist()
        for i in range(m):
            arm = policy.act(xs[i])
            row = rows[i]
            mean_a = row[arm - 1]
            u = us[i]
            y = (1.0 if u < mean_a else 0.0) if bernoulli else mean_a + w * (2.0 * u - 1.0)
            policy.feed(y)
            if realized:
                y_star = law.draw(tops[i], rew_rng.random())
                reg += y_star - y
            else:
                reg += tops[i] - mean_a
            t += 1
            ti = _record(values, times, ti, t, reg)
    while ti < len(times):
        values.append(reg)
        ti += 1
    return values, reg


def run_once_with_policy(config: RunConfig, rep_index: int):
    """Simulate one replication; returns the trace and the driven policy."""
    machine = build_machine(config.machine)
    policy = build_policy(config.policy, machine, config.n)
    if config.horizon_mode == "poisson":
        N = int(stream(config.base_seed, rep_index, HORIZON_STREAM).poisson(config.n))
    else:
        N = config.n
    times = config.resolved_checkpoints()
    rew_rng = stream(config.base_seed, rep_index, REWARD_STREAM)
    if isinstance(machine, StaticMachine):
        values, final = _simulate_static(machine, policy, N, times, config.realized_rewards, rew_rng)
    else:
        cov_rng = stream(config.base_seed, rep_index, COV_STREAM)
        values, final = _simulate_covariate(
            machine, policy, N, times, config.realized_rewards, cov_rng, rew_rng
        )
    trace = RegretTrace(
        times=times,
        values=tuple(values),
        base_seed=config.base_seed,
        rep=rep_index,
        horizon=N,
        final=final,
    )
    return trace, policy


def run_once(config: RunConfig, rep_index: int) -> RegretTrace:
    """Simulate one replication, deterministic in (base_seed, rep_index)."""
    return run_once_with_policy(config, rep_index)[0]


# ---------------------------------------------------------------------------
# Replication batches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunSummary:
    config: RunConfig
    times: tuple[int, ...]
    mean: tuple[float, ...]
    sd: tuple[float, ...]
    ci95_half: tuple[float, ...]
    final_mean: float
    final_sd: float
    final_ci95_half: float
    traces: tuple[RegretTrace, ...]

    def to_dict(self) -> dict:
        return {
            "run_id": self.config.run_id,
            "config": asdict(self.config),
            "checkpoints": list(self.times),
            "mean": list(self.mean),
            "sd": list(self.sd),
            "ci95_half": list(self.ci95_half),
            "final": {
                "mean": self.final_mean,
                "sd": self.final_sd,
                "ci95_half": self.final_ci95_half,
            },
        }


def aggregate_traces(config: RunConfig, traces: Sequence[RegretTrace]) -> RunSummary:
    """Deterministic reduction of replication traces, whatever their order."""
    ordered = tuple(sorted(traces, key=lambda tr: tr.rep))
    times = ordered[0].times
    V = np.asarray([tr.values for tr in ordered], dtype=float)
    finals = np.asarray([tr.final for tr in ordered], dtype=float)
    reps = len(ordered)
    mean = V.mean(axis=0)
    if reps > 1:
        sd = V.std(axis=0, ddof=1)
        fsd = float(finals.std(ddof=1))
    else:
        sd = np.zeros_like(mean)
        fsd = 0.0
    half = 1.96 * sd / math.sqrt(reps)
    return RunSummary(
        config=config,
        times=times,
        mean=tuple(mean.tolist()),
        sd=tuple(sd.tolist()),
        ci95_half=tuple(half.tolist()),
        final_mean=float(finals.mean()),
        final_sd=fsd,
        final_ci95_half=1.96 * fsd / math.sqrt(reps),
        traces=ordered,
    )


def run_many(config: RunConfig, n_jobs: int = 1) -> RunSummary:
    """Run all replications (optionally in parallel) and aggregate."""
    if n_jobs <= 1 or config.reps == 1:
        traces = [run_once(config, rep) for rep in range(config.reps)]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            traces = list(pool.map(partial(run_once, config), range(config.reps), chunksize=8))
    return aggregate_traces(config, traces)


# ---------------------------------------------------------------------------
# Closed-form comparator for the static policy
# ---------------------------------------------------------------------------


def static_regret_bound(n: float, gaps, strategy: str = "two_term_min") -> float:
    """Upper bound on expected static-SE regret at horizon parameter n, gamma=1.

    ``gaps`` is the per-arm gap vector (a bare float means one suboptimal
    arm); a zero entry for a best arm is implied when absent. The
    ``two_term_min`` takes the minimum of the gap-dependent sum
    646*sum(blog(n*g^2)/g) and the gap-free term 166*sqrt(n*K*log(K));
    ``split_scan`` minimizes the longer three-term form over the split index.
    Constants are loose; use as a one-sided comparator only.
    """
    if isinstance(gaps, (int, float)):
        gaps = (float(gaps),)
    gs = sorted((float(g) for g in gaps), reverse=True)
    if not gs or any(g < 0 for g in gs):
        raise ValueError("gaps must be a nonempty collection of nonnegative reals")
    total_arms = len(gs) + (0 if 0.0 in gs else 1)
    if total_arms < 2:
        raise ValueError("need at least two arms")
    pos = [g for g in gs if g > 0]
    gap_free = 166.0 * math.sqrt(n * total_arms * math.log(total_arms))
    if not pos:
        return gap_free
    if strategy == "two_term_min":
        gap_term = 646.0 * sum(floored_log(n * g * g) / g for g in pos)
        return min(gap_term, gap_free)
    if strategy == "split_scan":
        k_sub = len(pos)
        best = math.inf
        prefix = 0.0
        for split in range(1, k_sub + 1):
            g = pos[split - 1]
            prefix += floored_log(n * g * g) / g
            tail = pos[split] if split < k_sub else 0.0
            val = 646.0 * prefix + 304.0 * (k_sub - split) / g * floored_log(n * g * g) + n * tail
            best = min(best, val)
        return best
    raise ValueError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Scaling-exponent fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "stderr": self.stderr}


def fit_scaling_exponent(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """Least-squares slope of log(regret) against log(n)."""
    from scipy.stats import linregress

    usable = []
    for n_val, r_val in points:
        if r_val <= 0:
            warnings.warn(f"dropping nonpositive regret point ({n_val}, {r_val})")
            continue
        usable.append((math.log(n_val), math.log(r_val)))
    if len(usable) < 3:
        raise ValueError("need at least three positive points to fit an exponent")
    xs, ys = zip(*usable)
    fit = linregress(xs, ys)
    return ScalingFit(slope=float(fit.slope), intercept=float(fit.intercept), stderr=float(fit.stderr))


# ---------------------------------------------------------------------------
# Empirical check of the maximal concentration inequality
# ---------------------------------------------------------------------------


def _increment_sampler(distribution, a: float, b: float):
    if callable(distribution):
        return distribution
    kind = distribution.get("kind")
    if kind == "zero":
        return lambda rng, shape: np.zeros(shape)
    if kind == "coin":
        s = float(distribution.get("scale", min(-a, b)))
        if s <= 0 or -s < a - 1e-12 or s > b + 1e-12:
            raise ValueError(f"coin scale {s} incompatible with bounds ({a}, {b})")
        return lambda rng, shape: np.where(rng.random(shape) < 0.5, s, -s)
    if kind == "uniform":
        h = float(distribution.get("halfwidth", min(-a, b)))
        if h <= 0 or -h < a - 1e-12 or h > b + 1e-12:
            raise ValueError(f"uniform halfwidth {h} incompatible with bounds ({a}, {b})")
        return lambda rng, shape: rng.uniform(-h, h, shape)
    raise ValueError(f"unknown increment distribution {distribution!r}")


def peeling_check(
    T: int,
    delta: float,
    bounds: tuple[float, float],
    distribution,
    reps: int,
    rng: np.random.Generator,
) -> float:
    """Frequency of the running mean ever crossing the peeled threshold.

    The threshold at time t is sqrt((2*(b-a)**2 / t) * log((4/delta)*(T/t))).
    For mean-zero increments supported in [a, b] the crossing probability
    is at most delta; the returned empirical frequency checks that.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    a, b = float(bounds[0]), float(bounds[1])
    if not (a <= 0 <= b and a < b):
        raise ValueError("bounds must satisfy a <= 0 <= b and a < b")
    if T < 1 or reps < 1:
        raise ValueError("T and reps must be at least 1")
    sampler = _increment_sampler(distribution, a, b)
    t = np.arange(1, T + 1)
    threshold = np.sqrt((2.0 * (b - a) ** 2 / t) * np.log((4.0 / delta) * (T / t)))
    exceed = 0
    done = 0
    while done < reps:
        m = min(4096, reps - done)
        Z = sampler(rng, (m, T))
        running_mean = np.cumsum(Z, axis=1) / t
        exceed += int((running_mean >= threshold).any(axis=1).sum())
        done += m
    return exceed / reps


# ---------------------------------------------------------------------------
# Sweeps over horizons
# ---------------------------------------------------------------------------


def theory_slope(class_params, d: int) -> float:
    """Regret-vs-n log-log slope implied by the declared class: 1 - beta*(alpha+1)/(2*beta+d)."""
    a, b = class_params.alpha, class_params.beta
    if math.isinf(a):
        raise ValueError("the slope target needs a finite margin exponent")
    return 1.0 - b * (a + 1.0) / (2.0 * b + d)


@dataclass(frozen=True)
class SweepResult:
    machine: dict
    policies: tuple[dict, ...]
    n_values: tuple[int, ...]
    reps: int
    base_seed: int
    summaries: dict = field(repr=False)  # policy label -> list[RunSummary]
    scaling: dict = field(default_factory=dict)  # policy label -> dict

    def to_dict(self) -> dict:
        runs = {
            label: [
                {
                    "n": s.config.n,
                    "final": {
                        "mean": s.final_mean,
                        "sd": s.final_sd,
                        "ci95_half": s.final_ci95_half,
                    },
                }
                for s in batch
            ]
            for label, batch in self.summaries.items()
        }
        return {
            "machine": self.machine,
            "policies": list(self.policies),
            "n_values": list(self.n_values),
            "reps": self.reps,
            "base_seed": self.base_seed,
            "runs": runs,
            "scaling": self.scaling,
        }


def _policy_labels(policy_specs: Sequence[dict]) -> list[str]:
    labels = []
    seen: dict[str, int] = {}
    for spec in policy_specs:
        base = spec.get("policy", "policy")
        seen[base] = seen.get(base, 0) + 1
        labels.append(base if seen[base] == 1 else f"{base}-{seen[base]}")
    return labels


def sweep_seed(base_seed: int, policy_idx: int, n: int) -> int:
    return int(np.random.SeedSequence([base_seed, policy_idx, n]).generate_state(1)[0])


def run_sweep(
    machine_spec: dict,
    policy_specs: Sequence[dict],
    n_values: Sequence[int],
    reps: int,
    base_seed: int = 0,
    horizon_mode: str = "fixed",
    n_jobs: int = 1,
) -> SweepResult:
    """Run every (policy, n) pair and fit a scaling exponent per policy."""
    labels = _policy_labels(policy_specs)
    summaries: dict[str, list[RunSummary]] = {}
    scaling: dict[str, dict] = {}
    machine = build_machine(machine_spec)
    for idx, (label, spec) in enumerate(zip(labels, policy_specs)):
        batch = []
        for n in n_values:
            config = RunConfig(
                machine=machine_spec,
                policy=spec,
                n=int(n),
                horizon_mode=horizon_mode,
                reps=reps,
                base_seed=sweep_seed(base_seed, idx, int(n)),
                name=f"{label}-n{n}",
            )
            batch.append(run_many(config, n_jobs=n_jobs))
        summaries[label] = batch
        points = [(s.config.n, s.final_mean) for s in batch]
        if sum(1 for _, r in points if r > 0) >= 3:
            fit = fit_scaling_exponent(points)
            entry = fit.to_dict()
            if isinstance(machine, CovariateMachine) and math.isfinite(machine.class_params.alpha):
                entry["theory_slope"] = theory_slope(machine.class_params, machine.d)
            scaling[label] = entry
    return SweepResult(
        machine=machine_spec,
        policies=tuple(dict(p) for p in policy_specs),
        n_values=tuple(int(n) for n in n_values),
        reps=reps,
        base_seed=base_seed,
        summaries=summaries,
        scaling=scaling,
    )


# ---------------------------------------------------------------------------
# File outputs
# ---------------------------------------------------------------------------


def write_trace_csv(path, summaries: Sequence[RunSummary]) -> None:
    """Traces of one or more runs as rows (run_id, rep, t, regret)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "rep", "t", "regret"])
        for summary in summaries:
            run_id = summary.config.run_id
            for tr in summary.traces:
                for t, v in zip(tr.times, tr.values):
                    writer.writerow([run_id, tr.rep, t, repr(v)])


def write_json(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
