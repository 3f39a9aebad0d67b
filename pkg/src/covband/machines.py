"""Bandit machines: static arm sets and covariate-indexed reward functions.

A machine owns the ground truth of one simulated problem: the per-arm
mean rewards (constants, or functions of a covariate in [0,1]^d), the
reward noise law, the covariate law, and the declared smoothness/margin
class. Machines are immutable after construction and safe to share; all
randomness flows through caller-owned generators. Arms are 1-based.

The margin and smoothness verifiers here are diagnostics for test
suites, not construction gates: building a machine never fails because
its declared class parameters are optimistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Point = Sequence[float]


# ---------------------------------------------------------------------------
# Reward and covariate laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RewardLaw:
    """Per-arm reward noise around the conditional mean.

    ``bernoulli`` draws {0,1} with the mean as success probability;
    ``uniform_band`` draws uniformly in [mean - halfwidth, mean + halfwidth].
    """

    kind: str
    halfwidth: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("bernoulli", "uniform_band"):
            raise ValueError(f"unknown reward law {self.kind!r}")
        if self.kind == "uniform_band" and self.halfwidth < 0:
            raise ValueError("uniform_band halfwidth must be nonnegative")

    @classmethod
    def bernoulli(cls) -> "RewardLaw":
        return cls("bernoulli")

    @classmethod
    def uniform_band(cls, halfwidth: float) -> "RewardLaw":
        return cls("uniform_band", float(halfwidth))

    def draw(self, mean: float, u: float) -> float:
        """Map one uniform variate in [0,1) to a reward with the given mean."""
        if self.kind == "bernoulli":
            return 1.0 if u < mean else 0.0
        return mean + self.halfwidth * (2.0 * u - 1.0)

    def spec(self) -> object:
        if self.kind == "bernoulli":
            return "bernoulli"
        return {"kind": "uniform_band", "halfwidth": self.halfwidth}

    @classmethod
    def from_spec(cls, doc: object) -> "RewardLaw":
        if doc in (None, "bernoulli"):
            return cls.bernoulli()
        if isinstance(doc, str):
            raise ValueError(f"unknown reward law {doc!r}")
        return cls(doc["kind"], float(doc.get("halfwidth", 0.0)))


@dataclass(frozen=True)
class CovariateLaw:
    """Law of the covariate stream on [0,1]^d.

    ``uniform`` is the default. ``bounded_density`` wraps a caller-supplied
    sampler together with its declared density bounds; the bounds are
    recorded, not verified.
    """

    kind: str
    sampler: Callable[[np.random.Generator, int, int], np.ndarray] | None = None
    c_lower: float = 1.0
    c_upper: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "bounded_density"):
            raise ValueError(f"unknown covariate law {self.kind!r}")
        if not 0 < self.c_lower <= self.c_upper:
            raise ValueError("density bounds must satisfy 0 < c_lower <= c_upper")
        if self.kind == "bounded_density" and self.sampler is None:
            raise ValueError("bounded_density needs a sampler")

    @classmethod
    def uniform(cls) -> "CovariateLaw":
        return cls("uniform")

    @classmethod
    def bounded_density(cls, sampler, c_lower: float, c_upper: float) -> "CovariateLaw":
        return cls("bounded_density", sampler, float(c_lower), float(c_upper))

    def sample(self, rng: np.random.Generator, size: int, d: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.random((size, d))
        return np.asarray(self.sampler(rng, size, d), dtype=float)


# ---------------------------------------------------------------------------
# Class parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MachineClassParams:
    """Declared margin/smoothness class of a covariate machine.

    ``alpha`` is the margin exponent (``math.inf`` allowed), ``beta`` the
    Hölder exponent in (0, 1], ``L`` the Hölder constant, and
    ``(delta0, C0)`` the margin threshold and constant: the mass where the
    gap function lies in (0, delta] is declared to be at most
    ``C0 * delta**alpha`` for delta up to ``delta0``.
    """

    alpha: float
    beta: float
    L: float
    delta0: float = 0.5
    C0: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if not 0 < self.delta0 < 1:
            raise ValueError("delta0 must lie in (0, 1)")
        if self.C0 <= 0:
            raise ValueError("C0 must be positive")

    def spec(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "L": self.L,
            "delta0": self.delta0,
            "C0": self.C0,
        }

    @classmethod
    def from_spec(cls, doc: dict) -> "MachineClassParams":
        alpha = doc["alpha"]
        if isinstance(alpha, str):
            alpha = math.inf
        return cls(
            alpha=float(alpha),
            beta=float(doc["beta"]),
            L=float(doc["L"]),
            delta0=float(doc.get("delta0", 0.5)),
            C0=float(doc.get("C0", 1.0)),
        )


# ---------------------------------------------------------------------------
# Reward function families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantFn:
    value: float

    def __call__(self, x: Point) -> float:
        return self.value

    def batch(self, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], self.value)

    def spec(self) -> dict:
        return {"family": "constant", "params": {"value": self.value}}


@dataclass(frozen=True)
class AffineFn:
    intercept: float
    slopes: tuple[float, ...]

    def __call__(self, x: Point) -> float:
        v = self.intercept
        for w, xl in zip(self.slopes, x):
            v += w * xl
        return v

    def batch(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + X @ np.asarray(self.slopes)

    def spec(self) -> dict:
        return {
            "family": "affine",
            "params": {"intercept": self.intercept, "slopes": list(self.slopes)},
        }


@dataclass(frozen=True)
class PowerStepFn:
    """Signed power ramp in one coordinate: baseline + scale * sign(u)|u|^p.

    ``u = x[axis] - center``. The sign makes the function cross its
    baseline at the center, so the pointwise gap against a flat arm at
    the baseline behaves like ``scale * |u|**exponent`` on both sides.
    """

    baseline: float
    scale: float
    exponent: float
    center: float = 0.5
    axis: int = 0

    def __call__(self, x: Point) -> float:
        u = x[self.axis] - self.center
        if u > 0:
            return self.baseline + self.scale * u**self.exponent
        if u < 0:
            return self.baseline - self.scale * (-u) ** self.exponent
        return self.baseline

    def batch(self, X: np.ndarray) -> np.ndarray:
        u = X[:, self.axis] - self.center
        return self.baseline + self.scale * np.sign(u) * np.abs(u) ** self.exponent

    def spec(self) -> dict:
        return {
            "family": "piecewise_power",
            "params": {
                "baseline": self.baseline,
                "scale": self.scale,
                "exponent": self.exponent,
                "center": self.center,
                "axis": self.axis,
            },
        }


_FN_FAMILIES = {
    "constant": lambda p: ConstantFn(float(p["value"])),
    "affine": lambda p: AffineFn(float(p["intercept"]), tuple(float(w) for w in p["slopes"])),
    "piecewise_power": lambda p: PowerStepFn(
        baseline=float(p["baseline"]),
        scale=float(p["scale"]),
        exponent=float(p["exponent"]),
        center=float(p.get("center", 0.5)),
        axis=int(p.get("axis", 0)),
    ),
}


def build_fn(doc: dict):
    """Build a reward function from its registry document."""
    family = doc["family"]
    if family not in _FN_FAMILIES:
        raise ValueError(f"unknown function family {family!r}")
    return _FN_FAMILIES[family](doc.get("params", {}))


# ---------------------------------------------------------------------------
# Machines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StaticMachine:
    """K arms with fixed means in [0,1] and a bounded reward law per arm."""

    means: tuple[float, ...]
    reward_law: RewardLaw = field(default_factory=RewardLaw.bernoulli)

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        if len(self.means) < 2:
            raise ValueError("a machine needs at least two arms")
        for m in self.means:
            if not 0.0 <= m <= 1.0:
                raise ValueError(f"arm means must lie in [0, 1], got {m!r}")
        if self.reward_law.kind == "uniform_band":
            w = self.reward_law.halfwidth
            room = min(min(m, 1.0 - m) for m in self.means)
            if w > room + 1e-12:
                raise ValueError(
                    f"uniform_band halfwidth {w} pushes rewards outside [0, 1]"
                )

    @property
    def n_arms(self) -> int:
        return len(self.means)

    def gaps(self) -> tuple[float, ...]:
        best = max(self.means)
        return tuple(best - m for m in self.means)

    def best_arm(self) -> int:
        best = max(self.means)
        return self.means.index(best) + 1

    def draw_reward(self, arm: int, rng: np.random.Generator) -> float:
        if not 1 <= arm <= self.n_arms:
            raise ValueError(f"arm {arm} out of range 1..{self.n_arms}")
        return self.reward_law.draw(self.means[arm - 1], rng.random())

    def spec(self) -> dict:
        return {
            "family": "static",
            "params": {"means": list(self.means)},
            "reward_law": self.reward_law.spec(),
            "d": 0,
            "K": self.n_arms,
        }


def _spot_points(d: int) -> np.ndarray:
    # Dense grid for low dimension, fixed random sample otherwise.
    if d == 1:
        return np.linspace(0.0, 1.0, 1025).reshape(-1, 1)
    if d == 2:
        g = np.linspace(0.0, 1.0, 33)
        return np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    return np.random.default_rng(0).random((512, d))


@dataclass(frozen=True)
class CovariateMachine:
    """K reward functions on [0,1]^d with a covariate law and declared class."""

    d: int
    fns: tuple
    class_params: MachineClassParams
    covariate_law: CovariateLaw = field(default_factory=CovariateLaw.uniform)
    reward_law: RewardLaw = field(default_factory=RewardLaw.bernoulli)
    family: str = "functions"
    family_params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "fns", tuple(self.fns))
        if self.d < 1:
            raise ValueError("covariate dimension must be at least 1")
        if len(self.fns) < 2:
            raise ValueError("a machine needs at least two arms")
        pts = _spot_points(self.d)
        F = self.mean_matrix(pts)
        room = self.reward_law.halfwidth if self.reward_law.kind == "uniform_band" else 0.0
        if F.min() < -1e-9 + room or F.max() > 1.0 + 1e-9 - room:
            raise ValueError("reward functions leave [0, 1] on the spot-check sample")

    @property
    def n_arms(self) -> int:
        return len(self.fns)

    def means_at(self, x: Point) -> list[float]:
        return [fn(x) for fn in self.fns]

    def mean_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.d)
        return np.column_stack([fn.batch(X) for fn in self.fns])

    def best_mean(self, x: Point) -> float:
        return max(self.means_at(x))

    def second_best_mean(self, x: Point) -> float:
        return _second_value(self.means_at(x))

    def gap(self, x: Point) -> float:
        values = self.means_at(x)
        return max(values) - _second_value(values)

    def draw_covariate(self, rng: np.random.Generator) -> np.ndarray:
        return self.covariate_law.sample(rng, 1, self.d)[0]

    def draw_covariates(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.covariate_law.sample(rng, size, self.d)

    def draw_reward(self, arm: int, x: Point, rng: np.random.Generator) -> float:
        if not 1 <= arm <= self.n_arms:
            raise ValueError(f"arm {arm} out of range 1..{self.n_arms}")
        return self.reward_law.draw(self.fns[arm - 1](x), rng.random())

    def spec(self) -> dict:
        if self.family == "functions":
            params = {
                "arms": [fn.spec() for fn in self.fns],
                "class_params": self.class_params.spec(),
            }
        else:
            params = dict(self.family_params)
        return {
            "family": self.family,
            "params": params,
            "reward_law": self.reward_law.spec(),
            "d": self.d,
            "K": self.n_arms,
        }


# ---------------------------------------------------------------------------
# Pointwise quantities and the oracle
# ---------------------------------------------------------------------------


def _second_value(values: Sequence[float]) -> float:
    # Largest value strictly below the maximum; the maximum itself when
    # every arm agrees (degenerate convention).
    top = max(values)
    second = -math.inf
    for v in values:
        if v < top and v > second:
            second = v
    return top if second == -math.inf else second


def draw_covariate(machine: CovariateMachine, rng: np.random.Generator) -> np.ndarray:
    """One covariate from the machine's law; every coordinate in [0,1]."""
    return machine.draw_covariate(rng)


def draw_reward(machine, arm: int, x: Point | None, rng: np.random.Generator) -> float:
    """One reward from ``arm`` (at covariate ``x`` for covariate machines)."""
    if isinstance(machine, StaticMachine):
        return machine.draw_reward(arm, rng)
    return machine.draw_reward(arm, x, rng)


def oracle_arm(machine, x: Point | None = None) -> int:
    """Lowest-index arm attaining the best mean (at ``x`` if applicable)."""
    values = machine.means if isinstance(machine, StaticMachine) else machine.means_at(x)
    best = max(values)
    for i, v in enumerate(values):
        if v == best:
            return i + 1
    raise AssertionError("unreachable")


def best_mean(machine, x: Point | None = None) -> float:
    """Pointwise maximum of the arm means."""
    values = machine.means if isinstance(machine, StaticMachine) else machine.means_at(x)
    return max(values)


def second_best_mean(machine, x: Point | None = None) -> float:
    """Largest arm mean strictly below the maximum (the maximum if all agree)."""
    values = machine.means if isinstance(machine, StaticMachine) else machine.means_at(x)
    return _second_value(values)


# ---------------------------------------------------------------------------
# Benchmark family with a tunable margin exponent
# ---------------------------------------------------------------------------


def make_power_gap_machine(
    alpha: float, L: float = 1.0, K: int = 2, d: int = 1
) -> CovariateMachine:
    """One power-ramp arm against K-1 flat arms, gap ``0.5*L*|x1-0.5|**(1/alpha)``.

    Arm 1 follows ``0.5 + 0.5*L*sign(x1-0.5)|x1-0.5|**(1/alpha)``; all
    other arms sit at 0.5, so the oracle switches at ``x1 = 0.5``. The
    affine placement keeps every mean inside [0,1] while preserving the
    margin exponent ``alpha``; the declared Hölder constant is the exact
    one for the ramp, ``L * 2**(-1/alpha) * max(1, 1/alpha)`` (half of
    ``L`` at alpha in {0.5, 1}).

    The margin mass has the closed form ``min(1, 2*(2*delta/L)**alpha)``,
    exact for ``delta <= delta0 = 0.5*L*2**(-1/alpha)``.
    """
    if not 0 < L <= 1:
        raise ValueError(f"L must lie in (0, 1], got {L!r}")
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive and finite, got {alpha!r}")
    if K < 2:
        raise ValueError("need at least two arms")
    exponent = 1.0 / alpha
    fns = [PowerStepFn(baseline=0.5, scale=0.5 * L, exponent=exponent)]
    fns.extend(ConstantFn(0.5) for _ in range(K - 1))
    params = MachineClassParams(
        alpha=alpha,
        beta=min(1.0, 1.0 / alpha),
        L=L * 2.0 ** (-1.0 / alpha) * max(1.0, 1.0 / alpha),
        delta0=0.5 * L * 2.0 ** (-1.0 / alpha),
        C0=2.0 * (2.0 / L) ** alpha,
    )
    return CovariateMachine(
        d=d,
        fns=tuple(fns),
        class_params=params,
        family="power_gap",
        family_params={"alpha": alpha, "L": L},
    )


# ---------------------------------------------------------------------------
# Class-condition verifiers (diagnostics, not gates)
# ---------------------------------------------------------------------------


def estimate_margin_prob(
    machine: CovariateMachine, delta: float, n_samples: int, rng: np.random.Generator
) -> float:
    """Monte Carlo mass of covariates whose gap lies in (0, delta]."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    X = machine.draw_covariates(rng, n_samples)
    F = machine.mean_matrix(X)
    top = F.max(axis=1)
    below = np.where(F < top[:, None], F, -np.inf).max(axis=1)
    gap = np.where(np.isfinite(below), top - below, 0.0)
    return float(np.mean((gap > 0.0) & (gap <= delta)))


def check_smoothness(
    machine: CovariateMachine, n_pairs: int, rng: np.random.Generator
) -> float:
    """Max observed Hölder ratio |f(x)-f(x')| / ||x-x'||**beta over sampled pairs.

    The caller compares the result against the machine's declared constant.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be at least 1")
    beta = machine.class_params.beta
    X = machine.draw_covariates(rng, n_pairs)
    Y = machine.draw_covariates(rng, n_pairs)
    dist = np.linalg.norm(X - Y, axis=1)
    keep = dist > 0
    if not keep.any():
        return 0.0
    diffs = np.abs(machine.mean_matrix(X[keep]) - machine.mean_matrix(Y[keep]))
    return float((diffs / dist[keep, None] ** beta).max())


# ---------------------------------------------------------------------------
# Machine registry
# ---------------------------------------------------------------------------


def _constant_machine(values: Sequence[float], d: int, reward_law: RewardLaw) -> CovariateMachine:
    values = [float(v) for v in values]
    levels = sorted(set(values))
    pos_gaps = [b - a for a, b in zip(levels, levels[1:])]
    delta0 = min(0.5, 0.5 * min(pos_gaps)) if pos_gaps else 0.5
    params = MachineClassParams(alpha=math.inf, beta=1.0, L=1.0, delta0=delta0, C0=1.0)
    return CovariateMachine(
        d=d,
        fns=tuple(ConstantFn(v) for v in values),
        class_params=params,
        reward_law=reward_law,
        family="constant",
        family_params={"values": values},
    )


def build_machine(doc: dict):
    """Build a machine from its spec document {family, params, reward_law, d, K}."""
    family = doc["family"]
    params = doc.get("params", {})
    law = RewardLaw.from_spec(doc.get("reward_law"))
    if family == "static":
        return StaticMachine(means=tuple(params["means"]), reward_law=law)
    d = int(doc.get("d", 1))
    if family == "power_gap":
        machine = make_power_gap_machine(
            alpha=float(params["alpha"]),
            L=float(params.get("L", 1.0)),
            K=int(doc.get("K", 2)),
            d=d,
        )
        if law != machine.reward_law:
            machine = CovariateMachine(
                d=machine.d,
                fns=machine.fns,
                class_params=machine.class_params,
                reward_law=law,
                family=machine.family,
                family_params=machine.family_params,
            )
        return machine
    if family == "constant":
        return _constant_machine(params["values"], d, law)
    if family == "functions":
        return CovariateMachine(
            d=d,
            fns=tuple(build_fn(f) for f in params["arms"]),
            class_params=MachineClassParams.from_spec(params["class_params"]),
            reward_law=law,
        )
    raise ValueError(f"unknown machine family {family!r}")
