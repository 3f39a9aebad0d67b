"""Successive elimination on a fixed arm set, plus a UCB baseline.

Arms are numbered 1..K everywhere in this package. A policy is driven
through a strict alternation protocol: every ``next_arm()`` must be
answered by exactly one ``update(reward)`` before the next call. The
caller owns the environment interaction; policies never draw randomness
themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


class AlternationError(RuntimeError):
    """The next/update call protocol was violated."""


def floored_log(x: float) -> float:
    """Natural logarithm floored at 1."""
    if x <= 0:
        raise ValueError(f"floored_log requires x > 0, got {x!r}")
    return max(math.log(x), 1.0)


def confidence_radius(tau: float, horizon: float) -> float:
    """Width of the elimination test after ``tau`` rounds.

    Equals ``2 * sqrt(2 * floored_log(horizon / tau) / tau)``. Strictly
    decreasing in ``tau`` for fixed ``horizon``; ``horizon`` may be any
    positive real (binned policies pass non-integral values).
    """
    if tau < 1:
        raise ValueError(f"confidence_radius requires tau >= 1, got {tau!r}")
    if horizon <= 0:
        raise ValueError(f"confidence_radius requires horizon > 0, got {horizon!r}")
    return 2.0 * math.sqrt(2.0 * floored_log(horizon / tau) / tau)


@dataclass(frozen=True)
class SEConfig:
    """Parameters of one successive-elimination run.

    ``horizon`` scales the confidence radius (the expected number of
    pulls this run will see); ``gamma`` multiplies the radius in the
    elimination test.
    """

    horizon: float
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        if self.gamma < 1:
            raise ValueError(f"gamma must be at least 1, got {self.gamma!r}")


class SEState:
    """One incremental successive-elimination run.

    The run proceeds in rounds. At the start of round ``tau`` the best
    running mean over the active set is snapshotted; the round then
    sweeps the active arms in ascending index order, eliminating any arm
    whose own running mean falls below the snapshot minus
    ``gamma * confidence_radius(tau, horizon)`` and pulling each
    survivor exactly once. Eliminations are decided against round-start
    means only, so the arm holding the snapshot always survives and the
    active set never empties. Single-threaded; plain value otherwise.
    """

    __slots__ = (
        "config",
        "_initial",
        "_active",
        "_active_set",
        "_means",
        "_pulls",
        "_completed",
        "_sweep",
        "_cursor",
        "_threshold",
        "_round_max",
        "_pending",
        "_emitted",
    )

    def __init__(self, arms: Iterable[int], config: SEConfig):
        arms = sorted(set(int(a) for a in arms))
        if not arms:
            raise ValueError("SEState needs at least one arm")
        if arms[0] < 1:
            raise ValueError(f"arm indices are 1-based, got {arms[0]}")
        self.config = config
        self._initial = tuple(arms)
        self._active = list(arms)
        self._means = {a: 0.0 for a in arms}
        self._pulls = {a: 0 for a in arms}
        self._completed = 0
        self._sweep: list[int] | None = None
        self._cursor = 0
        self._threshold = -math.inf
        self._round_max = 0.0
        self._pending: int | None = None
        self._emitted = 0

    # -- protocol ---------------------------------------------------------

    def next_arm(self) -> int:
        """Return the next arm to pull, applying pending eliminations."""
        if self._pending is not None:
            raise AlternationError("next_arm called twice without an update")
        while self._sweep is None:
            self._open_round()
            self._advance()
        arm = self._sweep[self._cursor]
        self._cursor += 1
        self._pending = arm
        return arm

    def update(self, reward: float) -> None:
        """Record the reward for the pending arm and finish its round test."""
        arm = self._pending
        if arm is None:
            raise AlternationError("update called with no pending arm")
        if not 0.0 <= reward <= 1.0:
            raise ValueError(f"reward must lie in [0, 1], got {reward!r}")
        tau = self._completed + 1
        self._means[arm] = ((tau - 1.0) * self._means[arm] + reward) / tau
        self._pulls[arm] += 1
        self._emitted += 1
        self._pending = None
        # Test the rest of the sweep now so the completed-round counter is
        # accurate immediately after the last pull of a round (remaining
        # arms are eliminated, never pulled). Decisions depend only on
        # round-start quantities, so timing does not alter them.
        self._advance()

    # -- internals --------------------------------------------------------

    def _open_round(self) -> None:
        tau = self._completed + 1
        best = max(self._means[a] for a in self._active)
        self._round_max = best
        self._threshold = best - self.config.gamma * confidence_radius(tau, self.config.horizon)
        self._sweep = list(self._active)
        self._cursor = 0

    def _advance(self) -> None:
        # Eliminate failing arms up to the next survivor; close the round
        # when the sweep is exhausted (the next round opens lazily).
        sweep = self._sweep
        means = self._means
        thr = self._threshold
        cur = self._cursor
        n = len(sweep)
        while cur < n:
            arm = sweep[cur]
            if means[arm] >= thr:
                self._cursor = cur
                return
            self._active.remove(arm)
            cur += 1
        self._cursor = cur
        self._completed += 1
        self._sweep = None

    # -- views ------------------------------------------------------------

    @property
    def arms(self) -> tuple[int, ...]:
        """Initial arm set."""
        return self._initial

    @property
    def active(self) -> tuple[int, ...]:
        """Currently surviving arms, ascending."""
        return tuple(self._active)

    @property
    def round(self) -> int:
        """Current round number (1-based)."""
        return self._completed + 1

    @property
    def completed_rounds(self) -> int:
        """Rounds whose sweep has fully finished."""
        return self._completed

    @property
    def round_max(self) -> float:
        """Best running mean snapshotted at the start of the current round."""
        return self._round_max

    @property
    def cursor(self) -> int:
        """Position within the current round's sweep."""
        return self._cursor

    @property
    def total_pulls(self) -> int:
        return self._emitted

    @property
    def pending(self) -> int | None:
        return self._pending

    @property
    def locked(self) -> bool:
        """True once a single arm remains (it is pulled forever after)."""
        return len(self._active) == 1

    @property
    def sole_arm(self) -> int | None:
        return self._active[0] if len(self._active) == 1 else None

    def mean(self, arm: int) -> float:
        return self._means[arm]

    def pull_count(self, arm: int) -> int:
        return self._pulls[arm]

    @property
    def means(self) -> dict[int, float]:
        return dict(self._means)


class UCBPolicy:
    """Index baseline: running mean plus ``sqrt(2 log t / pulls)``.

    Each arm is pulled once before any index comparison; ties go to the
    lowest arm index. Same alternation protocol as :class:`SEState`.
    """

    __slots__ = ("n_arms", "_means", "_pulls", "_t", "_pending")

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.n_arms = n_arms
        self._means = [0.0] * (n_arms + 1)
        self._pulls = [0] * (n_arms + 1)
        self._t = 0
        self._pending: int | None = None

    def next_arm(self) -> int:
        if self._pending is not None:
            raise AlternationError("next_arm called twice without an update")
        pulls = self._pulls
        for arm in range(1, self.n_arms + 1):
            if pulls[arm] == 0:
                self._pending = arm
                return arm
        bonus = 2.0 * math.log(self._t)
        best_arm = 1
        best_index = -math.inf
        means = self._means
        for arm in range(1, self.n_arms + 1):
            index = means[arm] + math.sqrt(bonus / pulls[arm])
            if index > best_index:
                best_index = index
                best_arm = arm
        self._pending = best_arm
        return best_arm

    def update(self, reward: float) -> None:
        arm = self._pending
        if arm is None:
            raise AlternationError("update called with no pending arm")
        self._pulls[arm] += 1
        self._means[arm] += (reward - self._means[arm]) / self._pulls[arm]
        self._t += 1
        self._pending = None

    @property
    def pull_counts(self) -> Sequence[int]:
        return tuple(self._pulls[1:])

    @property
    def total_pulls(self) -> int:
        return self._t
