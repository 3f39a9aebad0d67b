"""Covariate bandit policies: fixed binning (BSE) and adaptive binning (ABSE).

Both route each covariate to a bin and delegate to that bin's own
successive-elimination run; ABSE additionally refines its partition
where surviving arms remain hard to separate. Policies follow the same
strict act/feed alternation as the static protocol and never consult
future covariates or rewards.
"""

from __future__ import annotations

import math

from .partition import AdaptiveTree
from .se import AlternationError, SEConfig, SEState, confidence_radius


# ---------------------------------------------------------------------------
# Parameter calculators
# ---------------------------------------------------------------------------


def bins_per_side(n: int, n_arms: int, d: int, beta: float) -> int:
    """Regular-partition resolution floor((n / (K ln K))**(1/(2*beta+d))), at least 1."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n_arms < 2:
        raise ValueError("need at least two arms")
    ratio = n / (n_arms * math.log(n_arms))
    power = 2.0 * beta + d
    m = max(1, int(ratio ** (1.0 / power)))
    # Settle float boundary cases against the defining inequality.
    while (m + 1) ** power <= ratio:
        m += 1
    while m > 1 and m**power > ratio:
        m -= 1
    return m


def max_tree_depth(n: int, n_arms: int, d: int, beta: float) -> int:
    """Smallest k with 2**-k <= (K ln K / n)**(1/(d+2*beta)).

    Requires ``n >= K ln K``; the adaptive policy is not defined below
    that budget.
    """
    if n_arms < 2:
        raise ValueError("need at least two arms")
    budget = n_arms * math.log(n_arms)
    if n < budget:
        raise ValueError(
            f"horizon n={n} is below K*ln(K)={budget:.3f}; "
            "the adaptive policy requires n >= K*ln(K)"
        )
    threshold = (budget / n) ** (1.0 / (d + 2.0 * beta))
    k = 0
    while 2.0**-k > threshold:
        k += 1
    return k


def bin_gap_constant(L: float, d: int, beta: float) -> float:
    """Scale 2*L*d**(beta/2) bounding mean variation across one bin side."""
    if L <= 0:
        raise ValueError("L must be positive")
    return 2.0 * L * d ** (beta / 2.0)


def rounds_before_burst(depth: int, n: int, gap_constant: float, beta: float, d: int) -> int:
    """Minimal rounds ell with confidence_radius(ell, n*2**(-depth*d)) <= 2*gap_constant*2**(-depth*beta).

    Exists for every input since the radius decreases to zero; found by
    doubling plus bisection on the defining inequality.
    """
    horizon = n * 2.0 ** (-depth * d)
    if horizon <= 0:
        raise ValueError("n * 2**(-depth*d) must be positive")
    target = 2.0 * gap_constant * 2.0 ** (-depth * beta)
    if confidence_radius(1, horizon) <= target:
        return 1
    lo, hi = 1, 2
    while confidence_radius(hi, horizon) > target:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if confidence_radius(mid, horizon) > target:
            lo = mid
        else:
            hi = mid
    return hi


# ---------------------------------------------------------------------------
# Binned successive elimination
# ---------------------------------------------------------------------------


class BSEPolicy:
    """One SE run (gamma=1, horizon n/M^d) per cell of a fixed regular partition."""

    def __init__(self, n: int, n_arms: int, d: int, bins_per_side: int):
        if bins_per_side < 1:
            raise ValueError("bins_per_side must be at least 1")
        self.n = n
        self.n_arms = n_arms
        self.d = d
        self.M = bins_per_side
        self.config = SEConfig(horizon=n / bins_per_side**d, gamma=1.0)
        self._states: dict[tuple[int, ...], SEState] = {}
        self._visits: dict[tuple[int, ...], int] = {}
        self._pending: tuple[int, ...] | None = None

    def act(self, x) -> int:
        if self._pending is not None:
            raise AlternationError("act called twice without a feed")
        m = self.M
        # Same cell rule as partition.bin_of (floor with top-face clamp),
        # inlined off the hot path's dataclass construction.
        coords = tuple(min(m, int(xl * m) + 1) for xl in x)
        state = self._states.get(coords)
        if state is None:
            state = SEState(range(1, self.n_arms + 1), self.config)
            self._states[coords] = state
            self._visits[coords] = 0
        self._visits[coords] += 1
        arm = state.next_arm()
        self._pending = coords
        return arm

    def feed(self, reward: float) -> None:
        if self._pending is None:
            raise AlternationError("feed called with no pending act")
        self._states[self._pending].update(reward)
        self._pending = None

    def bin_state(self, coords: tuple[int, ...]) -> SEState | None:
        return self._states.get(coords)

    def visit_counts(self) -> dict[tuple[int, ...], int]:
        return dict(self._visits)

    @property
    def total_steps(self) -> int:
        return sum(self._visits.values())


# ---------------------------------------------------------------------------
# Adaptively binned successive elimination
# ---------------------------------------------------------------------------


class ABSEPolicy:
    """SE (gamma=2, horizon n*side^d) per live bin of an adaptive dyadic tree.

    After each feed, the visited bin bursts into its 2^d children once
    its run has completed the depth-specific round budget, provided the
    bin is above the depth cap and at least two arms survive; children
    inherit exactly the surviving arm set.
    """

    def __init__(self, n: int, n_arms: int, d: int, beta: float, L: float):
        self.n = n
        self.n_arms = n_arms
        self.d = d
        self.beta = beta
        self.L = L
        self.max_depth = max_tree_depth(n, n_arms, d, beta)
        self.gap_constant = bin_gap_constant(L, d, beta)
        self.burst_rounds = tuple(
            rounds_before_burst(k, n, self.gap_constant, beta, d) for k in range(self.max_depth + 1)
        )
        self._horizons = tuple(n * 2.0 ** (-k * d) for k in range(self.max_depth + 1))
        self.tree = AdaptiveTree(d, self.max_depth)
        root = self.tree.root
        root.arms_at_birth = tuple(range(1, n_arms + 1))
        root.se = SEState(root.arms_at_birth, SEConfig(horizon=self._horizons[0], gamma=2.0))
        self._pending = None

    def act(self, x) -> int:
        if self._pending is not None:
            raise AlternationError("act called twice without a feed")
        node = self.tree.live_node_of(x)
        node.visits += 1
        arm = node.se.next_arm()
        self._pending = node
        return arm

    def feed(self, reward: float) -> None:
        node = self._pending
        if node is None:
            raise AlternationError("feed called with no pending act")
        node.se.update(reward)
        self._pending = None
        depth = node.bin.depth
        if (
            depth < self.max_depth
            and node.se.completed_rounds >= self.burst_rounds[depth]
            and len(node.se.active) >= 2
        ):
            survivors = node.se.active
            cfg = SEConfig(horizon=self._horizons[depth + 1], gamma=2.0)
            for child_bin in self.tree.burst(node.bin):
                self.tree.node(child_bin).se = SEState(survivors, cfg)

    def snapshot(self) -> dict:
        return self.tree.snapshot()


# ---------------------------------------------------------------------------
# Doubling wrapper for unknown horizons
# ---------------------------------------------------------------------------


def episode_index(t: int) -> int:
    """Doubling episode of step t: 0 for t=1, floor(log2 t) afterwards."""
    if t < 1:
        raise ValueError("steps are 1-based")
    return 0 if t == 1 else t.bit_length() - 1


def is_episode_start(t: int) -> bool:
    """True at t=1 and at every power of two (where the policy is rebuilt)."""
    if t < 1:
        raise ValueError("steps are 1-based")
    return t & (t - 1) == 0


class DoublingPolicy:
    """Restarts a horizon-dependent policy with horizon 2^k at steps 2^k.

    ``factory(horizon)`` must build a fresh policy; the policy built at
    step 2^k serves exactly the 2^k steps of its episode.
    """

    def __init__(self, factory):
        self._factory = factory
        self._inner = None
        self._t = 0

    def _maybe_rebuild(self) -> None:
        step = self._t + 1
        if self._inner is None or is_episode_start(step):
            self._inner = self._factory(max(1, step))

    def act(self, x) -> int:
        self._maybe_rebuild()
        return self._inner.act(x)

    def feed(self, reward: float) -> None:
        self._inner.feed(reward)
        self._t += 1

    def next_arm(self) -> int:
        self._maybe_rebuild()
        return self._inner.next_arm()

    def update(self, reward: float) -> None:
        self._inner.update(reward)
        self._t += 1

    @property
    def inner(self):
        return self._inner

    @property
    def episode(self) -> int:
        return episode_index(max(1, self._t))
