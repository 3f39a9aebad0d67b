"""Covariate problem solved by binning: one elimination run per cell.

The machine's first arm follows a power ramp crossing the flat arms at
x = 0.5, so the best arm flips there. With a fixed regular partition,
each bin solves its own static problem; bins far from the crossing lock
onto their local best arm, bins straddling it keep exploring.
"""

import numpy as np

from covband import BSEPolicy, bins_per_side, build_machine

machine = build_machine({"family": "power_gap", "params": {"alpha": 1.0, "L": 1.0}, "d": 1, "K": 2})
n = 40_000
m = bins_per_side(n, machine.n_arms, machine.d, machine.class_params.beta)
print(f"horizon {n}, {m} bins per side, per-bin horizon {n / m:.0f}")

policy = BSEPolicy(n, machine.n_arms, machine.d, m)
rng = np.random.default_rng(7)
for _ in range(n):
    x = machine.draw_covariate(rng)
    arm = policy.act(x)
    policy.feed(machine.draw_reward(arm, x, rng))

print("\nbin  center  visits  survivors")
for coords, visits in sorted(policy.visit_counts().items()):
    state = policy.bin_state(coords)
    center = (coords[0] - 0.5) / m
    survivors = ",".join(map(str, state.active))
    marker = " <- straddles the crossing" if abs(center - 0.5) < 0.5 / m else ""
    print(f"{coords[0]:>3}  {center:.3f}  {visits:>6}  {survivors:<9}{marker}")
