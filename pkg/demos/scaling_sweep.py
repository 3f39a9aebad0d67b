"""Horizon sweep with a fitted log-log exponent, saved for plotting.

Runs the binned policy over a geometric grid of horizons on the
power-ramp machine and fits the regret growth exponent. The trace CSV
and summary JSON it writes are the exact schemas the plots package
consumes.
"""

from pathlib import Path

from covband import run_sweep
from covband.harness import write_json, write_trace_csv

result = run_sweep(
    machine_spec={"family": "power_gap", "params": {"alpha": 0.5, "L": 1.0}, "d": 1, "K": 2},
    policy_specs=[{"policy": "bse"}, {"policy": "abse"}],
    n_values=[2**k for k in range(9, 14)],
    reps=20,
    base_seed=3,
    n_jobs=2,
)

for label, entry in result.scaling.items():
    print(f"{label:>5}: fitted slope {entry['slope']:.3f} (stderr {entry['stderr']:.3f}),"
          f" class-implied slope {entry['theory_slope']:.2f}")

out = Path("out")
out.mkdir(exist_ok=True)
flat = [s for batch in result.summaries.values() for s in batch]
write_trace_csv(out / "scaling_sweep.csv", flat)
write_json(out / "scaling_sweep.json", result.to_dict())
print(f"wrote {out / 'scaling_sweep.csv'} and {out / 'scaling_sweep.json'}")
