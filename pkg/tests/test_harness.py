"""Harness: simulation loop, aggregation, bounds, fits, and the peeling check."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from covband.harness import (
    RunConfig,
    aggregate_traces,
    build_policy,
    config_digest,
    default_checkpoints,
    fit_scaling_exponent,
    peeling_check,
    run_many,
    run_once,
    run_sweep,
    static_regret_bound,
    stream,
    theory_slope,
    write_json,
    write_trace_csv,
)
from covband.machines import MachineClassParams, StaticMachine, build_machine

STATIC = {"family": "static", "params": {"means": [0.5, 0.9]}}
POWER_GAP = {"family": "power_gap", "params": {"alpha": 0.5, "L": 1.0}, "d": 1, "K": 2}


class TestCheckpoints:
    def test_default_grid(self):
        assert default_checkpoints(10) == (1, 2, 3, 5, 10)
        assert default_checkpoints(1) == (1,)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RunConfig(machine=STATIC, policy={"policy": "se"}, n=10, checkpoints=(1, 5))
        with pytest.raises(ValueError):
            RunConfig(machine=STATIC, policy={"policy": "se"}, n=10, checkpoints=(5, 1, 10))
        with pytest.raises(ValueError):
            RunConfig(machine=STATIC, policy={"policy": "se"}, n=10, horizon_mode="weird")

    def test_digest_is_stable_and_name_insensitive(self):
        a = RunConfig(machine=STATIC, policy={"policy": "se"}, n=10)
        b = RunConfig(machine=STATIC, policy={"policy": "se"}, n=10, name="other")
        assert config_digest(a) == config_digest(b)
        assert a.run_id == config_digest(a)
        assert b.run_id == "other"


class TestRunOnce:
    def test_oracle_policy_has_zero_regret(self):
        for machine in (STATIC, POWER_GAP):
            cfg = RunConfig(machine=machine, policy={"policy": "oracle"}, n=500)
            trace = run_once(cfg, 0)
            assert trace.final == 0.0
            assert all(v == 0.0 for v in trace.values)

    def test_fixed_arm_regret_is_linear(self):
        cfg = RunConfig(
            machine=STATIC, policy={"policy": "fixed", "params": {"arm": 1}}, n=1000
        )
        trace = run_once(cfg, 3)
        for t, v in zip(trace.times, trace.values):
            assert v == pytest.approx(0.4 * t)
        assert trace.final == pytest.approx(400.0)

    def test_trace_is_monotone_and_bounded(self):
        configs = [
            RunConfig(machine=STATIC, policy={"policy": "se"}, n=4000, base_seed=4),
            RunConfig(machine=STATIC, policy={"policy": "ucb"}, n=2000, base_seed=4),
            RunConfig(machine=POWER_GAP, policy={"policy": "bse"}, n=4000, base_seed=4),
            RunConfig(machine=POWER_GAP, policy={"policy": "abse"}, n=4000, base_seed=4),
        ]
        for cfg in configs:
            machine = build_machine(cfg.machine)
            if isinstance(machine, StaticMachine):
                worst = max(machine.gaps())
            else:
                X = np.linspace(0, 1, 513).reshape(-1, 1)
                F = machine.mean_matrix(X)
                worst = float((F.max(axis=1) - F.min(axis=1)).max())
            for rep in range(3):
                trace = run_once(cfg, rep)
                vals = (0.0,) + trace.values
                assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
                for t, v in zip(trace.times, trace.values):
                    assert -1e-12 <= v <= worst * t + 1e-9

    def test_replay_is_bit_exact(self):
        cfg = RunConfig(machine=POWER_GAP, policy={"policy": "abse"}, n=3000, base_seed=9)
        assert run_once(cfg, 5) == run_once(cfg, 5)

    def test_reps_use_distinct_streams(self):
        cfg = RunConfig(machine=STATIC, policy={"policy": "se"}, n=2000, base_seed=9)
        assert run_once(cfg, 0).values != run_once(cfg, 1).values

    def test_realized_regret_mode_runs(self):
        cfg = RunConfig(
            machine=STATIC, policy={"policy": "se"}, n=2000, base_seed=2, realized_rewards=True
        )
        trace = run_once(cfg, 0)
        assert trace.times[-1] == 2000
        # realized regret fluctuates but stays in the crude envelope
        assert abs(trace.final) <= 2000

    def test_unknown_policy_and_bad_pairings(self):
        with pytest.raises(ValueError):
            run_once(RunConfig(machine=STATIC, policy={"policy": "nope"}, n=10), 0)
        with pytest.raises(ValueError):
            run_once(RunConfig(machine=STATIC, policy={"policy": "bse"}, n=10), 0)
        with pytest.raises(ValueError):
            run_once(RunConfig(machine=POWER_GAP, policy={"policy": "se"}, n=10), 0)
        with pytest.raises(ValueError):
            run_once(
                RunConfig(machine=STATIC, policy={"policy": "se", "params": {"bogus": 1}}, n=10), 0
            )


class TestPoissonHorizon:
    def test_realized_horizon_varies_with_mean_n(self):
        cfg = RunConfig(
            machine=STATIC, policy={"policy": "se"}, n=2000, horizon_mode="poisson", reps=200
        )
        horizons = [run_once(cfg, rep).horizon for rep in range(200)]
        assert len(set(horizons)) > 10
        assert np.mean(horizons) == pytest.approx(2000, rel=0.02)

    def test_short_horizon_freezes_trailing_checkpoints(self):
        cfg = RunConfig(
            machine=STATIC,
            policy={"policy": "fixed", "params": {"arm": 1}},
            n=2000,
            horizon_mode="poisson",
            base_seed=77,
        )
        for rep in range(20):
            trace = run_once(cfg, rep)
            assert trace.final == pytest.approx(0.4 * trace.horizon)
            for t, v in zip(trace.times, trace.values):
                assert v == pytest.approx(0.4 * min(t, trace.horizon))


class TestRunMany:
    def test_single_rep_conventions(self):
        cfg = RunConfig(machine=STATIC, policy={"policy": "se"}, n=500, reps=1)
        summary = run_many(cfg)
        assert summary.mean == summary.traces[0].values
        assert all(s == 0.0 for s in summary.sd)
        assert all(w == 0.0 for w in summary.ci95_half)

    def test_aggregate_is_order_independent(self):
        cfg = RunConfig(machine=STATIC, policy={"policy": "se"}, n=500, reps=8)
        summary = run_many(cfg)
        flipped = aggregate_traces(cfg, list(reversed(summary.traces)))
        assert flipped.mean == summary.mean
        assert flipped.sd == summary.sd
        assert flipped.traces == summary.traces

    def test_parallel_matches_serial_bit_for_bit(self):
        cfg = RunConfig(machine=POWER_GAP, policy={"policy": "bse"}, n=800, reps=6, base_seed=5)
        serial = run_many(cfg, n_jobs=1)
        parallel = run_many(cfg, n_jobs=2)
        assert serial.traces == parallel.traces
        assert serial.mean == parallel.mean

    def test_ci_width_shrinks_like_root_reps(self):
        means = (0.25, 0.75)
        base = dict(machine={"family": "static", "params": {"means": list(means)}},
                    policy={"policy": "se"}, n=1000, base_seed=31)
        narrow = run_many(RunConfig(reps=200, **base))
        wide = run_many(RunConfig(reps=800, **base))
        ratio = wide.final_ci95_half / narrow.final_ci95_half
        assert ratio == pytest.approx(0.5, rel=0.2)

    def test_elimination_regret_below_bound_on_static_configs(self):
        for means in ((0.3, 0.8), (0.5, 0.6, 0.9), (0.1, 0.45, 0.55, 0.7)):
            cfg = RunConfig(
                machine={"family": "static", "params": {"means": list(means)}},
                policy={"policy": "se"},
                n=5000,
                reps=50,
                base_seed=13,
            )
            summary = run_many(cfg)
            gaps = tuple(max(means) - m for m in means)
            assert summary.final_mean <= static_regret_bound(cfg.n, gaps)

    def test_mean_regret_grows_with_horizon(self):
        finals = []
        for n in (500, 2000, 8000):
            cfg = RunConfig(machine=STATIC, policy={"policy": "se"}, n=n, reps=30, base_seed=8)
            finals.append(run_many(cfg).final_mean)
        assert finals[0] < finals[1] < finals[2]


class TestStaticRegretBound:
    def test_reference_two_arm_value(self):
        # gap branch: 646 * ln(20000 * 0.04) / 0.2; gap-free branch:
        # 166 * sqrt(20000 * 2 * ln 2); the minimum is the gap branch
        bound = static_regret_bound(20_000, (0.2, 0.0))
        assert bound == pytest.approx(21591.295880367603, rel=1e-12)
        assert static_regret_bound(20_000, 0.2) == bound
        assert static_regret_bound(20_000, (0.2,)) == bound

    def test_gap_free_branch_wins_for_tiny_gaps(self):
        bound = static_regret_bound(1000, (0.001, 0.0))
        assert bound == pytest.approx(166.0 * math.sqrt(1000 * 2 * math.log(2)), rel=1e-12)

    def test_all_zero_gaps_give_gap_free_term(self):
        assert static_regret_bound(500, (0.0, 0.0)) == pytest.approx(
            166.0 * math.sqrt(500 * 2 * math.log(2))
        )

    def test_floor_case_in_split_form(self):
        # n * gap^2 <= e floors the log, leaving 646 / gap
        assert static_regret_bound(3, (0.9,), strategy="split_scan") == pytest.approx(646.0 / 0.9)

    def test_split_form_never_exceeds_plain_gap_sum(self):
        rng = np.random.default_rng(30)
        for _ in range(50):
            gaps = sorted(rng.random(4) * 0.8 + 0.01, reverse=True)
            n = float(rng.integers(100, 10**6))
            plain = 646.0 * sum(max(math.log(n * g * g), 1.0) / g for g in gaps)
            assert static_regret_bound(n, gaps, strategy="split_scan") <= plain + 1e-9

    def test_gap_term_eventually_monotone(self):
        # phi(x) = blog(n x^2)/x rises until n x^2 = e^2 and falls beyond;
        # across any ordered pair the ratio stays below 2 e^{-1/2}
        n = 10_000
        knee = math.sqrt(math.e**2 / n)
        xs = np.linspace(knee, 1.0, 200)
        phi = [max(math.log(n * x * x), 1.0) / x for x in xs]
        assert all(a >= b - 1e-12 for a, b in zip(phi, phi[1:]))
        rising = np.linspace(math.sqrt(math.e / n), knee, 50)
        phi_r = [max(math.log(n * x * x), 1.0) / x for x in rising]
        assert all(a <= b + 1e-12 for a, b in zip(phi_r, phi_r[1:]))
        grid = np.linspace(1e-3, 1.0, 400)
        vals = [max(math.log(n * x * x), 1.0) / x for x in grid]
        for i, small in enumerate(grid):
            for j in range(i, len(grid), 37):
                assert vals[j] <= 2.0 * math.exp(-0.5) * vals[i] + 1e-9

    def test_input_validation(self):
        with pytest.raises(ValueError):
            static_regret_bound(100, ())
        with pytest.raises(ValueError):
            static_regret_bound(100, (-0.1, 0.2))
        with pytest.raises(ValueError):
            static_regret_bound(100, (0.2,), strategy="nope")


class TestScalingFit:
    def test_exact_half_power_line(self):
        points = [(n, 3.0 * n**0.5) for n in (10, 100, 1000, 10_000)]
        fit = fit_scaling_exponent(points)
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-9)

    def test_linear_growth_has_unit_slope(self):
        fit = fit_scaling_exponent([(n, 0.02 * n) for n in (16, 64, 256, 1024)])
        assert fit.slope == pytest.approx(1.0, abs=1e-12)

    def test_nonpositive_points_are_dropped_with_warning(self):
        points = [(10, 5.0), (100, 0.0), (1000, 12.0), (10_000, 30.0)]
        with pytest.warns(UserWarning):
            fit = fit_scaling_exponent(points)
        assert fit.slope > 0

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            fit_scaling_exponent([(10, 1.0), (100, 2.0)])

    def test_theory_slope(self):
        cp = MachineClassParams(alpha=0.5, beta=1.0, L=1.0)
        assert theory_slope(cp, 1) == pytest.approx(0.5)
        cp2 = MachineClassParams(alpha=2.0, beta=0.5, L=1.0)
        assert theory_slope(cp2, 1) == pytest.approx(1.0 - 0.5 * 3.0 / 2.0)


class TestPeelingCheck:
    def test_zero_increments_never_cross(self):
        freq = peeling_check(
            T=64, delta=0.3, bounds=(-1.0, 1.0), distribution={"kind": "zero"},
            reps=50, rng=np.random.default_rng(0),
        )
        assert freq == 0.0

    def test_looser_claimed_bounds_reduce_crossings(self):
        # same +-0.25 coin, thresholds computed for claimed ranges of
        # width 2 and 0.5: shrinking the claimed width can only raise the
        # crossing frequency
        wide = peeling_check(
            T=256, delta=0.2, bounds=(-1.0, 1.0),
            distribution={"kind": "coin", "scale": 0.25},
            reps=4000, rng=np.random.default_rng(1),
        )
        narrow = peeling_check(
            T=256, delta=0.2, bounds=(-0.25, 0.25),
            distribution={"kind": "coin", "scale": 0.25},
            reps=4000, rng=np.random.default_rng(1),
        )
        assert wide <= narrow

    def test_uniform_increments_obey_bound(self):
        delta = 0.25
        reps = 5000
        freq = peeling_check(
            T=128, delta=delta, bounds=(-1.0, 1.0),
            distribution={"kind": "uniform"},
            reps=reps, rng=np.random.default_rng(2),
        )
        assert freq <= delta + 3 * math.sqrt(delta * (1 - delta) / reps)

    def test_validation(self):
        rng = np.random.default_rng(3)
        with pytest.raises(ValueError):
            peeling_check(10, 0.0, (-1, 1), {"kind": "zero"}, 10, rng)
        with pytest.raises(ValueError):
            peeling_check(10, 1.0, (-1, 1), {"kind": "zero"}, 10, rng)
        with pytest.raises(ValueError):
            peeling_check(10, 0.2, (0.5, 1.0), {"kind": "zero"}, 10, rng)
        with pytest.raises(ValueError):
            peeling_check(10, 0.2, (-1, 1), {"kind": "coin", "scale": 2.0}, 10, rng)


class TestSweepAndOutputs:
    def test_sweep_produces_scaling_block(self, tmp_path):
        result = run_sweep(
            machine_spec=POWER_GAP,
            policy_specs=[{"policy": "bse"}],
            n_values=[64, 128, 256, 512],
            reps=3,
            base_seed=17,
        )
        entry = result.scaling["bse"]
        assert {"slope", "intercept", "stderr", "theory_slope"} <= set(entry)
        assert entry["theory_slope"] == pytest.approx(0.5)
        doc = result.to_dict()
        path = tmp_path / "sweep.json"
        write_json(path, doc)
        loaded = json.loads(path.read_text())
        assert loaded["scaling"]["bse"]["slope"] == pytest.approx(entry["slope"])

    def test_trace_csv_schema_and_determinism(self, tmp_path):
        cfg = RunConfig(machine=STATIC, policy={"policy": "se"}, n=200, reps=3, base_seed=1)
        summary = run_many(cfg)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_trace_csv(p1, [summary])
        write_trace_csv(p2, [summary])
        assert p1.read_bytes() == p2.read_bytes()
        lines = p1.read_text().strip().splitlines()
        assert lines[0] == "run_id,rep,t,regret"
        assert len(lines) == 1 + 3 * len(summary.times)
        run_id, rep, t, regret = lines[1].split(",")
        assert run_id == cfg.run_id
        assert int(rep) == 0 and int(t) == summary.times[0]
        float(regret)

    def test_summary_json_is_deterministic(self, tmp_path):
        cfg = RunConfig(machine=STATIC, policy={"policy": "se"}, n=150, reps=2, base_seed=6)
        doc = run_many(cfg).to_dict()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        write_json(p1, doc)
        write_json(p2, doc)
        assert p1.read_bytes() == p2.read_bytes()


class TestStreams:
    def test_roles_are_independent(self):
        a = stream(1, 0, 0).random(5)
        b = stream(1, 0, 1).random(5)
        c = stream(1, 1, 0).random(5)
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)

    def test_repeatable(self):
        assert np.allclose(stream(7, 3, 1).random(8), stream(7, 3, 1).random(8))


class TestBuildPolicy:
    def test_bse_resolves_bins_from_machine_class(self):
        machine = build_machine(POWER_GAP)
        policy = build_policy({"policy": "bse"}, machine, 1000)
        assert policy.M == 8  # (1000 / (2 ln 2))**(1/3) floored

    def test_abse_uses_declared_class(self):
        machine = build_machine(POWER_GAP)
        policy = build_policy({"policy": "abse"}, machine, 10_000)
        assert policy.beta == machine.class_params.beta
        assert policy.L == machine.class_params.L

    def test_explicit_overrides(self):
        machine = build_machine(POWER_GAP)
        policy = build_policy({"policy": "bse", "params": {"M": 4}}, machine, 1000)
        assert policy.M == 4
