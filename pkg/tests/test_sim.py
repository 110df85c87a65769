"""
Test the discrete-event simulator and the trace metrics.
"""
import json
import math

import numpy as np
import pytest

from pulsefield import bounds
from pulsefield.adversary import AdversaryStrategy
from pulsefield.config import SimConfig, SYNC_MODES
from pulsefield.curve import CurveState
from pulsefield.interfaces import i_json
from pulsefield.phase import TWO_PI, normalize, ring_distance
from pulsefield.sim import Simulator, DriftClock, Trace, EventKind, run, run_batch, precision, accuracy, \
    detect_stabilization, audit_delays, audit_frequency, aggregate_runs, stabilization_windows, default_pi_target
from pulsefield.util import ConfigError, DomainError


def small_config(**kwargs):
    params = dict(n=6, f=0, d=0.01, rho=1e-4, T=100, omega=1, R0=2.0, R1=4.0, steps=12, seed=5)
    params.update(kwargs)
    return SimConfig(**params)


# ==========================================================================
# METRICS.
# ==========================================================================
@pytest.mark.parametrize("phases, expected", [([0.10, 0.12, 0.95], 0.17), ([0.3, 0.3, 0.3], 0.0),
                                              ([0.0, 0.5], 0.5)])
def test_precision(phases, expected):
    assert precision(phases) == pytest.approx(expected)


def test_precision_needs_two_phases():
    with pytest.raises(DomainError):
        precision([0.2])


def _linear_trace(rate=1.0, jump_at=None, jump=0.0, n=3, t_end=2.0, dt=0.005):
    times = np.arange(0.0, t_end + dt / 2, dt)
    offsets = np.linspace(0.0, 0.2, n)
    sync = np.mod(rate * times[:, None] + offsets[None, :], 1.0)
    if jump_at is not None:
        sync[times >= jump_at, 0] = np.mod(sync[times >= jump_at, 0] + jump, 1.0)
    return Trace.from_samples(times, sync, sample_interval=dt)


def test_accuracy_perfect_clocks():
    assert accuracy(_linear_trace(), 0.5) == pytest.approx(0.0, abs=1e-9)


def test_accuracy_drift():
    rho = 1e-3
    trace = _linear_trace(rate=1.0 + rho)
    assert accuracy(trace, 0.5) <= rho / 2 + 1e-9
    assert accuracy(trace, 0.5) == pytest.approx(rho / 2, rel=1e-6)


def test_accuracy_detects_adjustment():
    trace = _linear_trace(jump_at=0.7, jump=0.1)
    assert accuracy(trace, 0.5) >= 0.1 - 0.01


def test_accuracy_needs_coverage():
    trace = _linear_trace(t_end=1.0)
    with pytest.raises(DomainError):
        accuracy(trace, 0.8)


def test_detect_stabilization_from_start():
    assert detect_stabilization(_linear_trace(n=3), 0.25, hold=1.0) == 0.0


def test_detect_stabilization_never():
    times = np.arange(0.0, 3.0, 0.005)
    sync = np.column_stack([np.mod(times, 1.0), np.mod(times + 0.4, 1.0)])
    assert detect_stabilization(Trace.from_samples(times, sync), 0.1, hold=1.0) is None


def test_detect_stabilization_after_convergence():
    times = np.arange(0.0, 4.0, 0.005)
    gap = np.where(times < 1.5, 0.3, 0.01)
    sync = np.column_stack([np.mod(times, 1.0), np.mod(times + gap, 1.0)])
    t_stab = detect_stabilization(Trace.from_samples(times, sync), 0.05, hold=2.0)
    assert t_stab == pytest.approx(1.5, abs=0.006)


@pytest.mark.parametrize("pi_target", [0.0, 0.5, -0.1])
def test_detect_stabilization_rejects_target(pi_target):
    with pytest.raises(DomainError):
        detect_stabilization(_linear_trace(), pi_target, hold=1.0)


def test_stabilization_windows():
    config = SimConfig(n=16, omega=2, rho=0.0)
    assert stabilization_windows(config, None) is None
    assert stabilization_windows(config, 1.0) == 0.0
    assert stabilization_windows(config, 5.0) == pytest.approx(1.5)


def _summary(seed, windows, final=0.01):
    return {"seed": seed, "stabilized": windows is not None, "stabilization_windows": windows,
            "final_precision": final, "delay_violations": 0, "frequency_violations": 0}


def test_aggregate_runs():
    batch = aggregate_runs([_summary(0, 1.0), _summary(1, 2.5), _summary(2, None, final=0.3), _summary(3, 4.0)])
    assert batch["seeds"] == [0, 1, 2, 3]
    assert batch["num_runs"] == 4
    assert batch["num_stabilized"] == 3
    assert batch["fraction_stabilized"] == pytest.approx(0.75)
    assert batch["median_stabilization_windows"] == pytest.approx(3.25)
    assert batch["fraction_within_limit"] == pytest.approx(0.5)
    assert batch["mean_final_precision"] == pytest.approx((0.01 * 3 + 0.3) / 4)
    i_json.validate("batch_summary", batch)


def test_aggregate_runs_mostly_unstable():
    batch = aggregate_runs([_summary(0, None), _summary(1, None), _summary(2, 1.0)])
    assert batch["median_stabilization_windows"] is None


# ==========================================================================
# CLOCKS.
# ==========================================================================
@pytest.mark.parametrize("policy", ["constant", "oscillating", "random"])
def test_drift_clock_inverse(policy):
    strategy = AdversaryStrategy.from_config(SimConfig(rho=0.01, drift_policy=policy, seed=3))
    clock = DriftClock(2, 1234, 100, strategy)
    for t in [0.0, 0.37, 1.0, 4.25, 9.99]:
        assert clock.time_of(clock.ticks(t)) == pytest.approx(t, abs=1e-9)
    assert clock.ticks(0.0) == 1234
    assert 99 * (1 - 0.01) <= clock.ticks(1.0) - clock.ticks(0.0) <= 100 * (1 + 0.01)


def test_drift_clock_counter_wraps():
    strategy = AdversaryStrategy.from_config(SimConfig(rho=0.0))
    clock = DriftClock(0, 1000, 100, strategy)
    assert clock.counter(0.5, 1024) == (1000 + 50) % 1024


# ==========================================================================
# RUNS.
# ==========================================================================
def test_invalid_config_rejected_before_start():
    with pytest.raises(ConfigError):
        Simulator(small_config(f=6))


def test_run_is_deterministic():
    config = small_config(mode="half_random_walk", band_choice="random", d=0.0, rho=0.0)
    a, b = run(config), run(config)
    assert a.pulses == b.pulses
    assert np.array_equal(a.sync_phases, b.sync_phases)
    assert a.to_rows() == b.to_rows()
    assert json.dumps(a.summary()) == json.dumps(b.summary())


def test_rerun_resets():
    sim = Simulator(small_config())
    first = sim.run().to_rows()
    assert sim.is_run()
    assert sim.run().to_rows() == first


@pytest.mark.parametrize("mode", SYNC_MODES)
def test_single_node(mode):
    rho = 1e-4
    trace = run(SimConfig(n=1, R0=0.5, R1=1.0, mode=mode, rho=rho, steps=10, seed=1))
    pulses = trace.pulses[0]
    assert len(pulses) >= 6
    gaps = np.diff(pulses)
    assert np.all(gaps >= 0.5 / (1 + rho) - 0.01)
    assert np.all(gaps <= 1.5 / (1 - rho) + 0.01)
    assert trace.num_samples > 0
    assert audit_frequency(trace, rho) == []


@pytest.mark.parametrize("policy", ["zero", "max", "uniform_random", "per_receiver_extremes"])
def test_delivery_audit(policy):
    config = small_config(delay_policy=policy, d=0.02)
    trace = run(config)
    assert audit_delays(trace, config.d) == []
    assert audit_frequency(trace, config.rho) == []

    # Every pulse generated early enough reaches every nonfaulty node.
    complete = [t for times in trace.pulses.values() for t in times if t <= config.steps - config.d]
    delivered = [ev for ev in trace.deliveries(faulty=False) if ev.sent_time <= config.steps - config.d]
    assert len(delivered) == len(complete) * config.n


def test_event_order():
    trace = run(small_config())
    times = [ev.ref_time for ev in trace.events]
    assert times == sorted(times)
    generated = [ev for ev in trace.events if ev.kind == EventKind.GENERATE]
    assert len(generated) == sum(len(times) for times in trace.pulses.values())


@pytest.mark.parametrize("strategy", ["random_pulses", "fixed_phase", "anti_phase", "adaptive_worst"])
def test_faulty_senders_respect_frequency_cap(strategy):
    config = small_config(n=8, f=2, fault_strategy=strategy)
    trace = run(config)
    assert audit_frequency(trace, config.rho) == []
    for ev in trace.deliveries(faulty=True):
        assert ev.sender >= config.n - config.f
        assert ev.receiver < config.n - config.f


def test_silent_faults_are_transparent():
    common = dict(d=0.0, rho=0.0, delay_policy="zero", mode="extended", R0=2.0, R1=4.0, steps=10, seed=11)
    with_faults = run(SimConfig(n=9, f=3, **common))
    without = run(SimConfig(n=6, f=0, **common))
    assert with_faults.pulses == without.pulses
    assert with_faults.faulty_pulses == {}
    assert with_faults.interference == 0.0


def test_integer_trig_run():
    config = small_config(integer_trig=True, trig_scale=1 << 12)
    trace = run(config)
    assert audit_delays(trace, config.d) == []
    assert sum(trace.decisions.values()) > 0


def test_summary_schema():
    summary = run(small_config()).summary()
    model = i_json.validate("run_summary", summary)
    assert model.seed == 5
    assert model.delay_violations == 0
    assert model.frequency_violations == 0
    assert model.num_pulses > 0


def test_hostile_init_summary_schema():
    plain = run(small_config()).summary()
    hostile = run(small_config(hostile_init=True)).summary()
    assert set(hostile) == set(plain)
    i_json.validate("run_summary", hostile)


def test_trace_rows():
    trace = run(small_config(steps=3))
    rows = trace.to_rows()
    assert len(rows) == trace.num_samples * 6
    assert all(len(row) == len(Trace.COLUMNS) for row in rows)
    assert all(0.0 <= row[2] < 1.0 and 0.0 <= row[3] < 1.0 for row in rows)
    assert np.all(np.diff(trace.sample_times) < 0.01)


def test_run_batch_writes_files(tmp_path):
    config = small_config(steps=4)
    summaries = run_batch(config, [3, 4], processes=1, out_dir=str(tmp_path), progress=False)
    assert [s["seed"] for s in summaries] == [3, 4]
    for seed in (3, 4):
        assert (tmp_path / f"trace_{seed}.csv").exists()
        assert i_json.load_json("run_summary", str(tmp_path / f"summary_{seed}.json")).seed == seed


def test_run_batch_independent_of_workers():
    config = small_config(steps=4)
    sequential = run_batch(config, [0, 1, 2], processes=1, progress=False)
    parallel = run_batch(config, [0, 1, 2], processes=2, progress=False)
    assert json.dumps(sequential) == json.dumps(parallel)


# ==========================================================================
# SELF-STABILIZATION.
# ==========================================================================
def _acceptance_config(f):
    return SimConfig(n=16, f=f, d=0.01, rho=1e-4, omega=6, mode="extended", hostile_init=True, hold=2.0,
                     steps=6 + 3 * 6 + 4)


@pytest.mark.slow
@pytest.mark.parametrize("f, fraction", [(0, 0.95), (4, 0.90)])
def test_self_stabilization(f, fraction):
    config = _acceptance_config(f)
    summaries = run_batch(config, range(200), processes=0, progress=False)
    batch = aggregate_runs(summaries, window_limit=3.0)
    assert batch["delay_violations"] == 0
    assert batch["frequency_violations"] == 0
    assert batch["fraction_within_limit"] >= fraction


def test_stabilization_small_batch():
    summaries = run_batch(_acceptance_config(0), range(5), processes=1, progress=False)
    for summary in summaries:
        assert summary["stabilized"]
        assert summary["stabilization_windows"] <= 3.0
        assert summary["delay_violations"] == 0
    batch = aggregate_runs(summaries, window_limit=3.0)
    assert batch["fraction_within_limit"] == 1.0


def test_simulator_getters():
    sim = Simulator(small_config(n=7, f=2))
    assert sim.topology().number_of_nodes() == 7
    assert sim.topology().number_of_edges() == 21
    assert sorted(sim.states()) == [0, 1, 2, 3, 4]
    assert not sim.is_run()
    trace = sim.run()
    assert sim.trace() is trace
    assert trace.pulse_phases.shape == trace.sync_phases.shape == (trace.num_samples, 5)
    assert trace.faulty_ids == (5, 6)


def test_default_pi_target():
    config = SimConfig(n=100, d=0.0, rho=0.0)
    assert default_pi_target(config, 0.0) == pytest.approx(0.02)
    assert default_pi_target(config, 10.0) == pytest.approx(math.asin(0.2) / (2 * math.pi) + 0.02)


def test_output_schemas():
    assert set(i_json.schemas()) == {"run_summary", "batch_summary", "curve_summary", "histogram", "trig_report"}
    with pytest.raises(ConfigError):
        i_json.validate("run_summary", {"seed": 0})


# ==========================================================================
# FAULTY SENDERS.
# ==========================================================================
@pytest.mark.parametrize("strategy", ["random_pulses", "adaptive_worst"])
def test_frequency_cap_over_seeds(strategy):
    for seed in range(20):
        config = small_config(n=5, f=1, steps=8, fault_strategy=strategy, seed=seed)
        trace = run(config)
        assert audit_frequency(trace, config.rho) == []
        assert audit_delays(trace, config.d) == []


def test_anti_phase_interference_bound():
    common = dict(d=0.0, rho=0.0, delay_policy="zero", mode="random_walk", omega=2, R0=2.0, R1=4.0, steps=12, seed=4)
    clean = run(SimConfig(n=6, f=0, **common))
    attacked = run(SimConfig(n=8, f=2, fault_strategy="anti_phase", **common))

    # Random-walk decisions ignore the field, so nonfaulty pulses coincide.
    assert attacked.pulses == clean.pulses
    assert attacked.faulty_pulses

    per_faulty = AdversaryStrategy(rho=0.0).budget(common["omega"])
    clean_strength = {(t, uid): s for t, uid, s, _ in clean.fields}
    losses = [clean_strength[t, uid] - s for t, uid, s, _ in attacked.fields]
    assert max(losses) <= 2 * per_faulty + 1e-9
    assert max(losses) > 0.0


# ==========================================================================
# MEASUREMENT PROPERTIES.
# ==========================================================================
def _one_kick_strengths(n, seeds):
    strengths = []
    for seed in seeds:
        config = SimConfig(n=n, mode="one_kick_auth", d=0.0, rho=0.0, delay_policy="zero", steps=3, seed=seed)
        trace = Simulator(config, record_events=False).run()
        # From t = 2.5 on every node has pulsed exactly once in the last cycle.
        strengths.append(next(s for t, _, s, _ in trace.fields if t >= 2.5))
    return np.asarray(strengths)


def test_one_kick_strength_tail():
    n = 25
    strengths = _one_kick_strengths(n, range(300))
    for r in (2.5, 5.0, 7.5):
        assert abs(np.mean(strengths >= r) - math.exp(-r ** 2 / n)) <= 0.1


@pytest.mark.slow
def test_one_kick_strength_tail_full():
    strengths = _one_kick_strengths(100, range(1000))
    for r in (5.0, 10.0, 15.0):
        assert abs(np.mean(strengths >= r) - math.exp(-r ** 2 / 100)) <= 0.06


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_walk_measurements_agree(seed):
    n, omega, T = 3, 30, 10000
    config = SimConfig(n=n, d=0.0, rho=0.0, delay_policy="zero", T=T, omega=omega, mode="random_walk",
                       steps=omega + 40, seed=seed)
    trace = run(config)
    pulses = np.sort(np.concatenate([np.asarray(times) for times in trace.pulses.values()]))
    fields = sorted(f for f in trace.fields if f[0] >= omega + 1.5 and f[3] is not None)

    # Two ticks of rounding per record, for both measurements.
    rounding = 2 * TWO_PI * 2 * n * (2 * omega + 1) / T
    slack = 2.0 / T

    def count(t_a, t_b):
        return int(np.sum((pulses >= t_a - slack) & (pulses <= t_b + slack)))

    checked = 0
    for (t1, _, r1, a1), (t2, _, r2, a2) in zip(fields, fields[1:]):
        if t2 - t1 > 1.5:
            continue
        eps = count(t1 - omega, t2 - omega) + count(t1, t2) + rounding
        r = min(r1, r2)
        if r <= 2 * eps:
            continue
        bound = bounds.walk_sync_bound(eps, 0.0, omega, r)
        spread = ring_distance(normalize(t1 + a1), normalize(t2 + a2))
        assert math.sin(TWO_PI * spread) <= bound + 1e-9
        if bound < 1.0:
            assert spread < 0.25
        checked += 1
    assert checked >= 20


# ==========================================================================
# CURVE GAME CONSISTENCY.
# ==========================================================================
def test_curve_game_tracks_simulator():
    n, omega, T = 4, 2, 10000
    config = SimConfig(n=n, f=0, d=0.0, rho=0.0, delay_policy="zero", T=T, omega=omega, mode="random_walk",
                       R0=2.0, R1=4.0, steps=20, seed=8)
    trace = run(config)
    pulses = np.sort(np.concatenate([np.asarray(times) for times in trace.pulses.values()]))
    slack = 2.0 / T

    previous = None
    for t, _, strength, _ in sorted(trace.fields):
        if t < omega + 1.5:
            continue
        # The curve holds the reference phases of the pulses generated in the window, oldest first.
        inside = pulses[(pulses > t - omega + slack) & (pulses < t - slack)]
        edge = int(np.sum(np.abs(pulses - (t - omega)) <= slack) + np.sum(np.abs(pulses - t) <= slack))
        curve = CurveState.from_angles(np.mod(inside, 1.0))
        eps_max = edge + TWO_PI * 2 * curve.N / T
        assert abs(curve.strength - strength) <= eps_max + 1e-9

        if previous is not None:
            # Each dropped tail and appended head moves the endpoint by at most one unit.
            kept = np.intersect1d(previous[0], inside)
            moved = len(previous[0]) + len(inside) - 2 * len(kept)
            assert abs(curve.strength - previous[1].strength) <= moved + 1e-9
        previous = (inside, curve)
