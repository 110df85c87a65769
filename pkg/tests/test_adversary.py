"""
Test delay, drift and faulty-pulse scheduling of the adversary.
"""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from pulsefield import adversary as adv
from pulsefield.config import SimConfig
from pulsefield.phase import ring_distance
from pulsefield.util import ConfigError


def snapshot(**kwargs):
    defaults = dict(time=0.0, receivers=(0, 1), faulty_ids=(2,), global_phase=0.1)
    defaults.update(kwargs)
    return adv.SystemSnapshot(**defaults)


def test_invalid_policy_rejected():
    with pytest.raises(ConfigError):
        adv.AdversaryStrategy(delay_policy="worst")
    with pytest.raises(ConfigError):
        adv.AdversaryStrategy(band_choice_policy="sometimes")


def test_from_config():
    config = SimConfig(d=0.02, rho=1e-3, fault_strategy="anti_phase", band_choice="adaptive", seed=9)
    strategy = adv.AdversaryStrategy.from_config(config)
    assert strategy.fault_policy == "anti_phase"
    assert strategy.band_choice_policy == "adaptive"
    assert (strategy.R0, strategy.eps_max) == (config.R0, config.eps_max)
    assert (strategy.d, strategy.rho, strategy.seed) == (0.02, 1e-3, 9)


def test_budget_and_gap():
    strategy = adv.AdversaryStrategy(rho=0.0)
    assert strategy.min_gap == pytest.approx(0.5)
    assert strategy.budget(1.0) == 3
    assert strategy.budget(0.2) == 1


@pytest.mark.parametrize("policy, receiver, expected", [("zero", 0, 0.0), ("max", 0, 0.05),
                                                        ("per_receiver_extremes", 2, 0.0),
                                                        ("per_receiver_extremes", 3, 0.05)])
def test_deterministic_delays(policy, receiver, expected):
    strategy = adv.AdversaryStrategy(delay_policy=policy, d=0.05)
    assert adv.schedule_delay(strategy, 0, receiver, 1.0) == expected


@given(st.integers(0, 50), st.integers(0, 50), st.floats(0, 100, allow_nan=False))
def test_random_delay_in_range_and_reproducible(sender, receiver, t):
    strategy = adv.AdversaryStrategy(delay_policy="uniform_random", d=0.05, seed=3)
    delay = adv.schedule_delay(strategy, sender, receiver, t)
    assert 0.0 <= delay <= 0.05
    assert adv.schedule_delay(strategy, sender, receiver, t) == delay


def test_batched_delays():
    strategy = adv.AdversaryStrategy(delay_policy="uniform_random", d=0.05)
    delays = adv.schedule_delays(strategy, 0, range(10), 1.0, rng=np.random.default_rng(0))
    assert delays.shape == (10,)
    assert np.all((delays >= 0) & (delays <= 0.05))
    extremes = adv.schedule_delays(adv.AdversaryStrategy(delay_policy="per_receiver_extremes", d=0.05), 0,
                                   [0, 1, 2], 1.0)
    assert list(extremes) == [0.0, 0.05, 0.0]


def test_drift_policies():
    rho = 1e-3
    assert adv.schedule_drift(adv.AdversaryStrategy(drift_policy="constant", rho=rho), 0, 5.5) == 1 + rho
    osc = adv.AdversaryStrategy(drift_policy="oscillating", rho=rho)
    assert adv.schedule_drift(osc, 0, 0.5) == 1 - rho
    assert adv.schedule_drift(osc, 0, 1.5) == 1 + rho
    assert adv.schedule_drift(osc, 1, 0.5) == 1 + rho


def test_random_drift_constant_per_cycle():
    strategy = adv.AdversaryStrategy(drift_policy="random", rho=1e-3, seed=1)
    speeds = [adv.schedule_drift(strategy, node, t) for node in range(5) for t in np.linspace(0, 20, 41)]
    assert all(1 - 1e-3 <= s <= 1 + 1e-3 for s in speeds)
    assert adv.schedule_drift(strategy, 2, 3.1) == adv.schedule_drift(strategy, 2, 3.9)


def test_silent_faults_emit_nothing():
    strategy = adv.AdversaryStrategy(fault_policy="silent")
    assert adv.emit_faulty_pulses(strategy, (0.0, 5.0), snapshot(), np.random.default_rng(0)) == []


def test_fixed_phase_pulses():
    strategy = adv.AdversaryStrategy(fault_policy="fixed_phase", fixed_phase=0.25)
    pulses = adv.emit_faulty_pulses(strategy, (0.0, 3.0), snapshot(), np.random.default_rng(0))
    assert [t for _, rid, t in pulses if rid == 0] == pytest.approx([0.25, 1.25, 2.25])
    assert {fid for fid, _, _ in pulses} == {2}
    assert [item[2] for item in pulses] == sorted(item[2] for item in pulses)


def test_anti_phase_pulses():
    strategy = adv.AdversaryStrategy(fault_policy="anti_phase")
    pulses = adv.emit_faulty_pulses(strategy, (0.0, 2.0), snapshot(global_phase=0.1), np.random.default_rng(0))
    assert all(ring_distance(t % 1.0, 0.6) < 1e-9 for _, _, t in pulses)
    assert len(pulses) == 4
    assert adv.emit_faulty_pulses(strategy, (0.0, 2.0), snapshot(global_phase=None), None) == []


def test_adaptive_worst_steers_into_middle_band():
    strategy = adv.AdversaryStrategy(fault_policy="adaptive_worst", R0=5.0, eps_max=1.0)
    snap = snapshot(receivers=(0, 1, 2), faulty_ids=(3,), strengths={0: 9.0, 1: 1.0, 2: 5.5})
    pulses = adv.emit_faulty_pulses(strategy, (0.0, 2.0), snap, np.random.default_rng(0))
    assert [t for _, rid, t in pulses if rid == 0] == pytest.approx([0.6, 1.6])
    assert [t for _, rid, t in pulses if rid == 1] == pytest.approx([0.1, 1.1])
    assert [t for _, rid, t in pulses if rid == 2] == []
    assert adv.emit_faulty_pulses(strategy, (0.0, 2.0), snapshot(global_phase=None), None) == []


def test_random_pulses_respect_frequency_cap():
    strategy = adv.AdversaryStrategy(fault_policy="random_pulses", rho=1e-4)
    snap = snapshot(faulty_ids=(2, 3), receivers=tuple(range(4)))
    pulses = adv.emit_faulty_pulses(strategy, (10.0, 20.0), snap, np.random.default_rng(5))
    for fid in (2, 3):
        for rid in range(4):
            times = [t for f, r, t in pulses if (f, r) == (fid, rid)]
            assert all(10.0 <= t < 20.0 for t in times)
            assert len(times) == strategy.budget(10.0)
            assert np.all(np.diff(times) >= strategy.min_gap - 1e-12)


def test_random_pulses_fill_remaining_budget():
    strategy = adv.AdversaryStrategy(fault_policy="random_pulses", rho=0.0)
    snap = snapshot(receivers=(0,), last_injection={(2, 0): 0.75})
    for seed in range(20):
        times = [t for _, _, t in adv.emit_faulty_pulses(strategy, (1.0, 3.0), snap, np.random.default_rng(seed))]
        assert len(times) == 4
        assert times[0] >= 1.25
        assert times[-1] < 3.0
        assert np.all(np.diff(times) >= 0.5 - 1e-12)


def test_last_injection_is_respected():
    strategy = adv.AdversaryStrategy(fault_policy="fixed_phase", fixed_phase=0.25)
    snap = snapshot(receivers=(0,), last_injection={(2, 0): 0.0})
    pulses = adv.emit_faulty_pulses(strategy, (0.0, 2.0), snap, None)
    assert [t for _, _, t in pulses] == pytest.approx([1.25])


def test_choose_band():
    for prefer in (False, True):
        assert adv.choose_band(adv.AdversaryStrategy(band_choice_policy="always_0"), prefer) is False
        assert adv.choose_band(adv.AdversaryStrategy(band_choice_policy="always_1"), prefer) is True
        assert adv.choose_band(adv.AdversaryStrategy(band_choice_policy="adaptive"), prefer) is prefer
    rng = np.random.default_rng(0)
    draws = [adv.choose_band(adv.AdversaryStrategy(band_choice_policy="random"), False, rng) for _ in range(2000)]
    assert 0.4 < np.mean(draws) < 0.6


def test_choose_band_array():
    prefer = np.array([True, False, True])
    adaptive = adv.AdversaryStrategy(band_choice_policy="adaptive")
    assert list(adv.choose_band_array(adaptive, prefer)) == [True, False, True]
    assert not adv.choose_band_array(adv.AdversaryStrategy(), prefer).any()
    assert adv.choose_band_array(adv.AdversaryStrategy(band_choice_policy="always_1"), prefer).all()
