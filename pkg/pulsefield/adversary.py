"""
pulsefield: adversary.py

The malicious environment of a pulsing system: message delays in [0, d], clock speeds in
[1 - rho, 1 + rho], faulty pulse injection and the resolution of the half-random-walk middle band.

The adversary reads a `SystemSnapshot` taken before the random draws of the current step.
Faulty pulses towards one receiver are spaced at least 1 / (2 (1 + rho)) apart, so no faulty node
exceeds 2 (1 + rho) tau + 1 pulses per receiver in any interval of length tau.
"""

import dataclasses
import logging
import math
import typing

import numpy as np

from pulsefield.config import DELAY_POLICIES, DRIFT_POLICIES, FAULT_POLICIES, BAND_POLICIES
from pulsefield.phase import normalize
from pulsefield.util import ConfigError, make_rng, STREAM_DELAY, STREAM_DRIFT

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class AdversaryStrategy:
    """
    Immutable description of the adversary.

    :param delay_policy: (str) zero | max | uniform_random | per_receiver_extremes.
    :param drift_policy: (str) constant | oscillating | random.
    :param fault_policy: (str) silent | random_pulses | fixed_phase | anti_phase | adaptive_worst.
    :param band_choice_policy: (str) always_0 | always_1 | random | adaptive.
    :param d: (float) Maximum delay in cycles.
    :param rho: (float) Maximum drift rate.
    :param seed: (int) Seed of the stateless random fallbacks.
    :param fixed_phase: (float) Reference-time phase used by the fixed_phase policy.
    :param R0: (float) Centre of the middle band adaptive_worst steers receiver strengths into.
    :param eps_max: (float) Half-width of that band.
    """
    delay_policy: str = "uniform_random"
    drift_policy: str = "random"
    fault_policy: str = "silent"
    band_choice_policy: str = "always_0"
    d: float = 0.0
    rho: float = 0.0
    seed: int = 0
    fixed_phase: float = 0.0
    R0: float = 0.0
    eps_max: float = 0.0

    def __post_init__(self):
        for key, allowed in (("delay_policy", DELAY_POLICIES), ("drift_policy", DRIFT_POLICIES),
                             ("fault_policy", FAULT_POLICIES), ("band_choice_policy", BAND_POLICIES)):
            if getattr(self, key) not in allowed:
                raise ConfigError(f"{key} must be one of {list(allowed)} (got '{getattr(self, key)}').")

    @classmethod
    def from_config(cls, config):
        return cls(delay_policy=config.delay_policy, drift_policy=config.drift_policy,
                   fault_policy=config.fault_strategy, band_choice_policy=config.band_choice,
                   d=config.d, rho=config.rho, seed=config.seed, R0=config.R0,
                   eps_max=config.eps_max)

    @property
    def min_gap(self):
        """ Minimum spacing of injected pulses per (faulty node, receiver). """
        return 1.0 / (2.0 * (1.0 + self.rho))

    def budget(self, duration):
        """ Maximum number of pulses per (faulty node, receiver) in an interval of `duration` cycles. """
        return math.floor(2.0 * (1.0 + self.rho) * duration) + 1


@dataclasses.dataclass
class SystemSnapshot:
    """
    What the adversary knows at `time`: per-node strength and reference-time phase of the latest
    measured field, the phase at which nonfaulty pulses currently recur, and the last injection
    instant per (faulty node, receiver).
    """
    time: float
    receivers: typing.Tuple[int, ...] = ()
    faulty_ids: typing.Tuple[int, ...] = ()
    strengths: typing.Dict[int, float] = dataclasses.field(default_factory=dict)
    field_phases: typing.Dict[int, typing.Optional[float]] = dataclasses.field(default_factory=dict)
    global_phase: typing.Optional[float] = None
    global_strength: float = 0.0
    last_injection: typing.Dict[typing.Tuple[int, int], float] = dataclasses.field(default_factory=dict)


# ==========================================================================
# DELAYS AND DRIFTS.
# ==========================================================================
def schedule_delay(strategy: AdversaryStrategy, sender, receiver, t, system_snapshot=None, rng=None):
    """
    Delay of the pulse sent by `sender` at reference time `t` towards `receiver`.

    :param rng: (numpy.random.Generator) Stream used by uniform_random. When absent, a stream is
        derived from (seed, sender, receiver, t) so that the result only depends on the arguments.
    :return: (float) A delay in [0, d].
    """
    policy = strategy.delay_policy
    if policy == "zero":
        return 0.0
    if policy == "max":
        return strategy.d
    if policy == "per_receiver_extremes":
        return 0.0 if receiver % 2 == 0 else strategy.d
    if rng is None:
        rng = make_rng(strategy.seed, STREAM_DELAY, sender, receiver, int(round(t * 1e9)))
    return float(rng.uniform(0.0, strategy.d))


def schedule_delays(strategy: AdversaryStrategy, sender, receivers, t, system_snapshot=None, rng=None):
    """ Batched `schedule_delay` for every receiver of one pulse. Returns a numpy array. """
    receivers = np.asarray(receivers, dtype=np.int64)
    policy = strategy.delay_policy
    if policy == "uniform_random" and rng is not None:
        return rng.uniform(0.0, strategy.d, size=receivers.size)
    if policy == "per_receiver_extremes":
        return np.where(receivers % 2 == 0, 0.0, strategy.d)
    return np.array([schedule_delay(strategy, sender, int(r), t, system_snapshot, rng) for r in receivers])


def schedule_drift(strategy: AdversaryStrategy, node, t):
    """
    Clock speed of `node` during the reference cycle containing `t`.

    :return: (float) A speed in [1 - rho, 1 + rho], constant within each reference cycle.
    """
    rho = strategy.rho
    k = math.floor(t)
    policy = strategy.drift_policy
    if policy == "constant":
        return 1.0 + rho
    if policy == "oscillating":
        return 1.0 - rho if (k + node) % 2 == 0 else 1.0 + rho
    return float(make_rng(strategy.seed, STREAM_DRIFT, node, k).uniform(1.0 - rho, 1.0 + rho))


# ==========================================================================
# FAULTY PULSES.
# ==========================================================================
def _phase_times(phase, t0, t1):
    """ Reference instants k + phase within [t0, t1). """
    first = math.ceil(t0 - phase)
    times = []
    k = first
    while k + phase < t1:
        if k + phase >= t0:
            times.append(k + phase)
        k += 1
    return times


def _spaced(times, last, gap):
    kept = []
    for t in times:
        if t - last >= gap - 1e-12:
            kept.append(t)
            last = t
    return kept


def _random_spaced(rng, t0, t1, last, gap, budget):
    """ Up to `budget` uniform instants in [t0, t1), pairwise and from `last` at least `gap` apart. """
    start = max(t0, last + gap)
    if start >= t1:
        return []
    count = min(budget, math.ceil((t1 - start) / gap))
    slack = t1 - start - (count - 1) * gap
    return list(start + np.sort(rng.uniform(0.0, slack, size=count)) + gap * np.arange(count))


def _band_target(strategy, snapshot, rid, anti):
    """ Pulses of adaptive_worst towards `rid`: anti-phase above the middle band, in phase below it. """
    strength = snapshot.strengths.get(rid, 0.0)
    if snapshot.global_phase is None or strength > strategy.R0 + strategy.eps_max:
        return anti
    if strength < strategy.R0 - strategy.eps_max:
        return snapshot.global_phase
    return None


def emit_faulty_pulses(strategy: AdversaryStrategy, t_window, system_snapshot: SystemSnapshot, rng=None):
    """
    Schedules the deliveries of faulty pulses inside the window [t0, t1).

    :param t_window: (tuple[float, float]) The window.
    :param system_snapshot: (SystemSnapshot) Adversary knowledge, including the last injection instants.
    :param rng: (numpy.random.Generator) Stream of the random policies.
    :return: (list[tuple[int, int, float]]) Sorted (faulty id, receiver, delivery time) triples.
    """
    policy = strategy.fault_policy
    if policy == "silent" or not system_snapshot.faulty_ids:
        return []

    t0, t1 = t_window
    gap = strategy.min_gap
    budget = strategy.budget(t1 - t0)
    anti = None if system_snapshot.global_phase is None else normalize(system_snapshot.global_phase + 0.5)

    deliveries = []
    for fid in system_snapshot.faulty_ids:
        for rid in system_snapshot.receivers:
            last = system_snapshot.last_injection.get((fid, rid), -math.inf)
            if policy == "fixed_phase":
                times = _phase_times(strategy.fixed_phase, t0, t1)
            elif policy == "anti_phase":
                times = [] if anti is None else _phase_times(anti, t0, t1)
            elif policy == "adaptive_worst":
                phase = _band_target(strategy, system_snapshot, rid, anti)
                times = [] if phase is None else _phase_times(phase, t0, t1)
            else:
                times = _random_spaced(rng, t0, t1, last, gap, budget)

            deliveries.extend((fid, rid, float(t)) for t in _spaced(times, last, gap))

    deliveries.sort(key=lambda item: (item[2], item[1], item[0]))
    logger.debug(f"Adversary '{policy}' injects {len(deliveries)} pulses in [{t0:.3f}, {t1:.3f}).")
    return deliveries


def choose_band(strategy: AdversaryStrategy, prefer_overwrite, rng=None):
    """
    Resolves the middle band of the half-random-walk rule: True means overwrite.

    :param prefer_overwrite: (bool) The option the adaptive policy judges worse for the system.
    """
    policy = strategy.band_choice_policy
    if policy == "always_0":
        return False
    if policy == "always_1":
        return True
    if policy == "random":
        return bool(rng.random() < 0.5)
    return bool(prefer_overwrite)


def choose_band_array(strategy: AdversaryStrategy, prefer_overwrite, rng=None):
    """ Vectorized `choose_band` over a boolean array of preferences. """
    prefer_overwrite = np.asarray(prefer_overwrite, dtype=bool)
    policy = strategy.band_choice_policy
    if policy == "always_0":
        return np.zeros(prefer_overwrite.shape, dtype=bool)
    if policy == "always_1":
        return np.ones(prefer_overwrite.shape, dtype=bool)
    if policy == "random":
        return rng.random(prefer_overwrite.shape) < 0.5
    return prefer_overwrite
