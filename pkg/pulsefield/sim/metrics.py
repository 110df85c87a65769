"""
pulsefield.sim.metrics

Synchronization metrics of simulator traces: precision, accuracy, stabilization detection,
delivery and frequency audits, and the run summary.
"""

import logging
import math

import numpy as np

from pulsefield import bounds
from pulsefield.util import DomainError, ColoredMsg

logger = logging.getLogger(__name__)

TOL = 1e-9
_CHUNK = 2048


def _ring(diff):
    diff = np.mod(diff, 1.0)
    return np.minimum(diff, 1.0 - diff)


def precision(phases):
    """
    Normalized synchronization precision of a set of phases.

    :param phases: (Iterable[float]) At least two normalized phases.
    :return: (float) Maximum pairwise ring distance.
    :raises DomainError: For fewer than two phases.
    """
    phases = np.asarray(list(phases), dtype=float)
    if phases.size < 2:
        raise DomainError(f"precision needs at least 2 phases (got {phases.size}).")
    return float(np.max(_ring(phases[:, None] - phases[None, :])))


def precision_rows(matrix):
    """ Row-wise `precision` of an (S, m) matrix of phases. """
    matrix = np.asarray(matrix, dtype=float)
    out = np.empty(matrix.shape[0])
    for start in range(0, matrix.shape[0], _CHUNK):
        block = matrix[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.max(_ring(block[:, :, None] - block[:, None, :]), axis=(1, 2))
    return out


def accuracy(trace, t, horizon=0.5):
    """
    Half-cycle synchronization accuracy at reference time `t`.

    :return: (float) Maximum over nodes q and samples t' in [t, t + horizon] of
        ring_distance((Phi_q(t') - Phi_q(t)) mod 1, t' - t).
    :raises DomainError: If the trace does not cover [t, t + horizon].
    """
    times = trace.sample_times
    if times.size == 0 or t < times[0] - TOL or t + horizon > times[-1] + TOL:
        raise DomainError(f"Trace does not cover [{t}, {t + horizon}].")

    i0 = int(np.searchsorted(times, t - TOL))
    t0 = times[i0]
    mask = (times >= t0) & (times <= t0 + horizon + TOL)
    sync = trace.sync_phases
    advance = sync[mask] - sync[i0]
    elapsed = (times[mask] - t0)[:, None]
    return float(np.max(_ring(advance - elapsed)))


def detect_stabilization(trace, pi_target, hold, start=0.0):
    """
    Earliest sample time from which the precision stays at or below `pi_target` for `hold` cycles.

    :param pi_target: (float) Precision target in (0, 1/2).
    :param hold: (float) Required duration in cycles.
    :param start: (float) Samples before `start` are ignored.
    :return: (float or None) The stabilization time, or None if the trace never stabilizes.
    """
    if not 0 < pi_target < 0.5:
        raise DomainError(f"pi_target must lie in (0, 1/2) (got {pi_target}).")

    times = trace.sample_times
    series = trace.precision_series()
    run_start = None
    for i in range(times.size):
        if times[i] < start:
            continue
        if series[i] <= pi_target:
            if run_start is None:
                run_start = i
            if times[i] - times[run_start] >= hold - TOL:
                return float(times[run_start])
        else:
            run_start = None
    return None


def audit_delays(trace, d):
    """ Deliveries of nonfaulty pulses whose delay lies outside [0, d]. """
    violations = []
    for ev in trace.deliveries(faulty=False):
        if not -TOL <= ev.delay <= d + TOL:
            violations.append({"sender": ev.sender, "receiver": ev.receiver, "t": ev.ref_time, "delay": ev.delay})
    return violations


def _gap_violations(times, gap):
    times = np.sort(np.asarray(times, dtype=float))
    if times.size < 2:
        return []
    bad = np.nonzero(np.diff(times) < gap - TOL)[0]
    return [(float(times[i]), float(times[i + 1])) for i in bad]


def audit_frequency(trace, rho):
    """
    Pulses that break the frequency cap of 2 (1 + rho) tau + 1 pulses per interval of length tau.

    The cap holds on every interval exactly when consecutive pulses are at least 1 / (2 (1 + rho))
    apart. Nonfaulty nodes are audited on their generation instants, faulty nodes on their deliveries
    to each receiver.
    """
    gap = 1.0 / (2.0 * (1.0 + rho))
    violations = []
    for uid, times in trace.pulses.items():
        violations.extend({"node": uid, "receiver": None, "t0": a, "t1": b} for a, b in _gap_violations(times, gap))
    for (fid, rid), times in trace.faulty_pulses.items():
        violations.extend({"node": fid, "receiver": rid, "t0": a, "t1": b} for a, b in _gap_violations(times, gap))
    return violations


def default_pi_target(config, interference):
    """
    Precision target derived from the expected measurement error of the run:
    eps = interference + N sin(2 pi min(d + 2 rho omega, 1/4)), target = asin(2 eps / N) / (2 pi) + 0.02.
    """
    N = config.records_per_window
    eps = interference + N * math.sin(2 * math.pi * min(config.d + 2 * config.rho * config.omega, 0.25))
    return bounds.precision_estimate(eps, N) + 0.02


def stabilization_windows(config, t_stab):
    """ Stabilization time in omega-windows after the initial flush of omega / (1 - rho) cycles. """
    if t_stab is None:
        return None
    return max(0.0, t_stab - config.flush_time) / config.omega


def summarize(trace, pi_target=None, hold=None):
    """ Run summary of a trace. See `Trace.summary`. """
    config = trace.config
    if pi_target is None:
        pi_target = config.pi_target if config.pi_target > 0 else default_pi_target(config, trace.interference)
    hold = config.hold if hold is None else hold

    t_stab = detect_stabilization(trace, pi_target, hold)
    if t_stab is None:
        logger.warning(ColoredMsg.warn(f"[WARN] Seed {config.seed}: precision never held below {pi_target:.4f} "
                                       f"for {hold} cycles."))

    series = trace.precision_series()
    try:
        final_accuracy = accuracy(trace, trace.t_end - 0.5)
    except DomainError:
        final_accuracy = None

    return {
        "seed": config.seed,
        "config": config.to_dict(),
        "stabilized": t_stab is not None,
        "stabilization_time": t_stab,
        "stabilization_windows": stabilization_windows(config, t_stab),
        "pi_target": pi_target,
        "hold": hold,
        "final_precision": float(series[-1]) if series.size else None,
        "final_accuracy": final_accuracy,
        "interference_strength": trace.interference,
        "decisions": dict(trace.decisions),
        "num_pulses": sum(len(times) for times in trace.pulses.values()),
        "delay_violations": len(audit_delays(trace, config.d)),
        "frequency_violations": len(audit_frequency(trace, config.rho)),
        "t_end": trace.t_end,
    }


def aggregate_runs(summaries, window_limit=3.0):
    """
    Batch statistics over run summaries, in the given (seed) order.

    Runs that never stabilize count as infinitely slow, so the median is None once half of the runs fail.

    :param window_limit: (float) Stabilization budget in omega-windows for `fraction_within_limit`.
    """
    summaries = list(summaries)
    windows = [s["stabilization_windows"] for s in summaries]
    ranked = np.array([math.inf if w is None else w for w in windows], dtype=float)
    median = float(np.median(ranked)) if ranked.size else math.inf
    finals = [s["final_precision"] for s in summaries if s["final_precision"] is not None]
    return {
        "seeds": [s["seed"] for s in summaries],
        "num_runs": len(summaries),
        "num_stabilized": sum(1 for s in summaries if s["stabilized"]),
        "fraction_stabilized": float(np.mean([s["stabilized"] for s in summaries])) if summaries else 0.0,
        "stabilization_windows": windows,
        "median_stabilization_windows": median if math.isfinite(median) else None,
        "window_limit": window_limit,
        "fraction_within_limit": float(np.mean(ranked <= window_limit)) if ranked.size else 0.0,
        "mean_final_precision": float(np.mean(finals)) if finals else None,
        "delay_violations": sum(s["delay_violations"] for s in summaries),
        "frequency_violations": sum(s["frequency_violations"] for s in summaries),
    }
