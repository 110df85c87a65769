from pulsefield.sim.models import EventKind, PulseEvent, Trace, TRACE_COLUMNS
from pulsefield.sim.metrics import precision, accuracy, detect_stabilization, audit_delays, audit_frequency, \
    default_pi_target, stabilization_windows, summarize, aggregate_runs
from pulsefield.sim.engine import DriftClock, Simulator, run, run_batch

__all__ = [
    "EventKind",
    "PulseEvent",
    "Trace",
    "TRACE_COLUMNS",
    "precision",
    "accuracy",
    "detect_stabilization",
    "audit_delays",
    "audit_frequency",
    "default_pi_target",
    "stabilization_windows",
    "summarize",
    "aggregate_runs",
    "DriftClock",
    "Simulator",
    "run",
    "run_batch",
]
