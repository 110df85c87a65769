import dataclasses
import enum
import logging
import math
import typing

import numpy as np

from pulsefield.sim import metrics

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("t", "node", "phi", "Phi", "dmf_strength", "dmf_angle")


class EventKind(enum.IntEnum):
    """ Event kinds in their tie-break order at equal time and node. """
    CYCLE = 0
    GENERATE = 1
    DELIVER = 2
    TIMER = 3
    SAMPLE = 4


@dataclasses.dataclass(frozen=True)
class PulseEvent:
    """
    A scheduled or delivered pulse.

    :param kind: (EventKind) GENERATE, DELIVER or TIMER.
    :param sender: (int) Node id of the sender. Faulty ids are n - f, ..., n - 1.
    :param receiver: (int or None) Receiver node id (DELIVER only).
    :param ref_time: (float) Reference time of the event.
    :param receive_tick: (int or None) Counter value of the receiver at delivery (DELIVER only).
    :param sent_time: (float or None) Reference time at which the pulse was generated (DELIVER only).
    :param faulty: (bool) Whether the sender is faulty.
    """
    kind: EventKind
    sender: int
    ref_time: float
    receiver: typing.Optional[int] = None
    receive_tick: typing.Optional[int] = None
    sent_time: typing.Optional[float] = None
    faulty: bool = False

    @property
    def delay(self):
        return None if self.sent_time is None else self.ref_time - self.sent_time


class Trace:
    """
    Output of one simulator run.

    Samples are stored column-wise: `sample_times` has shape (S,), and `pulse_phases`, `sync_phases`,
    `strengths` and `angles` have shape (S, |Q|) with columns ordered as `node_ids`. An undefined
    field angle is stored as NaN.
    """
    COLUMNS = TRACE_COLUMNS

    def __init__(self, config=None, node_ids=(), faulty_ids=()):
        self.config = config
        self.node_ids = tuple(node_ids)
        self.faulty_ids = tuple(faulty_ids)
        self.sample_interval = config.effective_sample_interval() if config is not None else 0.0

        self._times = []
        self._phi = []
        self._sync = []
        self._strength = []
        self._angle = []

        self.pulses = {uid: [] for uid in self.node_ids}
        self.faulty_pulses = dict()
        self.fields = []
        self.events = []
        self.decisions = {"random": 0, "mirror": 0, "overwrite": 0}
        self.interference = 0.0
        self.t_end = 0.0

    def __str__(self):
        return f"<Trace nodes={len(self.node_ids)} samples={len(self._times)} t_end={self.t_end:.3f}>"

    @classmethod
    def from_samples(cls, times, sync_phases, sample_interval=None):
        """ Builds a trace holding only sampled synchronization phases. """
        sync_phases = np.asarray(sync_phases, dtype=float)
        trace = cls(node_ids=range(sync_phases.shape[1]))
        for t, row in zip(times, sync_phases):
            trace.add_sample(t, np.zeros_like(row), row, np.zeros_like(row), np.full_like(row, np.nan))
        if sample_interval is not None:
            trace.sample_interval = sample_interval
        elif len(times) > 1:
            trace.sample_interval = float(np.max(np.diff(times)))
        trace.t_end = float(times[-1]) if len(times) else 0.0
        return trace

    # ==========================================================================
    # RECORDING.
    # ==========================================================================
    def add_sample(self, t, phi, sync, strength, angle):
        self._times.append(t)
        self._phi.append(np.asarray(phi, dtype=float))
        self._sync.append(np.asarray(sync, dtype=float))
        self._strength.append(np.asarray(strength, dtype=float))
        self._angle.append(np.asarray(angle, dtype=float))

    def add_event(self, event: PulseEvent):
        self.events.append(event)

    # ==========================================================================
    # ACCESS.
    # ==========================================================================
    @property
    def num_samples(self):
        return len(self._times)

    @property
    def sample_times(self):
        return np.asarray(self._times, dtype=float)

    @property
    def pulse_phases(self):
        return np.vstack(self._phi) if self._phi else np.zeros((0, len(self.node_ids)))

    @property
    def sync_phases(self):
        return np.vstack(self._sync) if self._sync else np.zeros((0, len(self.node_ids)))

    @property
    def strengths(self):
        return np.vstack(self._strength) if self._strength else np.zeros((0, len(self.node_ids)))

    @property
    def angles(self):
        return np.vstack(self._angle) if self._angle else np.zeros((0, len(self.node_ids)))

    def deliveries(self, faulty=None):
        """ DELIVER events, optionally restricted to faulty (True) or nonfaulty (False) senders. """
        return [ev for ev in self.events if ev.kind == EventKind.DELIVER and (faulty is None or ev.faulty == faulty)]

    def precision_series(self):
        """ Instantaneous precision at every sample. """
        sync = self.sync_phases
        if sync.shape[1] < 2:
            return np.zeros(sync.shape[0])
        return metrics.precision_rows(sync)

    def to_rows(self):
        """ One row per (sample, node) with the columns of TRACE_COLUMNS. """
        rows = []
        for t, phi, sync, strength, angle in zip(self._times, self._phi, self._sync, self._strength, self._angle):
            for col, uid in enumerate(self.node_ids):
                a = angle[col]
                rows.append((t, uid, phi[col], sync[col], strength[col], None if math.isnan(a) else a))
        return rows

    def summary(self, pi_target=None, hold=None):
        """ JSON-ready run summary: config echo, stabilization, final precision and accuracy, audits. """
        return metrics.summarize(self, pi_target=pi_target, hold=hold)
