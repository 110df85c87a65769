"""
pulsefield: dmf.py

Reception windows and discrete mean-field (DMF) measurement.

A DMF is the complex sum of unit phasors of the pulses observed in an interval. Nodes measure it
from the hardware ticks stored in their omega-window: anonymously from the multiset of receive
ticks, or authenticated from one latest tick per sender.
"""

import logging
import typing

import numpy as np

from pulsefield.phase import FieldValue, TWO_PI
from pulsefield.util import DomainError

logger = logging.getLogger(__name__)


def tick_diff(a: int, b: int, c_max: int) -> int:
    """
    Wraparound-aware difference of two counter values.

    :param a: (int) Counter value.
    :param b: (int) Counter value.
    :param c_max: (int) Counter modulus.
    :return: (int) The representative of (a - b) mod c_max in (-c_max/2, c_max/2].
    """
    diff = (a - b) % c_max
    if 2 * diff > c_max:
        diff -= c_max
    return diff


def _phasor_sum(offsets, T, omega) -> FieldValue:
    """ Sum of e^{2 pi j (offset/T + omega)} over tick offsets relative to the measuring tick. """
    if len(offsets) == 0:
        return FieldValue.zero()
    phases = np.asarray(offsets, dtype=float) / T + omega
    return FieldValue.from_complex(np.exp(1j * TWO_PI * phases).sum())


# ==========================================================================
# WINDOWS.
# ==========================================================================
class ReceptionWindow:
    """
    Multiset of receive ticks of anonymous pulses within the last `window_len_ticks` ticks.

    Records are kept in arrival order. Pulses received at the same tick are separate records.
    A record belongs to the window when its age `tick_diff(now, record)` lies in [0, window_len_ticks).
    Eviction is lazy: it happens on every insert and every read.

    :param window_len_ticks: (int) Window length omega*T in ticks.
    :param c_max: (int) Counter modulus. Must exceed 2 * window_len_ticks.
    """
    def __init__(self, window_len_ticks, c_max):
        if c_max <= 2 * window_len_ticks:
            raise DomainError(f"c_max={c_max} must exceed twice the window length {window_len_ticks}.")
        self._window_len = window_len_ticks
        self._c_max = c_max
        self._records = []

    def __len__(self):
        return len(self._records)

    def __str__(self):
        return f"<ReceptionWindow len={self._window_len} records={len(self._records)}>"

    @property
    def window_len_ticks(self):
        return self._window_len

    @property
    def c_max(self):
        return self._c_max

    def records(self):
        """ Returns the stored records without evicting. """
        return tuple(self._records)

    def preload(self, ticks: typing.Iterable[int]):
        """ Stores arbitrary records without eviction (initial window garbage). """
        self._records.extend(int(tick) % self._c_max for tick in ticks)

    def clear(self):
        self._records.clear()

    def age(self, tick, now_tick):
        return tick_diff(now_tick, tick, self._c_max)

    def prune(self, now_tick):
        """ Evicts every record outside the last `window_len_ticks` ticks of `now_tick`. """
        self._records = [tick for tick in self._records if 0 <= self.age(tick, now_tick) < self._window_len]

    def insert(self, tick, now_tick=None):
        """
        Records a pulse received at `tick`.

        :param tick: (int) Receive tick (counter value mod c_max).
        :param now_tick: (int) Current counter value. Defaults to `tick`.
        """
        self._records.append(int(tick) % self._c_max)
        self.prune(tick if now_tick is None else now_tick)

    def read(self, now_tick):
        """ Evicts stale records and returns the record offsets (record - now) in ticks, all in (-window_len, 0]. """
        self.prune(now_tick)
        return [-self.age(tick, now_tick) for tick in self._records]


class AuthWindow:
    """
    Latest receive tick of every sender in V (authenticated pulses).

    :param node_ids: (Iterable) The sender set V.
    :param window_len_ticks: (int) Window length omega*T in ticks.
    :param c_max: (int) Counter modulus.
    """
    def __init__(self, node_ids, window_len_ticks, c_max):
        self._node_ids = tuple(node_ids)
        self._window_len = window_len_ticks
        self._c_max = c_max
        self._latest = dict()

    def __len__(self):
        return len(self._latest)

    @property
    def node_ids(self):
        return self._node_ids

    def latest(self, sender):
        return self._latest.get(sender, None)

    def record(self, sender, tick):
        """ Keeps only the latest pulse of `sender`. Unknown senders are ignored. """
        if sender not in self._node_ids:
            logger.debug(f"AuthWindow ignores pulse of unknown sender {sender}.")
            return
        self._latest[sender] = int(tick) % self._c_max

    def read(self, own_tick, now_tick):
        """
        Returns one tick offset per sender in V.

        A missing slot, or a slot older than the window, is replaced by the owner's own pulse tick.
        """
        offsets = []
        for sender in self._node_ids:
            tick = self._latest.get(sender, None)
            if tick is None or not 0 <= tick_diff(now_tick, tick, self._c_max) < self._window_len:
                tick = own_tick
            offsets.append(tick_diff(tick, now_tick, self._c_max))
        return offsets


# ==========================================================================
# MEASUREMENT.
# ==========================================================================
def measure_anonymous(w: ReceptionWindow, now_tick, T, omega) -> FieldValue:
    """
    Measures the anonymous DMF of a reception window.

    :param w: (ReceptionWindow) The window. Stale records are evicted first.
    :param now_tick: (int) Current counter value of the owner.
    :param T: (int) Ticks per ideal cycle.
    :param omega: (int) Window length in cycles.
    :return: (FieldValue) Sum over records c' of e^{2 pi j ((c' - now)/T + omega)}. Zero for an empty window.
    """
    return _phasor_sum(w.read(now_tick), T, omega)


def measure_authenticated(w: AuthWindow, own_tick, now_tick, T, omega) -> FieldValue:
    """
    Measures the authenticated DMF: one phasor per sender, stale senders substituted by `own_tick`.
    """
    return _phasor_sum(w.read(own_tick, now_tick), T, omega)


def gamma_bound(r_ab, r_cd, r_bc):
    """
    Bound on how much the DMF over [a, c] and over [b, d] may differ for nested intervals
    a <= b < c <= d, relative to the strength over the shared part [b, c].

    :return: (float) (r_ab + r_cd) / r_bc.
    :raises DomainError: If r_bc <= 0.
    """
    if r_bc <= 0:
        raise DomainError(f"gamma_bound requires a positive shared strength (got r_bc={r_bc}).")
    return (r_ab + r_cd) / r_bc


def field_over_interval(pulse_times, t_a, t_b) -> FieldValue:
    """
    Reference-time DMF of the pulses in the half-open interval [t_a, t_b).

    :param pulse_times: (Iterable[float]) Pulsing instants in reference time (cycles).
    :return: (FieldValue) Sum of e^{2 pi j (t - t_a)} over the pulses in range.
    """
    times = np.asarray(list(pulse_times), dtype=float)
    times = times[(times >= t_a) & (times < t_b)]
    if times.size == 0:
        return FieldValue.zero()
    return FieldValue.from_complex(np.exp(1j * TWO_PI * (times - t_a)).sum())


def one_kick_field(first_pulses, t0) -> FieldValue:
    """
    Authenticated DMF with respect to `t0`, given the earliest pulsing instant of every node since `t0`.
    """
    times = np.asarray(list(first_pulses), dtype=float)
    if times.size == 0:
        return FieldValue.zero()
    return FieldValue.from_complex(np.exp(1j * TWO_PI * (times - t0)).sum())
