"""
pulsefield: trig.py

Integer-only approximate trigonometry.

Phases are fixed-point integers `raw` in [0, K) for a power-of-two scale K. Sine and cosine are replaced
by a walk along the 1-norm circle |x| + |y| = K, and the two-argument arctangent by an 8-facet
zigzag surface that is exact in the 8 compass directions. No floating-point value is used on the
measuring path (`l1_sincos`, `zigzag_atan2`, `fixed_field_accumulate`).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from pulsefield.dmf import tick_diff
from pulsefield.util import DomainError

logger = logging.getLogger(__name__)

DEFAULT_SCALE = 1 << 16

# Maximum angle error (cycles) of `zigzag_atan2` against the exact normalized arctangent, swept over
# the 1-norm circle. The worst point of each octant is at tan(theta) ~= 0.3134.
ERR_ZZ = 0.01132


def _check_scale(K):
    if K < 8 or K & (K - 1):
        raise DomainError(f"Fixed-point scale must be a power of two >= 8 (got {K}).")


@dataclass(frozen=True)
class FixedPhase:
    """ Phase raw / K with raw in [0, K). """
    raw: int
    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        _check_scale(self.scale)
        if not 0 <= self.raw < self.scale:
            raise DomainError(f"FixedPhase raw value must lie in [0, {self.scale}) (got {self.raw}).")

    @classmethod
    def from_phase(cls, p, scale=DEFAULT_SCALE):
        return cls(int(round(p * scale)) % scale, scale)

    @property
    def phase(self):
        return self.raw / self.scale

    def signed(self):
        """ Signed form raw - K/2, zero at phase 1/2. """
        return self.raw - self.scale // 2


@dataclass(frozen=True)
class L1Point:
    """ Integer point on the 1-norm circle of radius `scale`. `x` plays cosine and `y` plays sine. """
    x: int
    y: int
    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        if abs(self.x) + abs(self.y) != self.scale:
            raise DomainError(f"({self.x}, {self.y}) is not on the 1-norm circle of radius {self.scale}.")


def l1_sincos(p: FixedPhase) -> L1Point:
    """
    Maps a phase onto the square |x| + |y| = K, linearly along each edge.

    :param p: (FixedPhase) Phase.
    :return: (L1Point) Exact at multiples of 1/4 (axis points) and 1/8 (edge midpoints).
    """
    K = p.scale
    quarter = K // 4
    q, f = divmod(p.raw, quarter)
    c, s = K - 4 * f, 4 * f
    x, y = ((c, s), (-s, c), (-c, -s), (s, -c))[q]
    return L1Point(x, y, K)


def zigzag_atan2(y: int, x: int, scale=DEFAULT_SCALE) -> FixedPhase:
    """
    Piecewise-linear approximation of atan2(y, x) / (2 pi) mod 1.

    The point is folded into octant 0 (0 <= b <= a), where the facet is (K/4) * b / (a + b), and
    unfolded again. The result is continuous, weakly monotone along any 1-norm circle and exact at
    the 8 compass directions.

    :raises DomainError: For (0, 0).
    """
    if x == 0 and y == 0:
        raise DomainError("zigzag_atan2 is undefined at (0, 0).")
    K = scale
    if x > 0 and y >= 0:
        q, u, v = 0, x, y
    elif x <= 0 and y > 0:
        q, u, v = 1, y, -x
    elif x < 0 and y <= 0:
        q, u, v = 2, -x, -y
    else:
        q, u, v = 3, -y, x

    if v <= u:
        f = (K * v + 2 * (u + v)) // (4 * (u + v))
        raw = 2 * q * (K // 8) + f
    else:
        f = (K * u + 2 * (u + v)) // (4 * (u + v))
        raw = (2 * q + 2) * (K // 8) - f
    return FixedPhase(raw % K, K)


def zigzag_atan2_signed(y: int, x: int, scale=DEFAULT_SCALE) -> int:
    """ Signed output of the zigzag surface in [-K/2, K/2), zero at phase 1/2. """
    return zigzag_atan2(y, x, scale).signed()


def fixed_field_accumulate(records, now_tick, T, omega, c_max=None, scale=DEFAULT_SCALE):
    """
    Integer-path variant of the anonymous DMF measurement.

    :param records: (Iterable[int]) Receive ticks, already restricted to the window.
    :param now_tick: (int) Measuring tick.
    :param T: (int) Ticks per ideal cycle.
    :param omega: (int) Window length in cycles. An integer omega does not move the phase.
    :param c_max: (int or None) Counter modulus used to unwrap tick differences.
    :return: (tuple[int, int]) Componentwise sum (sx, sy) of `l1_sincos` over the record phases.
    """
    sx, sy = 0, 0
    for tick in records:
        offset = tick_diff(tick, now_tick, c_max) if c_max else tick - now_tick
        raw = (offset % T) * scale // T
        point = l1_sincos(FixedPhase(raw, scale))
        sx += point.x
        sy += point.y
    return sx, sy


# ==========================================================================
# VECTORIZED FORMS.
# ==========================================================================
def l1_sincos_array(raw, scale=DEFAULT_SCALE):
    """ Vectorized `l1_sincos` over an integer array of raw phases. Returns (x, y) int64 arrays. """
    raw = np.asarray(raw, dtype=np.int64) % scale
    quarter = scale // 4
    q, f = np.divmod(raw, quarter)
    c, s = scale - 4 * f, 4 * f
    conds = [q == 0, q == 1, q == 2, q == 3]
    x = np.select(conds, [c, -s, -c, s])
    y = np.select(conds, [s, c, -s, -c])
    return x, y


def zigzag_atan2_array(y, x, scale=DEFAULT_SCALE):
    """ Vectorized `zigzag_atan2`. Returns an int64 array of raw phases. """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if np.any((x == 0) & (y == 0)):
        raise DomainError("zigzag_atan2 is undefined at (0, 0).")

    conds = [(x > 0) & (y >= 0), (x <= 0) & (y > 0), (x < 0) & (y <= 0), (x >= 0) & (y < 0)]
    q = np.select(conds, [0, 1, 2, 3])
    u = np.select(conds, [x, y, -x, -y])
    v = np.select(conds, [y, -x, -y, x])

    swap = v > u
    a = np.where(swap, v, u)
    b = np.where(swap, u, v)
    f = (scale * b + 2 * (a + b)) // (4 * (a + b))
    base = 2 * q * (scale // 8)
    raw = np.where(swap, base + scale // 4 - f, base + f)
    return raw % scale


def l1_circle(scale=DEFAULT_SCALE):
    """ All 4K integer points of the 1-norm circle of radius K, in counter-clockwise order from (K, 0). """
    i = np.arange(4 * scale, dtype=np.int64)
    q, s = np.divmod(i, scale)
    c = scale - s
    conds = [q == 0, q == 1, q == 2, q == 3]
    x = np.select(conds, [c, -s, -c, s])
    y = np.select(conds, [s, c, -s, -c])
    return x, y


def sweep_zigzag(scale=DEFAULT_SCALE):
    """
    Exhaustive sweep of `zigzag_atan2` over the 1-norm circle of radius K.

    :return: (dict) Keys "max_error" (cycles), "argmax" (x, y), "compass_exact" (bool) and "monotone" (bool).
    """
    _check_scale(scale)
    x, y = l1_circle(scale)
    raw = zigzag_atan2_array(y, x, scale)
    approx = raw / scale
    exact = np.mod(np.arctan2(y, x) / (2 * math.pi), 1.0)
    diff = np.abs(approx - exact)
    err = np.minimum(diff, 1.0 - diff)
    idx = int(np.argmax(err))

    compass = np.arange(8) * (scale // 2)
    compass_exact = bool(np.all(raw[compass] == np.arange(8) * (scale // 8)))

    steps = np.diff(np.append(raw, raw[0])) % scale
    monotone = bool(np.all(steps < scale // 2))

    logger.info(f"Swept {4 * scale} points of the 1-norm circle: max error {err[idx]:.6f} "
                f"at ({int(x[idx])}, {int(y[idx])}).")
    return {
        "scale": scale,
        "max_error": float(err[idx]),
        "argmax": (int(x[idx]), int(y[idx])),
        "compass_exact": compass_exact,
        "monotone": monotone,
    }
