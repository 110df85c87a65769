import dataclasses
import typing

import numpy as np

from pulsefield.config import BAND_POLICIES
from pulsefield.dmf import tick_diff
from pulsefield.phase import FieldValue, TWO_PI, UNIT_TOL
from pulsefield.trig import DEFAULT_SCALE
from pulsefield.util import ConfigError, DomainError

BASIC = "basic"
EXTENDED = "extended"
RANDOM = "random"
STEP_MODES = (BASIC, EXTENDED, RANDOM)

# Final strengths at or above HIGH_CUTOFF * N count as stabilized.
HIGH_CUTOFF = 0.9

_GAME_MODES = {"half_random_walk": BASIC, "extended": EXTENDED, "random_walk": RANDOM}


class CurveState:
    """
    Fixed-length curve of N unit segments, ordered from tail to head, at step index k.

    The endpoint distance R(k) is the strength of the segment sum.

    :param segments: (array-like of complex) Unit complex numbers, tail first.
    :param k: (int) Step index.
    """
    def __init__(self, segments, k=0):
        self._segments = np.array(segments, dtype=complex)
        self._k = k
        if self._segments.ndim != 1 or self._segments.size == 0:
            raise DomainError("A curve needs at least one segment.")
        if np.any(np.abs(np.abs(self._segments) - 1.0) > UNIT_TOL):
            raise DomainError("Every curve segment must have unit length.")

    def __len__(self):
        return self._segments.size

    def __str__(self):
        return f"<CurveState N={len(self)} k={self._k} R={self.strength:.4f}>"

    @classmethod
    def from_angles(cls, angles, k=0):
        return cls(np.exp(1j * TWO_PI * np.asarray(angles, dtype=float)), k)

    @classmethod
    def from_window(cls, records, now_tick, T, omega, c_max=None):
        """
        Curve whose segments are the phasors of the records of a reception window, in arrival order.
        Its endpoint distance equals the anonymous DMF strength measured from the same records.
        """
        records = list(records)
        if not records:
            raise DomainError("Cannot build a curve from an empty window.")
        offsets = [tick_diff(c, now_tick, c_max) if c_max else c - now_tick for c in records]
        return cls.from_angles(np.asarray(offsets, dtype=float) / T + omega)

    @property
    def N(self):
        return self._segments.size

    @property
    def k(self):
        return self._k

    @property
    def segments(self):
        return self._segments.copy()

    @property
    def angles(self):
        return np.mod(np.angle(self._segments) / TWO_PI, 1.0)

    @property
    def endpoint(self) -> FieldValue:
        return FieldValue.from_complex(complex(self._segments.sum()))

    @property
    def strength(self):
        return self.endpoint.strength

    def fields(self):
        return [FieldValue.from_complex(complex(z)) for z in self._segments]


@dataclasses.dataclass(frozen=True)
class StepRule:
    """
    Transition rule of the curve game.

    :param mode: (str) basic (half-random walk), extended (random/mirror/overwrite tiers) or random (no feedback).
    :param R0: (float) Lower strength threshold.
    :param R1: (float) Overwrite threshold of the extended mode. Unused in basic mode.
    :param eps_max: (float) Measurement error bound. Widens the basic middle band and bounds the noise.
    :param band_choice: (str) Adversary policy in the basic middle band.
    :param noise: (bool) Whether measured angles are rotated by up to arcsin(eps_max / R).
    :param integer_trig: (bool) Whether the game runs on the integer trigonometry path.
    :param scale: (int) Fixed-point scale K of the integer path.
    """
    mode: str = EXTENDED
    R0: float = 5.0
    R1: float = 100 / TWO_PI
    eps_max: float = 0.0
    band_choice: str = "always_0"
    noise: bool = False
    integer_trig: bool = False
    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        if self.mode not in STEP_MODES:
            raise ConfigError(f"Step mode must be one of {list(STEP_MODES)} (got '{self.mode}').")
        if self.band_choice not in BAND_POLICIES:
            raise ConfigError(f"band_choice must be one of {list(BAND_POLICIES)} (got '{self.band_choice}').")
        if self.R0 <= 0 or self.R1 <= 0 or self.eps_max < 0:
            raise ConfigError(f"StepRule requires R0 > 0, R1 > 0 and eps_max >= 0 "
                              f"(got R0={self.R0}, R1={self.R1}, eps_max={self.eps_max}).")

    @classmethod
    def from_config(cls, config):
        """ Maps a SimConfig onto the curve game. The one-kick mode has no game counterpart. """
        if config.mode not in _GAME_MODES:
            raise ConfigError(f"Sync mode '{config.mode}' has no curve-game counterpart.")
        return cls(mode=_GAME_MODES[config.mode], R0=config.R0, R1=config.R1, eps_max=config.eps_max,
                   band_choice=config.band_choice, noise=config.noise, integer_trig=config.integer_trig,
                   scale=config.trig_scale)


@dataclasses.dataclass
class StrengthStats:
    """
    Aggregated outcome of a batch of curve-game trials.

    `finals` holds the final endpoint distance of every trial in trial order. The series arrays have
    one entry per step (initial state included) and summarize R(k) across trials.
    """
    N: int
    R0: float
    R1: float
    steps: int
    finals: np.ndarray
    mean_series: np.ndarray
    p05_series: np.ndarray
    p50_series: np.ndarray
    p95_series: np.ndarray
    overwrite_steps: int = 0
    overwrite_violations: int = 0
    max_step_change: float = 0.0
    decisions: typing.Dict[str, int] = dataclasses.field(default_factory=dict)

    @property
    def trials(self):
        return int(self.finals.size)

    @property
    def fraction_high(self):
        return float(np.mean(self.finals >= HIGH_CUTOFF * self.N))

    @property
    def fraction_mid(self):
        return float(np.mean((self.finals >= self.R0) & (self.finals < HIGH_CUTOFF * self.N)))

    @property
    def fraction_low(self):
        return float(np.mean(self.finals < self.R0))

    def fraction_at_most(self, r):
        return float(np.mean(self.finals <= r))

    def fraction_at_least(self, r):
        return float(np.mean(self.finals >= r))

    def histogram(self, bins=20):
        """ Histogram of the final strengths over [0, N]. Returns (edges, counts). """
        counts, edges = np.histogram(self.finals, bins=bins, range=(0.0, float(self.N)))
        return edges, counts

    def to_dict(self):
        return {
            "N": self.N,
            "R0": self.R0,
            "R1": self.R1,
            "steps": self.steps,
            "trials": self.trials,
            "high_cutoff": HIGH_CUTOFF,
            "fraction_high": self.fraction_high,
            "fraction_mid": self.fraction_mid,
            "fraction_low": self.fraction_low,
            "mean_final": float(np.mean(self.finals)),
            "median_final": float(np.median(self.finals)),
            "overwrite_steps": self.overwrite_steps,
            "overwrite_violations": self.overwrite_violations,
            "max_step_change": self.max_step_change,
            "decisions": dict(self.decisions),
        }
