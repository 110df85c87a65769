"""
pulsefield: phase.py

Normalized phases on the unit circle and complex field values.

Phases are plain floats kept in [0, 1) (a fraction of one pulsing cycle); radians are never stored.
A field value is a complex number viewed as (strength, angle), where the angle is again a normalized phase.
"""

import cmath
import math
import typing
from dataclasses import dataclass

from pulsefield.util import DomainError

UNIT_TOL = 1e-9
TWO_PI = 2.0 * math.pi

NormalizedPhase = float


def normalize(value: float) -> NormalizedPhase:
    """ Maps any real to [0, 1). """
    p = value % 1.0
    # -1e-17 % 1.0 == 1.0 in floating point.
    return 0.0 if p >= 1.0 else p


def signed_offset(value: float) -> float:
    """ Maps any real to the signed offset in [-1/2, 1/2) congruent to it modulo 1. """
    return normalize(value + 0.5) - 0.5


def ring_distance(a: NormalizedPhase, b: NormalizedPhase) -> float:
    """
    Distance of two normalized phases on the circle.

    :param a: (float) Normalized phase.
    :param b: (float) Normalized phase.
    :return: (float) min{(a - b) mod 1, (b - a) mod 1}, a value in [0, 1/2].
    """
    diff = normalize(a - b)
    return min(diff, normalize(b - a))


@dataclass(frozen=True)
class FieldValue:
    """
    A complex number given by its real and imaginary parts.

    `strength` is the modulus. `angle` is the normalized phase-angle, or `None` when the
    strength is zero (the angle of a zero field is undefined and never defaults to 0).
    """
    re: float = 0.0
    im: float = 0.0

    @classmethod
    def from_complex(cls, z: complex) -> "FieldValue":
        return cls(float(z.real), float(z.imag))

    @classmethod
    def zero(cls) -> "FieldValue":
        return cls(0.0, 0.0)

    @property
    def strength(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def angle(self) -> typing.Optional[NormalizedPhase]:
        if self.re == 0.0 and self.im == 0.0:
            return None
        return normalize(math.atan2(self.im, self.re) / TWO_PI)

    def is_zero(self) -> bool:
        return self.re == 0.0 and self.im == 0.0

    def is_unit(self, tol=UNIT_TOL) -> bool:
        return abs(self.strength - 1.0) <= tol

    def as_complex(self) -> complex:
        return complex(self.re, self.im)

    def conjugate(self) -> "FieldValue":
        return FieldValue(self.re, -self.im)

    def rotate(self, phase: float) -> "FieldValue":
        """ Rotates the value by the normalized phase `phase`. """
        return self * phase_to_unit(phase)

    def require_angle(self) -> NormalizedPhase:
        angle = self.angle
        if angle is None:
            raise DomainError("Phase-angle of a zero-strength field is undefined.")
        return angle

    def __add__(self, other: "FieldValue") -> "FieldValue":
        return FieldValue(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "FieldValue") -> "FieldValue":
        return FieldValue(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "FieldValue") -> "FieldValue":
        return FieldValue.from_complex(self.as_complex() * other.as_complex())

    def __str__(self):
        angle = "undefined" if self.angle is None else f"{self.angle:.6f}"
        return f"<FieldValue strength={self.strength:.6f} angle={angle}>"


def phase_to_unit(p: NormalizedPhase) -> FieldValue:
    """ Returns the unit field value e^{2 pi j p}. """
    return FieldValue.from_complex(cmath.exp(1j * TWO_PI * p))


def field_sum(phases: typing.Iterable[float]) -> FieldValue:
    """ Sum of unit phasors for the given normalized phases. """
    total = sum((cmath.exp(1j * TWO_PI * p) for p in phases), 0j)
    return FieldValue.from_complex(total)
