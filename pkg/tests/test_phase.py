"""
Test normalized phases and field values.
"""
import math

import pytest
from hypothesis import given, strategies as st

from pulsefield.phase import FieldValue, normalize, signed_offset, ring_distance, phase_to_unit, field_sum
from pulsefield.util import DomainError

phases = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)
reals = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@pytest.mark.parametrize("a, b, expected", [(0.3, 0.3, 0.0), (0.9, 0.1, 0.2), (0.0, 0.5, 0.5)])
def test_ring_distance_examples(a, b, expected):
    assert ring_distance(a, b) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("p, re, im", [(0.0, 1.0, 0.0), (0.25, 0.0, 1.0), (0.5, -1.0, 0.0)])
def test_phase_to_unit_examples(p, re, im):
    z = phase_to_unit(p)
    assert z.re == pytest.approx(re, abs=1e-12)
    assert z.im == pytest.approx(im, abs=1e-12)
    assert z.is_unit()


def test_zero_field_has_no_angle():
    z = FieldValue.zero()
    assert z.strength == 0.0
    assert z.angle is None
    with pytest.raises(DomainError):
        z.require_angle()


def test_normalize_never_returns_one():
    assert normalize(-1e-17) == 0.0
    assert normalize(1.0) == 0.0
    assert normalize(-0.25) == pytest.approx(0.75)


def test_signed_offset_range():
    assert signed_offset(0.75) == pytest.approx(-0.25)
    assert signed_offset(0.5) == pytest.approx(-0.5)
    assert signed_offset(0.25) == pytest.approx(0.25)


def test_field_sum():
    z = field_sum([0.5, 0.75])
    assert z.re == pytest.approx(-1.0)
    assert z.im == pytest.approx(-1.0)
    assert z.strength == pytest.approx(math.sqrt(2))
    assert z.angle == pytest.approx(0.625)


@given(reals)
def test_normalize_range(x):
    assert 0.0 <= normalize(x) < 1.0


@given(phases, phases)
def test_ring_distance_symmetric_and_bounded(a, b):
    assert ring_distance(a, b) == pytest.approx(ring_distance(b, a), abs=1e-12)
    assert 0.0 <= ring_distance(a, b) <= 0.5


@given(phases, phases, phases)
def test_ring_triangle_inequality(a, b, c):
    assert ring_distance(a, c) <= ring_distance(a, b) + ring_distance(b, c) + 1e-12


@given(phases, phases, phases)
def test_ring_rotation_invariance(a, b, s):
    shifted = ring_distance(normalize(a + s), normalize(b + s))
    assert shifted == pytest.approx(ring_distance(a, b), abs=1e-9)


@given(phases, phases)
def test_rotation_additivity(a, b):
    z = phase_to_unit(a) * phase_to_unit(b)
    assert z.is_unit()
    assert ring_distance(z.angle, normalize(a + b)) <= 1e-9


@given(phases, phases)
def test_rotate_matches_product(a, b):
    z = phase_to_unit(a).rotate(b)
    assert ring_distance(z.angle, normalize(a + b)) <= 1e-9


def test_field_arithmetic():
    a = FieldValue(1.0, 2.0)
    b = FieldValue(-0.5, 0.5)
    assert (a + b) == FieldValue(0.5, 2.5)
    assert (a - b) == FieldValue(1.5, 1.5)
    assert a.conjugate() == FieldValue(1.0, -2.0)
    assert FieldValue.from_complex(a.as_complex()) == a
