"""
pulsefield.protocol.feedback

Pulse-timer scheduling and the feedback rules that choose the next pulse offset from a measured field.

Angles here are pulse-timer angles: the phase, relative to the deciding instant, at which the node's
next pulse falls. A measured field angle is of the same kind (records lie in the past, so the field
angle is the phase at which the observed pulses recur). Overwriting and mirroring work on angles,
which are converted back to a signed offset in [-1/2, 1/2), so every next cycle lasts between T/2
and 3T/2 ticks.
"""

import dataclasses
import logging
import math

import numpy as np

from pulsefield.phase import FieldValue, normalize, ring_distance, signed_offset
from pulsefield.protocol.models import (SyncDecision, OscillatorState, ONE_KICK_AUTH, RANDOM_WALK,
                                        HALF_RANDOM_WALK, EXTENDED)
from pulsefield.util import ContractViolation

logger = logging.getLogger(__name__)


def offset_to_angle(x):
    return normalize(x)


def angle_to_offset(psi):
    return signed_offset(psi)


def _uniform_offset(rng):
    return float(rng.uniform(-0.5, 0.5))


def schedule_pulse_timer(c_now, x, T, c_max):
    """
    Schedules the pulsing timer at (c_now + (1 + x) T) mod c_max, rounded to the nearest tick.

    :raises ContractViolation: If x lies outside [-1/2, 1/2].
    """
    if not -0.5 <= x <= 0.5:
        raise ContractViolation(f"Pulse offset x={x} lies outside [-1/2, 1/2].")
    return (c_now + int(math.floor((1.0 + x) * T + 0.5))) % c_max


def mirror(proposal, field_angle):
    """
    Reflects a proposal lying more than a quarter cycle away from the field angle.

    :param proposal: (float) Proposed pulse-timer angle.
    :param field_angle: (float) Field angle.
    :return: (float) (2 field_angle + 1/2 - proposal) mod 1 when the ring distance exceeds 1/4,
        else the proposal.
    """
    if ring_distance(field_angle, proposal) > 0.25:
        return normalize(2.0 * field_angle + 0.5 - proposal)
    return proposal


def mirror_array(proposal, field_angle):
    """ Vectorized `mirror` over numpy arrays of proposals and field angles. """
    proposal = np.asarray(proposal, dtype=float)
    diff = np.mod(proposal - field_angle, 1.0)
    dist = np.minimum(diff, 1.0 - diff)
    reflected = np.mod(2.0 * np.asarray(field_angle) + 0.5 - proposal, 1.0)
    return np.where(dist > 0.25, reflected, proposal)


def _overwrite(z_hat: FieldValue) -> SyncDecision:
    if z_hat.is_zero():
        raise ContractViolation("Overwrite requested with a zero-strength field.")
    angle = z_hat.angle
    return SyncDecision(next_x=angle_to_offset(angle), overwrite_angle=angle)


def decide_random_walk(rng) -> SyncDecision:
    """ Plain random walk: a fresh x ~ U(-1/2, 1/2) at every pulsing instant. """
    return SyncDecision(next_x=_uniform_offset(rng))


def decide_half_random_walk(z_hat: FieldValue, R0, eps_max, adversary_choice=None, rng=None) -> SyncDecision:
    """
    Basic feedback rule.

    Below R0 - eps_max the node walks randomly; at or above R0 + eps_max it aligns its next pulse with
    the field angle. In between, the measurement cannot tell on which side of R0 the true strength lies
    and `adversary_choice` decides (None means random walk).

    :raises ContractViolation: If an overwrite is requested with a zero-strength field.
    """
    strength = z_hat.strength
    if strength < R0 - eps_max:
        return decide_random_walk(rng)
    if strength >= R0 + eps_max or adversary_choice:
        return _overwrite(z_hat)
    return decide_random_walk(rng)


def decide_extended(z_hat: FieldValue, R0, R1, rng) -> SyncDecision:
    """
    Extended feedback rule with three strength tiers:
    overwrite at or above R1, random walk below R0, mirrored random proposal in [R0, R1).
    The random proposal is drawn in every tier.
    """
    strength = z_hat.strength
    x = _uniform_offset(rng)
    if strength >= R1:
        return _overwrite(z_hat)
    if strength < R0:
        return SyncDecision(next_x=x)

    proposal = offset_to_angle(x)
    angle = z_hat.require_angle()
    if ring_distance(angle, proposal) <= 0.25:
        return SyncDecision(next_x=x)
    return SyncDecision(next_x=angle_to_offset(mirror(proposal, angle)), mirrored=True)


def one_kick_init(rng, already_kicked=False):
    """
    Draws the single startup offset of authenticated one-kick mode. Later pulses use x = 0.

    :raises ContractViolation: If the node already drew its kick.
    """
    if already_kicked:
        raise ContractViolation("one_kick_init may only be called once per node.")
    return _uniform_offset(rng)


def adjust_sync_phase(state: OscillatorState, z_hat: FieldValue) -> OscillatorState:
    """
    Sets the synchronization phase to the angle of `z_hat`. A zero field leaves the state unchanged.

    :return: (OscillatorState) A new state; windows and random stream are shared with the input.
    """
    if z_hat.is_zero():
        logger.debug(f"Node {state.node_id}: zero field, sync phase kept at {state.sync_phase:.4f}.")
        return state
    return dataclasses.replace(state, sync_phase=z_hat.angle)


def decide(mode, z_hat: FieldValue, config, rng, band_choice=None) -> SyncDecision:
    """
    Dispatches to the feedback rule of `mode` at a pulsing instant.

    :param mode: (str) One of one_kick_auth, random_walk, half_random_walk, extended.
    :param config: (SimConfig) Supplies R0, R1 and eps_max.
    :param band_choice: (bool or None) Adversary resolution of the half-random-walk middle band.
    """
    if mode == ONE_KICK_AUTH:
        return SyncDecision(next_x=0.0)
    if mode == RANDOM_WALK:
        return decide_random_walk(rng)
    if mode == HALF_RANDOM_WALK:
        return decide_half_random_walk(z_hat, config.R0, config.eps_max, band_choice, rng)
    if mode == EXTENDED:
        return decide_extended(z_hat, config.R0, config.R1, rng)
    raise ContractViolation(f"Unknown sync mode '{mode}'.")
