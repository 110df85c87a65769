import dataclasses
import typing

import numpy as np

from pulsefield.dmf import AuthWindow, ReceptionWindow
from pulsefield.phase import NormalizedPhase, normalize
from pulsefield.util import ContractViolation

ONE_KICK_AUTH = "one_kick_auth"
RANDOM_WALK = "random_walk"
HALF_RANDOM_WALK = "half_random_walk"
EXTENDED = "extended"

DECISION_RANDOM = "random"
DECISION_MIRROR = "mirror"
DECISION_OVERWRITE = "overwrite"


@dataclasses.dataclass(frozen=True)
class SyncDecision:
    """
    How a node reschedules its pulsing timer at a pulsing instant.

    :param next_x: (float) Signed offset x in [-1/2, 1/2]: the next cycle lasts (1 + x) T ticks.
    :param overwrite_angle: (float or None) Field angle the next pulse was aligned to, when overwriting.
    :param mirrored: (bool) Whether a random proposal was reflected about the field angle.
    """
    next_x: float
    overwrite_angle: typing.Optional[NormalizedPhase] = None
    mirrored: bool = False

    def __post_init__(self):
        if not -0.5 <= self.next_x <= 0.5:
            raise ContractViolation(f"Pulse offset x={self.next_x} lies outside [-1/2, 1/2].")
        if self.overwrite_angle is not None and self.mirrored:
            raise ContractViolation("A decision cannot both overwrite and mirror.")

    @property
    def kind(self):
        if self.overwrite_angle is not None:
            return DECISION_OVERWRITE
        return DECISION_MIRROR if self.mirrored else DECISION_RANDOM

    @property
    def angle(self) -> NormalizedPhase:
        """ Pulse-timer angle: phase of the next pulse relative to the deciding instant. """
        return normalize(self.next_x)


@dataclasses.dataclass
class OscillatorState:
    """
    State of one nonfaulty node.

    `hw_counter` and `pulse_timer` are counter values mod c_max; `last_pulse_tick` is the counter
    value of the latest pulse, from which the pulsing phase is read off. `auth_window` exists only
    in authenticated one-kick mode. `kicked` records that the one-kick offset was drawn.
    """
    node_id: int
    pulse_phase: NormalizedPhase
    sync_phase: NormalizedPhase
    hw_counter: int
    pulse_timer: int
    anon_window: ReceptionWindow
    mode: str
    rng: np.random.Generator
    auth_window: typing.Optional[AuthWindow] = None
    last_pulse_tick: typing.Optional[int] = None
    kicked: bool = False
    last_field: typing.Optional[object] = None
    last_decision: typing.Optional[SyncDecision] = None

    def __str__(self):
        return f"<OscillatorState id={self.node_id} phi={self.pulse_phase:.4f} Phi={self.sync_phase:.4f} " \
               f"c={self.hw_counter} kappa={self.pulse_timer}>"
