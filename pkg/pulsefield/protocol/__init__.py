from pulsefield.protocol.models import SyncDecision, OscillatorState, ONE_KICK_AUTH, RANDOM_WALK, \
    HALF_RANDOM_WALK, EXTENDED, DECISION_RANDOM, DECISION_MIRROR, DECISION_OVERWRITE
from pulsefield.protocol.feedback import schedule_pulse_timer, mirror, mirror_array, decide_random_walk, \
    decide_half_random_walk, decide_extended, one_kick_init, adjust_sync_phase, decide, offset_to_angle, \
    angle_to_offset

__all__ = [
    "SyncDecision",
    "OscillatorState",
    "ONE_KICK_AUTH",
    "RANDOM_WALK",
    "HALF_RANDOM_WALK",
    "EXTENDED",
    "DECISION_RANDOM",
    "DECISION_MIRROR",
    "DECISION_OVERWRITE",
    "schedule_pulse_timer",
    "mirror",
    "mirror_array",
    "decide_random_walk",
    "decide_half_random_walk",
    "decide_extended",
    "one_kick_init",
    "adjust_sync_phase",
    "decide",
    "offset_to_angle",
    "angle_to_offset",
]
