from pulsefield.curve.models import CurveState, StepRule, StrengthStats, BASIC, EXTENDED, RANDOM, HIGH_CUTOFF
from pulsefield.curve.game import step, transition_matrix, play, run_game, random_curve, rayleigh_tail, \
    rayleigh_table, random_walk_lengths, mirror_projection

__all__ = [
    "CurveState",
    "StepRule",
    "StrengthStats",
    "BASIC",
    "EXTENDED",
    "RANDOM",
    "HIGH_CUTOFF",
    "step",
    "transition_matrix",
    "play",
    "run_game",
    "random_curve",
    "rayleigh_tail",
    "rayleigh_table",
    "random_walk_lengths",
    "mirror_projection",
]
