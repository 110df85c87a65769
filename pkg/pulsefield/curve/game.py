"""
pulsefield.curve.game

The curve-moving game: an abstraction of a node's reception window as a curve of N unit segments.
At every step the tail segment is removed and a new head segment is appended. The head direction
follows the feedback rule applied to the current endpoint (the field), so the endpoint distance R(k)
evolves exactly like the DMF strength of a perfectly synchronized window.

Trials are played in blocks. Each block owns a child seed sequence and is advanced as one numpy
array, so results depend on the seed and never on the number of worker processes.
"""

import logging
import math
import multiprocessing
import os

import numpy as np
from tqdm import tqdm

from pulsefield import util
from pulsefield.adversary import AdversaryStrategy, choose_band_array
from pulsefield.curve.models import CurveState, StepRule, StrengthStats, BASIC, RANDOM
from pulsefield.phase import TWO_PI
from pulsefield.protocol import mirror_array, DECISION_RANDOM, DECISION_MIRROR, DECISION_OVERWRITE
from pulsefield.trig import DEFAULT_SCALE, l1_sincos_array, zigzag_atan2_array
from pulsefield.util import DomainError, block_seeds

logger = logging.getLogger(__name__)

BLOCK_SIZE = 1000
TOL = 1e-9


# ==========================================================================
# WALKS.
# ==========================================================================
class _FloatWalk:
    """ A block of curves with float segments. Phases are in cycles. """
    unit = 1.0

    def __init__(self, phases):
        self.segs = np.exp(1j * TWO_PI * np.asarray(phases, dtype=float))
        self.S = self.segs.sum(axis=1)
        self.ptr = 0

    def strength(self):
        return np.abs(self.S)

    def field_angle(self):
        return np.mod(np.angle(self.S) / TWO_PI, 1.0)

    def field_complex(self):
        return self.S

    def tail_complex(self):
        return self.segs[:, self.ptr]

    def draw(self, rng, size):
        return rng.random(size)

    def rotate(self, angle, cycles):
        return np.mod(angle + cycles, 1.0)

    def mirror(self, proposal, angle):
        return mirror_array(proposal, angle)

    def push(self, heads):
        new = np.exp(1j * TWO_PI * heads)
        self.S = self.S - self.segs[:, self.ptr] + new
        self.segs[:, self.ptr] = new
        self.ptr = (self.ptr + 1) % self.segs.shape[1]
        if self.ptr == 0:
            # Resum once per revolution so rounding errors cannot accumulate.
            self.S = self.segs.sum(axis=1)

    def ordered(self):
        return np.roll(self.segs, -self.ptr, axis=1)


class _IntWalk:
    """ A block of curves on the integer trigonometry path. Phases are raw fixed-point values. """

    def __init__(self, phases, scale=DEFAULT_SCALE):
        self.unit = scale
        self.raw = np.floor(np.asarray(phases, dtype=float) * scale + 0.5).astype(np.int64) % scale
        self.x, self.y = l1_sincos_array(self.raw, scale)
        self.sx = self.x.sum(axis=1)
        self.sy = self.y.sum(axis=1)
        self.ptr = 0

    def strength(self):
        return (np.abs(self.sx) + np.abs(self.sy)) / self.unit

    def field_angle(self):
        zero = (self.sx == 0) & (self.sy == 0)
        return zigzag_atan2_array(np.where(zero, 0, self.sy), np.where(zero, 1, self.sx), self.unit)

    def field_complex(self):
        return (self.sx + 1j * self.sy) / self.unit

    def tail_complex(self):
        return (self.x[:, self.ptr] + 1j * self.y[:, self.ptr]) / self.unit

    def draw(self, rng, size):
        return rng.integers(0, self.unit, size=size, dtype=np.int64)

    def rotate(self, angle, cycles):
        return (angle + np.rint(cycles * self.unit).astype(np.int64)) % self.unit

    def mirror(self, proposal, angle):
        diff = (proposal - angle) % self.unit
        dist = np.minimum(diff, self.unit - diff)
        reflected = (2 * angle + self.unit // 2 - proposal) % self.unit
        return np.where(4 * dist > self.unit, reflected, proposal)

    def push(self, heads):
        heads = np.asarray(heads, dtype=np.int64)
        nx, ny = l1_sincos_array(heads, self.unit)
        self.sx += nx - self.x[:, self.ptr]
        self.sy += ny - self.y[:, self.ptr]
        self.raw[:, self.ptr] = heads
        self.x[:, self.ptr] = nx
        self.y[:, self.ptr] = ny
        self.ptr = (self.ptr + 1) % self.raw.shape[1]

    def ordered(self):
        raw = np.roll(self.raw, -self.ptr, axis=1)
        return np.exp(1j * TWO_PI * raw / self.unit)


def _make_walk(phases, rule: StepRule):
    if rule.integer_trig:
        return _IntWalk(phases, rule.scale)
    return _FloatWalk(phases)


def _prefer_overwrite(walk, nonzero):
    """ Whether appending the field direction leaves a shorter endpoint than a random head on average. """
    S = walk.field_complex()
    rest = S - walk.tail_complex()
    unit = np.where(nonzero, S / np.where(nonzero, np.abs(S), 1.0), 0.0)
    return nonzero & (np.abs(rest + unit) < np.sqrt(np.abs(rest) ** 2 + 1.0))


def _advance(walk, rule: StepRule, rng, band_strategy):
    """
    Plays one step on every curve of the walk.

    :return: (tuple[numpy.ndarray, numpy.ndarray]) Masks of the overwriting and of the mirrored curves.
    """
    R = walk.strength()
    size = R.size
    none = np.zeros(size, dtype=bool)
    proposal = walk.draw(rng, size)
    if rule.mode == RANDOM:
        walk.push(proposal)
        return none, none

    nonzero = R > 0
    angle = walk.field_angle()
    if rule.noise and rule.eps_max > 0:
        delta = np.arcsin(np.minimum(1.0, rule.eps_max / np.where(nonzero, R, 1.0))) / TWO_PI
        angle = walk.rotate(angle, rng.uniform(-delta, delta))

    if rule.mode == BASIC:
        high = R >= rule.R0 + rule.eps_max
        band = ~high & (R >= rule.R0 - rule.eps_max)
        if rule.band_choice == "adaptive":
            prefer = _prefer_overwrite(walk, nonzero)
        else:
            prefer = none
        chosen = choose_band_array(band_strategy, prefer, rng)
        overwrite = nonzero & (high | (band & chosen))
        mirrored = none
    else:
        overwrite = nonzero & (R >= rule.R1)
        middle = nonzero & ~overwrite & (R >= rule.R0)
        reflected = walk.mirror(proposal, angle)
        mirrored = middle & (reflected != proposal)
        proposal = np.where(middle, reflected, proposal)

    walk.push(np.where(overwrite, angle, proposal))
    return overwrite, mirrored


# ==========================================================================
# SINGLE CURVES.
# ==========================================================================
def random_curve(N, rng) -> CurveState:
    """ Curve of N segments with independent uniform directions. """
    if N < 1:
        raise DomainError(f"A curve needs N >= 1 segments (got {N}).")
    return CurveState.from_angles(rng.random(N))


def step(state: CurveState, rule: StepRule, rng) -> CurveState:
    """
    One transition of the game: drops the tail segment and appends the head chosen by `rule`.

    On the integer path the segment directions are first rounded to the fixed-point grid.
    """
    walk = _make_walk(state.angles[None, :], rule)
    band_strategy = AdversaryStrategy(band_choice_policy=rule.band_choice)
    _advance(walk, rule, rng, band_strategy)
    return CurveState(walk.ordered()[0], state.k + 1)


def transition_matrix(state: CurveState, rule: StepRule, b=None, r=None):
    """
    Linear form of one step over the head-first segment vector z(k) = (z_k, z_(k-1), ..., z_(k-N+1)).

    Under overwrite (b = 1) the new head is z(k) summed and divided by r(k), so the first row is
    a = b / r everywhere and the remaining rows shift the vector by one. Random heads are not linear
    in z, so a step with b = 0 is only the shift. Diagnostic only; the game itself never uses it.

    :param b: (int) Overwrite indicator. Derived from the rule tiers when absent; the basic middle band
        counts as overwrite only under the always_1 policy.
    :param r: (float) Endpoint distance. Defaults to the state's, clamped below at R0 - eps_max.
    :return: (numpy.ndarray) The N x N matrix.
    """
    N = state.N
    R = state.strength
    if b is None:
        if rule.mode == RANDOM:
            b = 0
        elif rule.mode == BASIC:
            high = R >= rule.R0 + rule.eps_max
            band = not high and R >= rule.R0 - rule.eps_max
            b = int(high or (band and rule.band_choice == "always_1"))
        else:
            b = int(R >= rule.R1)
    if r is None:
        r = R
    r = max(r, rule.R0 - rule.eps_max)
    if b and r <= 0:
        raise DomainError("Overwrite needs a positive endpoint distance.")

    A = np.zeros((N, N))
    if b:
        A[0, :] = b / r
    A[np.arange(1, N), np.arange(N - 1)] = 1.0
    return A


# ==========================================================================
# BATCHES.
# ==========================================================================
def _play_block(job):
    rule, N, steps, size, seq = job
    rng = np.random.default_rng(seq)
    walk = _make_walk(rng.random((size, N)), rule)
    band_strategy = AdversaryStrategy(band_choice_policy=rule.band_choice)

    series = np.empty((steps + 1, size))
    series[0] = walk.strength()
    overwrites = mirrors = violations = 0
    max_change = 0.0
    for k in range(steps):
        overwrite, mirrored = _advance(walk, rule, rng, band_strategy)
        series[k + 1] = walk.strength()
        change = series[k + 1] - series[k]
        overwrites += int(np.count_nonzero(overwrite))
        mirrors += int(np.count_nonzero(mirrored))
        violations += int(np.count_nonzero(overwrite & (change < -TOL)))
        max_change = max(max_change, float(np.max(np.abs(change))))
    return series, overwrites, mirrors, violations, max_change


def play(rule: StepRule, N, steps=300, trials=10000, seed=0, processes=None, progress=False) -> StrengthStats:
    """
    Plays `trials` independent games of `steps` steps from uniformly random initial curves.

    :param rule: (StepRule) Transition rule.
    :param N: (int) Number of segments.
    :param processes: (int) Worker processes. 0 or None uses every core; 1 plays sequentially.
    :return: (StrengthStats)
    """
    if N < 1 or steps < 0 or trials < 1:
        raise DomainError(f"play needs N >= 1, steps >= 0 and trials >= 1 (got {N}, {steps}, {trials}).")

    num_blocks = math.ceil(trials / BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * (num_blocks - 1) + [trials - BLOCK_SIZE * (num_blocks - 1)]
    jobs = [(rule, N, steps, size, seq) for size, seq in zip(sizes, block_seeds(seed, num_blocks))]
    processes = min(processes or os.cpu_count() or 1, num_blocks)
    logger.info(util.ColoredMsg.ok(f"[INFO] Playing {trials} curve games (N={N}, mode={rule.mode}) "
                                   f"in {num_blocks} block(s) with {processes} process(es)."))

    if processes == 1:
        results = [_play_block(job) for job in tqdm(jobs, desc="Playing curve games", disable=not progress)]
    else:
        with multiprocessing.Pool(processes) as pool:
            results = list(tqdm(pool.imap(_play_block, jobs), total=len(jobs), desc="Playing curve games",
                                disable=not progress))

    series = np.concatenate([res[0] for res in results], axis=1)
    overwrites = sum(res[1] for res in results)
    mirrors = sum(res[2] for res in results)
    decisions = {
        DECISION_OVERWRITE: overwrites,
        DECISION_MIRROR: mirrors,
        DECISION_RANDOM: steps * trials - overwrites - mirrors,
    }
    stats = StrengthStats(
        N=N, R0=rule.R0, R1=rule.R1, steps=steps,
        finals=series[-1].copy(),
        mean_series=series.mean(axis=1),
        p05_series=np.quantile(series, 0.05, axis=1),
        p50_series=np.quantile(series, 0.50, axis=1),
        p95_series=np.quantile(series, 0.95, axis=1),
        overwrite_steps=overwrites,
        overwrite_violations=sum(res[3] for res in results),
        max_step_change=max(res[4] for res in results),
        decisions=decisions,
    )
    if stats.overwrite_violations and not rule.noise and not rule.integer_trig:
        logger.warning(util.ColoredMsg.warn(f"[WARN] {stats.overwrite_violations} overwrite steps shortened the curve."))
    return stats


def run_game(N, R0=None, R1=None, steps=300, trials=10000, mode="extended", band_choice="always_0", seed=0,
             eps_max=0.0, noise=False, integer_trig=False, scale=DEFAULT_SCALE, processes=None, progress=False):
    """
    Keyword front end of `play`. R0 defaults to sqrt(N) / 2 and R1 to N / (2 pi).
    """
    R0 = math.sqrt(N) / 2 if R0 is None else R0
    R1 = N / TWO_PI if R1 is None else R1
    rule = StepRule(mode=mode, R0=R0, R1=R1, eps_max=eps_max, band_choice=band_choice, noise=noise,
                    integer_trig=integer_trig, scale=scale)
    return play(rule, N, steps=steps, trials=trials, seed=seed, processes=processes, progress=progress)


# ==========================================================================
# RANDOM-WALK REFERENCE.
# ==========================================================================
def rayleigh_tail(N, r):
    """ Asymptotic probability exp(-r^2 / N) that a walk of N random unit steps ends at distance >= r. """
    if N < 1 or r < 0:
        raise DomainError(f"rayleigh_tail needs N >= 1 and r >= 0 (got N={N}, r={r}).")
    return math.exp(-r * r / N)


def random_walk_lengths(N, trials, seed=0):
    """ End-to-end distances of `trials` walks of N uniformly directed unit steps. """
    out = np.empty(trials)
    for i, seq in enumerate(block_seeds(seed, math.ceil(trials / BLOCK_SIZE))):
        start = i * BLOCK_SIZE
        size = min(BLOCK_SIZE, trials - start)
        rng = np.random.default_rng(seq)
        out[start:start + size] = np.abs(np.exp(1j * TWO_PI * rng.random((size, N))).sum(axis=1))
    return out


def rayleigh_table(N, radii, trials, seed=0):
    """
    Empirical tail P(R >= r) of the N-step random walk next to exp(-r^2 / N) for every radius.

    :return: (list[dict]) Rows with keys r, empirical, formula and abs_diff.
    """
    lengths = random_walk_lengths(N, trials, seed)
    rows = []
    for r in radii:
        empirical = float(np.mean(lengths >= r))
        formula = rayleigh_tail(N, r)
        rows.append({"r": float(r), "empirical": empirical, "formula": formula,
                     "abs_diff": abs(empirical - formula)})
    return rows


def mirror_projection(trials, seed=0):
    """
    Mean projection of a mirrored uniform proposal onto the field direction. Tends to 2 / pi.
    """
    rng = util.make_rng(seed, util.STREAM_TRIAL)
    heads = mirror_array(rng.random(trials), 0.0)
    return float(np.mean(np.cos(TWO_PI * heads)))
