import bisect
import cmath
import heapq
import logging
import math
import multiprocessing
import os

import networkx as nx
from tqdm import tqdm

from pulsefield import adversary as adv
from pulsefield import util
from pulsefield.config import SimConfig
from pulsefield.interfaces import i_csv, i_json
from pulsefield.dmf import AuthWindow, ReceptionWindow, measure_anonymous, measure_authenticated, field_over_interval
from pulsefield.phase import FieldValue, TWO_PI, normalize, ring_distance
from pulsefield.protocol import OscillatorState, ONE_KICK_AUTH, HALF_RANDOM_WALK, schedule_pulse_timer, \
    one_kick_init, adjust_sync_phase, decide
from pulsefield.sim.models import EventKind, PulseEvent, Trace
from pulsefield.trig import fixed_field_accumulate, zigzag_atan2
from pulsefield.util import ContractViolation, make_rng, STREAM_NODE, STREAM_DELAY, STREAM_FAULT, STREAM_INIT, \
    STREAM_BAND

logger = logging.getLogger(__name__)


class DriftClock:
    """
    Hardware clock of one node.

    The clock keeps the unbounded tick time H(t) = c0 + T * (integral of the scheduled speed over [0, t]).
    Speeds are constant within each reference cycle. The hardware counter is floor(H(t)) mod c_max.

    :param node: (int) Node id.
    :param c0: (int) Counter value at t = 0.
    :param T: (int) Ticks per ideal cycle.
    :param strategy: (AdversaryStrategy) Source of the drift schedule.
    """
    def __init__(self, node, c0, T, strategy):
        self._node = node
        self._T = T
        self._strategy = strategy
        self._bounds = [float(c0)]
        self._speeds = []

    def _extend(self, k):
        while len(self._speeds) <= k:
            speed = adv.schedule_drift(self._strategy, self._node, len(self._speeds))
            self._speeds.append(speed)
            self._bounds.append(self._bounds[-1] + self._T * speed)

    def speed(self, t):
        k = max(0, math.floor(t))
        self._extend(k)
        return self._speeds[k]

    def ticks(self, t):
        """ Tick time H(t) for t >= 0. """
        k = max(0, math.floor(t))
        self._extend(k)
        return self._bounds[k] + self._T * self._speeds[k] * (t - k)

    def counter(self, t, c_max):
        return math.floor(self.ticks(t)) % c_max

    def time_of(self, h):
        """ Reference time at which the tick time reaches `h` (h >= c0). """
        while self._bounds[-1] <= h:
            self._extend(len(self._speeds))
        k = max(0, bisect.bisect_right(self._bounds, h) - 1)
        return k + (h - self._bounds[k]) / (self._T * self._speeds[k])


class Simulator:
    """
    Deterministic discrete-event simulator of a pulsing system with n nodes, f of them faulty.

    Events are processed in (reference time, node id, kind, submission order) order. Every pulse of a
    nonfaulty node is delivered to every nonfaulty node of the (complete) network topology,
    itself included, after a delay scheduled by the adversary.

    :param config: (SimConfig) Validated before the run starts.
    :param strategy: (AdversaryStrategy) Defaults to the strategy described by the config.
    :param record_events: (bool) Whether GENERATE and DELIVER events are kept in the trace.
    """
    def __init__(self, config: SimConfig, strategy=None, record_events=True):
        config.validate()
        self._config = config
        self._strategy = strategy if strategy is not None else adv.AdversaryStrategy.from_config(config)
        self._record_events = record_events

        num_correct = config.n - config.f
        self._node_ids = tuple(range(num_correct))
        self._faulty_ids = tuple(range(num_correct, config.n))
        self._topology = nx.complete_graph(config.n)
        self._receivers = {
            uid: tuple(sorted(v for v in {uid, *self._topology.neighbors(uid)} if v < num_correct))
            for uid in self._node_ids
        }

        self._is_run = False
        self.reset()

    def __str__(self):
        return f"<Simulator n={self._config.n} f={self._config.f} mode={self._config.mode} seed={self._config.seed}>"

    # ==========================================================================
    # GETTERS.
    # ==========================================================================
    def config(self):
        return self._config

    def strategy(self):
        return self._strategy

    def topology(self):
        return self._topology

    def states(self):
        return dict(self._states)

    def trace(self):
        return self._trace

    def is_run(self):
        return self._is_run

    # ==========================================================================
    # INITIALIZATION.
    # ==========================================================================
    def reset(self):
        """ Draws the initial states of all nonfaulty nodes and schedules the first events. """
        cfg = self._config
        self._queue = []
        self._seq = 0
        self._trace = Trace(cfg, self._node_ids, self._faulty_ids)
        self._states = dict()
        self._clocks = dict()
        self._cycle_start = dict()
        self._target = dict()
        self._sync_ref = dict()
        self._faulty_windows = dict()
        self._recent = []
        self._last_injection = dict()
        self._global_phase = None

        self._delay_rng = make_rng(cfg.seed, STREAM_DELAY)
        self._fault_rng = make_rng(cfg.seed, STREAM_FAULT)
        self._band_rng = make_rng(cfg.seed, STREAM_BAND)

        for uid in self._node_ids:
            self._init_node(uid)

        self._push(0.0, -1, EventKind.CYCLE, 0)
        self._push(0.0, cfg.n, EventKind.SAMPLE, 0)
        self._is_run = False

    def _init_node(self, uid):
        cfg = self._config
        init_rng = make_rng(cfg.seed, STREAM_INIT, uid)
        node_rng = make_rng(cfg.seed, STREAM_NODE, uid)
        window_len = cfg.window_ticks

        c0 = int(init_rng.integers(0, cfg.c_max))
        sync0 = float(init_rng.random())
        anon_window = ReceptionWindow(window_len, cfg.c_max)
        auth_window = AuthWindow(range(cfg.n), window_len, cfg.c_max) if cfg.mode == ONE_KICK_AUTH else None

        kicked = False
        if cfg.mode == ONE_KICK_AUTH:
            x = one_kick_init(node_rng)
            kicked = True
        else:
            x = float(node_rng.uniform(-0.5, 0.5))
        cycle = (schedule_pulse_timer(c0, x, cfg.T, cfg.c_max) - c0) % cfg.c_max

        if cfg.hostile_init:
            phi0 = float(init_rng.random())
            elapsed = math.floor(phi0 * cycle)
            num_garbage = int(init_rng.integers(0, cfg.records_per_window + 1))
            anon_window.preload(c0 - init_rng.integers(0, window_len, size=num_garbage))
            if auth_window is not None:
                for sender in range(cfg.n):
                    if init_rng.random() < 0.5:
                        auth_window.record(sender, c0 - int(init_rng.integers(0, window_len)))
        else:
            phi0, elapsed = 0.0, 0

        start = c0 - elapsed
        target = start + cycle
        clock = DriftClock(uid, c0, cfg.T, self._strategy)

        self._states[uid] = OscillatorState(node_id=uid, pulse_phase=phi0, sync_phase=sync0, hw_counter=c0,
                                            pulse_timer=target % cfg.c_max, anon_window=anon_window,
                                            mode=cfg.mode, rng=node_rng, auth_window=auth_window,
                                            kicked=kicked)
        self._clocks[uid] = clock
        self._cycle_start[uid] = start
        self._target[uid] = target
        self._sync_ref[uid] = (float(c0), sync0)
        self._faulty_windows[uid] = ReceptionWindow(window_len, cfg.c_max)
        self._push(clock.time_of(target), uid, EventKind.TIMER, None)

    # ==========================================================================
    # EVENT LOOP.
    # ==========================================================================
    def _push(self, t, node, kind, payload):
        self._seq += 1
        heapq.heappush(self._queue, (t, node, int(kind), self._seq, payload))

    def run(self):
        """
        Runs the simulation for `config.steps` reference cycles.

        :return: (Trace) The trace of the run.
        """
        if self._is_run:
            self.reset()

        horizon = float(self._config.steps)
        while self._queue:
            t, node, kind, _, payload = heapq.heappop(self._queue)
            if t > horizon:
                break
            if kind == EventKind.DELIVER:
                self._on_deliver(node, t, *payload)
            elif kind == EventKind.TIMER:
                self._on_timer(node, t)
            elif kind == EventKind.SAMPLE:
                self._on_sample(t, payload)
            elif kind == EventKind.CYCLE:
                self._on_cycle(payload)

        self._trace.t_end = horizon
        self._is_run = True
        logger.info(f"Simulated {horizon:g} cycles of {self}: {self._trace.decisions}, "
                    f"interference {self._trace.interference:.3f}.")
        return self._trace

    def _snapshot(self, t):
        """ Adversary knowledge at `t`, taken before any random draw of the coming cycle. """
        omega = self._config.omega
        self._recent = [tp for tp in self._recent if tp >= t - omega]
        z = field_over_interval(self._recent, t - omega, t)
        self._global_phase = None if z.is_zero() else normalize(z.angle + t - omega)

        strengths, phases = dict(), dict()
        for uid, st in self._states.items():
            field = st.last_field
            strengths[uid] = 0.0 if field is None else field.strength
            phases[uid] = None if field is None or field.is_zero() else field.angle
        return adv.SystemSnapshot(time=t, receivers=self._node_ids, faulty_ids=self._faulty_ids,
                                  strengths=strengths, field_phases=phases, global_phase=self._global_phase,
                                  global_strength=z.strength, last_injection=dict(self._last_injection))

    def _on_cycle(self, k):
        snapshot = self._snapshot(float(k))
        deliveries = adv.emit_faulty_pulses(self._strategy, (float(k), float(k + 1)), snapshot, self._fault_rng)
        gap = self._strategy.min_gap
        for fid, rid, t in deliveries:
            last = self._last_injection.get((fid, rid), -math.inf)
            if t - last < gap - 1e-12:
                raise ContractViolation(f"Faulty node {fid} exceeds the pulsing frequency towards {rid} at t={t}.")
            self._last_injection[fid, rid] = t
            self._trace.faulty_pulses.setdefault((fid, rid), []).append(t)
            self._push(t, rid, EventKind.DELIVER, (fid, t, True))

        if k + 1 < self._config.steps:
            self._push(float(k + 1), -1, EventKind.CYCLE, k + 1)

    def _measure(self, st, c):
        cfg = self._config
        if st.auth_window is not None:
            return measure_authenticated(st.auth_window, c, c, cfg.T, cfg.omega)
        if not cfg.integer_trig:
            return measure_anonymous(st.anon_window, c, cfg.T, cfg.omega)

        # Integer path: 1-norm strength and zigzag angle.
        ticks = [c + offset for offset in st.anon_window.read(c)]
        sx, sy = fixed_field_accumulate(ticks, c, cfg.T, cfg.omega, cfg.c_max, cfg.trig_scale)
        if sx == 0 and sy == 0:
            return FieldValue.zero()
        strength = (abs(sx) + abs(sy)) / cfg.trig_scale
        angle = zigzag_atan2(sy, sx, cfg.trig_scale).phase
        return FieldValue.from_complex(strength * cmath.exp(1j * TWO_PI * angle))

    def _on_timer(self, uid, t):
        cfg = self._config
        st = self._states[uid]
        target = self._target[uid]
        c = target % cfg.c_max

        # Measure before the current pulse is emitted.
        z_hat = self._measure(st, c)
        z_faulty = measure_anonymous(self._faulty_windows[uid], c, cfg.T, cfg.omega)
        self._trace.interference = max(self._trace.interference, z_faulty.strength)
        self._trace.fields.append((t, uid, z_hat.strength, z_hat.angle))

        # Field angles point to the next recurrence of the observed pulses. Sync phases count elapsed phase.
        adjusted = adjust_sync_phase(st, z_hat.conjugate())
        if adjusted is not st:
            self._sync_ref[uid] = (float(target), adjusted.sync_phase)
        st = adjusted

        band = None
        if cfg.mode == HALF_RANDOM_WALK and self._global_phase is not None and not z_hat.is_zero():
            prefer_overwrite = ring_distance(normalize(t + z_hat.angle), self._global_phase) > 0.25
            band = adv.choose_band(self._strategy, prefer_overwrite, self._band_rng)
        elif cfg.mode == HALF_RANDOM_WALK:
            band = adv.choose_band(self._strategy, False, self._band_rng)

        decision = decide(cfg.mode, z_hat, cfg, st.rng, band)
        if cfg.mode != ONE_KICK_AUTH:
            self._trace.decisions[decision.kind] += 1

        st.pulse_timer = schedule_pulse_timer(c, decision.next_x, cfg.T, cfg.c_max)
        next_target = target + (st.pulse_timer - c) % cfg.c_max
        st.hw_counter = c
        st.last_pulse_tick = c
        st.pulse_phase = 0.0
        st.last_field = z_hat
        st.last_decision = decision
        self._states[uid] = st
        self._cycle_start[uid] = target
        self._target[uid] = next_target
        self._push(self._clocks[uid].time_of(next_target), uid, EventKind.TIMER, None)

        # Pulse generation.
        self._trace.pulses[uid].append(t)
        self._recent.append(t)
        if self._record_events:
            self._trace.add_event(PulseEvent(EventKind.GENERATE, uid, t))
        receivers = self._receivers[uid]
        delays = adv.schedule_delays(self._strategy, uid, receivers, t, None, self._delay_rng)
        for rid, delay in zip(receivers, delays):
            self._push(t + float(delay), rid, EventKind.DELIVER, (uid, t, False))

    def _on_deliver(self, rid, t, sender, sent_time, faulty):
        cfg = self._config
        st = self._states[rid]
        tick = self._clocks[rid].counter(t, cfg.c_max)
        st.hw_counter = tick
        st.anon_window.insert(tick)
        if st.auth_window is not None:
            st.auth_window.record(sender, tick)
        if faulty:
            self._faulty_windows[rid].insert(tick)
        if self._record_events:
            self._trace.add_event(PulseEvent(EventKind.DELIVER, sender, t, rid, tick, sent_time, faulty))

    def _on_sample(self, t, index):
        cfg = self._config
        phi, sync, strength, angle = [], [], [], []
        for uid in self._node_ids:
            h = self._clocks[uid].ticks(t)
            start, target = self._cycle_start[uid], self._target[uid]
            phi.append(min(max((h - start) / (target - start), 0.0), math.nextafter(1.0, 0.0)))
            h_ref, sync_ref = self._sync_ref[uid]
            sync.append(normalize(sync_ref + (h - h_ref) / cfg.T))
            field = self._states[uid].last_field
            strength.append(0.0 if field is None else field.strength)
            angle.append(math.nan if field is None or field.is_zero() else field.angle)
        self._trace.add_sample(t, phi, sync, strength, angle)

        t_next = (index + 1) * self._trace.sample_interval
        if t_next <= cfg.steps:
            self._push(t_next, cfg.n, EventKind.SAMPLE, index + 1)


def run(config: SimConfig, strategy=None) -> Trace:
    """ Runs one simulation. See `Simulator`. """
    return Simulator(config, strategy).run()


# ==========================================================================
# BATCHES.
# ==========================================================================
def _simulate_job(job):
    config_dict, seed, out_dir = job
    config = SimConfig.from_dict({**config_dict, "seed": seed})
    trace = Simulator(config).run()
    summary = trace.summary()
    if out_dir is not None:
        i_csv.write_trace(trace, os.path.join(out_dir, f"trace_{seed}.csv"), overwrite=True)
        i_json.write_run_summary(summary, os.path.join(out_dir, f"summary_{seed}.json"), overwrite=True)
    return summary


def run_batch(config: SimConfig, seeds, processes=None, out_dir=None, progress=True):
    """
    Runs one simulation per seed and returns their summaries in seed order.

    :param processes: (int) Worker processes. 0 or None uses every core; 1 runs sequentially.
    :param out_dir: (str or None) When given, every run writes trace_<seed>.csv and summary_<seed>.json there.
    """
    seeds = list(seeds)
    processes = processes or config.parallel or os.cpu_count() or 1
    jobs = [(config.to_dict(), seed, out_dir) for seed in seeds]
    logger.info(util.ColoredMsg.ok(f"[INFO] Simulating {len(seeds)} seeds with {processes} process(es)."))

    if processes == 1 or len(jobs) == 1:
        return [_simulate_job(job) for job in tqdm(jobs, desc="Simulating seeds", disable=not progress)]

    with multiprocessing.Pool(processes) as pool:
        return list(tqdm(pool.imap(_simulate_job, jobs), total=len(jobs), desc="Simulating seeds",
                         disable=not progress))
