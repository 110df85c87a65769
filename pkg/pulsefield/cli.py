"""
pulsefield command line.

    pulsefield curve-game     --config cfg.json --out results/ --trials 10000 --seed 7 --set R0=20
    pulsefield simulate       --config cfg.json --out results/ --trials 200 --set n=16 --set hostile_init=true
    pulsefield rayleigh-check --out results/ --trials 100000 --tolerance 0.02
    pulsefield trig-check     --out results/

Exit codes: 0 success, 1 acceptance check failed, 2 invalid configuration, 3 I/O error.
"""

import argparse
import dataclasses
import logging
import math
import os
import sys
import typing

from pulsefield import __version__
from pulsefield.config import SimConfig
from pulsefield.curve import StepRule, play, rayleigh_table
from pulsefield.interfaces import i_csv, i_json
from pulsefield.sim import run_batch, aggregate_runs
from pulsefield.trig import ERR_ZZ, sweep_zigzag
from pulsefield.util import ColoredMsg, ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3

COMMANDS = ("curve-game", "simulate", "rayleigh-check", "trig-check")
DEFAULT_TOLERANCE = {"rayleigh-check": 0.02, "trig-check": 5e-4}
RAYLEIGH_TRIALS = 100000
MIN_RAYLEIGH_N = 16


@dataclasses.dataclass(frozen=True)
class ExperimentSpec:
    """
    One CLI invocation.

    :param trials: (int or None) Curve-game and rayleigh-check trials, or number of simulator seeds.
        None falls back to the config (curve-game), 1 seed (simulate) or 10^5 walks (rayleigh-check).
    :param overrides: (tuple[str]) "key=value" config overrides applied after the config file.
    """
    command: str
    config_path: typing.Optional[str] = None
    out_dir: str = "pulsefield_out"
    trials: typing.Optional[int] = None
    seed: typing.Optional[int] = None
    overrides: typing.Tuple[str, ...] = ()
    tolerance: typing.Optional[float] = None
    parallel: typing.Optional[int] = None
    radii: typing.Optional[typing.Tuple[float, ...]] = None
    progress: bool = True

    @classmethod
    def from_args(cls, args):
        radii = None
        if getattr(args, "radii", None):
            try:
                radii = tuple(float(r) for r in args.radii.split(","))
            except ValueError:
                raise ConfigError(f"--radii must be a comma-separated list of numbers (got '{args.radii}').")
        return cls(command=args.command, config_path=args.config, out_dir=args.out, trials=args.trials,
                   seed=args.seed, overrides=tuple(args.set or ()), tolerance=args.tolerance,
                   parallel=args.parallel, radii=radii, progress=not args.quiet)

    def load_config(self) -> SimConfig:
        """ Config file (or defaults), then --set overrides, then --seed and --trials. """
        config = SimConfig.load(self.config_path) if self.config_path else SimConfig().validate()
        config = config.with_overrides(self.overrides)
        updates = dict()
        if self.seed is not None:
            updates["seed"] = self.seed
        if self.trials is not None:
            updates["trials"] = self.trials
        if self.parallel is not None:
            updates["parallel"] = self.parallel
        return config.replace(**updates) if updates else config

    def tolerance_or_default(self):
        return DEFAULT_TOLERANCE[self.command] if self.tolerance is None else self.tolerance

    def path(self, fname):
        return os.path.join(self.out_dir, fname)


# ==========================================================================
# COMMANDS.
# ==========================================================================
def cmd_curve_game(spec: ExperimentSpec):
    config = spec.load_config()
    rule = StepRule.from_config(config)
    N = config.records_per_window
    stats = play(rule, N, steps=config.steps, trials=config.trials, seed=config.seed,
                 processes=config.parallel, progress=spec.progress)

    summary = {"seed": config.seed, "mode": rule.mode, "band_choice": rule.band_choice,
               "integer_trig": rule.integer_trig, **stats.to_dict()}
    edges, counts = stats.histogram()
    i_csv.write_finals(stats.finals, spec.path("finals.csv"), overwrite=True)
    i_json.write_histogram(N, edges, counts, spec.path("histogram.json"), overwrite=True)
    i_json.write_curve_summary(summary, spec.path("summary.json"), overwrite=True)

    print(ColoredMsg.success(f"curve-game N={N} R0={rule.R0:.4f} R1={rule.R1:.4f} trials={stats.trials}: "
                             f"fraction_high={stats.fraction_high:.4f} fraction_mid={stats.fraction_mid:.4f} "
                             f"fraction_low={stats.fraction_low:.4f}"))
    return EXIT_OK


def cmd_simulate(spec: ExperimentSpec):
    config = spec.load_config()
    num_seeds = spec.trials if spec.trials is not None else 1
    seeds = [config.seed + i for i in range(num_seeds)]
    summaries = run_batch(config, seeds, processes=config.parallel, out_dir=spec.out_dir, progress=spec.progress)

    batch = aggregate_runs(summaries)
    i_json.write_batch_summary(batch, spec.path("batch_summary.json"), overwrite=True)
    median = batch["median_stabilization_windows"]
    print(ColoredMsg.success(f"simulate n={config.n} f={config.f} mode={config.mode} seeds={len(seeds)}: "
                             f"stabilized={batch['fraction_stabilized']:.4f} "
                             f"median_windows={'never' if median is None else f'{median:.3f}'}"))
    return EXIT_OK


def cmd_rayleigh_check(spec: ExperimentSpec):
    config = spec.load_config()
    N = config.records_per_window
    if N < MIN_RAYLEIGH_N:
        logger.warning(ColoredMsg.warn(f"[WARN] N={N} < {MIN_RAYLEIGH_N}: the exp(-r^2/N) tail only holds "
                                       f"for sufficiently large N."))
    trials = spec.trials if spec.trials is not None else RAYLEIGH_TRIALS
    radii = spec.radii or tuple(i * math.sqrt(N) / 2 for i in range(1, 5))
    tolerance = spec.tolerance_or_default()

    table = rayleigh_table(N, radii, trials, seed=config.seed)
    i_csv.write_rayleigh(table, spec.path("rayleigh.csv"), overwrite=True)

    worst = max(row["abs_diff"] for row in table)
    if worst > tolerance:
        print(ColoredMsg.error(f"rayleigh-check N={N} trials={trials}: max abs diff {worst:.5f} > {tolerance}"))
        return EXIT_CHECK_FAILED
    print(ColoredMsg.success(f"rayleigh-check N={N} trials={trials}: max abs diff {worst:.5f} <= {tolerance}"))
    return EXIT_OK


def cmd_trig_check(spec: ExperimentSpec):
    config = spec.load_config()
    tolerance = spec.tolerance_or_default()
    sweep = sweep_zigzag(config.trig_scale)
    passed = sweep["compass_exact"] and abs(sweep["max_error"] - ERR_ZZ) <= tolerance
    i_json.write_trig_report({**sweep, "err_zz": ERR_ZZ, "tolerance": tolerance, "passed": passed},
                             spec.path("trig.json"), overwrite=True)

    msg = (f"trig-check K={config.trig_scale}: max error {sweep['max_error']:.6f} (pinned {ERR_ZZ}), "
           f"compass exact: {sweep['compass_exact']}, monotone: {sweep['monotone']}")
    if not passed:
        print(ColoredMsg.error(msg))
        return EXIT_CHECK_FAILED
    print(ColoredMsg.success(msg))
    return EXIT_OK


_HANDLERS = {
    "curve-game": cmd_curve_game,
    "simulate": cmd_simulate,
    "rayleigh-check": cmd_rayleigh_check,
    "trig-check": cmd_trig_check,
}


# ==========================================================================
# ENTRY POINT.
# ==========================================================================
def build_parser():
    parser = argparse.ArgumentParser(prog="pulsefield", description="Pulse synchronization experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS, help="Experiment to run.")
    parser.add_argument("--config", default=None, help="JSON config file. Defaults apply to missing keys.")
    parser.add_argument("--out", default="pulsefield_out", help="Output directory.")
    parser.add_argument("--trials", type=int, default=None,
                        help="Trials (curve-game, rayleigh-check) or number of seeds (simulate).")
    parser.add_argument("--seed", type=int, default=None, help="Base seed.")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", help="Config override. Repeatable.")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="Acceptance tolerance of rayleigh-check (0.02) and trig-check (5e-4).")
    parser.add_argument("--parallel", type=int, default=None, help="Worker processes. 0 uses every core.")
    parser.add_argument("--radii", default=None, help="Comma-separated radii of rayleigh-check.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only, no progress bars.")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        spec = ExperimentSpec.from_args(args)
        return _HANDLERS[spec.command](spec)
    except ConfigError as err:
        print(ColoredMsg.error(f"[ERROR] Invalid configuration: {err}"), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(ColoredMsg.error(f"[ERROR] I/O failure: {err}"), file=sys.stderr)
        return EXIT_IO
