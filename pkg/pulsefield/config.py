"""
pulsefield: config.py

Shared simulation configuration.

A configuration file is a JSON object whose keys are exactly the field names of `SimConfig`.
Unknown keys are rejected.
"""

import dataclasses
import json
import logging
import math
import os
import typing

from pulsefield.util import ConfigError, ColoredMsg

logger = logging.getLogger(__name__)

SYNC_MODES = ("one_kick_auth", "random_walk", "half_random_walk", "extended")
DELAY_POLICIES = ("zero", "max", "uniform_random", "per_receiver_extremes")
DRIFT_POLICIES = ("constant", "oscillating", "random")
FAULT_POLICIES = ("silent", "random_pulses", "fixed_phase", "anti_phase", "adaptive_worst")
BAND_POLICIES = ("always_0", "always_1", "random", "adaptive")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """
    Every tunable of a run.

    Time quantities (`d`, `hold`, `sample_interval`, `pi_target`) are fractions of one
    reference cycle. `omega` is the observing window length in cycles, `T` the number of
    hardware ticks per ideal cycle. For the curve game, `steps` counts game steps; for the
    simulator, it counts simulated reference cycles.
    """
    n: int = 100
    f: int = 0
    d: float = 0.01
    rho: float = 1e-4
    T: int = 100
    omega: int = 1
    c_max: int = 1 << 20
    R0: float = 5.0
    R1: float = 100 / (2 * math.pi)
    eps_max: float = 0.0
    mode: str = "extended"
    fault_strategy: str = "silent"
    seed: int = 0
    steps: int = 300
    trials: int = 10000
    delay_policy: str = "uniform_random"
    drift_policy: str = "random"
    band_choice: str = "always_0"
    hostile_init: bool = False
    pi_target: float = 0.0
    hold: float = 2.0
    sample_interval: float = 0.0
    noise: bool = False
    integer_trig: bool = False
    trig_scale: int = 1 << 16
    parallel: int = 0

    # ==========================================================================
    # DERIVED QUANTITIES.
    # ==========================================================================
    @property
    def records_per_window(self) -> int:
        """ Expected number N of records in one omega-window: one pulse per node per cycle. """
        return self.n * self.omega

    @property
    def window_ticks(self) -> int:
        return self.omega * self.T

    @property
    def flush_time(self) -> float:
        """ Reference time after which initial window garbage is gone: omega / (1 - rho). """
        return self.omega / (1.0 - self.rho)

    def effective_sample_interval(self) -> float:
        """ Sampling step such that no phase moves by 0.01 cycle or more between samples. """
        if self.sample_interval > 0:
            return self.sample_interval
        return 0.0099 / (1.0 + self.rho)

    # ==========================================================================
    # VALIDATION.
    # ==========================================================================
    def validate(self):
        """
        Checks every invariant of the configuration.

        :raises ConfigError: If any invariant is violated.
        """
        errors = []
        if self.n < 1:
            errors.append(f"n must be >= 1 (got {self.n})")
        if not 0 <= self.f < self.n:
            errors.append(f"f must satisfy 0 <= f < n (got f={self.f}, n={self.n})")
        if not 0 <= self.d < 1:
            errors.append(f"d must lie in [0, 1) (got {self.d})")
        if not 0 <= self.rho < 1:
            errors.append(f"rho must lie in [0, 1) (got {self.rho})")
        if self.T < 2:
            errors.append(f"T must be >= 2 (got {self.T})")
        if self.omega < 1:
            errors.append(f"omega must be >= 1 (got {self.omega})")
        if self.c_max <= 2 * self.omega * self.T:
            errors.append(f"c_max must exceed 2*omega*T = {2 * self.omega * self.T} (got {self.c_max})")
        N = self.records_per_window
        if not (0 < self.R0 <= N and 0 < self.R1 <= N):
            errors.append(f"thresholds must satisfy 0 < R0 <= N and 0 < R1 <= N with N = {N} "
                          f"(got R0={self.R0}, R1={self.R1})")
        if not 0 <= self.eps_max < self.R0:
            errors.append(f"eps_max must satisfy 0 <= eps_max < R0 (got {self.eps_max})")
        if self.steps < 1:
            errors.append(f"steps must be >= 1 (got {self.steps})")
        if self.trials < 1:
            errors.append(f"trials must be >= 1 (got {self.trials})")
        if not 0 <= self.pi_target < 0.5:
            errors.append(f"pi_target must lie in [0, 0.5) (got {self.pi_target})")
        if self.hold <= 0:
            errors.append(f"hold must be positive (got {self.hold})")
        if self.sample_interval < 0:
            errors.append(f"sample_interval must be non-negative (got {self.sample_interval})")
        if self.trig_scale < 8 or self.trig_scale & (self.trig_scale - 1):
            errors.append(f"trig_scale must be a power of two >= 8 (got {self.trig_scale})")
        if self.parallel < 0:
            errors.append(f"parallel must be non-negative (got {self.parallel})")
        for key, allowed in (("mode", SYNC_MODES), ("fault_strategy", FAULT_POLICIES),
                             ("delay_policy", DELAY_POLICIES), ("drift_policy", DRIFT_POLICIES),
                             ("band_choice", BAND_POLICIES)):
            value = getattr(self, key)
            if value not in allowed:
                errors.append(f"{key} must be one of {list(allowed)} (got '{value}')")

        if errors:
            raise ConfigError("; ".join(errors))

        if self.R0 > self.R1 and self.mode == "extended":
            logger.warning(ColoredMsg.warn(f"[WARN] R0={self.R0} > R1={self.R1}: the mirror tier is empty and "
                                           f"fields of strength below R1 walk randomly."))
        if self.T < 100:
            logger.warning(ColoredMsg.warn(f"[WARN] T={self.T} < 100: timer rounding exceeds 0.5% of a cycle."))
        return self

    # ==========================================================================
    # CONSTRUCTION.
    # ==========================================================================
    @classmethod
    def field_names(cls):
        return [fld.name for fld in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, obj_dict: dict) -> "SimConfig":
        """
        Constructs a validated configuration from a dictionary.

        :raises ConfigError: On unknown keys, values of the wrong type or violated invariants.
        """
        unknown = sorted(set(obj_dict) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"Unknown config keys: {unknown}. Valid keys: {cls.field_names()}.")

        types = {fld.name: fld.type for fld in dataclasses.fields(cls)}
        values = {key: _coerce(key, value, types[key]) for key, value in obj_dict.items()}
        return cls(**values).validate()

    @classmethod
    def load(cls, fpath: typing.Union[str, os.PathLike]) -> "SimConfig":
        """
        Loads a configuration from a JSON file.

        :param fpath: (str) Path of the JSON file.
        :raises ConfigError: If the file is not a JSON object or its content is invalid.
        :raises OSError: If the file cannot be read.
        """
        with open(fpath, "r") as file:
            try:
                obj_dict = json.load(file)
            except json.JSONDecodeError as err:
                raise ConfigError(f"{fpath} is not valid JSON: {err}")

        if not isinstance(obj_dict, dict):
            raise ConfigError(f"{fpath} must contain a JSON object of config keys.")

        logger.info(ColoredMsg.ok(f"[INFO] Loaded config from {fpath} with keys {sorted(obj_dict)}."))
        return cls.from_dict(obj_dict)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kwargs) -> "SimConfig":
        """ Returns a validated copy with the given fields replaced. """
        return self.from_dict({**self.to_dict(), **kwargs})

    def with_overrides(self, overrides: typing.Iterable[str]) -> "SimConfig":
        """
        Applies `key=value` overrides, parsing each value with the declared type of the field.

        :param overrides: (Iterable[str]) Strings of the form "key=value".
        :raises ConfigError: On malformed strings or unknown keys.
        """
        updates = dict()
        for item in overrides:
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"Override '{item}' is not of the form key=value.")
            updates[key] = value.strip()
        return self.from_dict({**self.to_dict(), **updates})


def _coerce(key, value, typ):
    """ Converts a raw JSON or string value to the declared field type. """
    typ = typ if isinstance(typ, type) else {"int": int, "float": float, "bool": bool, "str": str}[typ]
    try:
        if typ is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in _TRUE | _FALSE:
                return value.lower() in _TRUE
            raise ValueError(value)
        if typ is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            return int(value)
        if typ is float:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        if not isinstance(value, str):
            raise ValueError(value)
        return value
    except (TypeError, ValueError):
        raise ConfigError(f"Config key '{key}' expects a value of type {typ.__name__} (got {value!r}).")
