"""
JSON outputs and their schemas.

Every summary is validated against a pydantic model before it is written, so a file on disk always
matches the schema returned by `schemas()`.
"""

import json
import logging
import os
import typing

from pydantic import BaseModel, ConfigDict, ValidationError

from pulsefield.util import ConfigError

logger = logging.getLogger(__name__)


class _Schema(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSummary(_Schema):
    seed: int
    config: typing.Dict[str, typing.Any]
    stabilized: bool
    stabilization_time: typing.Optional[float]
    stabilization_windows: typing.Optional[float]
    pi_target: float
    hold: float
    final_precision: typing.Optional[float]
    final_accuracy: typing.Optional[float]
    interference_strength: float
    decisions: typing.Dict[str, int]
    num_pulses: int
    delay_violations: int
    frequency_violations: int
    t_end: float


class BatchSummary(_Schema):
    seeds: typing.List[int]
    num_runs: int
    num_stabilized: int
    fraction_stabilized: float
    stabilization_windows: typing.List[typing.Optional[float]]
    median_stabilization_windows: typing.Optional[float]
    window_limit: float
    fraction_within_limit: float
    mean_final_precision: typing.Optional[float]
    delay_violations: int
    frequency_violations: int


class CurveSummary(_Schema):
    seed: int
    mode: str
    band_choice: str
    integer_trig: bool
    N: int
    R0: float
    R1: float
    steps: int
    trials: int
    high_cutoff: float
    fraction_high: float
    fraction_mid: float
    fraction_low: float
    mean_final: float
    median_final: float
    overwrite_steps: int
    overwrite_violations: int
    max_step_change: float
    decisions: typing.Dict[str, int]


class Histogram(_Schema):
    N: int
    edges: typing.List[float]
    counts: typing.List[int]


class TrigReport(_Schema):
    scale: int
    max_error: float
    argmax: typing.Tuple[int, int]
    compass_exact: bool
    monotone: bool
    err_zz: float
    tolerance: float
    passed: bool


_SCHEMAS = {
    "run_summary": RunSummary,
    "batch_summary": BatchSummary,
    "curve_summary": CurveSummary,
    "histogram": Histogram,
    "trig_report": TrigReport,
}


def schemas():
    """ JSON schema of every output file, keyed by output kind. """
    return {name: model.model_json_schema() for name, model in _SCHEMAS.items()}


def validate(kind, obj_dict):
    """
    Validates `obj_dict` against the schema of `kind`.

    :raises ConfigError: If the dictionary does not match the schema.
    """
    try:
        return _SCHEMAS[kind].model_validate(obj_dict)
    except ValidationError as err:
        raise ConfigError(f"Invalid {kind}: {err}") from err


def write_json(model: BaseModel, fpath, overwrite=False):
    """
    Saves a validated model to file.

    :param fpath: (str) Path to which the file should be saved.
    :param overwrite: (bool) Specifies whether to overwrite the file, if it exists. [Default: False]
    """
    if not overwrite and os.path.exists(fpath):
        raise FileExistsError(f"File {fpath} already exists. To overwrite, pass `overwrite=True`.")
    os.makedirs(os.path.dirname(os.path.abspath(fpath)), exist_ok=True)
    with open(fpath, "w", encoding="utf-8") as file:
        json.dump(model.model_dump(mode="json"), file, indent=2)
        file.write("\n")
    logger.debug(f"Wrote {type(model).__name__} to {fpath}.")
    return model


def load_json(kind, fpath):
    with open(fpath, "r", encoding="utf-8") as file:
        return validate(kind, json.load(file))


def write_run_summary(summary: dict, fpath, overwrite=False):
    return write_json(validate("run_summary", summary), fpath, overwrite)


def write_batch_summary(summary: dict, fpath, overwrite=False):
    return write_json(validate("batch_summary", summary), fpath, overwrite)


def write_curve_summary(summary: dict, fpath, overwrite=False):
    return write_json(validate("curve_summary", summary), fpath, overwrite)


def write_histogram(N, edges, counts, fpath, overwrite=False):
    histogram = validate("histogram", {"N": N, "edges": [float(e) for e in edges], "counts": [int(c) for c in counts]})
    return write_json(histogram, fpath, overwrite)


def write_trig_report(report: dict, fpath, overwrite=False):
    return write_json(validate("trig_report", report), fpath, overwrite)
