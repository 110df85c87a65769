"""
Plot-ready CSV writers. Column sets are fixed:

    trace_<seed>.csv    t, node, phi, Phi, dmf_strength, dmf_angle (empty when the field is zero)
    finals.csv          trial, final_R
    rayleigh.csv        r, empirical, formula, abs_diff
"""

import csv
import logging
import os

logger = logging.getLogger(__name__)

FINALS_COLUMNS = ("trial", "final_R")
RAYLEIGH_COLUMNS = ("r", "empirical", "formula", "abs_diff")


def _check_target(fpath, overwrite):
    if not overwrite and os.path.exists(fpath):
        raise FileExistsError(f"File {fpath} already exists. To overwrite, pass `overwrite=True`.")
    parent = os.path.dirname(os.path.abspath(fpath))
    os.makedirs(parent, exist_ok=True)


def write_rows(fpath, columns, rows, overwrite=False):
    """
    Writes `rows` (sequences ordered as `columns`, or dicts keyed by them) to `fpath`.
    None values are written as empty cells.
    """
    _check_target(fpath, overwrite)
    count = 0
    with open(fpath, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(col) for col in columns]
            writer.writerow(["" if value is None else value for value in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {fpath}.")
    return count


def read_rows(fpath):
    """ Reads a CSV written by this module. Returns (columns, list of dicts with string values). """
    with open(fpath, "r", encoding="utf-8", newline="") as file:
        reader = csv.DictReader(file)
        rows = list(reader)
        return tuple(reader.fieldnames or ()), rows


def write_trace(trace, fpath, overwrite=False):
    return write_rows(fpath, trace.COLUMNS, trace.to_rows(), overwrite=overwrite)


def write_finals(finals, fpath, overwrite=False):
    return write_rows(fpath, FINALS_COLUMNS, ((i, float(r)) for i, r in enumerate(finals)), overwrite=overwrite)


def write_rayleigh(table, fpath, overwrite=False):
    return write_rows(fpath, RAYLEIGH_COLUMNS, table, overwrite=overwrite)
