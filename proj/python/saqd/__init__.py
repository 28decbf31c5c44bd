"""Subsystem abelian quantum double codes over Z_d.

Thin layer over the compiled core. Results CSVs use the column order in
``CSV_COLUMNS``; ``load_results`` reads them back as plain dicts.
"""

import csv

from ._core import *  # noqa: F401,F403
from ._core import csv_header

CSV_COLUMNS = csv_header().split(",")

_INT_COLUMNS = {"d", "L", "t", "trials", "failures", "seed"}
_FLOAT_COLUMNS = {"p", "pfail", "ci_lo", "ci_hi"}


def load_results(path):
    """Rows of a results CSV with numeric columns converted."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected columns {reader.fieldnames}")
        rows = []
        for row in reader:
            for key in _INT_COLUMNS:
                row[key] = int(row[key])
            for key in _FLOAT_COLUMNS:
                row[key] = float(row[key])
            rows.append(row)
    return rows
