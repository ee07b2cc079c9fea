"""Bundled example data.

The vasoconstriction data (39 observations of breath volume, inhalation
rate, and a binary response) ship as a CSV sourced from the public
``vaso`` dataset in the R robustbase package.  The conventional logistic
analysis regresses the response on log(volume) and log(rate) with an
intercept; ``load_finney`` applies that transform.
"""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from .kernels import GlmData

__all__ = ["finney_csv_path", "load_finney", "load_finney_raw"]


def finney_csv_path():
    return resources.files("hppglm").joinpath("data/finney.csv")


def load_finney_raw():
    """(volume, rate, y) arrays exactly as stored."""
    with finney_csv_path().open("r", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    volume = np.array([float(r["volume"]) for r in rows])
    rate = np.array([float(r["rate"]) for r in rows])
    y = np.array([float(r["y"]) for r in rows])
    return volume, rate, y


def load_finney() -> GlmData:
    """Logistic design: intercept, log(volume), log(rate)."""
    volume, rate, y = load_finney_raw()
    X = np.column_stack([np.ones(y.size), np.log(volume), np.log(rate)])
    return GlmData(y=y, X=X)
