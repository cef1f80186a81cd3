"""Reclassification of physical criterion layers into 1..9 grade grids.

Four rule shapes cover the nine criteria: ascending value bands (irradiation),
descending value bands (temperature, humidity, elevation, slope), categorical
azimuth classes (aspect), and proximity bands with an exclusion buffer
(distances to grid, roads, settlements). Band edges are upper-inclusive;
values outside the declared range clamp to the nearest extreme grade.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .grid import Grid, check_aligned
from .terrain import FLAT

CRITERION_IDS = ("GHI", "T", "H", "DEM", "S", "Az", "Gp", "Rp", "Sp")


class RuleError(Exception):
    pass


@dataclass(frozen=True)
class AscendingBands:
    """Grade n covers (origin + (n-1)*delta, origin + n*delta]; higher is better."""
    origin: float
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise RuleError(f"delta must be > 0, got {self.delta}")

    def grade(self, v: np.ndarray) -> np.ndarray:
        r = (np.asarray(v, dtype=np.float64) - self.origin) / self.delta
        # epsilon keeps exact band edges (origin + n*delta) in grade n
        return np.clip(np.ceil(r - 1e-9), 1, 9)


@dataclass(frozen=True)
class DescendingBands:
    """Grade n covers [origin - n*delta, origin - (n-1)*delta); lower is better."""
    origin: float
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise RuleError(f"delta must be > 0, got {self.delta}")

    def grade(self, v: np.ndarray) -> np.ndarray:
        r = (self.origin - np.asarray(v, dtype=np.float64)) / self.delta
        return np.clip(np.floor(r + 1e-9) + 1, 1, 9)


@dataclass(frozen=True)
class AzimuthClasses:
    """Categorical aspect grading: N/S facing 9, diagonals 5, E/W 1, FLAT 9."""

    def grade(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        out = np.empty_like(v)
        flat = v == FLAT
        az = np.where(flat, 0.0, v) % 360.0
        # fold onto [0, 180): N and S share a grade, as do mirrored diagonals
        folded = az % 180.0
        dist_to_ns = np.minimum(folded, 180.0 - folded)
        out[dist_to_ns <= 22.5] = 9.0
        out[(dist_to_ns > 22.5) & (dist_to_ns <= 67.5)] = 5.0
        out[dist_to_ns > 67.5] = 1.0
        out[flat] = 9.0
        return out


@dataclass(frozen=True)
class ProximityBands:
    """Distance grading: <= buffer is excluded (nodata), grade n covers
    (max - n*delta, max - (n-1)*delta], beyond max clamps to grade 1."""
    max: float
    delta: float
    buffer: float = 0.0

    def __post_init__(self):
        if self.delta <= 0:
            raise RuleError(f"delta must be > 0, got {self.delta}")
        if self.buffer < 0:
            raise RuleError(f"buffer must be >= 0, got {self.buffer}")

    def grade(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        r = (self.max - v) / self.delta
        out = np.clip(np.ceil(r - 1e-9), 1, 9)
        return np.where(v <= self.buffer, np.nan, out)  # nan marks EXCLUDED


GradeRule = Union[AscendingBands, DescendingBands, AzimuthClasses, ProximityBands]

#: Table-style defaults for the nine criteria (distances in km)
DEFAULT_RULES: dict[str, GradeRule] = {
    "GHI": AscendingBands(origin=2.6, delta=0.28),
    "T": DescendingBands(origin=28.8, delta=1.0),
    "H": DescendingBands(origin=92.0, delta=1.0),
    "DEM": DescendingBands(origin=90.0, delta=10.0),
    "S": DescendingBands(origin=9.0, delta=1.0),
    "Az": AzimuthClasses(),
    "Gp": ProximityBands(max=10.0, delta=1.1, buffer=0.1),
    "Rp": ProximityBands(max=10.0, delta=1.1, buffer=0.1),
    "Sp": ProximityBands(max=10.0, delta=1.055, buffer=0.5),
}


def reclassify(source: Grid, rule: GradeRule) -> Grid:
    """Grade every finite cell; excluded cells (inside a proximity buffer)
    become nodata so they drop out of the overlay."""
    out = source.values.copy()
    m = source.finite_mask
    graded = rule.grade(source.values[m])
    graded = np.where(np.isnan(graded), source.header.nodata, graded)
    out[m] = graded
    return Grid(source.header, out)


@dataclass
class CriterionLayer:
    id: str
    source: Grid
    rule: GradeRule
    grade: Grid | None = None

    def __post_init__(self):
        if self.id not in CRITERION_IDS:
            raise RuleError(f"unknown criterion id {self.id!r}")


def grade_all(criteria: Sequence[CriterionLayer]) -> list[CriterionLayer]:
    """Populate each layer's grade grid, preserving order."""
    if criteria:
        head = criteria[0].source.header
        for c in criteria[1:]:
            check_aligned(head, c.source.header)
    out = []
    for c in criteria:
        grade = reclassify(c.source, c.rule)
        if not grade.finite_mask.any():
            warnings.warn(f"criterion {c.id}: grade grid is entirely nodata", stacklevel=2)
        out.append(CriterionLayer(c.id, c.source, c.rule, grade))
    return out
