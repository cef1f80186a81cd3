"""The decision core: constraint union, weighted overlay, suitability
classes, area accounting, generation potential, and leave-one-out
sensitivity.

Scores are convex combinations of the 1..9 criterion grades. Classes follow
the four-way split [1,3), [3,5), [5,7), [7,9] (top bound inclusive).
Constrained cells stay in the "full" accounting and are removed only from
the "exploitable" figures. Generation potential converts a class's mean
irradiation and area into TWh/year through the shading factor and module
efficiency.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .distance import buffer_mask
from .grid import Grid, GridHeader, cell_area_km2, check_aligned, full_grid, zip_cells_arrays
from .reclass import CRITERION_IDS, CriterionLayer

CLASS_BREAKS = (1.0, 3.0, 5.0, 7.0, 9.0)
CLASS_LABELS = {1: "least suitable", 2: "moderately suitable",
                3: "suitable", 4: "best suitable"}
HOURS_PER_DAY_IN_YEAR = 365.0


class McdaError(Exception):
    pass


@dataclass(frozen=True)
class ConstraintEntry:
    name: str
    mask: Grid
    buffer: float = 0.0  # map units; 0 means use the mask as-is


@dataclass(frozen=True)
class EnergyParams:
    sf: float = 0.7
    eta: float = 0.16
    daylight_hours: float = 12.0
    sr_override: float | None = None  # kWh/m2/day; None -> per-class mean GHI

    def __post_init__(self):
        if not (0 < self.sf <= 1) or not (0 < self.eta <= 1):
            raise McdaError("SF and eta must lie in (0, 1]")
        if self.daylight_hours <= 0:
            raise McdaError("daylight_hours must be > 0")


@dataclass
class Scenario:
    criteria: list[CriterionLayer]          # graded, scenario order
    weights: dict[str, float]               # by criterion id, sums to 1
    constraints: list[ConstraintEntry] = field(default_factory=list)
    class_breaks: tuple = CLASS_BREAKS
    energy: EnergyParams = field(default_factory=EnergyParams)

    def __post_init__(self):
        ids = [c.id for c in self.criteria]
        if len(set(ids)) != len(ids):
            raise McdaError(f"duplicate criterion ids: {ids}")
        if set(self.weights) != set(ids):
            raise McdaError("weights must cover exactly the scenario criteria")
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-6:
            raise McdaError(f"weights must sum to 1, got {total}")
        br = self.class_breaks
        if list(br) != sorted(br) or len(set(br)) != len(br) or br[0] != 1 or br[-1] != 9:
            raise McdaError(f"class breaks must strictly increase from 1 to 9, got {br}")

    @property
    def weight_vector(self) -> np.ndarray:
        return np.array([self.weights[c.id] for c in self.criteria])


@dataclass(frozen=True)
class ClassAreas:
    full_km2: dict[int, float]
    exploitable_km2: dict[int, float]
    full_pct: dict[int, float]
    exploitable_pct: dict[int, float]
    total_km2: float
    total_exploitable_km2: float


@dataclass(frozen=True)
class SensitivityRow:
    excluded: str
    delta_pct: dict[int, float | None]  # None where baseline class area is 0


@dataclass
class SuitabilityResult:
    score: Grid
    classes: Grid
    exclusion: Grid
    areas: ClassAreas
    gp_full_twh: dict[int, float]
    gp_exploitable_twh: dict[int, float]
    sr_by_class: dict[int, float]
    capacity_mw_per_km2: float | None
    sensitivity: list[SensitivityRow] = field(default_factory=list)


def constraint_union(constraints: Sequence[ConstraintEntry], header: GridHeader) -> Grid:
    """Union of all constraint masks, each buffered by its radius."""
    masks = []
    for c in constraints:
        check_aligned(header, c.mask.header)
        masks.append(buffer_mask(c.mask, c.buffer) if c.buffer > 0 else c.mask)
    if not masks:
        return full_grid(header, 0.0)
    return zip_cells_arrays(masks, lambda *cols: np.maximum.reduce(cols))


def weighted_overlay(criteria: Sequence[CriterionLayer], weights: np.ndarray) -> Grid:
    if len(criteria) != len(weights):
        raise McdaError(f"{len(criteria)} grade layers but {len(weights)} weights")
    grades = []
    for c in criteria:
        if c.grade is None:
            raise McdaError(f"criterion {c.id} has no grade grid")
        grades.append(c.grade)
    w = np.asarray(weights, dtype=np.float64)
    return zip_cells_arrays(grades, lambda *cols: sum(wi * g for wi, g in zip(w, cols)))


def classify(score: Grid, breaks: Sequence[float] = CLASS_BREAKS) -> Grid:
    """Class k covers [breaks[k-1], breaks[k]); the very top bound is
    inclusive so a perfect score lands in the best class."""
    out = score.values.copy()
    m = score.finite_mask
    v = score.values[m]
    lo, hi = breaks[0], breaks[-1]
    if ((v < lo - 1e-9) | (v > hi + 1e-9)).any():
        raise McdaError(f"score outside [{lo}, {hi}]")
    v = np.clip(v, lo, hi)
    k = np.searchsorted(np.asarray(breaks[1:-1]), v, side="right") + 1
    k[v >= hi] = len(breaks) - 1
    out[m] = k
    return Grid(score.header, out)


def class_areas(classes: Grid, exclusion: Grid, n_classes: int = 4) -> ClassAreas:
    """Per-class full and exploitable areas (km2 and % of scored area)."""
    check_aligned(classes.header, exclusion.header)
    area = cell_area_km2(classes.header)
    m = classes.finite_mask
    cls = classes.values[m].astype(int)
    free = exclusion.values[m] != 1.0
    full = {k: float((cls == k).sum()) * area for k in range(1, n_classes + 1)}
    expl = {k: float(((cls == k) & free).sum()) * area for k in range(1, n_classes + 1)}
    total = float(m.sum()) * area
    total_expl = float(free.sum()) * area
    pct = lambda d: {k: (100.0 * v / total if total else 0.0) for k, v in d.items()}
    return ClassAreas(full, expl, pct(full), pct(expl), total, total_expl)


def generation_potential(sr: float, ca_km2: float, sf: float, eta: float) -> float:
    """Annual PV generation in TWh/year from mean daily irradiation
    (kWh/m2/day), area (km2), shading factor, and efficiency."""
    if min(sr, ca_km2) < 0 or not (0 < sf <= 1) or not (0 < eta <= 1):
        raise McdaError("invalid generation-potential inputs")
    kwh_per_year = sr * (ca_km2 * 1e6) * sf * eta * 365.0
    return kwh_per_year / 1e9


def capacity_density(gp_twh: float, ca_km2: float, daylight_hours: float) -> float:
    """Average daily generation capacity in MW/km2 given annual output."""
    if ca_km2 <= 0:
        raise McdaError("area must be > 0")
    if daylight_hours <= 0:
        raise McdaError("daylight_hours must be > 0")
    wh_per_day_per_km2 = gp_twh * 1e12 / 365.0 / ca_km2
    return wh_per_day_per_km2 / daylight_hours / 1e6


def _mean_sr_by_class(scenario: Scenario, classes: Grid, n_classes: int) -> dict[int, float]:
    ghi = next((c.source for c in scenario.criteria if c.id == "GHI"), None)
    out = {}
    for k in range(1, n_classes + 1):
        if scenario.energy.sr_override is not None:
            out[k] = scenario.energy.sr_override
        elif ghi is not None:
            sel = (classes.values == k) & classes.finite_mask & ghi.finite_mask
            out[k] = float(ghi.values[sel].mean()) if sel.any() else 0.0
        else:
            out[k] = 0.0
    return out


def evaluate(scenario: Scenario) -> SuitabilityResult:
    """Run overlay -> classify -> constrain -> account for one scenario."""
    score = weighted_overlay(scenario.criteria, scenario.weight_vector)
    classes = classify(score, scenario.class_breaks)
    exclusion = constraint_union(scenario.constraints, score.header)
    n_classes = len(scenario.class_breaks) - 1
    areas = class_areas(classes, exclusion, n_classes)
    sr = _mean_sr_by_class(scenario, classes, n_classes)
    e = scenario.energy
    gp_full = {k: generation_potential(sr[k], areas.full_km2[k], e.sf, e.eta)
               for k in sr}
    gp_expl = {k: generation_potential(sr[k], areas.exploitable_km2[k], e.sf, e.eta)
               for k in sr}
    best = n_classes
    capacity = None
    if areas.exploitable_km2[best] > 0:
        capacity = capacity_density(gp_expl[best], areas.exploitable_km2[best],
                                    e.daylight_hours)
    return SuitabilityResult(score, classes, exclusion, areas, gp_full, gp_expl,
                             sr, capacity)


def exclude_criterion(scenario: Scenario, excluded: str) -> Scenario:
    """Drop one criterion and renormalize the remaining weights
    proportionally (w_k / (1 - w_excluded))."""
    if excluded == "GHI":
        raise McdaError(
            "GHI cannot be excluded: irradiation is the chief criterion and must "
            "be retained in every sensitivity run"
        )
    ids = [c.id for c in scenario.criteria]
    if excluded not in ids:
        raise McdaError(f"criterion {excluded!r} not in scenario")
    w_ex = scenario.weights[excluded]
    if w_ex >= 1.0:
        raise McdaError(f"cannot exclude {excluded!r}: it carries all the weight")
    remaining = [c for c in scenario.criteria if c.id != excluded]
    new_w = {c.id: scenario.weights[c.id] / (1.0 - w_ex) for c in remaining}
    return Scenario(remaining, new_w, scenario.constraints, scenario.class_breaks,
                    scenario.energy)


def sensitivity_row(scenario: Scenario, baseline: SuitabilityResult,
                    excluded: str) -> SensitivityRow:
    """Leave-one-out class-area change, 100 * (S_excl - S_base) / S_base."""
    reduced = exclude_criterion(scenario, excluded)
    result = evaluate(reduced)
    delta: dict[int, float | None] = {}
    for k, base in baseline.areas.full_km2.items():
        if base == 0:
            delta[k] = None
        else:
            delta[k] = 100.0 * (result.areas.full_km2[k] - base) / base
    return SensitivityRow(excluded, delta)


def sensitivity_table(scenario: Scenario,
                      baseline: SuitabilityResult) -> list[SensitivityRow]:
    """One row per criterion except GHI, in scenario order."""
    return [sensitivity_row(scenario, baseline, c.id)
            for c in scenario.criteria if c.id != "GHI"]


def write_area_table(result: SuitabilityResult, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["class", "full_km2", "exploit_km2", "full_pct",
                    "exploit_pct", "gp_full_twh", "gp_exploit_twh"])
        a = result.areas
        for k in sorted(a.full_km2):
            w.writerow([k, repr(a.full_km2[k]), repr(a.exploitable_km2[k]),
                        repr(a.full_pct[k]), repr(a.exploitable_pct[k]),
                        repr(result.gp_full_twh[k]), repr(result.gp_exploitable_twh[k])])


def write_sensitivity_table(rows: Sequence[SensitivityRow], path,
                            n_classes: int = 4) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["excluded"] + [f"delta_pct_class_{k}" for k in range(1, n_classes + 1)])
        for row in rows:
            w.writerow([row.excluded] + [
                "" if row.delta_pct.get(k) is None else repr(row.delta_pct[k])
                for k in range(1, n_classes + 1)
            ])
