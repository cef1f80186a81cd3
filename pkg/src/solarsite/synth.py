"""Deterministic synthetic province generator for desk-scale runs.

Produces the nine criterion inputs (smooth climate fields, a DEM, humidity
sample points, rasterized roads / transmission lines / settlements), a set
of constraint masks calibrated so their buffered union hits a target
constrained fraction, and a ready-to-run scenario config.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .distance import buffer_mask
from .grid import Grid, GridHeader, write_grid_file
from .kriging import SamplePoint, write_sample_points
from .mcda import ConstraintEntry, constraint_union

#: approach-1 factor weights used by the generated default scenario
APPROACH_WEIGHTS = {
    1: {"GHI": 0.250, "T": 0.086, "H": 0.019, "DEM": 0.026, "S": 0.052,
        "Az": 0.036, "Gp": 0.272, "Rp": 0.148, "Sp": 0.111},
    2: {"GHI": 0.222, "T": 0.093, "H": 0.029, "DEM": 0.030, "S": 0.071,
        "Az": 0.049, "Gp": 0.0, "Rp": 0.351, "Sp": 0.155},
    3: {"GHI": 0.158, "T": 0.086, "H": 0.021, "DEM": 0.027, "S": 0.058,
        "Az": 0.043, "Gp": 0.0, "Rp": 0.339, "Sp": 0.268},
}


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 42
    nrows: int = 128
    ncols: int = 128
    cellsize: float = 1000.0           # meters
    constraint_fraction: float = 0.6695
    n_settlements: int = 12
    n_roads: int = 4
    n_grid_lines: int = 2

    def header(self) -> GridHeader:
        return GridHeader(self.ncols, self.nrows, 0.0, 0.0, self.cellsize, -9999.0)


def _smooth_field(rng: np.random.Generator, shape, sigma, lo, hi) -> np.ndarray:
    f = gaussian_filter(rng.standard_normal(shape), sigma, mode="reflect")
    fmin, fmax = f.min(), f.max()
    return lo + (hi - lo) * (f - fmin) / (fmax - fmin)


def _bresenham(r0, c0, r1, c1):
    """Integer cells on the segment from (r0,c0) to (r1,c1), inclusive."""
    cells = []
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dr - dc
    r, c = r0, c0
    while True:
        cells.append((r, c))
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dc:
            err -= dc
            r += sr
        if e2 < dr:
            err += dr
            c += sc
    return cells


def _polyline_mask(rng, shape, n_lines, n_waypoints=4) -> np.ndarray:
    mask = np.zeros(shape, dtype=np.float64)
    nrows, ncols = shape
    for _ in range(n_lines):
        pts = np.column_stack([rng.integers(0, nrows, n_waypoints),
                               rng.integers(0, ncols, n_waypoints)])
        for (r0, c0), (r1, c1) in zip(pts[:-1], pts[1:]):
            for r, c in _bresenham(int(r0), int(c0), int(r1), int(c1)):
                mask[r, c] = 1.0
    return mask


def _threshold_mask(field: np.ndarray, fraction: float) -> np.ndarray:
    """Top `fraction` of the field's cells, by exact count."""
    k = int(round(fraction * field.size))
    if k <= 0:
        return np.zeros_like(field)
    cut = np.partition(field.ravel(), field.size - k)[field.size - k]
    return (field >= cut).astype(np.float64)


def generate(spec: SynthSpec, outdir) -> Path:
    """Write the dataset and a scenario config into `outdir`."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    h = spec.header()
    shape = (spec.nrows, spec.ncols)

    def save(name, values):
        write_grid_file(Grid(h, values), out / name)

    # physical fields within their declared ranges
    save("ghi.asc", _smooth_field(rng, shape, 12, 2.6, 5.04))
    save("temperature.asc", _smooth_field(rng, shape, 10, 17.1, 27.8))
    save("dem.asc", _smooth_field(rng, shape, 8, 0.0, 250.0))

    # humidity: sparse point samples of a smooth latent surface
    hum = _smooth_field(rng, shape, 14, 82.0, 91.5)
    n_pts = 130
    rows = rng.integers(0, spec.nrows, n_pts)
    cols = rng.integers(0, spec.ncols, n_pts)
    pts, seen = [], set()
    for r, c in zip(rows, cols):
        if (int(r), int(c)) in seen:
            continue
        seen.add((int(r), int(c)))
        x = h.xll + (c + 0.5) * h.cellsize
        y = h.yll + (spec.nrows - r - 0.5) * h.cellsize
        pts.append(SamplePoint(float(x), float(y), float(hum[r, c])))
    write_sample_points(pts, out / "humidity_points.csv")

    # infrastructure feature masks
    roads = _polyline_mask(rng, shape, spec.n_roads)
    grid_lines = _polyline_mask(rng, shape, spec.n_grid_lines)
    settlements = np.zeros(shape)
    sr = rng.integers(0, spec.nrows, spec.n_settlements)
    sc = rng.integers(0, spec.ncols, spec.n_settlements)
    settlements[sr, sc] = 1.0
    save("roads.asc", roads)
    save("grid_lines.asc", grid_lines)
    save("settlements.asc", settlements)

    # constraint masks, fractions loosely mirroring a real land-use mix
    parts = {
        "forest.asc": _threshold_mask(_smooth_field(rng, shape, 9, 0, 1), 0.30),
        "peatland.asc": _threshold_mask(_smooth_field(rng, shape, 7, 0, 1), 0.042),
        "wildlife.asc": _threshold_mask(_smooth_field(rng, shape, 10, 0, 1), 0.20),
        "water.asc": _threshold_mask(_smooth_field(rng, shape, 5, 0, 1), 0.025),
        "rice.asc": _threshold_mask(_smooth_field(rng, shape, 6, 0, 1), 0.021),
        "cultural.asc": _threshold_mask(_smooth_field(rng, shape, 8, 0, 1), 0.091),
    }
    for name, values in parts.items():
        save(name, values)

    # top-up layer calibrated so the buffered union hits the target fraction
    entries = [ConstraintEntry(name[:-4], Grid(h, v)) for name, v in parts.items()]
    entries.append(ConstraintEntry("settlements-buffer", Grid(h, settlements), 500.0))
    entries.append(ConstraintEntry("infrastructure-buffer",
                                   Grid(h, np.maximum(roads, grid_lines)), 100.0))
    union = constraint_union(entries, h).values == 1.0
    target_cells = int(round(spec.constraint_fraction * union.size))
    deficit = target_cells - int(union.sum())
    conservation = np.zeros(shape)
    if deficit > 0:
        scores = _smooth_field(rng, shape, 9, 0, 1)
        scores[union] = -np.inf
        idx = np.argpartition(scores.ravel(), scores.size - deficit)[-deficit:]
        conservation.ravel()[idx] = 1.0
    save("conservation.asc", conservation)

    config = {
        "criteria": {
            "GHI": {"grid": "ghi.asc"},
            "T": {"grid": "temperature.asc"},
            "H": {"points": "humidity_points.csv",
                  "kriging": {"kind": "spherical", "n_bins": 12,
                              "max_lag": spec.cellsize * max(shape) / 2}},
            "DEM": {"grid": "dem.asc"},
            "S": {"derive": "slope", "from": "dem.asc"},
            "Az": {"derive": "aspect", "from": "dem.asc"},
            "Gp": {"distance_from": "grid_lines.asc"},
            "Rp": {"distance_from": "roads.asc"},
            "Sp": {"distance_from": "settlements.asc"},
        },
        "weights": APPROACH_WEIGHTS[1],
        "constraints": [
            {"name": "forest", "mask": "forest.asc"},
            {"name": "peatland", "mask": "peatland.asc"},
            {"name": "wildlife", "mask": "wildlife.asc"},
            {"name": "water", "mask": "water.asc"},
            {"name": "rice", "mask": "rice.asc"},
            {"name": "cultural", "mask": "cultural.asc"},
            {"name": "conservation", "mask": "conservation.asc"},
            {"name": "settlements-buffer", "mask": "settlements.asc", "buffer": 500.0},
            {"name": "infrastructure-roads", "mask": "roads.asc", "buffer": 100.0},
            {"name": "infrastructure-grid", "mask": "grid_lines.asc", "buffer": 100.0},
        ],
        "class_breaks": [1, 3, 5, 7, 9],
        "energy": {"sf": 0.7, "eta": 0.16, "daylight_hours": 12.0},
    }
    with open(out / "scenario.json", "w") as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(out / "synth_spec.json", "w") as f:
        json.dump(asdict(spec), f, indent=2, sort_keys=True)
        f.write("\n")
    return out
