"""Ordinary kriging of scattered point samples onto a grid.

Workflow: bin an empirical semivariogram, fit a spherical or exponential
model by pair-count-weighted least squares (coarse grid search refined by
deterministic coordinate descent), then predict each grid cell with the
global-neighborhood ordinary kriging system (weights constrained to sum
to 1 via a Lagrange multiplier).
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .grid import Grid, GridHeader


class KrigingError(Exception):
    pass


@dataclass(frozen=True)
class SamplePoint:
    x: float
    y: float
    value: float


@dataclass(frozen=True)
class VariogramBin:
    lag: float
    semivariance: float
    pair_count: int

    @property
    def empty(self) -> bool:
        return self.pair_count == 0


@dataclass(frozen=True)
class VariogramModel:
    kind: str  # "spherical" | "exponential"
    nugget: float
    sill: float
    range_: float
    degenerate: bool = False

    def __post_init__(self):
        if self.kind not in ("spherical", "exponential"):
            raise KrigingError(f"unknown variogram kind {self.kind!r}")
        if self.nugget < 0 or self.sill < self.nugget or self.range_ <= 0:
            raise KrigingError(
                f"invalid variogram parameters: nugget={self.nugget}, "
                f"sill={self.sill}, range={self.range_}"
            )

    def __call__(self, h: np.ndarray) -> np.ndarray:
        """Semivariance at lag h; gamma(0) = 0 exactly."""
        h = np.asarray(h, dtype=np.float64)
        psill = self.sill - self.nugget
        if self.kind == "spherical":
            r = np.clip(h / self.range_, 0.0, 1.0)
            g = self.nugget + psill * (1.5 * r - 0.5 * r**3)
        else:
            g = self.nugget + psill * (1.0 - np.exp(-3.0 * h / self.range_))
        return np.where(h > 0, g, 0.0)


def read_sample_points(path) -> list[SamplePoint]:
    """Read a 'x,y,value' CSV of sample points."""
    pts = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header] != ["x", "y", "value"]:
            raise KrigingError(f"{path}: expected header 'x,y,value'")
        for row in reader:
            if not row:
                continue
            x, y, v = (float(c) for c in row)
            pts.append(SamplePoint(x, y, v))
    return pts


def write_sample_points(points: Iterable[SamplePoint], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "y", "value"])
        for p in points:
            w.writerow([repr(p.x), repr(p.y), repr(p.value)])


def _coords(points: Sequence[SamplePoint]) -> tuple[np.ndarray, np.ndarray]:
    xy = np.array([(p.x, p.y) for p in points])
    vals = np.array([p.value for p in points])
    return xy, vals


def _pairwise_distances(xy: np.ndarray) -> np.ndarray:
    d = xy[:, None, :] - xy[None, :, :]
    return np.hypot(d[..., 0], d[..., 1])


def empirical_variogram(points: Sequence[SamplePoint], n_bins: int,
                        max_lag: float) -> list[VariogramBin]:
    """Bin b collects pairs with distance in ((b-1)*delta, b*delta]; the
    semivariance per bin is the mean of half squared value differences."""
    if len(points) < 2:
        raise KrigingError("need at least 2 sample points")
    if n_bins < 1 or max_lag <= 0:
        raise KrigingError("n_bins must be >= 1 and max_lag > 0")
    xy, vals = _coords(points)
    dist = _pairwise_distances(xy)
    iu = np.triu_indices(len(points), k=1)
    d = dist[iu]
    sv = 0.5 * (vals[iu[0]] - vals[iu[1]]) ** 2
    delta = max_lag / n_bins
    bins = []
    for b in range(1, n_bins + 1):
        sel = (d > (b - 1) * delta) & (d <= b * delta)
        count = int(sel.sum())
        center = (b - 0.5) * delta
        bins.append(VariogramBin(center, float(sv[sel].mean()) if count else float("nan"), count))
    return bins


_SILL_FLOOR = 1e-12


def _weighted_sse(bins: list[VariogramBin], model: VariogramModel) -> float:
    lags = np.array([b.lag for b in bins if not b.empty])
    svs = np.array([b.semivariance for b in bins if not b.empty])
    cnt = np.array([b.pair_count for b in bins if not b.empty], dtype=float)
    return float((cnt * (model(lags) - svs) ** 2).sum())


def fit_variogram(bins: list[VariogramBin], kind: str = "spherical") -> VariogramModel:
    """Fit nugget/sill/range to non-empty bins by pair-count-weighted least
    squares; deterministic (no randomness in the search)."""
    usable = [b for b in bins if not b.empty]
    if len(usable) < 3:
        raise KrigingError(f"need at least 3 non-empty bins, have {len(usable)}")
    max_lag_bound = 2.0 * max(b.lag for b in usable)
    sv_max = max(b.semivariance for b in usable)
    if sv_max <= 0:
        # constant field: no spatial variance to model
        return VariogramModel(kind, 0.0, _SILL_FLOOR, max_lag_bound / 2, degenerate=True)

    def objective(nugget, sill, rng):
        return _weighted_sse(bins, VariogramModel(kind, nugget, sill, rng))

    # coarse grid over the parameter box
    best = None
    for nug in np.linspace(0.0, sv_max, 6):
        for sill in np.linspace(max(nug, sv_max * 0.1), sv_max * 1.5, 8):
            if sill < nug:
                continue
            for rng in np.linspace(max_lag_bound / 20, max_lag_bound, 10):
                err = objective(nug, sill, rng)
                if best is None or err < best[0]:
                    best = (err, nug, sill, rng)
    _, nug, sill, rng = best

    # coordinate descent with shrinking steps
    steps = [sv_max / 4, sv_max / 4, max_lag_bound / 4]
    params = [nug, sill, rng]
    los = [0.0, _SILL_FLOOR, 1e-9 * max_lag_bound]
    his = [sv_max * 2, sv_max * 2, max_lag_bound]
    err = objective(*params)
    for _ in range(200):
        improved = False
        for i in range(3):
            for sign in (1.0, -1.0):
                cand = list(params)
                cand[i] = min(max(cand[i] + sign * steps[i], los[i]), his[i])
                cand[1] = max(cand[1], cand[0] + _SILL_FLOOR)  # keep sill >= nugget
                e = objective(*cand)
                if e < err:
                    params, err = cand, e
                    improved = True
        if not improved:
            steps = [s * 0.5 for s in steps]
            if max(steps) < 1e-12 * max(sv_max, max_lag_bound):
                break
    return VariogramModel(kind, params[0], max(params[1], params[0] + _SILL_FLOOR), params[2])


def _check_duplicates(points: Sequence[SamplePoint], dist: np.ndarray) -> None:
    dup = np.argwhere(np.triu(dist < 1e-12, k=1))
    if dup.size:
        i, j = dup[0]
        raise KrigingError(
            f"duplicate sample coordinates: points {i} and {j} at "
            f"({points[i].x}, {points[i].y})"
        )


def kriging_weights(points: Sequence[SamplePoint], model: VariogramModel,
                    x: float, y: float) -> tuple[np.ndarray, float]:
    """Solve the ordinary kriging system for one target location; returns
    (weights, Lagrange multiplier). Mainly for tests and diagnostics."""
    xy, _ = _coords(points)
    dist = _pairwise_distances(xy)
    _check_duplicates(points, dist)
    lhs = _system_matrix(dist, model)
    d0 = np.hypot(xy[:, 0] - x, xy[:, 1] - y)
    rhs = np.concatenate([model(d0), [1.0]])
    sol = np.linalg.solve(lhs, rhs)
    return sol[:-1], float(sol[-1])


def _system_matrix(dist: np.ndarray, model: VariogramModel) -> np.ndarray:
    n = dist.shape[0]
    lhs = np.empty((n + 1, n + 1))
    lhs[:n, :n] = model(dist)
    lhs[:n, n] = 1.0
    lhs[n, :n] = 1.0
    lhs[n, n] = 0.0
    cond = np.linalg.cond(lhs)
    if cond > 1e12:
        warnings.warn(f"kriging system poorly conditioned (cond ~ {cond:.2e})",
                      RuntimeWarning, stacklevel=3)
    return lhs


def krige(points: Sequence[SamplePoint], model: VariogramModel,
          target: GridHeader, chunk: int = 32768) -> tuple[Grid, Grid]:
    """Predict every cell of `target`; returns (prediction, kriging variance)."""
    if len(points) < 2:
        raise KrigingError("need at least 2 sample points")
    xy, vals = _coords(points)
    dist = _pairwise_distances(xy)
    _check_duplicates(points, dist)
    n = len(points)
    lhs = _system_matrix(dist, model)
    # cell centers; row 0 is the northern edge
    cx = target.xll + (np.arange(target.ncols) + 0.5) * target.cellsize
    cy = target.yll + (target.nrows - np.arange(target.nrows) - 0.5) * target.cellsize
    gx, gy = np.meshgrid(cx, cy)
    flat_x, flat_y = gx.ravel(), gy.ravel()
    ncell = flat_x.size
    pred = np.empty(ncell)
    var = np.empty(ncell)
    lu = np.linalg.inv(lhs)  # one dense inverse, reused for every cell batch
    for start in range(0, ncell, chunk):
        sl = slice(start, min(start + chunk, ncell))
        d0 = np.hypot(flat_x[sl][None, :] - xy[:, 0, None], flat_y[sl][None, :] - xy[:, 1, None])
        rhs = np.vstack([model(d0), np.ones((1, d0.shape[1]))])
        sol = lu @ rhs
        lam, mu = sol[:n], sol[n]
        pred[sl] = lam.T @ vals
        var[sl] = np.maximum(np.einsum("is,is->s", lam, rhs[:n]) + mu, 0.0)
    return (Grid(target, pred.reshape(target.nrows, target.ncols)),
            Grid(target, var.reshape(target.nrows, target.ncols)))
