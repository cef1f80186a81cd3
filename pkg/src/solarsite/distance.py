"""Exact Euclidean distance transforms and buffer masks.

The transform is the separable two-pass algorithm: a vertical scan giving
per-column distances to the nearest source, then a per-row lower envelope of
parabolas over the squared distances. Results are exact center-to-center
distances in map units.
"""
from __future__ import annotations

import numpy as np

from .grid import Grid, GridError

_INF = np.float64(np.inf)


def validate_mask(mask: Grid) -> None:
    v = mask.finite_values()
    if not np.isin(v, (0.0, 1.0)).all():
        raise GridError("mask cells must be exactly 0, 1, or nodata")


def squared_cell_distances(source: np.ndarray) -> np.ndarray:
    """Exact squared distance (in cell units) to the nearest True cell."""
    nrows, ncols = source.shape
    # vertical pass: per-column distance in rows to nearest source
    g = np.full((nrows, ncols), _INF)
    g[source] = 0.0
    for i in range(1, nrows):
        np.minimum(g[i], g[i - 1] + 1.0, out=g[i])
    for i in range(nrows - 2, -1, -1):
        np.minimum(g[i], g[i + 1] + 1.0, out=g[i])
    g2 = g * g

    # horizontal pass: lower envelope of parabolas j -> g2[i,j] + (x-j)^2
    out = np.empty((nrows, ncols))
    v = np.empty(ncols, dtype=np.intp)   # parabola vertices
    zs = np.empty(ncols + 1)             # envelope breakpoints
    for i in range(nrows):
        f = g2[i]
        finite = np.flatnonzero(f != _INF)
        q0 = int(finite[0])  # at least one column holds a source
        k = 0
        v[0] = q0
        zs[0] = -_INF
        zs[1] = _INF
        for q in range(q0 + 1, ncols):
            fq = f[q]
            if fq == _INF:
                continue
            while True:
                p = v[k]
                s = ((fq + q * q) - (f[p] + p * p)) / (2.0 * (q - p))
                if s <= zs[k]:
                    k -= 1
                    if k < 0:
                        break
                else:
                    break
            k += 1
            v[k] = q
            zs[k] = s if k > 0 else -_INF
            zs[k + 1] = _INF
        k = 0
        row = out[i]
        for q in range(ncols):
            while zs[k + 1] < q:
                k += 1
            p = v[k]
            row[q] = (q - p) * (q - p) + f[p]
    return out


def distance_transform(sources: Grid) -> Grid:
    """Distance in map units to the nearest source (value 1) cell center."""
    validate_mask(sources)
    src = sources.values == 1.0
    if not src.any():
        raise GridError("empty source set")
    d2 = squared_cell_distances(src)
    out = np.sqrt(d2) * sources.header.cellsize
    out[sources.nodata_mask] = sources.header.nodata
    return Grid(sources.header, out)


def buffer_mask(sources: Grid, radius: float) -> Grid:
    """Mask of cells within `radius` map units of a source cell."""
    if radius < 0:
        raise GridError(f"buffer radius must be >= 0, got {radius}")
    validate_mask(sources)
    src = sources.values == 1.0
    if not src.any():
        raise GridError("empty source set")
    d2 = squared_cell_distances(src)
    # compare in exact squared cell units; tiny slack absorbs the division
    limit = (radius / sources.header.cellsize) ** 2
    out = (d2 <= limit * (1 + 1e-12)).astype(np.float64)
    out[sources.nodata_mask] = sources.header.nodata
    return Grid(sources.header, out)
