"""Slope and aspect derivation from a DEM using the Horn 3x3 kernel.

Slope is percent rise (100 * sqrt(gx^2 + gy^2)), aspect is the azimuth of
steepest descent in degrees clockwise from north. Cells with zero gradient
get the FLAT sentinel. Any cell whose 3x3 neighborhood touches the grid edge
or a nodata cell yields nodata derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid

#: aspect sentinel for zero-gradient cells (valid azimuths are [0, 360))
FLAT = -1.0


@dataclass(frozen=True)
class TerrainDerivatives:
    slope_percent: Grid
    aspect_azimuth: Grid


def slope_aspect(dem: Grid) -> TerrainDerivatives:
    h = dem.header
    z = np.where(dem.finite_mask, dem.values, np.nan)
    # pad with nan so the edge rule (nodata out) falls out of the arithmetic
    zp = np.pad(z, 1, constant_values=np.nan)

    def n(dr, dc):
        return zp[1 + dr : 1 + dr + h.nrows, 1 + dc : 1 + dc + h.ncols]

    cs = h.cellsize
    # Horn weights; row index grows southward so north is dr = -1
    gx = ((n(-1, 1) + 2 * n(0, 1) + n(1, 1)) - (n(-1, -1) + 2 * n(0, -1) + n(1, -1))) / (8 * cs)
    gy_north = ((n(-1, -1) + 2 * n(-1, 0) + n(-1, 1)) - (n(1, -1) + 2 * n(1, 0) + n(1, 1))) / (8 * cs)

    # the Horn kernel ignores the center cell, but the edge rule counts it
    valid = np.isfinite(gx) & np.isfinite(gy_north) & dem.finite_mask
    slope = np.full(z.shape, h.nodata)
    slope[valid] = 100.0 * np.hypot(gx[valid], gy_north[valid])

    aspect = np.full(z.shape, h.nodata)
    flat = valid & (gx == 0) & (gy_north == 0)
    sloped = valid & ~flat
    # steepest descent points along -grad; azimuth measured from north, clockwise
    az = np.degrees(np.arctan2(-gx[sloped], -gy_north[sloped])) % 360.0
    aspect[sloped] = az
    aspect[flat] = FLAT
    return TerrainDerivatives(Grid(h, slope), Grid(h, aspect))
