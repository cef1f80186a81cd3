"""Raster multi-criteria solar site suitability toolkit."""

from .grid import Grid, GridHeader, read_grid, write_grid, cell_area_km2

__all__ = ["Grid", "GridHeader", "read_grid", "write_grid", "cell_area_km2"]
