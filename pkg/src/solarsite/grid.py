"""In-memory raster model and plain-text ASCII grid I/O.

Every layer in the toolkit (criteria, masks, scores, classes) is carried by a
single-band :class:`Grid`. Files use the classic six-line ASCII grid header
(ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value) followed by row-major
data, row 0 being the northern edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


class GridError(Exception):
    """Base error for grid handling."""


class GridFormatError(GridError):
    """Malformed grid file; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class AlignmentError(GridError):
    """Two grids disagree on a header field required for cell-wise ops."""


@dataclass(frozen=True)
class GridHeader:
    ncols: int
    nrows: int
    xll: float
    yll: float
    cellsize: float
    nodata: float

    def __post_init__(self):
        if self.ncols < 1 or self.nrows < 1:
            raise GridError(f"grid dimensions must be >= 1, got {self.ncols}x{self.nrows}")
        if not self.cellsize > 0:
            raise GridError(f"cellsize must be > 0, got {self.cellsize}")


def check_aligned(a: GridHeader, b: GridHeader) -> None:
    """Raise AlignmentError naming the first differing header field."""
    for field in ("ncols", "nrows", "xll", "yll", "cellsize", "nodata"):
        va, vb = getattr(a, field), getattr(b, field)
        if va != vb:
            raise AlignmentError(f"grids are not aligned: {field} differs ({va} vs {vb})")


@dataclass(frozen=True)
class Grid:
    """Immutable single-band raster. ``values`` has shape (nrows, ncols);
    cells are finite or hold the nodata sentinel exactly."""

    header: GridHeader
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.header.nrows, self.header.ncols):
            raise GridError(
                f"values shape {v.shape} does not match header "
                f"{self.header.nrows}x{self.header.ncols}"
            )
        bad = ~np.isfinite(v) & ~(v == self.header.nodata)
        if bad.any():
            raise GridError("grid contains non-finite cells that are not the nodata sentinel")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nodata_mask(self) -> np.ndarray:
        return self.values == self.header.nodata

    @property
    def finite_mask(self) -> np.ndarray:
        return ~self.nodata_mask

    def finite_values(self) -> np.ndarray:
        return self.values[self.finite_mask]

    def with_values(self, values: np.ndarray) -> "Grid":
        return Grid(self.header, values)


def full_grid(header: GridHeader, fill: float) -> Grid:
    return Grid(header, np.full((header.nrows, header.ncols), fill, dtype=np.float64))


def _format_value(v: float) -> str:
    # shortest decimal that round-trips; integers without trailing zeros noise
    return repr(float(v))


def write_grid(grid: Grid, stream: TextIO) -> None:
    """Serialize a grid in the canonical text format (lowercase keys,
    shortest round-trip decimals, nodata written as the header sentinel)."""
    h = grid.header
    stream.write(f"ncols {h.ncols}\n")
    stream.write(f"nrows {h.nrows}\n")
    stream.write(f"xllcorner {_format_value(h.xll)}\n")
    stream.write(f"yllcorner {_format_value(h.yll)}\n")
    stream.write(f"cellsize {_format_value(h.cellsize)}\n")
    stream.write(f"NODATA_value {_format_value(h.nodata)}\n")
    for row in grid.values:
        stream.write(" ".join(_format_value(v) for v in row))
        stream.write("\n")


def write_grid_file(grid: Grid, path) -> None:
    with open(path, "w") as f:
        write_grid(grid, f)


def read_grid(stream: TextIO) -> Grid:
    """Parse a grid file. Header keys are case-insensitive and must appear
    in canonical order; errors carry line numbers."""
    raw: dict[str, float] = {}
    for lineno, key in enumerate(HEADER_KEYS, start=1):
        line = stream.readline()
        if not line:
            raise GridFormatError(f"unexpected end of file, expected header '{key}'", lineno)
        parts = line.split()
        if len(parts) != 2:
            raise GridFormatError(f"expected 'key value' header line, got {line.strip()!r}", lineno)
        if parts[0].lower() != key:
            raise GridFormatError(f"expected header keyword '{key}', got {parts[0]!r}", lineno)
        try:
            raw[key] = float(parts[1])
        except ValueError:
            raise GridFormatError(f"non-numeric header value {parts[1]!r}", lineno) from None
    ncols, nrows = int(raw["ncols"]), int(raw["nrows"])
    if ncols != raw["ncols"] or nrows != raw["nrows"]:
        raise GridFormatError("ncols/nrows must be integers", 1)
    header = GridHeader(ncols, nrows, raw["xllcorner"], raw["yllcorner"],
                        raw["cellsize"], raw["nodata_value"])
    expected = ncols * nrows
    values = np.empty(expected, dtype=np.float64)
    count = 0
    lineno = len(HEADER_KEYS)
    for line in stream:
        lineno += 1
        for tok in line.split():
            if count >= expected:
                raise GridFormatError(f"expected {expected} cells, found more", lineno)
            try:
                values[count] = float(tok)
            except ValueError:
                raise GridFormatError(f"non-numeric token {tok!r}", lineno) from None
            count += 1
    if count != expected:
        raise GridFormatError(f"expected {expected} cells, found {count}", lineno)
    return Grid(header, values.reshape(nrows, ncols))


def read_grid_file(path) -> Grid:
    with open(path) as f:
        return read_grid(f)


def map_cells(grid: Grid, f: Callable[[float], float]) -> Grid:
    """Apply f to every finite cell; nodata cells pass through untouched."""
    out = grid.values.copy()
    m = grid.finite_mask
    out[m] = np.frompyfunc(f, 1, 1)(grid.values[m]).astype(np.float64)
    return Grid(grid.header, out)


def map_cells_array(grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> Grid:
    """Like map_cells but f receives the vector of finite values at once."""
    out = grid.values.copy()
    m = grid.finite_mask
    out[m] = np.asarray(f(grid.values[m]), dtype=np.float64)
    return Grid(grid.header, out)


def zip_cells(grids: Sequence[Grid], f: Callable[..., float]) -> Grid:
    """Combine aligned grids cell-wise; a cell is nodata iff any input is."""
    if not grids:
        raise GridError("zip_cells requires at least one grid")
    head = grids[0].header
    for g in grids[1:]:
        check_aligned(head, g.header)
    valid = np.ones((head.nrows, head.ncols), dtype=bool)
    for g in grids:
        valid &= g.finite_mask
    out = np.full((head.nrows, head.ncols), head.nodata, dtype=np.float64)
    cols = [g.values[valid] for g in grids]
    if cols and cols[0].size:
        out[valid] = np.frompyfunc(f, len(grids), 1)(*cols).astype(np.float64)
    return Grid(head, out)


def zip_cells_arrays(grids: Sequence[Grid], f: Callable[..., np.ndarray]) -> Grid:
    """Vectorized zip_cells: f receives one value vector per input grid."""
    if not grids:
        raise GridError("zip_cells requires at least one grid")
    head = grids[0].header
    for g in grids[1:]:
        check_aligned(head, g.header)
    valid = np.ones((head.nrows, head.ncols), dtype=bool)
    for g in grids:
        valid &= g.finite_mask
    out = np.full((head.nrows, head.ncols), head.nodata, dtype=np.float64)
    if valid.any():
        out[valid] = np.asarray(f(*[g.values[valid] for g in grids]), dtype=np.float64)
    return Grid(head, out)


def cell_area_km2(header: GridHeader) -> float:
    """Area of one cell in km², cellsize given in meters."""
    return (header.cellsize / 1000.0) ** 2
