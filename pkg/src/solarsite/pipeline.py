"""Scenario materialization and full-run orchestration.

Resolves a config into a ready scenario (deriving slope/aspect from the DEM,
kriging humidity samples, distance-transforming infrastructure masks),
derives weights from a pairwise matrix when one is given (aborting on
CR > 5% unless overridden), runs the decision core, and writes all artifact
files. Partial outputs are removed if a run fails midway.
"""
from __future__ import annotations

import hashlib
import io
import json
import time
from importlib import metadata
from pathlib import Path

import numpy as np
from PIL import Image

from . import ahp, mcda
from .config import ConfigError, ScenarioConfig, load_config
from .distance import distance_transform
from .grid import Grid, check_aligned, map_cells_array, read_grid_file, write_grid_file
from .kriging import empirical_variogram, fit_variogram, krige, read_sample_points
from .mcda import ConstraintEntry, EnergyParams, Scenario, SuitabilityResult
from .reclass import CriterionLayer, DEFAULT_RULES, grade_all
from .terrain import slope_aspect

#: class colors (1..4, low to high suitability) plus nodata
CLASS_COLORS = {
    1: (44, 123, 182),
    2: (171, 217, 233),
    3: (253, 174, 97),
    4: (215, 25, 28),
}
NODATA_COLOR = (235, 235, 235)


def _version() -> str:
    try:
        return metadata.version("solarsite")
    except metadata.PackageNotFoundError:
        return "unknown"


def _resolve(base: Path, rel: str, data_root: Path | None) -> Path:
    p = (base / rel).resolve()
    if data_root is not None and data_root.resolve() not in p.parents and p != data_root.resolve():
        raise ConfigError(f"path {rel!r} escapes the data root")
    if not p.exists():
        raise ConfigError(f"missing file: {rel}")
    return p


def load_scenario(config: ScenarioConfig | str | Path, base_dir=None,
                  override_cr: bool = False,
                  data_root: Path | None = None) -> Scenario:
    """Materialize every layer referenced by the config into a Scenario."""
    if not isinstance(config, ScenarioConfig):
        path = Path(config)
        base_dir = path.parent if base_dir is None else Path(base_dir)
        config = load_config(path)
    elif base_dir is None:
        base_dir = Path(".")
    base_dir = Path(base_dir)

    grids: dict[str, Grid] = {}

    def load(rel: str) -> Grid:
        p = _resolve(base_dir, rel, data_root)
        if rel not in grids:
            grids[rel] = read_grid_file(p)
        return grids[rel]

    derived: dict[str, object] = {}

    def terrain_for(dem_rel: str):
        if dem_rel not in derived:
            derived[dem_rel] = slope_aspect(load(dem_rel))
        return derived[dem_rel]

    layers: list[CriterionLayer] = []
    for src in config.criteria:
        rule = config.rules.get(src.id, DEFAULT_RULES[src.id])
        if src.grid is not None:
            source = load(src.grid)
        elif src.derive == "slope":
            source = terrain_for(src.derive_from).slope_percent
        elif src.derive == "aspect":
            source = terrain_for(src.derive_from).aspect_azimuth
        elif src.points is not None:
            pts = read_sample_points(_resolve(base_dir, src.points, data_root))
            ref = next((g for g in grids.values()), None)
            if ref is None:
                raise ConfigError(
                    f"criteria.{src.id}: kriged layers need at least one grid "
                    f"criterion before them to define the target header")
            kp = src.kriging or {}
            max_lag = kp.get("max_lag",
                             ref.header.cellsize * max(ref.header.ncols, ref.header.nrows) / 2)
            bins = empirical_variogram(pts, int(kp.get("n_bins", 12)), float(max_lag))
            model = fit_variogram(bins, kp.get("kind", "spherical"))
            source, _ = krige(pts, model, ref.header)
        else:
            dist = distance_transform(load(src.distance_from))
            # proximity rules are expressed in km
            source = map_cells_array(dist, lambda v: v / 1000.0)
        layers.append(CriterionLayer(src.id, source, rule))

    if layers:
        head = layers[0].source.header
        for lay in layers[1:]:
            check_aligned(head, lay.source.header)

    if config.weights is not None:
        weights = {k: float(v) for k, v in config.weights.items()}
    else:
        if isinstance(config.matrix, str):
            m = ahp.read_matrix_file(_resolve(base_dir, config.matrix, data_root))
        else:
            rows = [[ahp.parse_entry(e) for e in row] for row in config.matrix]
            m = ahp.validate_matrix(np.array(rows))
        if m.n != len(layers):
            raise ConfigError(f"matrix is {m.n}x{m.n} but config has {len(layers)} criteria")
        w = ahp.priority_vector(m)
        report = ahp.consistency(m, w)
        if not report.consistent and not override_cr:
            raise ConfigError(
                f"pairwise matrix rejected: CR = {report.cr:.4f} exceeds the 0.05 "
                f"threshold (revise the judgments or pass the override flag)")
        weights = {lay.id: float(wi) for lay, wi in zip(layers, w)}

    constraints = [
        ConstraintEntry(c.name, load(c.mask), c.buffer) for c in config.constraints
    ]
    energy = EnergyParams(**config.energy)
    return Scenario(grade_all(layers), weights, constraints,
                    tuple(config.class_breaks), energy)


def render_class_map(classes: Grid) -> bytes:
    """Lossless PNG, one pixel per cell, fixed 4-color legend."""
    h = classes.header
    rgb = np.empty((h.nrows, h.ncols, 3), dtype=np.uint8)
    rgb[...] = NODATA_COLOR
    for k, color in CLASS_COLORS.items():
        rgb[classes.values == k] = color
    buf = io.BytesIO()
    Image.fromarray(rgb, "RGB").save(buf, format="PNG")
    return buf.getvalue()


def config_hash(config: ScenarioConfig) -> str:
    blob = json.dumps(config.canonical(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def run(config: ScenarioConfig | str | Path, outdir, base_dir=None,
        override_cr: bool = False, data_root: Path | None = None) -> SuitabilityResult:
    """Execute the full chain and write all artifacts into `outdir`."""
    if not isinstance(config, ScenarioConfig):
        path = Path(config)
        base_dir = path.parent if base_dir is None else Path(base_dir)
        config = load_config(path)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, writer) -> None:
        p = out / name
        writer(p)
        written.append(p)

    t0 = time.perf_counter()
    try:
        scenario = load_scenario(config, base_dir=base_dir, override_cr=override_cr,
                                 data_root=data_root)
        result = mcda.evaluate(scenario)
        result.sensitivity = mcda.sensitivity_table(scenario, result)

        emit("score.asc", lambda p: write_grid_file(result.score, p))
        emit("classes.asc", lambda p: write_grid_file(result.classes, p))
        excl = result.classes.values.copy()
        excl[result.exclusion.values == 1.0] = result.classes.header.nodata
        emit("classes_exploitable.asc",
             lambda p: write_grid_file(Grid(result.classes.header, excl), p))
        emit("areas.csv", lambda p: mcda.write_area_table(result, p))
        emit("sensitivity.csv",
             lambda p: mcda.write_sensitivity_table(
                 result.sensitivity, p, len(scenario.class_breaks) - 1))
        emit("class_map.png",
             lambda p: p.write_bytes(render_class_map(result.classes)))
        meta = {
            "config_sha256": config_hash(config),
            "tool_version": _version(),
            "elapsed_seconds": time.perf_counter() - t0,
            "cell_area_model": "uniform metric square cells (no per-cell true-area correction)",
            "sr_provenance": ("fixed override" if scenario.energy.sr_override is not None
                              else "per-class mean GHI"),
        }
        emit("run_metadata.json",
             lambda p: p.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n"))
    except Exception:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return result
