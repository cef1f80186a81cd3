"""Release acceptance suite.

Each test covers one gating criterion and prints a PASS/FAIL line so the
suite output doubles as a release checklist. Oracles are independent of the
implementation under test: eigen decomposition for the judgment engine,
all-pairs brute force for the distance transform, closed-form planes for the
terrain kernel, and full re-runs for the sensitivity table.
"""
import hashlib
import json
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from solarsite import ahp, mcda, synth
from solarsite.distance import squared_cell_distances
from solarsite.grid import Grid, GridHeader, read_grid_file
from solarsite.kriging import (SamplePoint, VariogramBin, VariogramModel,
                               fit_variogram, krige, kriging_weights)
from solarsite.mcda import (capacity_density, class_areas, classify, evaluate,
                            exclude_criterion, generation_potential,
                            sensitivity_row, weighted_overlay)
from solarsite.pipeline import run as pipeline_run
from solarsite.reclass import CriterionLayer, DEFAULT_RULES
from solarsite.terrain import slope_aspect

NODATA = -9999.0

FACTOR_WEIGHTS = {
    1: {"GHI": 0.250, "T": 0.086, "H": 0.019, "DEM": 0.026, "S": 0.052,
        "Az": 0.036, "Gp": 0.272, "Rp": 0.148, "Sp": 0.111},
    2: {"GHI": 0.222, "T": 0.093, "H": 0.029, "DEM": 0.030, "S": 0.071,
        "Az": 0.049, "Gp": 0.0, "Rp": 0.351, "Sp": 0.155},
    3: {"GHI": 0.158, "T": 0.086, "H": 0.021, "DEM": 0.027, "S": 0.058,
        "Az": 0.043, "Gp": 0.0, "Rp": 0.339, "Sp": 0.268},
}
GROUPS = {"climatology": ("GHI", "T", "H"),
          "orography": ("DEM", "S", "Az"),
          "location": ("Gp", "Rp", "Sp")}
EXPECTED_AGGREGATES = {
    1: (0.355, 0.114, 0.531),
    2: (0.344, 0.150, 0.506),
    3: (0.265, 0.128, 0.607),
}


def report(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def random_reciprocal(rng: np.random.Generator, n: int) -> np.ndarray:
    scale = [Fraction(1, k) for k in range(9, 1, -1)] + \
            [Fraction(k) for k in range(1, 10)]
    m = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = rng.choice(scale)
            m[i, j] = float(v)
            m[j, i] = float(1 / v)
    return m


def consistent_matrix(w: np.ndarray) -> np.ndarray:
    return np.outer(w, 1.0 / w)


def test_ahp_consistent_recovery():
    rng = np.random.default_rng(100)
    t0 = time.perf_counter()
    worst_w, worst_cr = 0.0, 0.0
    for _ in range(200):
        n = int(rng.integers(3, 10))
        w = rng.uniform(1.0, 3.0, n)  # ratios stay inside the judgment scale
        w /= w.sum()
        m = ahp.validate_matrix(consistent_matrix(w))
        got = ahp.priority_vector(m)
        rep = ahp.consistency(m, got)
        worst_w = max(worst_w, float(np.max(np.abs(got - w))))
        worst_cr = max(worst_cr, rep.cr)
    elapsed = time.perf_counter() - t0
    report("judgment engine recovers 200 consistent weight vectors",
           worst_w < 1e-9 and worst_cr < 1e-9 and elapsed < 5.0,
           f"max weight err {worst_w:.2e}, max CR {worst_cr:.2e}, {elapsed:.2f}s")


def test_ahp_eigen_oracle_equivalence():
    rng = np.random.default_rng(101)
    worst_w = worst_l = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 10))
        m = ahp.validate_matrix(random_reciprocal(rng, n))
        w = ahp.priority_vector(m)
        lam = ahp.consistency(m, w).lambda_max
        vals, vecs = np.linalg.eig(m.a)
        k = int(np.argmax(vals.real))
        ow = np.abs(vecs[:, k].real)
        ow /= ow.sum()
        worst_w = max(worst_w, float(np.max(np.abs(w - ow))))
        worst_l = max(worst_l, abs(lam - float(vals[k].real)))
    report("power iteration matches eigen-decomposition oracle on 100 matrices",
           worst_w < 1e-8 and worst_l < 1e-8,
           f"max weight err {worst_w:.2e}, max lambda err {worst_l:.2e}")


def test_published_weight_vectors_aggregate():
    ok = True
    details = []
    for approach, weights in FACTOR_WEIGHTS.items():
        total = sum(weights.values())
        ok &= abs(total - 1.0) <= 1e-3
        agg = mcda_aggregate(weights)
        expected = EXPECTED_AGGREGATES[approach]
        got = tuple(round(agg[g], 3) for g in ("climatology", "orography",
                                               "location"))
        ok &= got == expected
        details.append(f"approach {approach}: {got}")
    report("published factor weights aggregate to the expected group weights",
           ok, "; ".join(details))


def mcda_aggregate(weights: dict) -> dict:
    return ahp.aggregate_criteria(weights, GROUPS)


def test_generation_potential_regression():
    gp_small = generation_potential(4.68, 46.60, 0.7, 0.16)
    gp_large = generation_potential(4.68, 108.58, 0.7, 0.16)
    ok = abs(gp_small - 8.91) / 8.91 < 0.005 and \
        abs(gp_large - 20.96) / 20.96 < 0.02
    report("annual generation formula reproduces the published range",
           ok, f"{gp_small:.3f} TWh vs 8.91, {gp_large:.3f} TWh vs 20.96")


def test_capacity_density_regression():
    cap = capacity_density(8.91, 46.60, 12.0)
    land = 366.4 / cap
    ok = abs(cap - 43.65) / 43.65 < 0.01 and abs(land - 8.39) / 8.39 < 0.01
    report("capacity density and land-for-target arithmetic",
           ok, f"{cap:.2f} MW/km2 vs 43.65, {land:.2f} km2 vs 8.39")


def test_area_table_internal_arithmetic():
    total, exploitable = 146807.0, 48523.0
    pct = 100.0 * exploitable / total
    ok = abs(pct - 33.05) < 0.01
    # per-approach class breakdowns must sum to their published totals
    fixtures = {
        1: ([21539.0, 24326.0, 2612.0, 46.0], 48523.0),
    }
    for classes, tot in fixtures.values():
        ok &= abs(sum(classes) - tot) / tot < 0.001
    report("published exploitable-area percentages are internally consistent",
           ok, f"{pct:.3f}% vs 33.05%")


def brute_force_d2(mask: np.ndarray) -> np.ndarray:
    rows, cols = np.nonzero(mask)
    rr, cc = np.meshgrid(np.arange(mask.shape[0]), np.arange(mask.shape[1]),
                         indexing="ij")
    d2 = (rr[..., None] - rows) ** 2 + (cc[..., None] - cols) ** 2
    return d2.min(axis=-1)


def test_distance_transform_exactness():
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    exact = True
    for _ in range(50):
        mask = rng.random((64, 64)) < rng.uniform(0.002, 0.2)
        if not mask.any():
            mask[rng.integers(64), rng.integers(64)] = True
        got = squared_cell_distances(mask)
        exact &= bool((got.astype(np.int64) == brute_force_d2(mask)).all())
    elapsed = time.perf_counter() - t0
    report("distance transform equals brute force on 50 random masks",
           exact and elapsed < 10.0, f"zero tolerance, {elapsed:.2f}s")


def test_kriging_criteria():
    rng = np.random.default_rng(103)
    pts = [SamplePoint(float(x), float(y), float(v))
           for x, y, v in zip(rng.uniform(0, 100, 25), rng.uniform(0, 100, 25),
                              rng.uniform(80, 95, 25))]
    model = VariogramModel("spherical", 0.0, 4.0, 60.0)

    header = GridHeader(10, 10, 0, 0, 10.0, NODATA)
    est, _ = krige(pts, model, header)
    worst_exact = 0.0
    for p in pts:
        col = int(p.x / 10.0)
        row = header.nrows - 1 - int(p.y / 10.0)
        cx, cy = (col + 0.5) * 10.0, (header.nrows - row - 0.5) * 10.0
        if abs(cx - p.x) < 1e-9 and abs(cy - p.y) < 1e-9:
            worst_exact = max(worst_exact,
                              abs(est.values[row, col] - p.value))
    snapped = [SamplePoint(25.0, 35.0, 88.0), SamplePoint(75.0, 65.0, 91.0),
               SamplePoint(5.0, 95.0, 84.0)]
    est2, _ = krige(snapped, model, header)
    for p in snapped:
        col = int(p.x / 10.0)
        row = header.nrows - 1 - int(p.y / 10.0)
        worst_exact = max(worst_exact, abs(est2.values[row, col] - p.value))

    w, _ = kriging_weights(pts, model, 37.0, 52.0)
    sum_err = abs(w.sum() - 1.0)

    true = VariogramModel("spherical", 0.3, 2.5, 45.0)
    bins = [VariogramBin(float(h), float(true(np.array([h]))[0]), 50)
            for h in np.linspace(4, 80, 16)]
    fitted = fit_variogram(bins, "spherical")
    fit_err = max(abs(fitted.nugget - true.nugget),
                  abs(fitted.sill - true.sill),
                  abs(fitted.range_ - true.range_))

    ok = worst_exact < 1e-6 and sum_err < 1e-9 and fit_err < 1e-3
    report("interpolator is exact at samples, weights sum to one, "
           "fit recovers generating variogram",
           ok, f"sample err {worst_exact:.2e}, weight-sum err {sum_err:.2e}, "
               f"fit err {fit_err:.2e}")


def test_terrain_planes_match_closed_form():
    rng = np.random.default_rng(104)
    h = GridHeader(12, 12, 0, 0, 30.0, NODATA)
    worst = 0.0
    for _ in range(20):
        a, b = rng.uniform(-0.3, 0.3, 2)
        while abs(a) + abs(b) < 1e-3:
            a, b = rng.uniform(-0.3, 0.3, 2)
        x = (np.arange(12) + 0.5) * 30.0
        y_north = ((11 - np.arange(12)) + 0.5) * 30.0
        z = a * x[None, :] + b * y_north[:, None]
        t = slope_aspect(Grid(h, z))
        exp_slope = 100.0 * np.hypot(a, b)
        exp_az = np.degrees(np.arctan2(-a, -b)) % 360.0
        interior = t.slope_percent.values[1:-1, 1:-1]
        az = t.aspect_azimuth.values[1:-1, 1:-1]
        worst = max(worst, float(np.max(np.abs(interior - exp_slope))) / exp_slope,
                    float(np.max(np.abs((az - exp_az + 180) % 360 - 180))))
    report("slope/aspect of 20 random planes match the closed form",
           worst < 1e-9, f"max relative err {worst:.2e}")


def random_grade_scenario(seed: int, n: int = 10) -> mcda.Scenario:
    rng = np.random.default_rng(seed)
    h = GridHeader(n, n, 0, 0, 1000, NODATA)
    ids = list(FACTOR_WEIGHTS[1])
    layers = []
    for cid in ids:
        g = Grid(h, rng.integers(1, 10, (n, n)).astype(float))
        layers.append(CriterionLayer(cid, g, DEFAULT_RULES[cid], g))
    w = rng.uniform(0.05, 1.0, len(ids))
    w /= w.sum()
    mask = (rng.random((n, n)) < 0.3).astype(float)
    return mcda.Scenario(layers, dict(zip(ids, w)),
                         [mcda.ConstraintEntry("m", Grid(h, mask))])


def test_overlay_classify_properties():
    ok = True
    for seed in range(20):
        s = random_grade_scenario(200 + seed)
        score = weighted_overlay(s.criteria, s.weight_vector)
        v = score.values[score.finite_mask]
        ok &= bool((v >= 1.0 - 1e-9).all() and (v <= 9.0 + 1e-9).all())

        bumped = [CriterionLayer(l.id, l.source, l.rule,
                                 Grid(l.grade.header,
                                      np.minimum(l.grade.values + 1, 9)))
                  for l in s.criteria]
        v2 = weighted_overlay(bumped, s.weight_vector).values
        ok &= bool((v2 >= score.values - 1e-12).all())

        classes = classify(score)
        areas = class_areas(classes, mcda.constraint_union(s.constraints,
                                                           score.header))
        ok &= abs(sum(areas.full_km2.values()) - areas.total_km2) < 1e-9
    report("overlay bounds, grade monotonicity, and exact class partition "
           "hold on 20 random scenarios", ok)


def test_sensitivity_criteria():
    ok = True
    # zero-weight exclusion leaves every area unchanged
    s = random_grade_scenario(300)
    s.weights["Az"] = 0.0
    total = sum(s.weights.values())
    s.weights = {k: v / total for k, v in s.weights.items()}
    base = evaluate(s)
    row = sensitivity_row(s, base, "Az")
    ok &= all(v is None or v == 0.0 for v in row.delta_pct.values())

    # deltas equal an independent full-re-run oracle, exactly
    for seed in range(10):
        sc = random_grade_scenario(310 + seed)
        baseline = evaluate(sc)
        for cid in ("T", "Rp"):
            got = sensitivity_row(sc, baseline, cid).delta_pct
            oracle = evaluate(exclude_criterion(sc, cid)).areas.full_km2
            for k, b in baseline.areas.full_km2.items():
                want = None if b == 0 else 100.0 * (oracle[k] - b) / b
                ok &= got[k] == want

    refused = False
    try:
        exclude_criterion(random_grade_scenario(320), "GHI")
    except mcda.McdaError:
        refused = True
    ok &= refused
    report("leave-one-out sensitivity: zero-weight identity, re-run oracle "
           "agreement, irradiation exclusion refused", ok)


def _file_digests(root: Path) -> dict:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.iterdir()) if p.is_file()
            and p.name != "run_metadata.json"}


def test_end_to_end_determinism_and_speed(tmp_path):
    spec = synth.SynthSpec(seed=42, nrows=64, ncols=64)
    a, b = tmp_path / "a", tmp_path / "b"
    synth.generate(spec, a)
    synth.generate(spec, b)
    same_data = _file_digests(a) == _file_digests(b)

    ra, rb = tmp_path / "ra", tmp_path / "rb"
    pipeline_run(a / "scenario.json", ra)
    pipeline_run(a / "scenario.json", rb)
    same_run = _file_digests(ra) == _file_digests(rb)

    big = tmp_path / "big"
    t0 = time.perf_counter()
    synth.generate(synth.SynthSpec(seed=42, nrows=512, ncols=512), big)
    pipeline_run(big / "scenario.json", tmp_path / "bigrun")
    elapsed = time.perf_counter() - t0
    report("seeded dataset + pipeline runs are byte-identical and a "
           "512x512 province finishes in budget",
           same_data and same_run and elapsed < 60.0, f"{elapsed:.1f}s")
