import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from solarsite import synth
from solarsite.cli import main as cli_main
from solarsite.config import ConfigError, load_config, parse_config
from solarsite.grid import Grid, GridHeader, read_grid_file
from solarsite.pipeline import (CLASS_COLORS, NODATA_COLOR, config_hash,
                                load_scenario, render_class_map, run)

ARTIFACTS = ["score.asc", "classes.asc", "classes_exploitable.asc",
             "areas.csv", "sensitivity.csv", "class_map.png",
             "run_metadata.json"]


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    synth.generate(synth.SynthSpec(seed=42, nrows=48, ncols=48), out)
    return out


class TestSynth:
    def test_deterministic_bytes(self, tmp_path, dataset):
        again = tmp_path / "again"
        synth.generate(synth.SynthSpec(seed=42, nrows=48, ncols=48), again)
        for p in sorted(dataset.iterdir()):
            assert digest(p) == digest(again / p.name), p.name

    def test_seed_changes_output(self, tmp_path, dataset):
        other = tmp_path / "other"
        synth.generate(synth.SynthSpec(seed=7, nrows=48, ncols=48), other)
        assert digest(dataset / "ghi.asc") != digest(other / "ghi.asc")

    def test_value_ranges(self, dataset):
        ghi = read_grid_file(dataset / "ghi.asc")
        v = ghi.values[ghi.finite_mask]
        assert v.min() == pytest.approx(2.6, abs=1e-6)
        assert v.max() == pytest.approx(5.04, abs=1e-6)
        t = read_grid_file(dataset / "temperature.asc")
        tv = t.values[t.finite_mask]
        assert tv.min() >= 17.1 - 1e-6 and tv.max() <= 27.8 + 1e-6

    def test_constraint_union_fraction(self, dataset):
        scenario = load_scenario(dataset / "scenario.json")
        from solarsite.mcda import constraint_union
        u = constraint_union(scenario.constraints,
                             scenario.criteria[0].source.header)
        frac = (u.values == 1).mean()
        assert frac == pytest.approx(0.6695, abs=0.005)


class TestConfig:
    def test_roundtrip_idempotent(self, dataset):
        cfg = load_config(dataset / "scenario.json")
        again = parse_config(cfg.canonical())
        assert cfg.canonical() == again.canonical()
        assert config_hash(cfg) == config_hash(again)

    def test_unknown_key_rejected(self, dataset):
        raw = json.loads((dataset / "scenario.json").read_text())
        raw["surprise"] = 1
        with pytest.raises(ConfigError, match="surprise"):
            parse_config(raw)

    def test_weights_and_matrix_exclusive(self, dataset):
        raw = json.loads((dataset / "scenario.json").read_text())
        raw["matrix"] = "matrix.txt"
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_weight_sum_checked(self, dataset):
        raw = json.loads((dataset / "scenario.json").read_text())
        raw["weights"]["GHI"] = raw["weights"]["GHI"] + 0.2
        cfg = parse_config(raw)
        with pytest.raises(Exception, match="sum"):
            load_scenario(cfg, base_dir=dataset)

    def test_missing_file_named(self, dataset, tmp_path):
        raw = json.loads((dataset / "scenario.json").read_text())
        raw["criteria"]["GHI"]["grid"] = "absent.asc"
        with pytest.raises(ConfigError, match="absent.asc"):
            load_scenario(parse_config(raw), base_dir=dataset)


class TestMatrixGate:
    def make_config(self, dataset, tmp_path, matrix_rows):
        raw = json.loads((dataset / "scenario.json").read_text())
        del raw["weights"]
        raw["matrix"] = matrix_rows
        return parse_config(raw)

    def test_inconsistent_rejected_with_measured_cr(self, dataset, tmp_path):
        n = 9
        rng = np.random.default_rng(5)
        m = np.ones((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                m[i, j] = rng.choice([1 / 9, 1 / 5, 1, 5, 9])
                m[j, i] = 1 / m[i, j]
        rows = [[repr(float(x)) for x in r] for r in m]
        cfg = self.make_config(dataset, tmp_path, rows)
        with pytest.raises(ConfigError, match=r"CR = \d+\.\d+"):
            load_scenario(cfg, base_dir=dataset)
        # same config passes with the override
        s = load_scenario(cfg, base_dir=dataset, override_cr=True)
        assert sum(s.weights.values()) == pytest.approx(1.0)

    def test_consistent_matrix_accepted(self, dataset, tmp_path):
        w = np.array([9, 7, 5, 4, 3, 2.5, 2, 1.5, 1.0])
        w /= w.sum()
        m = np.clip(np.outer(w, 1 / w), 1 / 9, 9)
        rows = [[repr(float(x)) for x in r] for r in m]
        cfg = self.make_config(dataset, tmp_path, rows)
        s = load_scenario(cfg, base_dir=dataset)
        got = np.array([s.weights[c.id] for c in s.criteria])
        assert got == pytest.approx(w, abs=1e-6)


@pytest.fixture(scope="module")
def outputs(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    result = run(dataset / "scenario.json", out)
    return out, result


class TestRun:
    def test_all_artifacts_written(self, outputs):
        out, _ = outputs
        for name in ARTIFACTS:
            assert (out / name).exists(), name

    def test_run_deterministic(self, dataset, outputs, tmp_path):
        out, _ = outputs
        again = tmp_path / "again"
        run(dataset / "scenario.json", again)
        for name in ARTIFACTS:
            if name == "run_metadata.json":
                continue  # carries wall-clock timing
            assert digest(out / name) == digest(again / name), name

    def test_metadata_fields(self, outputs, dataset):
        out, _ = outputs
        meta = json.loads((out / "run_metadata.json").read_text())
        assert meta["config_sha256"] == config_hash(
            load_config(dataset / "scenario.json"))
        assert meta["elapsed_seconds"] > 0
        assert meta["sr_provenance"] == "per-class mean GHI"

    def test_exploitable_grid_is_masked_subset(self, outputs):
        out, result = outputs
        full = read_grid_file(out / "classes.asc")
        expl = read_grid_file(out / "classes_exploitable.asc")
        nd = full.header.nodata
        both = (full.values != nd) & (expl.values != nd)
        assert (expl.values[both] == full.values[both]).all()
        masked = result.exclusion.values == 1.0
        assert (expl.values[masked] == nd).all()

    def test_no_constraints_exploitable_equals_full(self, dataset, tmp_path):
        raw = json.loads((dataset / "scenario.json").read_text())
        raw["constraints"] = []
        result = run(parse_config(raw), tmp_path / "nc", base_dir=dataset)
        assert result.areas.exploitable_km2 == result.areas.full_km2

    def test_weight_profiles_differ(self, dataset, tmp_path):
        raw = json.loads((dataset / "scenario.json").read_text())
        raw["weights"] = {k: v for k, v in synth.APPROACH_WEIGHTS[3].items()
                         if v > 0}
        raw["criteria"] = {k: v for k, v in raw["criteria"].items()
                           if k in raw["weights"]}
        r3 = run(parse_config(raw), tmp_path / "a3", base_dir=dataset)
        r1 = run(dataset / "scenario.json", tmp_path / "a1")
        assert r1.areas.full_km2 != r3.areas.full_km2

    def test_partial_outputs_removed_on_failure(self, dataset, tmp_path):
        raw = json.loads((dataset / "scenario.json").read_text())
        raw["criteria"]["Sp"]["distance_from"] = "absent.asc"
        out = tmp_path / "broken"
        with pytest.raises(ConfigError):
            run(parse_config(raw), out, base_dir=dataset)
        assert not any(out.glob("*"))


class TestRender:
    def test_pixel_colors_and_counts(self):
        h = GridHeader(4, 4, 0, 0, 1000, -9999)
        v = np.full((4, 4), 1.0)
        v[0] = 2; v[1] = 3; v[2, :2] = 4; v[3, 3] = -9999
        png = render_class_map(Grid(h, v))
        img = np.asarray(Image.open(__import__("io").BytesIO(png)))
        assert img.shape == (4, 4, 3)
        assert tuple(img[0, 0]) == CLASS_COLORS[2]
        assert tuple(img[1, 0]) == CLASS_COLORS[3]
        assert tuple(img[2, 0]) == CLASS_COLORS[4]
        assert tuple(img[3, 0]) == CLASS_COLORS[1]
        assert tuple(img[3, 3]) == NODATA_COLOR
        counts = {k: int((img == color).all(axis=-1).sum())
                  for k, color in CLASS_COLORS.items()}
        assert counts == {1: 5, 2: 4, 3: 4, 4: 2}


class TestCli:
    def test_synth_and_run_exit_zero(self, tmp_path, capsys):
        data = tmp_path / "d"
        assert cli_main(["synth", "--out", str(data), "--rows", "32",
                         "--cols", "32"]) == 0
        assert cli_main(["run", str(data / "scenario.json"),
                         "--out", str(tmp_path / "r")]) == 0
        out = capsys.readouterr().out
        assert "scored area" in out

    def test_validation_failure_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"surprise\": 1}")
        assert cli_main(["run", str(bad), "--out", str(tmp_path / "r")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_runtime_failure_exit_one(self, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        assert cli_main(["run", str(missing), "--out", str(tmp_path / "r")]) == 1

    def test_render_roundtrip(self, tmp_path, dataset, capsys):
        out = tmp_path / "run"
        run(dataset / "scenario.json", out)
        png = tmp_path / "m.png"
        assert cli_main(["render", str(out / "classes.asc"),
                         "--out", str(png)]) == 0
        assert png.stat().st_size > 0

    def test_ahp_verb(self, tmp_path, capsys):
        mf = tmp_path / "m.txt"
        mf.write_text("3\n1 2 4\n1/2 1 2\n1/4 1/2 1\n")
        assert cli_main(["ahp", str(mf)]) == 0
        out = capsys.readouterr().out
        assert "CR: 0.000000" in out
