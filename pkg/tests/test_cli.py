import csv
import json

import numpy as np
import pytest

from quadsplat import validate
from quadsplat.bench import image_hash, zoom_factors
from quadsplat.cli import main
from quadsplat.scene_io import load_cameras, load_ply, read_ppm
from quadsplat.validate import CheckResult

SMALL = ["--count", "200", "--repeats", "1", "--threads", "1"]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSynthAndRender:
    def test_synth_then_render(self, tmp_path, capsys):
        assert main(["synth", "--preset", "axis", "--count", "150", "--out", str(tmp_path / "s")]) == 0
        assert len(load_ply(tmp_path / "s" / "scene.ply")) == 150
        assert len(load_cameras(tmp_path / "s" / "cameras.json")) == 1
        out = tmp_path / "o"
        code = main(["render", "--scene", str(tmp_path / "s" / "scene.ply"),
                     "--cameras", str(tmp_path / "s" / "cameras.json"),
                     "--repeats", "1", "--threads", "1", "--out", str(out), "--oracle"])
        assert code == 0
        (row,) = rows(out / "metrics.csv")
        assert row["schema_version"] == "1" and row["strategy"] == "quadbox"
        assert float(row["missed_ratio"]) == 0.0
        img = read_ppm(out / "synth_quadbox.ppm")
        assert img.shape == (480, 640, 3)
        assert "pairs=" in capsys.readouterr().out

    def test_png_and_options(self, tmp_path):
        code = main(["render", "--synth", "diag45", *SMALL, "--format", "png", "--strategy", "adr",
                     "--background", "1,1,1", "--tile-size", "8", "--sh-degree", "0",
                     "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "synth_adr.png").exists()

    def test_env_threads(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QUADBOX_THREADS", "2")
        assert main(["render", "--synth", "axis", "--count", "100", "--repeats", "1",
                     "--out", str(tmp_path)]) == 0


class TestCompare:
    def test_compare_outputs(self, tmp_path):
        code = main(["compare", "--synth", "diag45", *SMALL, "--zoom-frames", "2", "--out", str(tmp_path)])
        assert code == 0
        table = {r["strategy"]: r for r in rows(tmp_path / "compare.csv")}
        assert set(table) == {"vanilla", "adr", "dualbox", "quadbox"}
        assert table["dualbox"]["lossy"] == "true"
        assert table["quadbox"]["image_matches_vanilla"] == "true"
        assert float(table["vanilla"]["pairs_vs_vanilla"]) == 1.0
        assert len(rows(tmp_path / "zoom.csv")) == 8
        summary = json.loads((tmp_path / "compare.json").read_text())
        assert summary["schema_version"] == 1 and len(summary["compare"]) == 4

    def test_csv_reproducible_apart_from_timings(self, tmp_path):
        tables = []
        for run in ("a", "b"):
            assert main(["compare", "--synth", "axis", *SMALL, "--out", str(tmp_path / run)]) == 0
            tables.append(rows(tmp_path / run / "compare.csv"))
        drop = {"total_ms", "speedup_vs_vanilla"}
        strip = lambda t: [{k: v for k, v in r.items() if k not in drop} for r in t]
        assert strip(tables[0]) == strip(tables[1])

    def test_zoom_factors(self):
        np.testing.assert_allclose(zoom_factors(3, 4.0), [1.0, 2.0, 4.0])
        assert zoom_factors(0, 4.0) == [] and zoom_factors(1, 4.0) == [1.0]

    def test_image_hash_depends_on_bits(self):
        a = np.zeros((2, 2, 3))
        b = a.copy()
        b[0, 0, 0] = 1e-300
        assert image_hash(a) != image_hash(b)


class TestExitCodes:
    def test_unknown_strategy(self):
        with pytest.raises(SystemExit) as exc:
            main(["render", "--synth", "axis", "--strategy", "obb"])
        assert exc.value.code == 2

    def test_scene_without_cameras(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["render", "--scene", str(tmp_path / "x.ply")])
        assert exc.value.code == 2

    def test_no_scene(self):
        with pytest.raises(SystemExit) as exc:
            main(["compare"])
        assert exc.value.code == 2

    def test_bad_background(self):
        with pytest.raises(SystemExit) as exc:
            main(["render", "--synth", "axis", "--background", "1,2"])
        assert exc.value.code == 2

    def test_parse_error(self, tmp_path):
        (tmp_path / "bad.ply").write_bytes(b"not a ply")
        (tmp_path / "c.json").write_text("[]")
        assert main(["render", "--scene", str(tmp_path / "bad.ply"), "--cameras", str(tmp_path / "c.json")]) == 3

    def test_io_error(self, tmp_path):
        (tmp_path / "c.json").write_text("[]")
        assert main(["render", "--scene", str(tmp_path / "none.ply"), "--cameras", str(tmp_path / "c.json")]) == 4

    def test_validate(self, capsys):
        assert main(["validate", "--iterations", "200", "--seed", "2"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 4

    def test_validate_vacuous(self, capsys):
        assert main(["validate", "--iterations", "0"]) == 0

    def test_validate_failure_exit(self, monkeypatch, capsys):
        monkeypatch.setattr(validate, "run_all", lambda seed, it: [CheckResult("x", 1, 1, {"a": 1})])
        assert main(["validate"]) == 1
        assert "first counterexample" in capsys.readouterr().out
