import json
import math
import os

import pytest

from roundabouts.cli import ConfigError, main, resolve_seed


def _write(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


def _four_way_defs():
    return [
        {"x": 40 * math.cos(a), "y": 40 * math.sin(a), "heading_rad": a + math.pi}
        for a in (0, math.pi / 2, math.pi, 3 * math.pi / 2)
    ]


@pytest.fixture
def config(tmp_path):
    return _write(tmp_path / "cfg.json", {"mode": "classic", "defs": _four_way_defs(), "seed": 3})


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("ROUNDABOUT_SEED", raising=False)


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class TestGenerate:
    def test_smoke(self, config, tmp_path, capsys):
        assert main(["generate", str(config), "--out", str(tmp_path / "o")]) == 0
        assert [p.name for p in (tmp_path / "o").iterdir()] == ["roundabout.xodr"]
        assert "valid" in capsys.readouterr().out

    def test_deterministic_with_svg(self, config, tmp_path):
        for d in ("a", "b"):
            assert main(["generate", str(config), "--out", str(tmp_path / d), "--svg", "--name", "x"]) == 0
        assert _tree(tmp_path / "a") == _tree(tmp_path / "b")
        assert set(_tree(tmp_path / "a")) == {"x.xodr", "x.svg"}

    def test_bare_array_config(self, tmp_path):
        cfg = _write(tmp_path / "defs.json", _four_way_defs())
        assert main(["generate", str(cfg), "--out", str(tmp_path / "o")]) == 0

    def test_defs_file(self, tmp_path):
        _write(tmp_path / "defs.json", _four_way_defs())
        cfg = _write(tmp_path / "cfg.json", {"mode": "turbo", "defs_file": "defs.json", "params": {"translation_distance": 5}})
        assert main(["generate", str(cfg), "--out", str(tmp_path / "o")]) == 0

    def test_two_defs(self, tmp_path, capsys):
        cfg = _write(tmp_path / "c.json", _four_way_defs()[:2])
        assert main(["generate", str(cfg)]) == 2
        assert "at least 3" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "body",
        [
            {"defs": _four_way_defs(), "defs_file": "x.json"},
            {"mode": "classic"},
            {"mode": "hexagon", "defs": _four_way_defs()},
            {"defs": _four_way_defs(), "params": {"translation_distance": 4}},
            {"defs": _four_way_defs(), "params": {"no_such_knob": 1}},
            {"defs": _four_way_defs(), "params": {"lane_width": -1}},
            {"defs": [{"x": 0, "y": 0}] * 3},
        ],
    )
    def test_config_errors(self, tmp_path, body):
        assert main(["generate", str(_write(tmp_path / "c.json", body))]) == 2

    def test_invalid_json_and_missing_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["generate", str(bad)]) == 2
        assert main(["generate", str(tmp_path / "missing.json")]) == 2

    def test_translation_flag_in_classic(self, config):
        assert main(["generate", str(config), "--set", "translation_distance=4"]) == 2

    def test_infeasible(self, config, tmp_path):
        assert main(["generate", str(config), "--set", "segments_per_ring=4", "--out", str(tmp_path)]) == 3

    def test_validation_failure_exit(self, config, tmp_path, monkeypatch):
        from roundabouts.odr import validate
        from roundabouts.odr.validate import Violation

        monkeypatch.setattr(validate, "validate_links", lambda net, clearance: [Violation("clearance", (1, 2), "x")])
        assert main(["generate", str(config), "--out", str(tmp_path)]) == 4
        assert (tmp_path / "roundabout.xodr").exists()

    def test_seed_changes_output(self, config, tmp_path):
        main(["generate", str(config), "--out", str(tmp_path / "a")])
        main(["generate", str(config), "--out", str(tmp_path / "b"), "--seed", "11"])
        assert _tree(tmp_path / "a") != _tree(tmp_path / "b")


class TestSeedPrecedence:
    def test_order(self, monkeypatch):
        assert resolve_seed(None, None) == 0
        assert resolve_seed(None, 5) == 5
        monkeypatch.setenv("ROUNDABOUT_SEED", "9")
        assert resolve_seed(None, 5) == 9
        assert resolve_seed(2, 5) == 2

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv("ROUNDABOUT_SEED", "abc")
        with pytest.raises(ConfigError):
            resolve_seed(None)

    def test_env_reaches_generation(self, config, tmp_path, monkeypatch):
        main(["generate", str(config), "--out", str(tmp_path / "flag"), "--seed", "9"])
        monkeypatch.setenv("ROUNDABOUT_SEED", "9")
        main(["generate", str(config), "--out", str(tmp_path / "env")])
        assert _tree(tmp_path / "flag") == _tree(tmp_path / "env")


class TestRandom:
    def test_files_and_manifest(self, tmp_path):
        out = tmp_path / "r"
        assert main(["random", "--n-ways", "3", "--count", "20", "--seed", "7", "--out", str(out)]) == 0
        files = sorted(p.name for p in out.glob("*.xodr"))
        assert files == [f"classic_3way_{k:03d}.xodr" for k in range(20)]
        manifest = json.loads((out / "manifest.json").read_text())
        assert [i["layout_seed"] for i in manifest["instances"]] == list(range(7, 27))
        assert all(i["status"] == "ok" for i in manifest["instances"])

    def test_rerun_identical(self, tmp_path):
        for d in ("a", "b"):
            main(["random", "--n-ways", "4", "--count", "3", "--seed", "7", "--svg", "--out", str(tmp_path / d)])
        assert _tree(tmp_path / "a") == _tree(tmp_path / "b")

    def test_count_zero(self, tmp_path):
        assert main(["random", "--n-ways", "3", "--count", "0", "--out", str(tmp_path)]) == 2

    def test_bad_n_ways(self, tmp_path):
        assert main(["random", "--n-ways", "2", "--count", "1", "--out", str(tmp_path)]) == 2


class TestEra:
    def test_report_from_files(self, tmp_path):
        src = tmp_path / "batch"
        main(["random", "--n-ways", "3", "--count", "20", "--seed", "7", "--out", str(src)])
        assert main(["era", str(src), "--out", str(tmp_path / "e")]) == 0
        lines = (tmp_path / "e" / "era_report.csv").read_text().splitlines()
        assert len(lines) == 21

    def test_undistorted_ring(self, config, tmp_path):
        main(["generate", str(config), "--set", "distortion_ratio=0", "--out", str(tmp_path)])
        assert main(["era", str(tmp_path / "roundabout.xodr"), "--out", str(tmp_path / "e")]) == 0
        import csv

        row = next(csv.DictReader(open(tmp_path / "e" / "era_report.csv")))
        assert abs(float(row["deriv_mean"])) <= 1e-6

    def test_corrupt_file(self, tmp_path, capsys):
        src = tmp_path / "batch"
        main(["random", "--n-ways", "3", "--count", "2", "--seed", "1", "--out", str(src)])
        (src / "zz_broken.xodr").write_text("<OpenDRIVE><road")
        code = main(["era", str(src), "--out", str(tmp_path / "e")])
        assert code != 0
        assert "zz_broken.xodr" in capsys.readouterr().out
        assert len((tmp_path / "e" / "era_report.csv").read_text().splitlines()) == 3

    def test_batch_specs_deterministic(self, config, tmp_path):
        args = ["era", "--random", "3:2", "--fixed", str(config), "--seeds", "0:3", "--svg"]
        for d in ("a", "b"):
            assert main(args + ["--out", str(tmp_path / d)]) == 0
        tree = _tree(tmp_path / "a")
        assert tree == _tree(tmp_path / "b")
        assert {"era_report.csv", "era_aggregate.json", "era_superposition.svg"} <= set(tree)
        assert len([k for k in tree if k.startswith("series/")]) == 5

    def test_bad_batch_argument(self, tmp_path):
        assert main(["era", "--random", "three", "--out", str(tmp_path)]) == 2


class TestPreview:
    def test_preview(self, config, tmp_path):
        main(["generate", str(config), "--out", str(tmp_path), "--svg"])
        assert main(["preview", str(tmp_path / "roundabout.xodr"), "--out", str(tmp_path / "p.svg")]) == 0
        assert (tmp_path / "p.svg").read_bytes() == (tmp_path / "roundabout.svg").read_bytes()

    def test_empty_network(self, tmp_path, capsys):
        doc = tmp_path / "empty.xodr"
        doc.write_text('<?xml version="1.0"?>\n<OpenDRIVE>\n  <header revMajor="1" revMinor="6"/>\n</OpenDRIVE>\n')
        assert main(["preview", str(doc)]) == 2
        assert "empty" in capsys.readouterr().err

    def test_unreadable(self, tmp_path):
        assert main(["preview", str(tmp_path / "nope.xodr")]) == 2


def test_console_script_installed():
    import shutil
    import subprocess

    exe = shutil.which("roundabouts")
    assert exe is not None
    res = subprocess.run([exe, "--help"], capture_output=True, text=True, env={**os.environ})
    assert res.returncode == 0 and "generate" in res.stdout
