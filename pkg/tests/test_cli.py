"""Config-driven batch front-end: artifacts, manifests, error handling."""

import csv
import json
import os

import numpy as np
import pytest

from rydchain.cli import CURVE_COLUMNS, MANIFEST_NAME, PAIR_TABLE_COLUMNS, main
from rydchain.evaporation import TRAJECTORY_COLUMNS
from rydchain.lifetime import BUDGET_COLUMNS
from rydchain.ramps import SWEEP_COLUMNS


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def load_manifest(out_dir):
    with open(os.path.join(out_dir, MANIFEST_NAME)) as fh:
        return json.load(fh)


TINY_SCHEDULE = {
    "times_s": [0.0, 0.02],
    "l_um": [100.0, 100.0],
    "left_height_mhz": [4.0, 4.0],
    "right_height_mhz": [4.0, 4.0],
    "waist_um": [10.0, 10.0],
    "lattice_mhz": [0.0, 0.0],
    "phase_bounds_s": [0.005, 0.01, 0.015, 0.02],
}


class TestLifetime:
    def test_default_budget_table(self, tmp_path):
        out = str(tmp_path / "run")
        assert main(["lifetime", "--out", out]) == 0
        rows = read_csv(os.path.join(out, "lifetime_budget.csv"))
        assert tuple(rows[0]) == BUDGET_COLUMNS
        table = {r[0]: r[1] for r in rows[1:]}
        assert float(table["combined"]) == pytest.approx(46.7, abs=0.1)
        assert float(table["chain_of_40"]) == pytest.approx(1.17, abs=0.05)
        manifest = load_manifest(out)
        assert manifest["outputs"] == ["lifetime_budget.csv"]
        assert manifest["subcommand"] == "lifetime"
        assert set(manifest["versions"]) == {"rydchain", "numpy", "scipy", "python"}

    def test_custom_channels(self, tmp_path):
        cfg = write_config(tmp_path, "life.json", {
            "channels": [
                {"name": "a", "lifetime_s": 10.0},
                {"name": "b", "lifetime_s": 10.0},
            ],
            "n_atoms": 2,
        })
        out = str(tmp_path / "run")
        assert main(["lifetime", cfg, "--out", out]) == 0
        table = {r[0]: r[1] for r in read_csv(
            os.path.join(out, "lifetime_budget.csv"))[1:]}
        assert float(table["combined"]) == pytest.approx(5.0)
        assert float(table["chain_of_2"]) == pytest.approx(2.5)

    def test_bad_channel_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "life.json", {
            "channels": [{"name": "a", "lifetime_s": -1.0}],
        })
        assert main(["lifetime", cfg, "--out", str(tmp_path / "r")]) == 2
        err = capsys.readouterr().err
        assert "life.json:" in err and "channel" in err


class TestPairCoeffs:
    def test_default_table_hits_anchors(self, tmp_path):
        out = str(tmp_path / "run")
        assert main(["pair-coeffs", "--out", out]) == 0
        rows = read_csv(os.path.join(out, "pair_couplings.csv"))
        assert tuple(rows[0]) == PAIR_TABLE_COLUMNS
        by_d = {float(r[0]): r for r in rows[1:]}
        assert float(by_d[5.0][1]) == pytest.approx(17.2e3, rel=0.02)
        assert float(by_d[7.0][1]) == pytest.approx(2.3e3, rel=0.02)
        assert float(by_d[5.0][5]) == pytest.approx(14.7e-6, rel=0.02)

    def test_partial_failure_rows(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "pc.json", {"distances_um": [5.0, -1.0]})
        out = str(tmp_path / "run")
        assert main(["pair-coeffs", cfg, "--out", out]) == 0
        rows = read_csv(os.path.join(out, "pair_couplings.csv"))
        assert len(rows) == 3
        bad = rows[2]
        assert np.isnan(float(bad[1]))
        assert bad[8] != ""
        assert load_manifest(out)["warnings"] == 1
        assert "1 grid point(s) failed" in capsys.readouterr().err


class TestPhaseDiagram:
    def test_small_grid(self, tmp_path):
        cfg = write_config(tmp_path, "pd.json", {
            "n": 6, "chi": 16, "sweeps": 8,
            "jz_over_j": [0.0], "omega_over_4j": [0.5, 1.0],
        })
        out = str(tmp_path / "run")
        assert main(["phase-diagram", cfg, "--out", out]) == 0
        rows = read_csv(os.path.join(out, "phase_diagram.csv"))
        assert len(rows) == 3
        assert {float(r[0]) for r in rows[1:]} == {0.5, 1.0}
        assert all(r[7] == "1" for r in rows[1:])  # converged

    def test_empty_grid_is_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "pd.json", {
            "n": 6, "chi": 16, "jz_over_j": [], "omega_over_4j": [0.5],
        })
        assert main(["phase-diagram", cfg, "--out", str(tmp_path / "r")]) == 2
        err = capsys.readouterr().err
        assert "pd.json:" in err and "empty" in err

    def test_range_grid_syntax(self, tmp_path):
        cfg = write_config(tmp_path, "pd.json", {
            "n": 4, "chi": 8, "sweeps": 6,
            "jz_over_j": {"min": 0.0, "max": 1.0, "num": 2},
            "omega_over_4j": [0.5],
        })
        out = str(tmp_path / "run")
        assert main(["phase-diagram", cfg, "--out", out]) == 0
        rows = read_csv(os.path.join(out, "phase_diagram.csv"))
        assert {float(r[1]) for r in rows[1:]} == {0.0, 1.0}


class TestGaps:
    def test_gap_scan(self, tmp_path):
        cfg = write_config(tmp_path, "gaps.json", {
            "n": 6, "k": 3, "omega_over_j": [0.0, 2.0, 4.0],
        })
        out = str(tmp_path / "run")
        assert main(["gaps", cfg, "--out", out]) == 0
        rows = read_csv(os.path.join(out, "gaps.csv"))
        assert rows[0] == ["omega_over_J", "omega_Hz", "gap1_Hz", "gap2_Hz"]
        assert len(rows) == 4
        for r in rows[1:]:
            assert float(r[2]) > 0.0
            assert float(r[3]) >= float(r[2])

    def test_bad_type_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "gaps.json", {
            "n": "ten", "omega_over_j": [1.0],
        })
        assert main(["gaps", cfg, "--out", str(tmp_path / "r")]) == 2
        assert "must be int" in capsys.readouterr().err


class TestSweep:
    def test_fixed_constant_velocity_cycle(self, tmp_path):
        cfg = write_config(tmp_path, "sweep.json", {
            "n": 6, "jt": 4.0, "probe_n": 6, "checkpoints": 9,
            "constant_velocity": True,
        })
        out = str(tmp_path / "run")
        assert main(["sweep", cfg, "--out", out]) == 0
        rows = read_csv(os.path.join(out, "sweep.csv"))
        assert tuple(rows[0]) == SWEEP_COLUMNS
        assert len(rows) == 10
        assert all(r[8] == "fixed" for r in rows[1:])
        # cycle: drive returns to zero and the state comes back polarized
        assert float(rows[-1][1]) == pytest.approx(0.0, abs=1e-9)
        assert float(rows[1][2]) == pytest.approx(1.0, abs=1e-9)

    def test_unknown_mode_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "sweep.json", {"mode": "wobbly"})
        assert main(["sweep", cfg, "--out", str(tmp_path / "r")]) == 2
        assert "unknown sweep mode" in capsys.readouterr().err

    def test_nonpositive_jt_rejected(self, tmp_path):
        cfg = write_config(tmp_path, "sweep.json", {"jt": 0.0})
        assert main(["sweep", cfg, "--out", str(tmp_path / "r")]) == 2


class TestEvaporate:
    def test_curve_with_custom_schedule(self, tmp_path):
        cfg = write_config(tmp_path, "ev.json", {
            "schedule": TINY_SCHEDULE, "n_atoms": 6, "realizations": 2,
        })
        out = str(tmp_path / "run")
        assert main(["evaporate", cfg, "--out", out]) == 0
        rows = read_csv(os.path.join(out, "evaporation_curve.csv"))
        assert tuple(rows[0]) == CURVE_COLUMNS
        # tall frozen plugs: every realization keeps all six atoms
        assert all(float(r[1]) == 6.0 and float(r[2]) == 0.0 for r in rows[1:])

    def test_trajectory_output(self, tmp_path):
        cfg = write_config(tmp_path, "ev.json", {
            "schedule": TINY_SCHEDULE, "n_atoms": 4,
            "curve": False, "trajectory": True,
        })
        out = str(tmp_path / "run")
        assert main(["evaporate", cfg, "--out", out]) == 0
        rows = read_csv(os.path.join(out, "trajectory.csv"))
        assert tuple(rows[0]) == TRAJECTORY_COLUMNS
        assert len(rows) > 1
        assert load_manifest(out)["outputs"] == ["trajectory.csv"]

    def test_nothing_enabled_rejected(self, tmp_path):
        cfg = write_config(tmp_path, "ev.json", {
            "schedule": TINY_SCHEDULE, "curve": False,
        })
        assert main(["evaporate", cfg, "--out", str(tmp_path / "r")]) == 2

    def test_bad_profile_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "ev.json", {"profile": "huge"})
        assert main(["evaporate", cfg, "--out", str(tmp_path / "r")]) == 2
        assert "profile" in capsys.readouterr().err


class TestTrap:
    def test_report_and_map(self, tmp_path):
        cfg = write_config(tmp_path, "trap.json", {"nx": 11, "nz": 9})
        out = str(tmp_path / "run")
        assert main(["trap", cfg, "--out", out]) == 0
        with open(os.path.join(out, "trap_report.json")) as fh:
            report = json.load(fh)
        assert report["f_x_hz"] > report["f_y_hz"] > 0.0
        assert report["depth_mhz"] > 0.0
        rows = read_csv(os.path.join(out, "trap_map.csv"))
        assert len(rows) == 1 + 11 * 9
        manifest = load_manifest(out)
        assert manifest["outputs"] == ["trap_map.csv", "trap_report.json"]

    def test_report_only(self, tmp_path):
        cfg = write_config(tmp_path, "trap.json", {"map": False})
        out = str(tmp_path / "run")
        assert main(["trap", cfg, "--out", out]) == 0
        assert load_manifest(out)["outputs"] == ["trap_report.json"]
        assert not os.path.exists(os.path.join(out, "trap_map.csv"))


class TestPlumbing:
    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, "gaps.json", {
            "n": 6, "omega_over_j": [0.0, 3.0],
        })
        outs = []
        for name in ("a", "b"):
            out = str(tmp_path / name)
            assert main(["gaps", cfg, "--out", out, "--seed", "5"]) == 0
            outs.append(out)
        for fname in ("gaps.csv", MANIFEST_NAME):
            with open(os.path.join(outs[0], fname), "rb") as fh:
                first = fh.read()
            with open(os.path.join(outs[1], fname), "rb") as fh:
                second = fh.read()
            assert first == second

    def test_manifest_covers_every_output(self, tmp_path):
        out = str(tmp_path / "run")
        assert main(["trap", "--out", out]) == 0
        manifest = load_manifest(out)
        on_disk = set(os.listdir(out)) - {MANIFEST_NAME}
        assert set(manifest["outputs"]) == on_disk

    def test_environment_output_override(self, tmp_path, monkeypatch):
        out = str(tmp_path / "from_env")
        monkeypatch.setenv("RYDCHAIN_OUT", out)
        assert main(["lifetime"]) == 0
        assert os.path.exists(os.path.join(out, "lifetime_budget.csv"))

    def test_flag_beats_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RYDCHAIN_OUT", str(tmp_path / "ignored"))
        out = str(tmp_path / "flagged")
        assert main(["lifetime", "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "lifetime_budget.csv"))
        assert not os.path.exists(str(tmp_path / "ignored"))

    def test_config_seed_and_flag_precedence(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"seed": 7})
        out1 = str(tmp_path / "one")
        assert main(["lifetime", cfg, "--out", out1]) == 0
        assert load_manifest(out1)["seed"] == 7
        out2 = str(tmp_path / "two")
        assert main(["lifetime", cfg, "--out", out2, "--seed", "3"]) == 0
        assert load_manifest(out2)["seed"] == 3

    def test_invalid_json_is_line_anchored(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "x": [1,\n}\n')
        assert main(["lifetime", str(path), "--out", str(tmp_path / "r")]) == 2
        assert "broken.json:3" in capsys.readouterr().err

    def test_config_sha_matches_file(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"n_atoms": 2})
        out = str(tmp_path / "run")
        assert main(["lifetime", cfg, "--out", out]) == 0
        import hashlib

        with open(cfg, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        assert load_manifest(out)["config_sha256"] == digest
