"""End-to-end runs of the command-line front end."""

import json

import pandas as pd
import pytest

from fastweb.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main

from tests.conftest import HALF_EXP_RF

TINY = "0,0,4,4,9,9"


def load(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.mark.integration
class TestUsage:
    def test_help(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "blaschke-demo" in capsys.readouterr().out

    def test_unknown_command(self):
        assert main(["julia"]) == EXIT_USAGE

    def test_missing_point(self, tmp_path, capsys):
        out = tmp_path / "ra"
        assert main(["ra", "--out", str(out)]) == EXIT_USAGE
        assert "point" in capsys.readouterr().err
        assert not out.exists()

    def test_bad_flag_value_names_the_key(self, tmp_path, capsys):
        assert main(["maxmod", "--horizon", "0", "--out", str(tmp_path / "m")]) == EXIT_USAGE
        assert "horizon" in capsys.readouterr().err

    def test_bad_family_param(self, tmp_path):
        argv = ["maxmod", "--family-param", "scale", "--out", str(tmp_path / "m")]
        assert main(argv) == EXIT_USAGE

    def test_radius_below_Rf(self, tmp_path, capsys):
        out = tmp_path / "loops"
        assert main(["loops", "--R", "0.5", "--grid", TINY, "--out", str(out)]) == EXIT_USAGE
        assert "R_f" in capsys.readouterr().err
        assert not out.exists()


@pytest.mark.integration
class TestCommands:
    def test_maxmod(self, tmp_path):
        out = tmp_path / "maxmod"
        assert main(["maxmod", "--out", str(out)]) == EXIT_OK
        phi = pd.read_csv(out / "phi_ladder.csv")
        assert len(phi) == 131
        assert phi["phi"].is_monotonic_increasing
        summary = load(out / "maxmod.json")
        assert summary["R_f"] == pytest.approx(HALF_EXP_RF, abs=1e-9)
        assert summary["function"]["family"] == "half_exp"
        ladder = pd.read_csv(out / "ladder.csv")
        assert set(ladder["R"]) == {1.0, 1.5, 2.0, 2.5, 3.0}
        assert (out / "effective_config.json").is_file()

    def test_ra_on_the_positive_axis(self, tmp_path, capsys):
        out = tmp_path / "ra"
        assert main(["ra", "--point", "2,0", "--out", str(out)]) == EXIT_OK
        data = load(out / "ra.json")
        assert data["status"] == "value"
        assert data["value"] == pytest.approx(2.0, rel=1e-6)
        assert data["membership"]["2.0"]["verdict"] == "in"
        assert "R_A" in capsys.readouterr().out
        assert len(pd.read_csv(out / "ra_sequence.csv")) == 5

    def test_ra_without_fixed_origin(self, tmp_path):
        out = tmp_path / "ra"
        assert main(["ra", "--function", "pure_exp", "--point", "-1,0", "--out", str(out)]) == EXIT_OK
        data = load(out / "ra.json")
        assert data["truncated_at"] == 1
        assert len(data["sequence"]) == 1

    def test_classify(self, tmp_path):
        out = tmp_path / "classify"
        argv = ["classify", "--grid", TINY, "--R", "1,2", "--out", str(out)]
        assert main(argv) == EXIT_OK
        low = pd.read_csv(out / "classify_R1.csv")
        high = pd.read_csv(out / "classify_R2.csv")
        assert len(low) == len(high) == 81
        assert high["value"].sum() <= low["value"].sum()
        assert [f["R"] for f in load(out / "classify.json")["fields"]] == [1.0, 2.0]

    def test_loops_off_the_window_fail_cleanly(self, tmp_path, capsys):
        # the hole runs out of the window along the negative axis
        out = tmp_path / "loops"
        argv = ["loops", "--R", "2", "--grid", "0,0,6,6,31,31", "--out", str(out)]
        assert main(argv) == EXIT_FAILURE
        assert "error" in capsys.readouterr().err
        assert not out.exists()
        assert list(tmp_path.iterdir()) == []

    def test_failed_run_keeps_previous_output(self, tmp_path):
        out = tmp_path / "loops"
        assert main(["maxmod", "--out", str(out)]) == EXIT_OK
        argv = ["loops", "--R", "2", "--grid", "0,0,6,6,31,31", "--out", str(out)]
        assert main(argv) == EXIT_FAILURE
        assert (out / "maxmod.json").is_file()

    def test_ra_field_then_render(self, tmp_path):
        field_out = tmp_path / "field"
        assert main(["ra-field", "--grid", TINY, "--out", str(field_out)]) == EXIT_OK
        frame = pd.read_csv(field_out / "ra_field.csv")
        assert len(frame) == 81
        assert load(field_out / "ra_field.json")["R_f"] == pytest.approx(HALF_EXP_RF, abs=1e-9)
        assert (field_out / "ra_field.png").is_file()

        pictures = tmp_path / "pictures"
        argv = ["render", "--input", str(field_out / "ra_field.csv"), "--log", "--out", str(pictures)]
        assert main(argv) == EXIT_OK
        assert (pictures / "ra_field.png").read_bytes().startswith(b"\x89PNG")

    def test_render_missing_input(self, tmp_path):
        argv = ["render", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path / "p")]
        assert main(argv) == EXIT_FAILURE

    def test_h_field(self, tmp_path):
        out = tmp_path / "h"
        argv = ["h-field", "--grid", TINY, "--z0", "2,0", "--n", "3", "--out", str(out)]
        assert main(argv) == EXIT_OK
        frame = pd.read_csv(out / "h_field.csv")
        assert {"x", "y", "value", "index"} <= set(frame.columns)
        assert frame["index"].between(0, 3).all()

    def test_osc(self, tmp_path):
        out = tmp_path / "osc"
        assert main(["osc", "--grid", TINY, "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out / "osc.csv")
        assert set(frame["fatou_proxy"].unique()) <= {0, 1}
        assert load(out / "osc.json")["fatou_proxy_cells"] == int(frame["fatou_proxy"].sum())

    def test_blaschke_demo(self, tmp_path):
        out = tmp_path / "demo"
        assert main(["blaschke-demo", "--lambda", "0.8", "--out", str(out)]) == EXIT_OK
        orbit = pd.read_csv(out / "blaschke_orbit.csv")
        assert len(orbit) == 51
        assert (orbit["modulus"] <= orbit["mu_bound"] + 1e-12).all()
        # Schwarz-Pick: the two orbits never separate
        assert orbit["distance"].iloc[-1] <= orbit["distance"].iloc[0] + 1e-9
        products = load(out / "blaschke.json")["products"]
        assert all(p["derivative_at_zero"] <= 0.8 + 1e-12 for p in products)

    def test_verify(self, tmp_path, capsys):
        out = tmp_path / "verify"
        argv = ["verify", "--suite", "blaschke_all", "--samples", "50", "--grid", TINY, "--out", str(out)]
        assert main(argv) == EXIT_OK
        report = load(out / "report.json")
        assert report["version"] == 1
        assert report["summary"]["failed"] is False
        assert (out / "summary.txt").read_text(encoding="utf-8").strip().endswith("OK")
        assert "OK" in capsys.readouterr().out

    def test_effective_config_is_accepted_back(self, tmp_path):
        first = tmp_path / "first"
        argv = ["maxmod", "--function", "scaled_exp", "--horizon", "40", "--seed", "11", "--out", str(first)]
        assert main(argv) == EXIT_OK
        second = tmp_path / "second"
        assert main(["maxmod", "--config", str(first / "effective_config.json"), "--out", str(second)]) == EXIT_OK
        assert load(first / "effective_config.json") == load(second / "effective_config.json")
        assert load(second / "effective_config.json")["horizon"] == 40
