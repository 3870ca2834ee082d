"""CLI contract: subcommands, exit codes, artifacts, reproducibility."""

import json
import os

import numpy as np
import pytest

from certlab import cli, worstcase
from certlab.reporting import read_csv_rows
from certlab.worstcase import SuiteReport


def run(argv):
    return cli.dispatch(argv)


class TestBounds:
    def test_headline_example(self, capsys):
        code = run(["bounds", "--family", "gengauss", "--sigma", "1", "--d", "3072",
                    "--p", "inf", "--p1", "0.999", "--p2", "0.001"])
        out = capsys.readouterr().out
        assert code == 0
        assert float(out.splitlines()[0]) == pytest.approx(0.18968, abs=5e-6)

    def test_uniform_family_without_probs(self, capsys):
        code = run(["bounds", "--family", "uniform-l1", "--b", "1", "--d", "3072",
                    "--p", "2"])
        assert code == 0
        assert float(capsys.readouterr().out.splitlines()[0]) == pytest.approx(2 / 3072)

    def test_writes_artifacts(self, tmp_path, capsys):
        out = str(tmp_path / "bound")
        code = run(["bounds", "--family", "iid", "--sigma", "1", "--d", "64",
                    "--p", "2", "--p1", "0.9", "--out", out])
        assert code == 0
        assert (tmp_path / "bound.csv").exists()
        assert (tmp_path / "bound.json").exists()
        manifest = json.loads((tmp_path / "bound.manifest.json").read_text())
        assert manifest["subcommand"] == "bounds"
        assert manifest["version"]
        assert manifest["duration_seconds"] >= 0.0

    @pytest.mark.parametrize("argv", [
        ["bounds", "--family", "iid", "--sigma", "1", "--b", "1", "--d", "4",
         "--p", "2", "--p1", "0.9"],                                # both scales
        ["bounds", "--family", "iid", "--sigma", "1", "--d", "4", "--p", "2"],  # no p1
        ["bounds", "--family", "iid", "--sigma", "1", "--d", "0", "--p", "2",
         "--p1", "0.9"],                                            # bad d
        ["bounds", "--family", "iid", "--sigma", "1", "--d", "4", "--p", "-2",
         "--p1", "0.9"],                                            # bad p
    ])
    def test_input_errors_exit_1(self, argv, capsys):
        assert run(argv) == 1
        assert capsys.readouterr().err


class TestCertify:
    def test_cli_example_frozen_values(self, tmp_path, capsys):
        out = str(tmp_path / "cert")
        code = run(["certify", "--dist", "gengauss:q=2,sigma=0.25",
                    "--classifier", "constant:0", "--n", "1000", "--n0", "50",
                    "--alpha", "0.001", "--p", "2", "--seed", "11", "--out", out])
        assert code == 0
        records = json.loads((tmp_path / "cert.json").read_text())
        assert len(records) == 1
        record = records[0]
        assert set(record) == {"point_id", "class", "abstain", "p1_lower", "p2_upper",
                               "radii", "n0", "n", "alpha", "seed"}
        # oracle: alpha^(1/n) and 0.25 * PhiInv of it (mpmath), frozen
        assert record["p1_lower"] == pytest.approx(0.9931160484209338, abs=1e-10)
        assert record["radii"][0]["radius"] == pytest.approx(0.6158156536952022, rel=1e-8)
        rows = read_csv_rows(f"{out}.csv")
        assert rows[0]["p1_lower"] == repr(record["p1_lower"])
        assert [r["radius"] for r in rows] == [repr(record["radii"][0]["radius"])]

    def test_rerun_is_byte_identical(self, tmp_path):
        argv = ["certify", "--dist", "gengauss:q=2,sigma=0.5", "--classifier",
                "constant:0", "--n", "500", "--n0", "20", "--p", "2,inf",
                "--seed", "3", "--d", "8"]
        assert run(argv + ["--out", str(tmp_path / "a")]) == 0
        assert run(argv + ["--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_worker_count_does_not_change_outputs(self, tmp_path):
        argv = ["certify", "--dist", "gengauss:q=2,sigma=0.5", "--classifier",
                "constant:0", "--n", "25000", "--n0", "100", "--p", "2",
                "--seed", "3", "--d", "32"]
        assert run(argv + ["--out", str(tmp_path / "w1"), "--workers", "1"]) == 0
        assert run(argv + ["--out", str(tmp_path / "w4"), "--workers", "4"]) == 0
        assert (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w4.csv").read_bytes()

    def test_seed_env_fallback(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "9001")
        out = str(tmp_path / "env")
        assert run(["certify", "--dist", "gengauss:q=2,sigma=0.5", "--classifier",
                    "constant:0", "--n", "100", "--n0", "10", "--p", "2",
                    "--d", "4", "--out", out]) == 0
        manifest = json.loads((tmp_path / "env.manifest.json").read_text())
        assert manifest["seed"] == 9001

    def test_csv_input(self, tmp_path, capsys):
        points = tmp_path / "points.csv"
        np.savetxt(points, np.zeros((2, 6)), delimiter=",")
        out = str(tmp_path / "csvrun")
        assert run(["certify", "--dist", "gengauss:q=2,sigma=0.5", "--classifier",
                    "constant:0", "--input", f"csv:{points}", "--n", "200",
                    "--n0", "10", "--p", "2", "--seed", "1", "--out", out]) == 0
        records = json.loads((tmp_path / "csvrun.json").read_text())
        assert [r["point_id"] for r in records] == [0, 1]

    def test_prototype_task_input(self, capsys):
        assert run(["certify", "--dist", "gengauss:q=2,sigma=0.25", "--classifier",
                    "prototype:classes=2,sep=4,seed=7", "--input", "task",
                    "--d", "16", "--n", "500", "--n0", "20", "--p", "2",
                    "--seed", "2"]) == 0
        out = capsys.readouterr().out
        assert out.count("point") == 2

    def test_bad_alpha_exits_1(self, capsys):
        assert run(["certify", "--dist", "gengauss:q=2,sigma=0.5", "--classifier",
                    "constant:0", "--alpha", "2.0", "--p", "2", "--d", "4"]) == 1

    def test_bad_dist_exits_1(self, capsys):
        assert run(["certify", "--dist", "cauchy:b=1", "--classifier",
                    "constant:0", "--p", "2", "--d", "4"]) == 1


class TestSweep:
    def test_bounds_sweep_stdout(self, capsys):
        code = run(["sweep", "--kind", "bounds", "--sigma", "1", "--b", "1",
                    "--dims", "16,64", "--ps", "2,inf", "--p1s", "0.9"])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("family,sigma,b,d,p,")
        assert len(lines) == 1 + 4 * 2 * 2

    def test_resume_skips_completed_rows(self, tmp_path):
        out = str(tmp_path / "cvb")
        argv = ["sweep", "--kind", "cert-vs-bound", "--sigma", "0.5",
                "--classifier", "constant:0", "--input", "zeros:d=8",
                "--ps", "2,4", "--n0", "10", "--n", "200", "--seed", "5",
                "--out", out]
        assert run(argv) == 0
        first = read_csv_rows(f"{out}.csv")
        assert run(argv + ["--resume"]) == 0
        second = read_csv_rows(f"{out}.csv")
        assert first == second

    def test_resolution_sweep(self, tmp_path):
        out = str(tmp_path / "res")
        assert run(["sweep", "--kind", "resolution", "--sigma", "0.25",
                    "--sides", "4,8", "--channels", "1", "--ps", "2,inf",
                    "--n0", "20", "--n", "500", "--seed", "4", "--out", out]) == 0
        rows = read_csv_rows(f"{out}.csv")
        assert {row["d"] for row in rows} == {"16", "64"}
        assert all(row["projected_radius"] for row in rows)


class TestVerify:
    def test_lemma2_example_passes(self, capsys):
        code = run(["verify", "--suite", "lemma2", "--d", "2", "--b", "1",
                    "--eps", "0.3"])
        out = capsys.readouterr().out
        assert code == 0
        assert "suite lemma2: PASS" in out

    def test_box_suite_single_cell(self, capsys):
        code = run(["verify", "--suite", "box", "--d", "2", "--eps", "0.2",
                    "--n", "50000", "--seed", "3"])
        assert code == 0
        assert "suite box: PASS" in capsys.readouterr().out

    def test_report_written(self, tmp_path, capsys):
        out = str(tmp_path / "rep")
        code = run(["verify", "--suite", "l1", "--d", "2", "--eps", "0.2",
                    "--n", "50000", "--seed", "3", "--out", out])
        assert code == 0
        payload = json.loads((tmp_path / "rep.json").read_text())
        assert payload[0]["suite"] == "l1"
        assert payload[0]["cells"][0]["pass"] is True

    def test_failed_suite_exits_2(self, monkeypatch, capsys):
        failing = SuiteReport("lemma2", [{"pass": False}], passed=False)
        monkeypatch.setitem(worstcase.SUITES, "lemma2", lambda **kw: failing)
        monkeypatch.setattr(worstcase, "run_lemma2_suite", lambda **kw: failing)
        code = run(["verify", "--suite", "lemma2"])
        assert code == 2
        assert "FAIL" in capsys.readouterr().out

    def test_small_n_rejected(self, capsys):
        assert run(["verify", "--suite", "box", "--n", "100"]) == 1


class TestWorstcase:
    def test_gaussian_construction_output(self, tmp_path, capsys):
        out = str(tmp_path / "wc")
        code = run(["worstcase", "--d", "16", "--p1", "0.9", "--n", "20000",
                    "--seed", "5", "--out", out])
        assert code == 0
        text = capsys.readouterr().out
        assert "eps_star=0.32038789138615" in text
        rows = read_csv_rows(f"{out}.csv")
        assert [row["multiplier"] for row in rows] == ["0.0", "0.9", "1.0", "1.1"]

    def test_bad_pair_exits_1(self, capsys):
        assert run(["worstcase", "--d", "16", "--p1", "0.4"]) == 1


class TestDispatch:
    def test_unknown_subcommand_exits_1(self, capsys):
        assert run(["frobnicate"]) == 1
        assert capsys.readouterr().err

    def test_unknown_flag_exits_1(self, capsys):
        assert run(["bounds", "--family", "iid", "--wat", "1"]) == 1
        err = capsys.readouterr().err
        assert "usage" in err.lower()

    def test_help_exits_0(self, capsys):
        assert run(["--help"]) == 0
        assert "certify" in capsys.readouterr().out
