import json

import numpy as np
import pytest

from benfordlab import sample_benford, substream
from benfordlab.cli import main


@pytest.fixture()
def benford_file(tmp_path):
    path = tmp_path / "sample.txt"
    values = sample_benford(300, substream(404, 0))
    path.write_text("\n".join(f"{v:.9f}" for v in values) + "\n", encoding="utf-8")
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "test")  # missing input and --seed
        assert code == 1

    def test_data_error_missing_file(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "test", str(tmp_path / "nope.txt"), "--seed", "1",
                               "--B", "100")
        assert code == 2
        assert "error" in err

    def test_data_error_bad_line(self, capsys, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.5\nhello\n", encoding="utf-8")
        code, _, err = run_cli(capsys, "test", str(path), "--seed", "1", "--B", "100")
        assert code == 2
        assert ":2:" in err

    def test_empty_file(self, capsys, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# nothing here\n", encoding="utf-8")
        code, _, err = run_cli(capsys, "qq", str(path), "--seed", "1", "--B", "50")
        assert code == 2


class TestCmdTest:
    def test_reports_and_json(self, capsys, benford_file, tmp_path):
        out_json = tmp_path / "report.json"
        code, out, _ = run_cli(capsys, "test", str(benford_file), "--seed", "11",
                               "--B", "500", "--stat", "ks2", "--stat", "qdelta",
                               "--stat", "gks", "--json", str(out_json))
        assert code == 0
        assert "p_exact" in out and "ks2" in out
        payload = json.loads(out_json.read_text(encoding="utf-8"))
        assert payload["seed"] == 11 and payload["B"] == 500
        assert payload["tool_version"]
        assert len(payload["input_sha256"]) == 64
        assert [r["statistic"] for r in payload["reports"]] == ["ks2", "qdelta", "gks"]
        assert payload["null_kind"] == "plain"

    def test_rerun_reproduces_numbers(self, capsys, benford_file, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for out in (a, b):
            code, _, _ = run_cli(capsys, "test", str(benford_file), "--seed", "3",
                                 "--B", "400", "--stat", "ks2", "--json", str(out))
            assert code == 0
        assert a.read_text(encoding="utf-8").replace("a.json", "") == \
            b.read_text(encoding="utf-8").replace("b.json", "")

    def test_truncated_auto_null(self, capsys, tmp_path):
        path = tmp_path / "trunc.txt"
        vals = [f"{v:.9f}" for v in sample_benford(50, substream(405, 0))]
        path.write_text("\n".join(["1.5", "2.7"] + vals) + "\n", encoding="utf-8")
        out_json = tmp_path / "r.json"
        code, out, _ = run_cli(capsys, "test", str(path), "--seed", "5", "--B", "300",
                               "--stat", "ks2", "--json", str(out_json))
        assert code == 0
        payload = json.loads(out_json.read_text(encoding="utf-8"))
        assert payload["null_kind"] == "truncated"
        assert payload["profile"]["counts"][1] == 2


class TestCmdSimulate:
    def test_deterministic_output(self, capsys, tmp_path):
        f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
        for f in (f1, f2):
            code, _, _ = run_cli(capsys, "simulate", "--model", "manipulated:uniform:5",
                                 "--n", "50", "--seed", "7", "--out", str(f))
            assert code == 0
        assert f1.read_bytes() == f2.read_bytes()

    def test_values_parse_back(self, capsys, tmp_path):
        from benfordlab import read_significand_file

        f = tmp_path / "sim.txt"
        run_cli(capsys, "simulate", "--model", "benford", "--n", "100", "--seed", "1",
                "--out", str(f))
        recs = read_significand_file(f)
        assert len(recs) == 100
        assert all(1.0 <= r.significand < 10.0 for r in recs)

    def test_bad_model(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "simulate", "--model", "martian", "--n", "5",
                               "--seed", "1", "--out", str(tmp_path / "x.txt"))
        assert code == 2


class TestCmdNulltab:
    def test_schema_and_values(self, capsys, tmp_path):
        out_csv = tmp_path / "tab.csv"
        code, _, _ = run_cli(capsys, "nulltab", "--stat", "ks2", "--stat", "gks",
                             "--n", "100", "--gamma", "0.05", "--gamma", "0.01",
                             "--B", "2000", "--seed", "2", "--csv", str(out_csv))
        assert code == 0
        lines = out_csv.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# benfordlab csv schema v1: nulltab"
        assert lines[1] == "statistic,n,B,seed,null_kind,gamma,critical_value"
        assert len(lines) == 2 + 4
        row = dict(zip(lines[1].split(","), lines[2].split(",")))
        assert row["statistic"] == "ks2" and float(row["critical_value"]) > 0

    def test_cache_reuse(self, capsys, tmp_path):
        cache = tmp_path / "cache"
        args = ["nulltab", "--stat", "ks2", "--n", "80", "--gamma", "0.05",
                "--B", "1000", "--seed", "4", "--cache-dir", str(cache)]
        code, out1, _ = run_cli(capsys, *args, "--csv", str(tmp_path / "t1.csv"))
        assert code == 0
        assert len(list(cache.glob("*.npz"))) == 1
        code, out2, _ = run_cli(capsys, *args, "--csv", str(tmp_path / "t2.csv"))
        assert code == 0
        assert (tmp_path / "t1.csv").read_text() == (tmp_path / "t2.csv").read_text()


class TestCmdPower:
    def test_runs_from_config(self, capsys, tmp_path):
        cfg = {
            "scenarios": [{"model": "manipulated", "family": "lognormal", "alpha": 0.3}],
            "n": 100, "runs": 40, "gamma": 0.05, "B": 1000, "seed": 5,
            "statistics": ["ks2", "gks"],
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
        out_csv = tmp_path / "power.csv"
        out_json = tmp_path / "power.json"
        code, _, _ = run_cli(capsys, "power", str(cfg_path), "--csv", str(out_csv),
                             "--json", str(out_json))
        assert code == 0
        lines = out_csv.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# benfordlab csv schema v1: power"
        assert lines[1] == "scenario,statistic,runs,rejections,rate,se"
        assert len(lines) == 2 + 2
        payload = json.loads(out_json.read_text(encoding="utf-8"))
        assert payload["config"]["seed"] == 5
        assert len(payload["rows"]) == 2

    def test_full_scale_guard(self, capsys, tmp_path):
        cfg = {
            "scenarios": [{"model": "benford"}],
            "n": 10, "runs": 5000, "gamma": 0.05, "B": 100, "seed": 5,
            "statistics": ["ks2"],
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
        code, _, err = run_cli(capsys, "power", str(cfg_path))
        assert code == 2
        assert "--full-scale" in err


class TestCmdQq:
    def test_schema(self, capsys, benford_file, tmp_path):
        out_csv = tmp_path / "qq.csv"
        code, _, _ = run_cli(capsys, "qq", str(benford_file), "--seed", "3",
                             "--B", "100", "--csv", str(out_csv))
        assert code == 0
        lines = out_csv.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# benfordlab csv schema v1: qq"
        assert lines[1] == "index,prob,empirical,null_quantile"
        assert len(lines) == 2 + 300


class TestCmdDensity:
    def test_schema_and_support(self, capsys, tmp_path):
        out_csv = tmp_path / "dens.csv"
        code, _, _ = run_cli(capsys, "density", "--x1-max", "2", "--x2-max", "3",
                             "--step", "1.0", "--csv", str(out_csv))
        assert code == 0
        lines = out_csv.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# benfordlab csv schema v1: density"
        assert lines[1] == "x1,x2,density"
        rows = [line.split(",") for line in lines[2:]]
        for x1, x2, dens in rows:
            if float(x2) <= float(x1):
                assert float(dens) == 0.0
            else:
                assert float(dens) > 0.0


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert "benfordlab" in capsys.readouterr().out
