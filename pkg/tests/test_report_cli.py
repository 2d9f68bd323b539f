import json
import math

import pytest

from lamplighter_lab.cli import main
from lamplighter_lab.config import dump_config, make_spec, parse_config
from lamplighter_lab.errors import InvalidSpec, SchemaError
from lamplighter_lab.experiments import ExperimentSpec
from lamplighter_lab.report import (Assertion, MixingReport, gnuplot_script, load_report, read_curve_csv,
                                    strip_timestamp, validate_report, write_outputs)


def small_report():
    rep = MixingReport("demo", {"seed": 1})
    rep.instance("cycle(4)").exact("t_star", 8.0)
    rep.check("lower", "a demo inequality", "cycle(4)", "lhs", 2.0, ">=", "rhs", 1.0)
    rep.record("trend", "cycle(4)", 1.5, band=[1, 2])
    rep.curves["demo"] = {"t": [0, 1, 2], "tv": [1.0, 0.5, 0.25], "tv_se": [0.0, 0.01, 0.01]}
    return rep


def test_assertion_evaluation():
    assert Assertion("a", "x", "i", "l", 1.0, "<=", "r", 1.0).passed
    assert not Assertion("a", "x", "i", "l", 1.1, "<=", "r", 1.0).passed
    assert Assertion("a", "x", "i", "l", 1.1, "<=", "r", 1.0, slack=0.2).passed
    assert Assertion("a", "x", "i", "l", 3.0, "==", "r", 3.0).passed
    assert not Assertion("a", "x", "i", "l", 1.0, ">=", "r", math.inf).passed
    with pytest.raises(ValueError):
        Assertion("a", "x", "i", "l", 1.0, "<", "r", 1.0)


def test_outputs_roundtrip(tmp_path):
    rep = small_report()
    path = write_outputs(rep, tmp_path)
    data = load_report(path)
    assert data["passed"] and data["curves"] == ["curves/demo.csv"]
    cols = read_curve_csv(tmp_path / "curves" / "demo.csv")
    assert list(cols) == ["t", "tv", "tv_se"] and cols["tv"] == [1.0, 0.5, 0.25]
    assert (tmp_path / "curves" / "demo.csv").read_text().splitlines()[1] == "0,1,0"
    gp = (tmp_path / "plot.gp").read_text()
    assert "set datafile separator ','" in gp and "curves/demo.csv" in gp and "tv_se" not in gp.split("plot")[-1]
    assert (tmp_path / "figures" / "demo.png").stat().st_size > 0


def test_schema_rejects_unknown_fields(tmp_path):
    data = small_report().to_dict()
    validate_report(data)
    bad = dict(data, extra=1)
    with pytest.raises(SchemaError):
        validate_report(bad)
    bad = json.loads(json.dumps(data))
    bad["instances"][0]["quantities"]["t_star"]["se"] = 0.1
    with pytest.raises(SchemaError):
        validate_report(bad)
    bad = dict(data, schema_version=99)
    with pytest.raises(SchemaError):
        validate_report(bad)


def test_report_is_deterministic_modulo_timestamp(tmp_path):
    a = write_outputs(small_report(), tmp_path / "a")
    b = write_outputs(small_report(), tmp_path / "b")
    assert strip_timestamp(a) == strip_timestamp(b)
    assert (tmp_path / "a" / "figures" / "demo.png").read_bytes() == (tmp_path / "b" / "figures" / "demo.png").read_bytes()


def test_gnuplot_skips_error_columns():
    script = gnuplot_script({"x": {"t": [0], "a": [1], "a_se": [0]}})
    assert "using 1:2" in script and "using 1:3" not in script


def test_config_parsing():
    cfg = parse_config("name = thm3  # experiment\nseed = 7\nsizes = [16, 32]\neps = 0.1\ngraphs = ['cycle:3']\n")
    assert cfg == {"name": "thm3", "seed": 7, "sizes": [16, 32], "eps": 0.1, "graphs": ["cycle:3"]}
    spec = make_spec(cfg, {"seed": 9, "N": None})
    assert spec.seed == 9 and spec.sizes == [16, 32]
    assert parse_config(dump_config(spec)) == spec.public()
    with pytest.raises(InvalidSpec):
        parse_config("bogus = 1")
    with pytest.raises(InvalidSpec):
        parse_config("seed 1")
    with pytest.raises(InvalidSpec):
        parse_config("seed = 1\nseed = 2")
    with pytest.raises(InvalidSpec):
        make_spec({"name": "thm2"}, {})


def test_spec_excludes_execution_details():
    spec = ExperimentSpec("thm2", seed=1, out="/tmp/x", workers=8)
    assert "out" not in spec.public() and "workers" not in spec.public()


def test_cli_experiment_thm2(tmp_path, capsys):
    assert main(["experiment", "thm2", "--out", str(tmp_path), "--seed", "7"]) == 0
    data = load_report(tmp_path / "report.json")
    assert data["passed"] and len(data["assertions"]) >= 12
    assert main(["report", str(tmp_path)]) == 0
    assert "PASS" in capsys.readouterr().out


def test_cli_missing_seed_is_usage_error(tmp_path, capsys):
    assert main(["experiment", "thm2", "--out", str(tmp_path)]) == 2
    assert "--seed" in capsys.readouterr().err
    assert main(["mc", "cover", "--graph", "cycle:5"]) == 2


def test_cli_bad_flag_values(capsys):
    assert main(["graph", "--graph", "cycle:2"]) == 2
    assert main(["nope"]) == 2
    assert main(["mc", "returns", "--d", "2", "--t", "5", "--seed", "1"]) == 2


def test_cli_spectrum_csv(tmp_path):
    out = tmp_path / "eig.csv"
    assert main(["exact", "spectrum", "--graph", "cycle:6", "--wreath", "--csv", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "index,eigenvalue" and len(rows) == 6 * 64 + 1
    assert float(rows[1].split(",")[1]) == pytest.approx(1.0)


def test_cli_other_commands(tmp_path, capsys):
    assert main(["graph", "--graph", "cycle:4", "--edges", "-"]) == 0
    assert "0 1" in capsys.readouterr().out
    assert main(["exact", "profile", "--graph", "cycle:5", "--csv", str(tmp_path / "p.csv")]) == 0
    assert main(["exact", "cover", "--graph", "cycle:5", "--csv", str(tmp_path / "c.csv")]) == 0
    assert main(["exact", "hitting", "--graph", "cycle:4"]) == 0
    capsys.readouterr()
    assert main(["mc", "cover", "--graph", "complete:8", "--seed", "1", "--N", "2000"]) == 0
    est = json.loads(capsys.readouterr().out)
    assert abs(est["value"] - 8 * sum(1 / i for i in range(1, 8))) < 5 * est["se"]


def test_cli_assertion_failure_exit_code(tmp_path, monkeypatch):
    import lamplighter_lab.experiments as ex

    def failing(spec):
        rep = MixingReport("thm2", spec.public())
        rep.check("x", "forced failure", "none", "a", 2.0, "<=", "b", 1.0)
        return rep
    monkeypatch.setitem(ex.EXPERIMENTS, "thm2", failing)
    assert main(["experiment", "thm2", "--out", str(tmp_path), "--seed", "1", "--no-figures"]) == 1
    assert main(["report", str(tmp_path)]) == 1


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("name = lemmas\nseed = 3\ngraphs = ['cycle:4', 'complete:6']\n")
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    data = load_report(tmp_path / "o" / "report.json")
    assert data["spec"]["graphs"] == ["cycle:4", "complete:6"]
