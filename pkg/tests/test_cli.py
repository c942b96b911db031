import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from hinflab.cli import main
from hinflab.errors import ConfigInvalid, ReportMissing
from hinflab.plotting import emit_plot_data, render_figures, write_series_csv
from hinflab.runconfig import run_config, validate_config

CALIBRATION = {
    "seed": 7,
    "operators": [{"name": "calib", "matrix": {"diag_re": [1.0, 4.0]}}],
    "suites": [
        {"suite": "sector_equivalence", "operator": "calib",
         "space": {"p": 2, "n": 2},
         "params": {"omega": math.pi, "sigma": math.pi / 3}},
    ],
}


def test_empty_suite_list_manifest_only(tmp_path):
    manifest = run_config({"suites": []}, tmp_path)
    assert manifest["all_passed"]
    assert (tmp_path / "manifest.json").exists()
    assert manifest["suites"] == []


def test_calibration_config_passes(tmp_path):
    manifest = run_config(CALIBRATION, tmp_path)
    assert manifest["all_passed"]
    report = json.loads((tmp_path / "000_sector_equivalence.json").read_text())
    c3 = report["constants"]["two_sided_C3"]["value"]
    assert abs(c3 - 1.0) <= 1e-6
    body = (tmp_path / "000_sector_equivalence.csv").read_text()
    assert body.splitlines()[0] == "suite,check_id,lhs,rhs,margin,pass"


def test_schema_rejects_small_p():
    bad = {"suites": [{"suite": "g_function",
                       "params": {"size": 64, "p": 0.5, "beta": 1.0}}]}
    with pytest.raises(ConfigInvalid):
        validate_config(bad)


def test_schema_rejects_unknown_keys():
    bad = dict(CALIBRATION)
    bad = json.loads(json.dumps(bad))
    bad["suites"][0]["params"]["bogus_knob"] = 1
    with pytest.raises(ConfigInvalid):
        validate_config(bad)
    bad2 = json.loads(json.dumps(CALIBRATION))
    bad2["unexpected_top"] = True
    with pytest.raises(ConfigInvalid):
        validate_config(bad2)


def test_operator_source_exclusivity():
    bad = {"operators": [{"name": "x", "matrix": {"diag_re": [1.0]},
                          "torus_laplacian": 8}],
           "suites": []}
    with pytest.raises(ConfigInvalid):
        validate_config(bad)


def test_dimension_mismatch_rejected(tmp_path):
    cfg = json.loads(json.dumps(CALIBRATION))
    cfg["suites"][0]["space"]["n"] = 3
    with pytest.raises(ConfigInvalid):
        run_config(cfg, tmp_path)


def test_cli_run_exit_codes(tmp_path):
    runner = CliRunner()
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(CALIBRATION))
    result = runner.invoke(main, ["run", str(cfg), "--out",
                                  str(tmp_path / "out")])
    assert result.exit_code == 0, result.output

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"suites": [
        {"suite": "g_function", "params": {"size": 64, "p": 0.5, "beta": 1.0}}]}))
    result = runner.invoke(main, ["run", str(bad), "--out",
                                  str(tmp_path / "out2")])
    assert result.exit_code == 2

    result = runner.invoke(main, ["run", str(tmp_path / "missing.json")])
    assert result.exit_code == 2


def test_cli_seed_env_fallback(tmp_path, monkeypatch):
    runner = CliRunner()
    cfg = tmp_path / "config.json"
    doc = json.loads(json.dumps(CALIBRATION))
    del doc["seed"]
    cfg.write_text(json.dumps(doc))
    monkeypatch.setenv("LAB_SEED", "123")
    result = runner.invoke(main, ["run", str(cfg), "--out", str(tmp_path / "o")])
    assert result.exit_code == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["seed"] == 123


def test_determinism_byte_identical_csv(tmp_path):
    run_config(CALIBRATION, tmp_path / "a")
    run_config(CALIBRATION, tmp_path / "b")
    for name in ("000_sector_equivalence.csv",):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()
    ja = json.loads((tmp_path / "a" / "000_sector_equivalence.json").read_text())
    jb = json.loads((tmp_path / "b" / "000_sector_equivalence.json").read_text())
    ja.pop("runtime_s")
    jb.pop("runtime_s")
    assert ja == jb


def test_jobs_pool_same_results(tmp_path):
    doc = json.loads(json.dumps(CALIBRATION))
    doc["suites"].append({"suite": "g_function",
                          "params": {"size": 64, "p": 2, "beta": 1.0}})
    run_config(doc, tmp_path / "serial", jobs=1)
    run_config(doc, tmp_path / "pool", jobs=3)
    for name in ("000_sector_equivalence.csv", "001_g_function.csv"):
        assert (tmp_path / "serial" / name).read_bytes() == \
            (tmp_path / "pool" / name).read_bytes()


def test_plot_data_and_figures(tmp_path):
    run_config(CALIBRATION, tmp_path)
    report = tmp_path / "000_sector_equivalence.json"
    rows = emit_plot_data(report)
    assert len(rows) == 16  # two series, eight sampled angles each
    csv_path = write_series_csv(rows, tmp_path / "series.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "series,x,y" and len(lines) == 17
    figs = render_figures(report, tmp_path, "calib")
    assert len(figs) >= 3  # per-series figures plus the checks overview
    assert all(p.suffix == ".png" and p.stat().st_size > 0 for p in figs)


def test_plot_empty_report_header_only(tmp_path):
    report = tmp_path / "r.json"
    report.write_text(json.dumps({"suite": "empty", "plot_series": [],
                                  "checks": []}))
    rows = emit_plot_data(report)
    path = write_series_csv(rows, tmp_path / "empty.csv")
    assert path.read_text() == "series,x,y\n"


def test_plot_missing_report(tmp_path):
    with pytest.raises(ReportMissing):
        emit_plot_data(tmp_path / "nope.json")
    runner = CliRunner()
    result = runner.invoke(main, ["plot", str(tmp_path / "nope.json")])
    assert result.exit_code == 2


def test_cli_plot_command(tmp_path):
    run_config(CALIBRATION, tmp_path)
    runner = CliRunner()
    result = runner.invoke(main, ["plot",
                                  str(tmp_path / "000_sector_equivalence.json")])
    assert result.exit_code == 0
    assert (tmp_path / "000_sector_equivalence_series.csv").exists()


def test_torus_operator_and_file_source(tmp_path):
    opjson = tmp_path / "op.json"
    opjson.write_text(json.dumps({"diag_re": [1.0, 2.0]}))
    doc = {
        "operators": [
            {"name": "filed", "file": "op.json"},
            {"name": "torus", "torus_laplacian": 8},
        ],
        "suites": [
            {"suite": "log_bridge", "operator": "filed",
             "space": {"p": 2, "n": 2}, "params": {}},
        ],
    }
    manifest = run_config(doc, tmp_path / "out", base_dir=tmp_path)
    assert manifest["all_passed"]


def test_assertion_failure_exit_one(tmp_path, monkeypatch):
    # force a failing check through an impossible stability threshold
    import hinflab.runconfig as rc
    from hinflab.suites import SuiteReport

    def fake_dispatch(entry, ops, seed):
        rep = SuiteReport("fake", {}, {}, {}, seed=seed)
        rep.add_check("impossible", 2.0, 1.0, 0.0)
        return rep

    monkeypatch.setattr(rc, "dispatch_suite", fake_dispatch)
    manifest = rc.run_config({"suites": [{"suite": "log_bridge"}]},
                             tmp_path / "out")
    assert not manifest["all_passed"]
    # reports are still written
    assert (tmp_path / "out" / "000_fake.csv").exists()
