import json
from pathlib import Path

import pytest

from peakdemand import pipeline
from peakdemand.cli import main
from peakdemand.errors import ConfigError

CONFIG = """\
climate_path: climate.csv
demand_path: demand.csv
output_dir: out
block_len: 15
covariate: argmax
base_year: 2008
seed: 5
divisions:
  - name: Res
    excluded_weekdays: [Sunday]
  - name: Ind
    class_override: Industrial
    excluded_weekdays: [Thursday]
simulate:
  n_years: 3
  divisions:
    - name: Res
      feeder_mix: 0.9
      base_mw: 2300
      demand_response: {residential: 40, industrial: 0}
      gev_truth: {mu0: -4.4, mu1: 0.2, sigma0: -0.6931, xi: -0.1}
    - name: Ind
      feeder_mix: 0.15
      n_feeders: 30
      base_mw: 4000
      demand_response: {residential: 0, industrial: 0}
      peak_mw: 25
      rest_days: [Thursday]
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "config.yaml").write_text(CONFIG)
    assert main(["simulate", "--config", str(d / "config.yaml"), "--out", str(d)]) == 0
    return d


def test_simulate_writes_inputs(workdir):
    assert (workdir / "climate.csv").read_text().startswith("date,ta,rh,e,w\n")
    assert (workdir / "demand.csv").read_text().startswith("date,feeder_id,division,demand_mw,sheddable\n")


def test_report_outputs(workdir, capsys):
    out = workdir / "report"
    assert main(["report", "--config", str(workdir / "config.yaml"), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["divisions"]) == {"Res", "Ind"}
    assert summary["divisions"]["Ind"]["class"] == "Industrial"
    res = out / "res"
    for name in ("series.csv", "classification.json", "block_maxima.csv", "gev.json", "lrt.csv",
                 "regression.json", "anomaly.csv", "loess.csv", "monthly.csv", "qq_stationary.csv",
                 "qq_residual.csv", "return_levels.csv", "anomaly.svg", "monthly.svg", "qq_stationary.svg",
                 "qq_residual.svg"):
        assert (res / name).is_file(), name
    gev = json.loads((res / "gev.json").read_text())
    for key in ("mu0", "mu1", "sigma0", "sigma1", "xi", "se", "nllh"):
        assert key in gev["fits"]["model2"]
    for key in ("lrt_statistic", "df", "significant_95", "significant_90"):
        assert key in gev["lrt"]["stationary_vs_model2"]
    reg = json.loads((res / "regression.json").read_text())
    for key in ("division", "slope", "adj_r2", "p_value", "year_effects", "n"):
        assert key in reg
    assert reg["year_effects"]["2008"] == 0.0
    assert (res / "loess.csv").read_text().startswith("x,yhat\n")
    assert "summary.json" in capsys.readouterr().out


@pytest.mark.parametrize("stage,expected", [("ingest", "series.csv"), ("classify", "classification.json"),
                                            ("blocks", "block_maxima.csv"), ("fit", "gev.json"),
                                            ("lrt", "lrt.csv"), ("regress", "regression.json")])
def test_stage_subcommands(workdir, tmp_path, stage, expected, capsys):
    assert main([stage, "--config", str(workdir / "config.yaml"), "--out", str(tmp_path), "--no-figures"]) == 0
    assert (tmp_path / "ind" / expected).is_file()
    assert "Ind" in capsys.readouterr().out
    assert not (tmp_path / "summary.json").exists()


def test_flag_overrides(workdir, tmp_path):
    code = main(["blocks", "--config", str(workdir / "config.yaml"), "--out", str(tmp_path),
                 "--block-len", "7", "--covariate", "block-mean"])
    assert code == 0
    rows = (tmp_path / "res" / "block_maxima.csv").read_text().splitlines()
    assert len(rows) - 1 > 120


def test_missing_demand_file(workdir, tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    code = main(["report", "--config", str(workdir / "config.yaml"), "--demand", str(missing),
                 "--out", str(tmp_path)])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_schema_error_exit_code(workdir, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,ta,rh,e\n2008-01-01,1,2,3\n")
    code = main(["ingest", "--config", str(workdir / "config.yaml"), "--climate", str(bad), "--out", str(tmp_path)])
    assert code == 2
    assert "stage 'ingest'" in capsys.readouterr().err


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("block_len: 10\n")
    assert main(["report", "--config", str(cfg)]) == 4
    cfg.write_text("colour: blue\n")
    assert main(["report", "--config", str(cfg)]) == 4
    assert main(["report", "--config", str(tmp_path / "absent.yaml")]) == 4
    assert "error:" in capsys.readouterr().err


def test_simulate_requires_seed(tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 4


def test_unknown_division(workdir, tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(f"climate_path: {workdir / 'climate.csv'}\ndemand_path: {workdir / 'demand.csv'}\n"
                   "divisions: [Nowhere]\n")
    assert main(["classify", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "Nowhere" in capsys.readouterr().err


def test_load_config_resolves_relative_paths(tmp_path):
    cfg_file = tmp_path / "sub" / "c.yaml"
    cfg_file.parent.mkdir()
    cfg_file.write_text("climate_path: a.csv\ndemand_path: b.csv\ncovariate: block-mean\n"
                        "classification: {industrial_max: 0.1}\n")
    cfg = pipeline.load_config(cfg_file)
    assert cfg.climate_path == tmp_path / "sub" / "a.csv"
    assert cfg.covariate_mode == "block_mean"
    assert cfg.industrial_max == 0.1


def test_bad_class_override():
    with pytest.raises(ConfigError):
        pipeline.load_config(divisions=[{"name": "X", "class_override": "Rural"}])


def test_determinism(workdir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["report", "--config", str(workdir / "config.yaml"), "--out", str(out)]) == 0
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
