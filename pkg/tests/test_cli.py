import json

import numpy as np
import pytest

from latticepf.cli import main
from latticepf.lattice import LatticeRule, generator_for, korobov_points


def run(argv, capsys):
    code = main(argv)
    err = capsys.readouterr().err
    return code, err


def error_line(err):
    lines = [line for line in err.splitlines() if line.startswith("error:")]
    assert len(lines) == 1
    return lines[0]


def test_lattice_gen_writes_rule(tmp_path, capsys):
    out = tmp_path / "pts.csv"
    code, _ = run(["lattice", "gen", "--n", "16", "--dim", "2", "--out", str(out), "--quiet"], capsys)
    assert code == 0
    rows = np.loadtxt(out, delimiter=",")
    assert rows.shape == (16, 2)
    np.testing.assert_array_equal(rows, korobov_points(LatticeRule(16, generator_for(16, 2), 2)))
    resolved = json.loads((tmp_path / "resolved_config.json").read_text())
    assert resolved["generator"] == generator_for(16, 2)


def test_lattice_gen_invalid_n(tmp_path, capsys):
    code, err = run(["lattice", "gen", "--n", "100", "--dim", "2", "--out", str(tmp_path / "x.csv")], capsys)
    assert code == 2
    assert error_line(err).startswith("error: invalid_n:")


def test_run_filter_lpf_non_table_n(tmp_path, capsys):
    argv = ["run-filter", "--model", "lingauss", "--scheme", "lpf", "--n", "100", "--out", str(tmp_path / "r.csv")]
    code, err = run(argv, capsys)
    assert code == 2
    line = error_line(err)
    assert line.startswith("error: invalid_n:") and "100" in line


def test_run_filter_output(tmp_path, capsys):
    out = tmp_path / "r.csv"
    argv = ["run-filter", "--model", "disk", "--scheme", "lpf", "--n", "64", "--steps", "5", "--out", str(out), "--quiet"]
    assert run(argv, capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,est_0,est_1,true_0,true_1,error"
    assert len(lines) == 6


def test_missing_out_is_usage_error(capsys):
    code, err = run(["run-filter", "--model", "toy"], capsys)
    assert code == 2
    assert error_line(err).startswith("error: usage:")


@pytest.mark.parametrize("argv", [["frobnicate"], ["bench", "disk", "--bogus"], []])
def test_bad_arguments(argv, capsys):
    code, err = run(argv, capsys)
    assert code == 2
    assert error_line(err).startswith("error: usage:")


def test_missing_config_is_io_error(tmp_path, capsys):
    argv = ["bench", "toy", "--config", str(tmp_path / "none.txt"), "--out", str(tmp_path / "o")]
    code, err = run(argv, capsys)
    assert code == 2
    assert error_line(err).startswith("error: io:")


def bench_toy(out, *extra):
    return ["bench", "toy", "--n", "16", "--trials", "4", "--steps", "5", "--out", str(out), "--quiet", *extra]


def test_bench_outputs(tmp_path, capsys):
    out = tmp_path / "b"
    assert run(bench_toy(out), capsys)[0] == 0
    for name in ("report.json", "rmse.csv", "plot.gp", "resolved_config.json"):
        assert (out / name).exists()
    header = (out / "rmse.csv").read_text().splitlines()[0]
    assert header == "scheme,n,t,rmse,ensemble_std,failed"


def test_resolved_config_reproduces_run(tmp_path, capsys):
    first = tmp_path / "a"
    assert run(bench_toy(first, "--seed", "5"), capsys)[0] == 0
    second = tmp_path / "b"
    argv = ["bench", "toy", "--config", str(first / "resolved_config.json"), "--out", str(second), "--quiet"]
    assert run(argv, capsys)[0] == 0
    assert (first / "report.json").read_bytes() == (second / "report.json").read_bytes()


def test_flag_overrides_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("trials = 3\nsteps = 4\nn = [16]\nseed = 9\n")
    out = tmp_path / "o"
    argv = ["bench", "toy", "--config", str(cfg), "--steps", "6", "--out", str(out), "--quiet"]
    assert run(argv, capsys)[0] == 0
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["trials"] == 3 and resolved["steps"] == 6 and resolved["seed"] == 9
    assert resolved["resample"] == "residual"
