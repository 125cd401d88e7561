import csv
import json

import pytest

from aklt_graphs.cli import EXIT_CONFIG, EXIT_OK, main, parse_grid, read_config_file


def _run(*argv):
    return main([str(a) for a in argv])


def test_grid_parsing():
    assert parse_grid("0:0.5:0.25") == pytest.approx([0.0, 0.25, 0.5])
    assert parse_grid("0.1,0.3") == [0.1, 0.3]


def test_config_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\nseed = 5\nl-const = 1.2\nL = 8\n")
    cfg = read_config_file(f)
    assert cfg["seed"] == "5" and cfg["l_const"] == "1.2" and cfg["L"] == "8"


def test_missing_seed_is_config_error(tmp_path):
    assert _run("sample", "--L", 4, "--out", tmp_path) == EXIT_CONFIG


def test_empty_grid_is_config_error(tmp_path):
    assert _run("percolate", "--seed", 1, "--L", 4, "--p-grid", "", "--out", tmp_path) == EXIT_CONFIG


def test_flags_override_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("seed = 5\nsweeps = 20\ninterval = 10\nwarmup = 5\nL = 4\n")
    out = tmp_path / "o"
    assert _run("sample", "--config", f, "--L", 6, "--out", out) == EXIT_OK
    assert (out / "samples_L6.csv").exists()


def test_sample_is_byte_identical(tmp_path):
    args = ["sample", "--seed", 3, "--L", 6, "--warmup", 10, "--sweeps", 40, "--interval", 10,
            "--chains", 2, "--dump-configs"]
    assert _run(*args, "--out", tmp_path / "a") == EXIT_OK
    assert _run(*args, "--out", tmp_path / "b") == EXIT_OK
    for name in ("samples_L6.csv", "configs_L6.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = list(csv.reader(open(tmp_path / "a" / "samples_L6.csv")))
    assert "n_vertices[count]" in rows[0]
    assert len(rows) == 1 + 2 * 4


def test_seed_changes_output(tmp_path):
    for s in (1, 2):
        _run("sample", "--seed", s, "--L", 6, "--warmup", 5, "--sweeps", 20, "--interval", 10,
             "--dump-configs", "--out", tmp_path / str(s))
    assert (tmp_path / "1" / "configs_L6.txt").read_bytes() != (tmp_path / "2" / "configs_L6.txt").read_bytes()


def test_stats_outputs(tmp_path):
    rc = _run("stats", "--seed", 1, "--L", "6,8,10", "--warmup", 20, "--sweeps", 60, "--interval", 10,
              "--out", tmp_path)
    assert rc == EXIT_OK
    for name in ("stats.csv", "extrapolation.csv", "largest_domain_fit.csv"):
        assert (tmp_path / name).exists()


def test_percolate_outputs(tmp_path):
    rc = _run("percolate", "--seed", 1, "--L", 8, "--warmup", 10, "--sweeps", 50, "--interval", 10,
              "--mode", "site", "--p-grid", "0:1:0.1", "--replicates", 2, "--out", tmp_path)
    assert rc == EXIT_OK
    rows = list(csv.DictReader(open(tmp_path / "percolation_curve.csv")))
    assert float(rows[0]["p_cluster"]) == 1.0
    assert (tmp_path / "percolation_threshold.csv").exists()


def test_reduce_outputs(tmp_path):
    args = ["reduce", "--seed", 2, "--L", 64, "--warmup", 50, "--sweeps", 20, "--interval", 10]
    assert _run(*args, "--out", tmp_path / "a") == EXIT_OK
    assert _run(*args, "--out", tmp_path / "b") == EXIT_OK
    a = (tmp_path / "a" / "reduce_reports.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "reduce_reports.jsonl").read_bytes()
    reports = [json.loads(line) for line in a.decode().splitlines()]
    assert len(reports) == 2
    for rep in reports:
        if rep["ok"]:
            assert rep["verified"] and rep["lambda_prime"] >= 2


def test_oracle_chain(tmp_path):
    assert _run("oracle", "--seed", 0, "--instance", "chain:4", "--out", tmp_path) == EXIT_OK
    rep = json.loads((tmp_path / "oracle_report.json").read_text())
    assert rep["ok"]
    assert rep["chain"]["p0"] == pytest.approx(1 / 84)
    assert rep["chain"]["all_same_prob"] == pytest.approx(1 / 42)


def test_oracle_bad_instance(tmp_path):
    assert _run("oracle", "--seed", 0, "--instance", "chain:x", "--out", tmp_path) == EXIT_CONFIG
