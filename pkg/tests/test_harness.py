import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from anneal_vqo import cli
from anneal_vqo.harness import (
    OUT_ENV,
    ConfigError,
    bench,
    fit_log_scaling,
    quartiles,
    run_command,
    scaling,
    variant_label,
)
from anneal_vqo.instances import save_ensemble


def test_quartiles_hand_checked():
    assert quartiles([4, 1, 3, 2]) == (1.0, 1.75, 2.5, 3.25, 4.0)
    assert quartiles([5, 3, 1, 4, 2]) == (1.0, 2.0, 3.0, 4.0, 5.0)
    assert quartiles([0.3]) == (0.3,) * 5
    assert quartiles([]) is None


def test_log_scaling_fit_against_polyfit():
    sizes = [8, 10, 12, 14]
    means = [0.9, 0.5, 0.3, 0.1]
    fit = fit_log_scaling(sizes, means)
    slope, intercept = np.polyfit(sizes, np.log10(means), 1)
    assert abs(fit["slope"] - slope) < 1e-12 and abs(fit["intercept"] - intercept) < 1e-12
    resid = np.log10(means) - (slope * np.array(sizes) + intercept)
    sxx = np.sum((np.array(sizes) - np.mean(sizes)) ** 2)
    assert abs(fit["stderr"] - np.sqrt(resid @ resid / 2 / sxx)) < 1e-12
    assert fit_log_scaling([8, 10], [0.5, 0.4]) is None


@pytest.fixture
def ens_dir(tmp_path, small_ensemble):
    return save_ensemble(small_ensemble, tmp_path / "ens")


def test_generate_command(tmp_path):
    out = tmp_path / "out"
    res = run_command("generate", {"n": 4, "count": 2, "seed": 3}, out)
    assert res["instances"] == 2
    assert sorted(p.name for p in (out / "ensemble").iterdir()) == [
        "ensemble.json", "instance_000.cnf", "instance_001.cnf",
    ]


def test_aqa_command_json(tmp_path, ens_dir):
    cfg = {"instance": str(ens_dir / "instance_000.cnf"), "tau": 0.5, "p": 25}
    res = run_command("aqa", cfg, tmp_path)
    data = json.loads((tmp_path / "aqa.json").read_text())
    assert data["t_a"] == 12.5 and data["degenerate"] is False
    assert 0 <= data["success_probability"] <= 1 and data == res
    res = run_command("aqa", {"ensemble": str(ens_dir), "index": 1, "tau": 0.6, "t_a": 25}, tmp_path)
    assert res["p"] == 42 and abs(res["t_a"] - 25.2) < 1e-12


def test_scan_command_single_cell(tmp_path, ens_dir):
    cfg = {"ensemble": str(ens_dir), "tau_grid": [0.5], "p_grid": [25]}
    run_command("scan", cfg, tmp_path)
    rows = list(csv.reader(open(tmp_path / "scan.csv")))
    assert rows[0] == ["tau\\p", "25"] and len(rows) == 2 and len(rows[1]) == 2
    aqa = run_command("aqa", {"ensemble": str(ens_dir), "tau": 0.5, "p": 25}, tmp_path / "a")
    assert float(rows[1][1]) == aqa["success_probability"]


def test_scan_grid_specs(tmp_path, ens_dir):
    cfg = {"ensemble": str(ens_dir), "tau_grid": {"start": 0.1, "stop": 0.3, "step": 0.1},
           "p_grid": {"start": 10, "stop": 30, "num": 3}}
    run_command("scan", cfg, tmp_path)
    rows = list(csv.reader(open(tmp_path / "scan.csv")))
    assert rows[0] == ["tau\\p", "10", "20", "30"]
    assert [r[0] for r in rows[1:]] == ["0.1", "0.2", "0.3"]


def test_trace_command(tmp_path, ens_dir):
    cfg = {"ensemble": str(ens_dir), "tau": 0.5, "p": 6, "spectrum_grid": [0.0, 0.5, 1.0]}
    run_command("trace", cfg, tmp_path)
    rows = list(csv.reader(open(tmp_path / "trace.csv")))
    assert rows[0][:3] == ["layer", "s", "overlap_E0"] and len(rows) == 7
    spec = list(csv.reader(open(tmp_path / "spectrum.csv")))
    assert spec[0] == ["s", "E0", "E1", "E2"] and len(spec) == 4


def test_qaoa_command(tmp_path, ens_dir):
    cfg = {"ensemble": str(ens_dir), "p": 3, "init": "random", "max_evaluations": 100}
    a = run_command("qaoa", cfg, tmp_path / "a", seed=4)
    b = run_command("qaoa", cfg, tmp_path / "b", seed=4)
    assert a == b and a["evaluations"] <= 100 and a["best_cost"] <= a["initial_cost"]
    assert (tmp_path / "a" / "qaoa.json").read_bytes() == (tmp_path / "b" / "qaoa.json").read_bytes()


def test_ehqo_command_records(tmp_path, ens_dir):
    cfg = {"ensemble": str(ens_dir), "n_steps": 10, "p": 25,
           "intermediate_budget": 60, "final_budget": 120}
    res = run_command("ehqo", cfg, tmp_path)
    data = json.loads((tmp_path / "ehqo.json").read_text())
    assert len(data["steps"]) == 10 == len(res["steps"])
    for step in data["steps"]:
        for key in ("initial_cost", "final_cost", "initial_overlap_E0", "initial_overlap_E1"):
            assert isinstance(step[key], float)
        assert step["final_cost"] <= step["initial_cost"]
    adaptive = run_command("ehqo", {**cfg, "n_steps": 3, "depth_range": [1, 5, 2]}, tmp_path / "ad")
    assert [s["p"] for s in adaptive["steps"]] == [1, 3, 5]


def test_config_errors(tmp_path, ens_dir):
    with pytest.raises(ConfigError):
        run_command("aqa", {"tau": 0.5}, tmp_path)
    with pytest.raises(ConfigError):
        run_command("aqa", {"instance": "missing.cnf", "tau": 0.5}, tmp_path)
    with pytest.raises(ConfigError):
        run_command("bench", {"ensemble": str(ens_dir), "variants": [{"kind": "qaoa_random",
                                                                     "max_evaluations": 0}]}, tmp_path)
    with pytest.raises(ConfigError):
        run_command("bench", {"ensemble": str(ens_dir), "variants": [{"kind": "magic"}]}, tmp_path)
    with pytest.raises(ConfigError):
        run_command("frobnicate", {}, tmp_path)
    with pytest.raises(ConfigError):
        run_command("qaoa", {"ensemble": str(ens_dir), "max_evaluations": -3}, tmp_path)


VARIANTS = [
    {"kind": "aqa", "tau": 0.5, "p": 25},
    {"kind": "qaoa_random", "p": 3, "max_evaluations": 80},
    {"kind": "qaoa_aqa_init", "tau": 0.5, "p": 3, "max_evaluations": 80},
    {"kind": "ehqo_fixed", "n_steps": 2, "p": 3, "intermediate_budget": 40, "final_budget": 60},
    {"kind": "ehqo_adaptive", "n_steps": 2, "depths": [1, 3], "intermediate_budget": 40,
     "final_budget": 60},
]


def test_bench_summary_structure(small_ensemble):
    summary = bench(small_ensemble.instances, VARIANTS, seed=1)
    assert len(summary.raw) == len(VARIANTS) * len(small_ensemble)
    for label in summary.labels:
        q = summary.quartiles[label]
        assert list(q) == sorted(q)
        assert summary.failures[label] == 0
        assert len(summary.success(label)) == len(small_ensemble)
    assert summary.labels[0] == "aqa(tau=0.5,p=25)"
    assert variant_label(VARIANTS[4]) == "ehqo_adaptive(N_s=2,p=1..3)"


def test_bench_single_instance_quartiles(small_ensemble):
    summary = bench(small_ensemble.instances[:1], VARIANTS[:2], seed=0)
    for label in summary.labels:
        q = summary.quartiles[label]
        assert len(set(q)) == 1 and q[0] == summary.raw[summary.labels.index(label)]["success_probability"]


def test_bench_records_failures(small_ensemble):
    bad = {"kind": "qaoa_random", "p": 2, "optimizer": "sgd"}
    summary = bench(small_ensemble.instances, [VARIANTS[0], bad], seed=0)
    label = variant_label(bad)
    assert summary.failures[label] == 3 and summary.quartiles[label] is None
    assert all("sgd" in r["error"] for r in summary.raw if r["variant"] == label)
    assert summary.failures[summary.labels[0]] == 0


def test_bench_byte_identical_across_jobs(tmp_path, ens_dir):
    cfg = {"ensemble": str(ens_dir), "variants": VARIANTS, "seed": 7}
    run_command("bench", cfg, tmp_path / "j1", jobs=1)
    run_command("bench", cfg, tmp_path / "j3", jobs=3)
    for name in ("bench_raw.csv", "bench_summary.json"):
        assert (tmp_path / "j1" / name).read_bytes() == (tmp_path / "j3" / name).read_bytes()


def test_bench_seed_changes_random_variants(tmp_path, ens_dir):
    cfg = {"ensemble": str(ens_dir), "variants": VARIANTS[1:2]}
    a = run_command("bench", cfg, tmp_path / "a", seed=1)
    b = run_command("bench", cfg, tmp_path / "b", seed=2)
    assert a["variants"] != b["variants"]


def test_scaling_single_size_has_no_fit(tmp_path, ens_dir):
    res = run_command("scaling", {"ensembles": {"5": str(ens_dir)}, "variants": VARIANTS[:1]}, tmp_path)
    label = variant_label(VARIANTS[0])
    assert res["fits"][label] is None and res["means"][label][0] > 0
    rows = list(csv.reader(open(tmp_path / "scaling.csv")))
    assert rows[0] == ["n", "variant", "mean_success", "count"] and len(rows) == 2


def test_scaling_generates_and_fits(tmp_path):
    cfg = {"sizes": [3, 4, 5], "instances_per_n": 2, "variants": VARIANTS[:1], "seed": 1}
    res = run_command("scaling", cfg, tmp_path)
    fit = res["fits"][variant_label(VARIANTS[0])]
    assert set(fit) == {"slope", "intercept", "stderr", "points"} and fit["points"] == 3
    assert (tmp_path / "ensembles" / "n4" / "ensemble.json").exists()
    report = scaling({3: [], 4: []}, VARIANTS[:1])
    assert report.fits[variant_label(VARIANTS[0])] is None


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_cli_main_success_and_relative_paths(tmp_path, ens_dir, capsys):
    cfg = _write(tmp_path, "aqa.json", {"ensemble": "ens", "tau": 0.5, "p": 25})
    code = cli.main(["aqa", "--config", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "1"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["command"] == "aqa"
    assert (tmp_path / "o" / "aqa.json").exists()


def test_cli_errors_are_json(tmp_path, capsys):
    assert cli.main(["aqa", "--config", str(tmp_path / "none.json")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and "not found" in err["message"]
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  oops")
    assert cli.main(["aqa", "--config", str(bad)]) == 2
    assert ":2:" in json.loads(capsys.readouterr().err)["message"]
    cnf = tmp_path / "broken.cnf"
    cnf.write_text("p cnf 2 1\n1 0\n")
    cfg = _write(tmp_path, "c.json", {"instance": "broken.cnf", "tau": 0.5, "p": 3})
    assert cli.main(["aqa", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParseError" and "broken.cnf:2:" in err["message"]


def test_cli_env_out_dir_and_seed_override(tmp_path, ens_dir, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "envout"))
    cfg = _write(tmp_path, "q.json", {"ensemble": "ens", "p": 2, "init": "random",
                                      "max_evaluations": 30, "seed": 1})
    assert cli.main(["qaoa", "--config", str(cfg), "--seed", "9", "--jobs", "1"]) == 0
    a = json.loads((tmp_path / "envout" / "qaoa.json").read_text())
    run_command("qaoa", json.loads(cfg.read_text()) | {"ensemble": str(ens_dir)}, tmp_path / "s9", seed=9)
    assert json.loads((tmp_path / "s9" / "qaoa.json").read_text()) == a


def test_console_script_entry_point(tmp_path, ens_dir):
    cfg = _write(tmp_path, "aqa.json", {"ensemble": "ens", "tau": 0.5, "p": 5})
    env = dict(os.environ, **{OUT_ENV: str(tmp_path / "viaenv")})
    proc = subprocess.run(
        [sys.executable, "-m", "anneal_vqo", "aqa", "--config", str(cfg), "--jobs", "1"],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "viaenv" / "aqa.json").exists()
    proc = subprocess.run([sys.executable, "-m", "anneal_vqo", "bogus", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode != 0
