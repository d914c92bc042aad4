"""Run configurations, benchmarking, scaling study and result files.

Every command takes a plain dict (usually loaded from a JSON config) and an
output directory, writes CSV/JSON files there and returns a small summary
dict. Random draws come from ``SeedSequence(seed, spawn_key=(i, v))`` for
instance ``i`` and variant ``v``, so results do not depend on how jobs are
scheduled across processes.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import json
import logging
import os
from pathlib import Path

import numpy as np
from scipy import stats

from .algorithms import (
    AqaConfig,
    EhqoConfig,
    InitStrategy,
    adaptive_depths,
    aqa_scan,
    as_problem,
    overlap_trace,
    run_aqa,
    run_ehqo,
    run_qaoa,
)
from .hamiltonian import read_dimacs, two_sat_to_ising
from .instances import generate_ensemble, generate_hard_instance, load_ensemble, save_ensemble
from .optimize import Tolerances
from .spectra import spectrum_trace, write_spectrum_csv

log = logging.getLogger(__name__)

OUT_ENV = "ANNEAL_VQO_OUT"
QAOA_BUDGET = 8000
EHQO_INTERMEDIATE_BUDGET = 10_000
EHQO_FINAL_BUDGET = 50_000


class ConfigError(ValueError):
    pass


def default_out_dir():
    return Path(os.environ.get(OUT_ENV, "results"))


def default_jobs():
    return os.cpu_count() or 1


def _num(value):
    """Shortest round-tripping text for floats; plain text otherwise."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_json(data, path):
    Path(path).write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_csv(header, rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) for v in row])


# -- config helpers ---------------------------------------------------------


def _require(config, key):
    if key not in config:
        raise ConfigError(f"missing required config key {key!r}")
    return config[key]


def _positive_int(config, key, default):
    value = config.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{key} must be a positive integer, got {value!r}")
    return value


def _resolve(path, base_dir):
    path = Path(path)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    if not path.exists():
        raise ConfigError(f"referenced path does not exist: {path}")
    return path


def _grid(spec, cast=float):
    if isinstance(spec, dict):
        if "step" in spec:
            values = np.arange(spec["start"], spec["stop"] + 0.5 * spec["step"], spec["step"])
        else:
            values = np.linspace(spec["start"], spec["stop"], spec["num"])
        return [cast(round(float(v), 12)) if cast is float else cast(round(v)) for v in values]
    return [cast(v) for v in spec]


def load_instance(config, base_dir=None, seed=0):
    """Instance from ``instance`` (CNF path), ``ensemble`` + ``index`` or ``generate``."""
    if "instance" in config:
        return read_dimacs(_resolve(config["instance"], base_dir))
    if "ensemble" in config:
        ens = load_ensemble(_resolve(config["ensemble"], base_dir))
        index = config.get("index", 0)
        if not 0 <= index < len(ens):
            raise ConfigError(f"index {index} out of range for ensemble of {len(ens)}")
        return ens.instances[index]
    if "generate" in config:
        gen = dict(config["generate"])
        inst, _ = generate_hard_instance(
            gen["n"], gen.get("clause_count"), gen.get("seed", seed), gen.get("gap_threshold")
        )
        return inst
    raise ConfigError("config needs one of 'instance', 'ensemble' or 'generate'")


def _tolerances(config):
    tol = config.get("tolerances", {})
    return Tolerances(**tol)


def _init_strategy(spec, default_kind="epsilon"):
    if spec is None:
        return InitStrategy(default_kind)
    if isinstance(spec, str):
        return InitStrategy(spec)
    return InitStrategy(**spec)


# -- variants ---------------------------------------------------------------

VARIANT_KINDS = ("aqa", "qaoa_random", "qaoa_aqa_init", "ehqo_fixed", "ehqo_adaptive")


def variant_label(spec):
    if "name" in spec:
        return spec["name"]
    kind = spec["kind"]
    if kind == "aqa":
        return f"aqa(tau={spec.get('tau', 0.5)},p={spec.get('p', 25)})"
    if kind == "qaoa_random":
        return f"qaoa_random(p={spec.get('p', 25)})"
    if kind == "qaoa_aqa_init":
        return f"qaoa_aqa_init(tau={spec.get('tau', 0.5)},p={spec.get('p', 25)})"
    if kind == "ehqo_fixed":
        return f"ehqo_fixed(N_s={spec.get('n_steps', 10)},p={spec.get('p', 25)})"
    depths = _depths(spec)
    return f"ehqo_adaptive(N_s={spec.get('n_steps', len(depths))},p={depths[0]}..{depths[-1]})"


def _depths(spec):
    if "depths" in spec:
        return [int(d) for d in spec["depths"]]
    if "depth_range" in spec:
        return adaptive_depths(*spec["depth_range"])
    raise ConfigError("ehqo_adaptive needs 'depths' or 'depth_range'")


def check_variant(spec):
    if not isinstance(spec, dict) or spec.get("kind") not in VARIANT_KINDS:
        raise ConfigError(f"variant must be a dict with kind in {VARIANT_KINDS}, got {spec!r}")
    for key in ("max_evaluations", "intermediate_budget", "final_budget"):
        if key in spec:
            _positive_int(spec, key, None)
    if spec["kind"] == "ehqo_adaptive":
        _depths(spec)
    return spec


def ehqo_config(spec, optimizer="bfgs", record_overlaps=True, record_trace=True):
    kind = spec.get("kind", "ehqo_fixed")
    n_steps = spec.get("n_steps", 10)
    if kind == "ehqo_adaptive" or "depths" in spec or "depth_range" in spec:
        depths = _depths(spec)
        n_steps = spec.get("n_steps", len(depths))
    else:
        depths = spec.get("p", 25)
    init = _init_strategy(spec.get("init"))
    if init.kind == "aqa" and init.p_seed is None:
        init = InitStrategy("aqa", tau=init.tau, p_seed=spec.get("p", 25), schedule=init.schedule)
    return EhqoConfig(
        n_steps=n_steps,
        depths=depths,
        optimizer=spec.get("optimizer", optimizer),
        intermediate_budget=spec.get("intermediate_budget", EHQO_INTERMEDIATE_BUDGET),
        final_budget=spec.get("final_budget", EHQO_FINAL_BUDGET),
        init=init,
        tolerances=_tolerances(spec),
        record_overlaps=record_overlaps,
        record_trace=record_trace,
    )


def run_variant(problem, spec, rng, optimizer="bfgs"):
    """Run one variant on one problem; returns success probability and effort."""
    kind = spec["kind"]
    if kind == "aqa":
        res = run_aqa(problem, AqaConfig(spec.get("tau", 0.5), spec.get("p", 25), spec.get("schedule", "linear")))
        return {"success_probability": res.success_probability, "evaluations": 0, "termination": "none"}
    if kind in ("qaoa_random", "qaoa_aqa_init"):
        p = spec.get("p", 25)
        if kind == "qaoa_random":
            init = InitStrategy("random").params(p, rng)
        else:
            init = InitStrategy("aqa", tau=spec.get("tau", 0.5), schedule=spec.get("schedule", "linear")).params(p)
        res = run_qaoa(
            problem,
            init,
            spec.get("optimizer", optimizer),
            spec.get("max_evaluations", QAOA_BUDGET),
            _tolerances(spec),
            record_trace=False,
        )
        return {
            "success_probability": res.success_probability,
            "evaluations": res.run.evaluations_used,
            "termination": res.run.termination,
        }
    cfg = ehqo_config(spec, optimizer, record_overlaps=False, record_trace=False)
    res = run_ehqo(problem, cfg, rng)
    return {
        "success_probability": res.success_probability,
        "evaluations": res.evaluations,
        "termination": res.steps[-1].run.termination,
    }


def _job(args):
    i, v, instance, spec, seed, optimizer = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, v)))
    try:
        out = run_variant(as_problem(instance), spec, rng, optimizer)
        out["error"] = ""
    except Exception as exc:  # noqa: BLE001 - reported per job
        out = {"success_probability": float("nan"), "evaluations": 0, "termination": "error",
               "error": f"{type(exc).__name__}: {exc}"}
    return i, v, out


def _run_jobs(tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks, chunksize=1))
    else:
        results = [_job(t) for t in tasks]
    return sorted(results, key=lambda r: (r[0], r[1]))


def quartiles(values):
    """``(min, Q1, median, Q3, max)`` with linear interpolation between order statistics."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return None
    return tuple(float(q) for q in np.percentile(values, [0, 25, 50, 75, 100]))


@dataclass
class BenchmarkSummary:
    labels: list
    raw: list
    quartiles: dict = field(default_factory=dict)
    means: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    evaluations: dict = field(default_factory=dict)

    def success(self, label):
        return np.array([r["success_probability"] for r in self.raw
                         if r["variant"] == label and not r["error"]])

    def median(self, label):
        return self.quartiles[label][2]


def bench(instances, variants, seed=0, jobs=1, optimizer="bfgs"):
    """Run every variant on every instance and summarize success probabilities."""
    variants = [check_variant(v) for v in variants]
    labels = [variant_label(v) for v in variants]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"variant labels must be unique: {labels}")
    tasks = [
        (i, v, inst, spec, seed, optimizer)
        for i, inst in enumerate(instances)
        for v, spec in enumerate(variants)
    ]
    raw = []
    for i, v, out in _run_jobs(tasks, jobs):
        raw.append({"instance": i, "variant": labels[v], **out})
    summary = BenchmarkSummary(labels, raw)
    for label in labels:
        rows = [r for r in raw if r["variant"] == label]
        ok = [r["success_probability"] for r in rows if not r["error"]]
        summary.quartiles[label] = quartiles(ok)
        summary.means[label] = float(np.mean(ok)) if ok else None
        summary.failures[label] = len(rows) - len(ok)
        summary.evaluations[label] = float(np.mean([r["evaluations"] for r in rows])) if rows else 0.0
    return summary


def _summary_dict(summary):
    return {
        label: {
            "quartiles": dict(zip(("min", "q1", "median", "q3", "max"), summary.quartiles[label]))
            if summary.quartiles[label] else None,
            "mean": summary.means[label],
            "failures": summary.failures[label],
            "mean_evaluations": summary.evaluations[label],
        }
        for label in summary.labels
    }


def _write_raw(summary, path):
    rows = [
        (r["instance"], r["variant"], r["success_probability"], r["evaluations"], r["termination"], r["error"])
        for r in summary.raw
    ]
    write_csv(["instance", "variant", "success_probability", "evaluations", "termination", "error"], rows, path)


@dataclass
class ScalingReport:
    sizes: list
    labels: list
    means: dict
    counts: dict
    fits: dict


def fit_log_scaling(sizes, means):
    """Least-squares fit of ``log10(mean)`` against ``n``; None with fewer than 3 sizes."""
    pts = [(n, m) for n, m in zip(sizes, means) if m is not None and m > 0]
    if len(pts) < 3:
        return None
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.log10([p[1] for p in pts])
    res = stats.linregress(x, y)
    return {"slope": float(res.slope), "intercept": float(res.intercept), "stderr": float(res.stderr),
            "points": len(pts)}


def scaling(ensembles, variants, seed=0, jobs=1, optimizer="bfgs"):
    """Mean success per size and variant plus a log-linear fit per variant.

    ``ensembles`` maps the variable count to a list of instances.
    """
    sizes = sorted(ensembles)
    labels = [variant_label(check_variant(v)) for v in variants]
    means = {label: [] for label in labels}
    counts = {label: [] for label in labels}
    for n in sizes:
        summary = bench(ensembles[n], variants, seed=seed + n, jobs=jobs, optimizer=optimizer)
        for label in labels:
            means[label].append(summary.means[label])
            counts[label].append(int(summary.success(label).size))
    fits = {label: fit_log_scaling(sizes, means[label]) for label in labels}
    return ScalingReport(sizes, labels, means, counts, fits)


# -- commands ---------------------------------------------------------------


def cmd_generate(config, out, seed=0, jobs=1, base_dir=None):
    n = _positive_int(config, "n", None)
    count = _positive_int(config, "count", 1)
    ens = generate_ensemble(
        n,
        count,
        clause_count=config.get("clause_count"),
        seed=config.get("seed", seed),
        gap_threshold=config.get("gap_threshold"),
        hardest_fraction=config.get("hardest_fraction", 0.1),
        jobs=jobs,
    )
    path = save_ensemble(ens, out / config.get("output", "ensemble"))
    return {"ensemble": str(path), "instances": len(ens)}


def cmd_aqa(config, out, seed=0, jobs=1, base_dir=None):
    inst = load_instance(config, base_dir, seed)
    tau = float(_require(config, "tau"))
    schedule = config.get("schedule", "linear")
    if "p" in config:
        cfg = AqaConfig(tau, _positive_int(config, "p", None), schedule)
    else:
        cfg = AqaConfig.from_total_time(float(_require(config, "t_a")), tau, schedule)
    problem = as_problem(inst)
    res = run_aqa(problem, cfg)
    result = {
        "n": problem.n,
        "tau": cfg.tau,
        "p": cfg.p,
        "t_a": res.t_a,
        "schedule": schedule,
        "success_probability": res.success_probability,
        "degenerate": res.degenerate,
        "ground_states": problem.ground_states.tolist(),
    }
    write_json(result, out / "aqa.json")
    return result


def cmd_scan(config, out, seed=0, jobs=1, base_dir=None):
    inst = load_instance(config, base_dir, seed)
    taus = _grid(_require(config, "tau_grid"), float)
    ps = _grid(_require(config, "p_grid"), int)
    res = aqa_scan(inst, taus, ps, config.get("schedule", "linear"))
    rows = [[tau] + [float(v) for v in res.success[a]] for a, tau in enumerate(res.taus)]
    write_csv(["tau\\p"] + [int(p) for p in res.ps], rows, out / "scan.csv")
    if res.errors:
        write_json({f"{a},{b}": msg for (a, b), msg in sorted(res.errors.items())}, out / "scan_errors.json")
    return {"cells": int(res.success.size), "failed": len(res.errors)}


def cmd_trace(config, out, seed=0, jobs=1, base_dir=None):
    inst = load_instance(config, base_dir, seed)
    tau = float(_require(config, "tau"))
    k = _positive_int(config, "levels", 3)
    if "p" in config:
        cfg = AqaConfig(tau, _positive_int(config, "p", None))
    else:
        cfg = AqaConfig.from_total_time(float(config.get("t_a", 25.0)), tau)
    trace = overlap_trace(inst, cfg, k)
    header = ["layer", "s"] + [f"overlap_E{m}" for m in range(k)] + ["overlap_sum", "energy"]
    rows = [[r.layer, r.s, *r.overlaps, sum(r.overlaps), r.energy] for r in trace.records]
    write_csv(header, rows, out / "trace.csv")
    if "spectrum_grid" in config:
        grid = _grid(config["spectrum_grid"], float)
        write_spectrum_csv(spectrum_trace(two_sat_to_ising(inst), grid, k), out / "spectrum.csv")
    return {"tau": cfg.tau, "p": cfg.p, "t_a": cfg.t_a, "records": len(trace.records)}


def cmd_qaoa(config, out, seed=0, jobs=1, base_dir=None):
    inst = load_instance(config, base_dir, seed)
    p = _positive_int(config, "p", 25)
    init_spec = config.get("init", "aqa")
    strategy = _init_strategy({"kind": init_spec} if isinstance(init_spec, str) else init_spec)
    if strategy.kind == "aqa" and "tau" in config:
        strategy = InitStrategy("aqa", tau=float(config["tau"]))
    rng = np.random.default_rng(np.random.SeedSequence(config.get("seed", seed)))
    init = strategy.params(p, rng)
    res = run_qaoa(
        inst,
        init,
        config.get("optimizer", "bfgs"),
        _positive_int(config, "max_evaluations", QAOA_BUDGET),
        _tolerances(config),
    )
    result = {
        "p": p,
        "init": strategy.kind,
        "optimizer": config.get("optimizer", "bfgs"),
        "initial_cost": res.run.initial_cost,
        "best_cost": res.run.best_cost,
        "initial_success_probability": res.initial_success_probability,
        "success_probability": res.success_probability,
        "evaluations": res.run.evaluations_used,
        "termination": res.run.termination,
        "degenerate": res.degenerate,
        "beta": res.params.beta,
        "gamma": res.params.gamma,
    }
    write_json(result, out / "qaoa.json")
    return result


def cmd_ehqo(config, out, seed=0, jobs=1, base_dir=None):
    inst = load_instance(config, base_dir, seed)
    spec = dict(config)
    spec.setdefault("kind", "ehqo_adaptive" if ("depths" in spec or "depth_range" in spec) else "ehqo_fixed")
    cfg = ehqo_config(spec, config.get("optimizer", "bfgs"))
    rng = np.random.default_rng(np.random.SeedSequence(config.get("seed", seed)))
    res = run_ehqo(inst, cfg, rng)
    steps = []
    for st in res.steps:
        ov = st.initial_overlaps or (None, None)
        steps.append({
            "step": st.step,
            "s": st.s,
            "p": st.p,
            "initial_cost": st.initial_cost,
            "final_cost": st.final_cost,
            "initial_overlap_E0": ov[0],
            "initial_overlap_E1": ov[1],
            "final_ground_overlap": st.final_ground_overlap,
            "success_probability": st.success_probability,
            "evaluations": st.run.evaluations_used,
            "termination": st.run.termination,
        })
    result = {
        "n_steps": cfg.n_steps,
        "depths": cfg.depths,
        "init": cfg.init.kind,
        "optimizer": cfg.optimizer,
        "success_probability": res.success_probability,
        "evaluations": res.evaluations,
        "degenerate": res.degenerate,
        "steps": steps,
    }
    write_json(result, out / "ehqo.json")
    return result


def _variants(config):
    variants = _require(config, "variants")
    if not isinstance(variants, list) or not variants:
        raise ConfigError("variants must be a nonempty list")
    return [check_variant(v) for v in variants]


def cmd_bench(config, out, seed=0, jobs=1, base_dir=None):
    ens = load_ensemble(_resolve(_require(config, "ensemble"), base_dir))
    variants = _variants(config)
    summary = bench(ens.instances, variants, seed=config.get("seed", seed), jobs=jobs,
                    optimizer=config.get("optimizer", "bfgs"))
    _write_raw(summary, out / "bench_raw.csv")
    data = {
        "ensemble_size": len(ens),
        "n": ens.n,
        "seed": config.get("seed", seed),
        "variants": _summary_dict(summary),
    }
    write_json(data, out / "bench_summary.json")
    return data


def cmd_scaling(config, out, seed=0, jobs=1, base_dir=None):
    variants = _variants(config)
    seed = config.get("seed", seed)
    ensembles = {}
    if "ensembles" in config:
        for n, path in config["ensembles"].items():
            ensembles[int(n)] = load_ensemble(_resolve(path, base_dir)).instances
    else:
        per_n = _positive_int(config, "instances_per_n", 20)
        for n in _require(config, "sizes"):
            ens = generate_ensemble(int(n), per_n, clause_count=config.get("clause_count"), seed=seed,
                                    hardest_fraction=config.get("hardest_fraction", 0.1), jobs=jobs)
            save_ensemble(ens, out / "ensembles" / f"n{int(n)}")
            ensembles[int(n)] = ens.instances
    report = scaling(ensembles, variants, seed=seed, jobs=jobs, optimizer=config.get("optimizer", "bfgs"))
    rows = []
    for label in report.labels:
        for n, mean, count in zip(report.sizes, report.means[label], report.counts[label]):
            rows.append([n, label, mean, count])
    write_csv(["n", "variant", "mean_success", "count"], rows, out / "scaling.csv")
    data = {
        "sizes": report.sizes,
        "means": report.means,
        "fits": report.fits,
    }
    write_json(data, out / "scaling.json")
    return data


COMMANDS = {
    "generate": cmd_generate,
    "aqa": cmd_aqa,
    "scan": cmd_scan,
    "trace": cmd_trace,
    "qaoa": cmd_qaoa,
    "ehqo": cmd_ehqo,
    "bench": cmd_bench,
    "scaling": cmd_scaling,
}


def run_command(command, config, out=None, seed=None, jobs=1, base_dir=None):
    """Dispatch ``command`` with ``config``; CLI ``--seed`` overrides the config seed."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    config = dict(config)
    if seed is not None:
        config["seed"] = seed
    out = Path(out) if out is not None else default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    jobs = _positive_int({"jobs": jobs}, "jobs", 1)
    result = COMMANDS[command](config, out, seed=config.get("seed", 0), jobs=jobs, base_dir=base_dir)
    return _jsonable(result)
