"""Random unique-solution 2-SAT ensembles with a small-gap hardness filter.

On disk an ensemble is a directory holding one DIMACS file per instance
(``instance_000.cnf`` ...) and an ``ensemble.json`` sidecar with the
generator settings and, per instance, its seed, unique solution index and
minimum-gap data.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import json
import math
from pathlib import Path

import numpy as np

from ._validation import BRUTE_FORCE_MAX, DIAGNOSTIC_MAX, check_qubits
from .exceptions import GenerationError, InvalidInstanceError, ParseError
from .hamiltonian import TwoSatInstance, format_dimacs, parse_dimacs, two_sat_to_ising
from .spectra import locate_minimum_gap

SIDECAR = "ensemble.json"
DEFAULT_HARDEST_FRACTION = 0.1


def count_satisfying(instance):
    """Exhaustive count of satisfying assignments: ``(count, first index or None)``.

    Works on the clauses directly (literal ``x_v`` is true when bit ``v`` is
    0) and does not go through the Ising encoding.
    """
    n = check_qubits(instance.n, BRUTE_FORCE_MAX, "variable count")
    z = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(z.size, dtype=bool)
    for (va, na), (vb, nb) in instance.clauses:
        lit_a = (((z >> va) & 1) == 0) != na
        lit_b = (((z >> vb) & 1) == 0) != nb
        ok &= lit_a | lit_b
    hits = np.flatnonzero(ok)
    return int(hits.size), (int(hits[0]) if hits.size else None)


def _canonical(clause):
    return tuple(sorted(clause))


def sample_clauses(n, clause_count, rng):
    """``clause_count`` distinct clauses over distinct variable pairs."""
    max_clauses = 2 * n * (n - 1)
    if clause_count > max_clauses:
        raise InvalidInstanceError(f"only {max_clauses} distinct clauses exist for n={n}")
    seen = set()
    clauses = []
    while len(clauses) < clause_count:
        a, b = rng.choice(n, size=2, replace=False)
        na, nb = rng.integers(0, 2, size=2)
        clause = ((int(a), bool(na)), (int(b), bool(nb)))
        key = _canonical(clause)
        if key in seen:
            continue
        seen.add(key)
        clauses.append(clause)
    return tuple(clauses)


def default_clause_count(n):
    """``3n``, capped one below the number of distinct clauses (all of them are unsatisfiable)."""
    return min(3 * n, 2 * n * (n - 1) - 1)


def generate_hard_instance(n, clause_count=None, seed=0, gap_threshold=None, max_attempts=200_000):
    """Rejection-sample until the formula has exactly one satisfying assignment.

    With ``gap_threshold`` set (and ``n`` within the diagnostic cap) the
    minimum gap of the annealing Hamiltonian must also not exceed it.
    Returns ``(instance, metadata)``.
    """
    if n < 2:
        raise ValueError("need at least two variables")
    clause_count = default_clause_count(n) if clause_count is None else int(clause_count)
    if clause_count < n:
        raise ValueError(f"clause_count must be >= n, got {clause_count}")
    if gap_threshold is not None and n > DIAGNOSTIC_MAX:
        raise ValueError(f"gap filter needs n <= {DIAGNOSTIC_MAX}")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        instance = TwoSatInstance(n, sample_clauses(n, clause_count, rng))
        count, solution = count_satisfying(instance)
        if count != 1:
            continue
        meta = {"seed": seed, "solution": solution, "clause_count": clause_count, "attempts": attempt}
        if n <= DIAGNOSTIC_MAX:
            gap_s, gap = locate_minimum_gap(two_sat_to_ising(instance))
            meta["min_gap"], meta["gap_s"] = gap, gap_s
            if gap_threshold is not None and gap > gap_threshold:
                continue
        else:
            meta["min_gap"], meta["gap_s"] = None, None
        return instance, meta
    raise GenerationError("no unique-solution instance found", max_attempts)


@dataclass
class InstanceEnsemble:
    n: int
    instances: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    metadata: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)


def candidate_seed(seed, n, index):
    """Deterministic per-candidate seed derived from the ensemble seed."""
    return int(np.random.SeedSequence([int(seed), int(n), int(index)]).generate_state(1)[0])


def _generate_one(args):
    n, clause_count, seed, gap_threshold = args
    return generate_hard_instance(n, clause_count, seed, gap_threshold)


def generate_ensemble(
    n,
    count,
    clause_count=None,
    seed=0,
    gap_threshold=None,
    hardest_fraction=DEFAULT_HARDEST_FRACTION,
    jobs=1,
):
    """Unique-solution ensemble; by default the hardest ``hardest_fraction`` of candidates.

    Without ``gap_threshold``, ``ceil(count / hardest_fraction)`` candidates
    are drawn and the ``count`` with the smallest minimum gap are kept, in
    candidate order. Pass ``hardest_fraction=None`` to keep every candidate.
    """
    clause_count = default_clause_count(n) if clause_count is None else int(clause_count)
    select = gap_threshold is None and hardest_fraction is not None and n <= DIAGNOSTIC_MAX
    n_candidates = math.ceil(count / hardest_fraction - 1e-9) if select else count
    tasks = [(n, clause_count, candidate_seed(seed, n, i), gap_threshold) for i in range(n_candidates)]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_generate_one, tasks))
    else:
        results = [_generate_one(t) for t in tasks]
    if select:
        order = sorted(range(len(results)), key=lambda i: (results[i][1]["min_gap"], i))
        keep = sorted(order[:count])
        results = [results[i] for i in keep]
    settings = {
        "n": n,
        "count": count,
        "clause_count": clause_count,
        "seed": seed,
        "gap_threshold": gap_threshold,
        "hardest_fraction": hardest_fraction if select else None,
        "candidates": n_candidates,
    }
    return InstanceEnsemble(
        n=n,
        instances=[inst for inst, _ in results],
        seeds=[meta["seed"] for _, meta in results],
        metadata=[meta for _, meta in results],
        settings=settings,
    )


def save_ensemble(ensemble, path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    entries = []
    for k, (inst, meta) in enumerate(zip(ensemble.instances, ensemble.metadata)):
        name = f"instance_{k:03d}.cnf"
        (path / name).write_text(format_dimacs(inst, comments=[f"seed {meta.get('seed')}"]))
        entries.append({"file": name, **meta})
    sidecar = {"n": ensemble.n, "settings": ensemble.settings, "instances": entries}
    (path / SIDECAR).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def load_ensemble(path, verify=True):
    """Read an ensemble directory, re-checking that each instance has one solution."""
    path = Path(path)
    sidecar_path = path / SIDECAR
    try:
        sidecar = json.loads(sidecar_path.read_text())
    except FileNotFoundError:
        raise ParseError("missing ensemble sidecar", path=str(sidecar_path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, str(sidecar_path)) from None
    instances, seeds, metadata = [], [], []
    for entry in sidecar.get("instances", []):
        entry = dict(entry)
        file = path / entry.pop("file")
        try:
            text = file.read_text()
        except FileNotFoundError:
            raise ParseError("instance file missing", path=str(file)) from None
        try:
            inst = parse_dimacs(text, path=str(file))
        except InvalidInstanceError as exc:
            raise ParseError(str(exc), path=str(file)) from None
        if inst.n != sidecar["n"]:
            raise ParseError(f"instance has {inst.n} variables, ensemble says {sidecar['n']}", path=str(file))
        if verify:
            count, solution = count_satisfying(inst)
            if count != 1:
                raise ParseError(f"instance has {count} satisfying assignments, expected 1", path=str(file))
            if entry.get("solution") is not None and entry["solution"] != solution:
                raise ParseError("recorded solution does not satisfy the instance", path=str(file))
        instances.append(inst)
        seeds.append(entry.get("seed"))
        metadata.append(entry)
    return InstanceEnsemble(sidecar["n"], instances, seeds, metadata, sidecar.get("settings", {}))
