import os
from pathlib import Path

import numpy as np
import pytest
from scipy import sparse

from anneal_vqo.instances import generate_ensemble, load_ensemble, save_ensemble

ACCEPTANCE_SEED = 0
ACCEPTANCE_PER_N = 20
ACCEPTANCE_CACHE = Path(
    os.environ.get("ANNEAL_VQO_ACCEPTANCE_CACHE", Path(__file__).parent / "_acceptance_cache")
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def kron_site(op, i, n):
    """``op`` on qubit ``i`` (bit ``i`` of the basis index), identity elsewhere."""
    out = np.eye(1)
    for q in reversed(range(n)):
        out = np.kron(out, op if q == i else np.eye(2))
    return out


def dense_transverse(n):
    """Dense ``H_I = -sum_i sigma_x^i`` assembled from Kronecker products."""
    return -sum(kron_site(SX, i, n) for i in range(n))


def dense_interpolated(energies, n, s):
    return (1 - s) * dense_transverse(n) + s * np.diag(energies)


def sparse_transverse(n):
    out = sparse.csr_matrix((1 << n, 1 << n))
    for i in range(n):
        ops = [sparse.identity(2) if q != i else sparse.csr_matrix(SX) for q in reversed(range(n))]
        term = ops[0]
        for op in ops[1:]:
            term = sparse.kron(term, op, format="csr")
        out = out - term
    return out


def random_state(n, rng):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def violated_counts(instance):
    """Per-assignment violated-clause count by direct evaluation of every clause."""
    n = instance.n
    out = np.zeros(1 << n, dtype=np.int64)
    for z in range(1 << n):
        values = [((z >> v) & 1) == 0 for v in range(n)]
        for (va, na), (vb, nb) in instance.clauses:
            if not ((values[va] != na) or (values[vb] != nb)):
                out[z] += 1
    return out


@pytest.fixture(scope="session")
def hard8():
    """Hardest of ten unique-solution 8-variable candidates (seed 0)."""
    ens = generate_ensemble(8, 1, seed=0)
    return ens.instances[0], ens.metadata[0]


@pytest.fixture(scope="session")
def small_ensemble():
    return generate_ensemble(5, 3, seed=2)


_acceptance = {}


def acceptance_ensemble(n):
    """Default hardest-decile ensemble (seed 0, 20 instances), cached on disk and re-verified on load."""
    if n not in _acceptance:
        path = ACCEPTANCE_CACHE / f"n{n}_seed{ACCEPTANCE_SEED}_count{ACCEPTANCE_PER_N}"
        if (path / "ensemble.json").exists():
            ens = load_ensemble(path)
        else:
            ens = generate_ensemble(n, ACCEPTANCE_PER_N, seed=ACCEPTANCE_SEED)
            save_ensemble(ens, path)
        _acceptance[n] = ens
    return _acceptance[n]
