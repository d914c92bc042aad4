"""Low-lying spectrum of the interpolated Hamiltonian ``H(s) = (1-s) H_I + s H_P``.

Eigenpairs come from ARPACK's Lanczos iteration driven by a matrix-free
application of ``H(s)``; the 2**n x 2**n matrix is never stored except for
tiny dimensions where ARPACK cannot be used.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from . import _kernels
from ._validation import DIAGNOSTIC_MAX, check_qubits, check_unit_interval
from .hamiltonian import IsingModel, diagonal_energies
from .statevector import StateVector

EIGSH_TOL = 1e-12
LEVEL_TOL = 1e-8


@dataclass
class Spectrum:
    s: float
    eigenvalues: np.ndarray
    eigenvectors: list

    @property
    def k(self):
        return len(self.eigenvalues)


def _energies_of(model):
    if isinstance(model, IsingModel):
        check_qubits(model.n, DIAGNOSTIC_MAX, "diagnostic qubit count")
        return model.n, diagonal_energies(model)
    energies = np.ascontiguousarray(model, dtype=np.float64)
    n = energies.size.bit_length() - 1
    check_qubits(n, DIAGNOSTIC_MAX, "diagnostic qubit count")
    return n, energies


def interpolated_operator(n, energies, s):
    dim = 1 << n
    wx, wp = 1.0 - s, s

    def matvec(x):
        x = np.ascontiguousarray(np.ravel(x), dtype=np.float64)
        return _kernels.apply_interpolated(x, n, energies, wx, wp, np.empty(dim))

    return LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)


def _eigenpairs(n, energies, s, k):
    """Lowest ``k`` eigenpairs (values ascending, vectors as columns)."""
    dim = 1 << n
    op = interpolated_operator(n, energies, s)
    if k >= dim - 1 or dim <= 32:
        dense = np.column_stack([op.matvec(col) for col in np.eye(dim)])
        vals, vecs = np.linalg.eigh(dense)
        return vals[:k], vecs[:, :k]
    v0 = np.random.default_rng(12345).standard_normal(dim)
    ncv = min(dim, max(2 * k + 1, 24))
    vals, vecs = eigsh(op, k=k, which="SA", tol=EIGSH_TOL, v0=v0, ncv=ncv)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def lowest_eigenstates(model, s, k=3):
    """Exact lowest ``k`` eigenpairs of ``(1-s) H_I + s H_P``.

    ``model`` is an IsingModel or a diagonal energy table. Raises
    CapacityError beyond the diagnostic cap of 14 qubits.
    """
    s = check_unit_interval(s)
    n, energies = _energies_of(model)
    dim = 1 << n
    if not 1 <= k <= dim:
        raise ValueError(f"k must lie in 1..{dim}, got {k}")
    if s == 1.0:
        # diagonal operator: Lanczos stalls on its few distinct levels
        order = np.argsort(energies, kind="stable")[:k]
        states = [StateVector._wrap(_unit(dim, z), n) for z in order]
        return Spectrum(s, energies[order].copy(), states)
    if s == 0.0:
        # eigenvectors of H_I are Hadamard-transformed basis states
        order = np.argsort(_popcounts(n), kind="stable")[:k]
        states = [
            StateVector._wrap(_walsh_hadamard(_unit(dim, w), n), n) for w in order
        ]
        return Spectrum(s, -n + 2.0 * _popcounts(n)[order], states)
    vals, vecs = _eigenpairs(n, energies, s, k)
    states = [StateVector.from_unnormalized(vecs[:, m]) for m in range(k)]
    return Spectrum(s, np.asarray(vals), states)


def _unit(dim, z):
    v = np.zeros(dim, dtype=np.complex128)
    v[z] = 1.0
    return v


def _popcounts(n):
    z = np.arange(1 << n, dtype=np.int64)
    return np.array([bin(v).count("1") for v in z.tolist()], dtype=np.int64)


def _lowest_two(n, energies, s):
    if s == 1.0:
        return np.partition(energies, 1)[:2]
    if s == 0.0:
        return np.array([-n, -n + 2.0])
    return _eigenpairs(n, energies, s, 2)[0]


def minimum_gap(model, grid):
    """Grid point minimizing ``E_1(s) - E_0(s)`` and that gap.

    ``E_1`` counts multiplicity, so degenerate ground states give gap 0.
    Ties resolve toward the smaller ``s``.
    """
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("empty s grid")
    if np.any(grid < 0) or np.any(grid > 1) or np.any(np.diff(grid) < 0):
        raise ValueError("grid must be nondecreasing within [0, 1]")
    n, energies = _energies_of(model)
    gaps = np.array([np.diff(_lowest_two(n, energies, float(s)))[0] for s in grid])
    best = int(np.argmin(gaps))
    return float(grid[best]), float(gaps[best])


def locate_minimum_gap(model, coarse=26, fine=21):
    """Coarse scan over [0, 1] followed by a finer scan around the best point."""
    s0, _ = minimum_gap(model, np.linspace(0.0, 1.0, coarse))
    width = 1.0 / (coarse - 1)
    lo, hi = max(0.0, s0 - width), min(1.0, s0 + width)
    return minimum_gap(model, np.linspace(lo, hi, fine))


def _group_levels(vals, tol=LEVEL_TOL):
    """Start index of each run of (near-)equal eigenvalues."""
    starts = [0]
    for m in range(1, len(vals)):
        if vals[m] - vals[starts[-1]] > tol * max(1.0, abs(vals[m])):
            starts.append(m)
    return starts


def _walsh_hadamard(amplitudes, n):
    out = amplitudes.reshape((2,) * n).astype(np.complex128)
    r = 2 ** -0.5
    for axis in range(n):
        a = np.take(out, 0, axis=axis)
        b = np.take(out, 1, axis=axis)
        out = np.stack([(a + b) * r, (a - b) * r], axis=axis)
    return out.reshape(-1)


def level_overlaps(model, s, state, k=3):
    """Energies of the lowest ``k`` distinct levels of H(s) and the state's weight in each.

    Weights of degenerate eigenvectors are pooled per level, so the result
    does not depend on the basis chosen inside a degenerate subspace.
    """
    s = check_unit_interval(s)
    n, energies = _energies_of(model)
    psi = state.amplitudes
    if s == 1.0:
        levels = np.unique(energies)
        probs = np.abs(psi) ** 2
        out_e = levels[:k]
        out_w = np.array([probs[np.abs(energies - e) <= LEVEL_TOL].sum() for e in out_e])
        return out_e, out_w
    if s == 0.0:
        counts = _popcounts(n)
        probs = np.abs(_walsh_hadamard(psi, n)) ** 2
        m = np.arange(min(k, n + 1))
        return -n + 2.0 * m, np.array([probs[counts == i].sum() for i in m])
    dim = 1 << n
    want = min(dim, k + 4)
    while True:
        vals, vecs = _eigenpairs(n, energies, s, want)
        starts = _group_levels(vals)
        # the k-th level is complete only if a later level was seen after it
        if len(starts) > k or want >= dim:
            break
        want = min(dim, 2 * want)
    bounds = starts[: k + 1] if len(starts) > k else starts + [len(vals)]
    weights = np.abs(vecs.T @ psi) ** 2
    out_e = np.array([vals[a] for a in bounds[:-1]])
    out_w = np.array([weights[a:b].sum() for a, b in zip(bounds[:-1], bounds[1:])])
    return out_e, out_w


def spectrum_trace(model, grid, k=3):
    """Rows ``(s, E_0 .. E_{k-1})`` for each grid point."""
    rows = []
    for s in grid:
        spec = lowest_eigenstates(model, float(s), k)
        rows.append([float(s)] + [float(e) for e in spec.eigenvalues])
    return rows


def write_spectrum_csv(rows, path):
    k = len(rows[0]) - 1 if rows else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s"] + [f"E{m}" for m in range(k)])
        for row in rows:
            writer.writerow([repr(v) for v in row])
