"""Ising problem Hamiltonians and the 2-SAT encoding.

The problem Hamiltonian is diagonal,

    E(z) = offset - sum_i h_i s_i(z) - sum_{i<j} J_ij s_i(z) s_j(z),

with spins ``s_i(z) = (-1)**bit_i(z)``. A 2-SAT variable ``x_i`` is *true*
when its spin is +1, i.e. when bit ``i`` of ``z`` is 0.

Each clause ``(l_a or l_b)`` contributes the penalty
``(1 - c_a s_a)(1 - c_b s_b) / 4`` where ``c = +1`` for a positive literal
and ``-1`` for a negated one, so ``E(z)`` equals the number of violated
clauses.

DIMACS CNF format
-----------------
Lines starting with ``c`` are comments. The header is ``p cnf <n> <m>``.
Each clause line holds exactly two nonzero literals followed by ``0``;
literal ``k > 0`` means variable ``k - 1`` and ``-k`` its negation.
Variables in a clause must differ.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import BRUTE_FORCE_MAX, MAX_QUBITS, check_qubits
from .exceptions import InvalidInstanceError, ParseError

GROUND_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TwoSatInstance:
    """2-SAT formula over ``n`` variables.

    ``clauses`` holds pairs of literals ``(variable, negated)``.
    """

    n: int
    clauses: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInstanceError(f"variable count must be >= 1, got {self.n}")
        clauses = []
        for k, clause in enumerate(self.clauses):
            try:
                (va, na), (vb, nb) = clause
            except (TypeError, ValueError):
                raise InvalidInstanceError(f"clause {k} is not a pair of literals: {clause!r}")
            va, vb, na, nb = int(va), int(vb), bool(na), bool(nb)
            if va == vb:
                raise InvalidInstanceError(f"clause {k} uses variable {va} twice")
            for v in (va, vb):
                if not 0 <= v < self.n:
                    raise InvalidInstanceError(f"clause {k}: variable {v} out of range")
            clauses.append(((va, na), (vb, nb)))
        object.__setattr__(self, "clauses", tuple(clauses))

    @property
    def m(self):
        return len(self.clauses)

    def is_satisfied(self, assignment):
        """``assignment`` is a sequence of booleans, one per variable."""
        return all(
            (assignment[va] != na) or (assignment[vb] != nb)
            for (va, na), (vb, nb) in self.clauses
        )


@dataclass(frozen=True)
class IsingModel:
    """Fields ``h``, sparse couplings ``(i, j, J_ij)`` with ``i < j``, and an offset."""

    n: int
    fields: tuple
    couplings: tuple = ()
    offset: float = 0.0

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise InvalidInstanceError("model needs at least one variable")
        fields = tuple(float(h) for h in self.fields)
        if len(fields) != n:
            raise InvalidInstanceError(f"{len(fields)} fields for {n} variables")
        seen = set()
        couplings = []
        for i, j, J in self.couplings:
            i, j, J = int(i), int(j), float(J)
            if i > j:
                i, j = j, i
            if i == j or not (0 <= i and j < n):
                raise InvalidInstanceError(f"bad coupling indices ({i}, {j})")
            if (i, j) in seen:
                raise InvalidInstanceError(f"duplicate coupling ({i}, {j})")
            seen.add((i, j))
            couplings.append((i, j, J))
        values = list(fields) + [J for _, _, J in couplings] + [float(self.offset)]
        if not np.all(np.isfinite(values)):
            raise InvalidInstanceError("fields, couplings and offset must be finite")
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "couplings", tuple(sorted(couplings)))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def zeros(cls, n):
        return cls(n, (0.0,) * n)


def two_sat_to_ising(instance):
    """Encode a 2-SAT instance so that ``E(z)`` counts violated clauses."""
    if not isinstance(instance, TwoSatInstance):
        raise InvalidInstanceError(f"expected TwoSatInstance, got {type(instance).__name__}")
    h = [0.0] * instance.n
    J = {}
    offset = 0.0
    for (va, na), (vb, nb) in instance.clauses:
        ca = -1.0 if na else 1.0
        cb = -1.0 if nb else 1.0
        # (1 - ca sa)(1 - cb sb)/4 = 1/4 - ca sa/4 - cb sb/4 + ca cb sa sb/4
        offset += 0.25
        h[va] += 0.25 * ca
        h[vb] += 0.25 * cb
        key = (min(va, vb), max(va, vb))
        J[key] = J.get(key, 0.0) - 0.25 * ca * cb
    couplings = tuple((i, j, v) for (i, j), v in sorted(J.items()) if v != 0.0)
    return IsingModel(instance.n, tuple(h), couplings, offset)


def spin_table(n):
    """Array of shape (n, 2**n) with ``s_i(z) = (-1)**bit_i(z)``."""
    z = np.arange(1 << n, dtype=np.int64)
    bits = (z[None, :] >> np.arange(n, dtype=np.int64)[:, None]) & 1
    return (1 - 2 * bits).astype(np.float64)


def diagonal_energies(model):
    """Energy of every basis state, as a float array of length ``2**n``."""
    n = check_qubits(model.n, MAX_QUBITS, "variable count")
    z = np.arange(1 << n, dtype=np.int64)
    energies = np.full(1 << n, model.offset)
    spins = {}

    def spin(i):
        if i not in spins:
            spins[i] = 1.0 - 2.0 * ((z >> i) & 1)
        return spins[i]

    for i, h in enumerate(model.fields):
        if h != 0.0:
            energies -= h * spin(i)
    for i, j, J in model.couplings:
        energies -= J * spin(i) * spin(j)
    return energies


def ground_state_indices(energies, tol=GROUND_TOLERANCE):
    energies = np.asarray(energies)
    return np.flatnonzero(energies <= energies.min() + tol)


def classical_ground_state(model, tol=GROUND_TOLERANCE):
    """Exhaustive minimum: ``(index, energy, degeneracy)``.

    The returned index is the smallest one attaining the minimum.
    """
    check_qubits(model.n, BRUTE_FORCE_MAX, "variable count")
    energies = diagonal_energies(model)
    ground = ground_state_indices(energies, tol)
    return int(ground[0]), float(energies[ground[0]]), int(ground.size)


def assignment_from_index(z, n):
    """Boolean assignment for basis index ``z`` (bit 0 means *true*)."""
    return tuple(not (z >> i) & 1 for i in range(n))


def index_from_assignment(assignment):
    return sum((0 if value else 1) << i for i, value in enumerate(assignment))


# -- DIMACS -----------------------------------------------------------------


def format_dimacs(instance, comments=()):
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {instance.n} {instance.m}")
    for (va, na), (vb, nb) in instance.clauses:
        a = -(va + 1) if na else va + 1
        b = -(vb + 1) if nb else vb + 1
        lines.append(f"{a} {b} 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text, path=None):
    n = m = None
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if n is not None:
                raise ParseError("duplicate header", lineno, path)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad header {line!r}", lineno, path)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"bad header {line!r}", lineno, path)
            if n < 1 or m < 0:
                raise ParseError(f"bad header {line!r}", lineno, path)
            continue
        if n is None:
            raise ParseError("clause before 'p cnf' header", lineno, path)
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(f"non-integer literal in {line!r}", lineno, path)
        if not lits or lits[-1] != 0:
            raise ParseError("clause line must end with 0", lineno, path)
        lits = lits[:-1]
        if len(lits) != 2 or 0 in lits:
            raise ParseError(f"expected exactly 2 literals, got {len(lits)}", lineno, path)
        a, b = lits
        if abs(a) > n or abs(b) > n:
            raise ParseError(f"variable out of range 1..{n}", lineno, path)
        if abs(a) == abs(b):
            raise ParseError("clause uses the same variable twice", lineno, path)
        clauses.append(((abs(a) - 1, a < 0), (abs(b) - 1, b < 0)))
    if n is None:
        raise ParseError("missing 'p cnf' header", None, path)
    if len(clauses) != m:
        raise ParseError(f"header declares {m} clauses, found {len(clauses)}", None, path)
    return TwoSatInstance(n, tuple(clauses))


def read_dimacs(path):
    path = Path(path)
    return parse_dimacs(path.read_text(), path=str(path))


def write_dimacs(instance, path, comments=()):
    Path(path).write_text(format_dimacs(instance, comments))
