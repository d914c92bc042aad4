"""Input validation helpers shared by the public API and the estimators."""

import numbers

import numpy as np

from .exceptions import CapacityError, DimensionError

#: Largest qubit count a statevector may hold (2**24 amplitudes = 256 MiB).
MAX_QUBITS = 24
#: Largest variable count for exhaustive enumeration of assignments.
BRUTE_FORCE_MAX = 24
#: Largest qubit count for which eigenstates of H(s) are computed.
DIAGNOSTIC_MAX = 14


def check_qubits(n, cap=MAX_QUBITS, what="qubit count"):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise TypeError(f"{what} must be an integer, got {type(n).__name__}")
    n = int(n)
    if n < 1 or n > cap:
        raise CapacityError(f"{what} {n} outside supported range 1..{cap}")
    return n


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_unit_interval(value, name="s"):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_energy_table(energies, n):
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    if energies.ndim != 1 or energies.shape[0] != 1 << n:
        raise DimensionError(
            f"energy table has shape {energies.shape}, expected ({1 << n},)"
        )
    if not np.all(np.isfinite(energies)):
        raise ValueError("energy table contains non-finite entries")
    return energies


def check_vector(x, name="x"):
    x = np.array(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    return x


def check_same_size(a, b):
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")
