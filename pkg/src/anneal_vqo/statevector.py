"""Dense statevector and the two ansatz primitives.

Basis convention: bit ``i`` of the basis index ``z`` is the classical value
of variable ``i``; bit value ``b`` is the sigma_z eigenvalue ``(-1)**b``, so
``|0>`` has spin +1. The transverse-field Hamiltonian is
``H_I = -sum_i sigma_x^i``.
"""

import numpy as np

from . import _kernels
from ._validation import (
    MAX_QUBITS,
    check_energy_table,
    check_qubits,
    check_same_size,
)
from .exceptions import DimensionError

NORM_TOLERANCE = 1e-10


class StateVector:
    """Unit-norm vector of ``2**n`` complex amplitudes.

    Operations in this module return new instances; the amplitude array of
    an existing instance is never modified by them.
    """

    __slots__ = ("n", "amplitudes")

    def __init__(self, amplitudes, n=None, *, check_norm=True):
        amplitudes = np.array(amplitudes, dtype=np.complex128).ravel()
        dim = amplitudes.shape[0]
        if n is None:
            n = dim.bit_length() - 1
        n = check_qubits(n)
        if dim != 1 << n:
            raise DimensionError(f"{dim} amplitudes given, expected {1 << n} for n={n}")
        if check_norm:
            norm2 = float(np.vdot(amplitudes, amplitudes).real)
            if abs(norm2 - 1.0) > NORM_TOLERANCE:
                raise ValueError(f"state is not normalized: |psi|^2 = {norm2!r}")
        self.n = n
        self.amplitudes = amplitudes

    @classmethod
    def _wrap(cls, amplitudes, n):
        obj = cls.__new__(cls)
        obj.n = n
        obj.amplitudes = amplitudes
        return obj

    @classmethod
    def from_unnormalized(cls, amplitudes):
        amplitudes = np.array(amplitudes, dtype=np.complex128).ravel()
        return cls(amplitudes / np.linalg.norm(amplitudes))

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def norm_squared(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def copy(self):
        return StateVector._wrap(self.amplitudes.copy(), self.n)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"StateVector(n={self.n})"


def uniform_superposition(n):
    """|+>^n, the ground state of ``H_I`` with energy ``-n``.

    Raises CapacityError beyond ``MAX_QUBITS`` qubits.
    """
    n = check_qubits(n, MAX_QUBITS)
    dim = 1 << n
    return StateVector._wrap(np.full(dim, dim ** -0.5, dtype=np.complex128), n)


def basis_state(n, z):
    n = check_qubits(n)
    if not 0 <= z < 1 << n:
        raise IndexError(f"basis index {z} out of range for n={n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[z] = 1.0
    return StateVector._wrap(amps, n)


def apply_uniform_x_rotation(state, angle):
    """Apply ``cos(angle) I + i sin(angle) sigma_x`` to every qubit.

    This is ``exp(-i * angle * H_I)``.
    """
    psi = state.amplitudes.copy()
    _kernels.apply_rotation(psi, state.n, float(angle))
    return StateVector._wrap(psi, state.n)


def apply_diagonal_phase(state, energies, gamma):
    """Multiply amplitude ``z`` by ``exp(-i * gamma * energies[z])``."""
    energies = check_energy_table(energies, state.n)
    levels, index = _kernels.phase_table(energies)
    psi = state.amplitudes.copy()
    _kernels.apply_phase(psi, index, levels, float(gamma))
    return StateVector._wrap(psi, state.n)


def overlap(a, b):
    """Inner product <a|b>."""
    check_same_size(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def basis_probability(state, z):
    if not 0 <= z < state.dim:
        raise IndexError(f"basis index {z} out of range for n={state.n}")
    return float(abs(state.amplitudes[z]) ** 2)


def diagonal_expectation(state, energies):
    energies = check_energy_table(energies, state.n)
    return float(_kernels.diagonal_expectation(state.amplitudes, energies))


def transverse_field_expectation(state):
    """<H_I> = -sum_i <sigma_x^i>.

    Each term is divided by the squared norm, which is 1 up to rounding;
    this makes the |+>^n value exactly ``-n``.
    """
    return -float(_kernels.normalized_sigma_x(state.amplitudes, state.n))
