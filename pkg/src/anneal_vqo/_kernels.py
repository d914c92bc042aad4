"""Compiled amplitude kernels.

All kernels work in place on a contiguous ``complex128`` array of length
``2**n``. Bit ``q`` of the basis index is qubit ``q``.
"""

import numpy as np
from numba import njit


def phase_table(energies):
    """Split a diagonal energy table into distinct levels plus a lookup index.

    The phase kernel then needs one ``exp`` per distinct level instead of one
    per amplitude. Tables with many distinct values fall back to identity
    indexing.
    """
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    levels, index = np.unique(energies, return_inverse=True)
    if levels.size > energies.size // 2:
        return energies.copy(), np.arange(energies.size, dtype=np.int64)
    return levels, index.astype(np.int64).ravel()


@njit(cache=True, fastmath=True)
def apply_phase(psi, index, levels, gamma):
    table = np.empty(levels.shape[0], np.complex128)
    for k in range(levels.shape[0]):
        table[k] = np.exp(-1j * gamma * levels[k])
    for z in range(psi.shape[0]):
        psi[z] *= table[index[z]]


@njit(cache=True, fastmath=True)
def apply_rotation(psi, n, theta):
    # exp(+i theta sigma_x) on every qubit
    c = np.cos(theta)
    s = 1j * np.sin(theta)
    half = psi.shape[0] >> 1
    for q in range(n):
        m = 1 << q
        low = m - 1
        for t in range(half):
            z = ((t >> q) << (q + 1)) | (t & low)
            a0 = psi[z]
            a1 = psi[z + m]
            psi[z] = c * a0 + s * a1
            psi[z + m] = c * a1 + s * a0


@njit(cache=True)
def apply_layers(psi, n, index, levels, betas, gammas, start):
    for j in range(start, betas.shape[0]):
        apply_phase(psi, index, levels, gammas[j])
        apply_rotation(psi, n, betas[j])


@njit(cache=True, fastmath=True)
def sum_sigma_x(psi, n):
    total = 0.0
    half = psi.shape[0] >> 1
    for q in range(n):
        m = 1 << q
        low = m - 1
        for t in range(half):
            z = ((t >> q) << (q + 1)) | (t & low)
            a0 = psi[z]
            a1 = psi[z + m]
            total += 2.0 * (a0.real * a1.real + a0.imag * a1.imag)
    return total


@njit(cache=True)
def normalized_sigma_x(psi, n):
    """Sum over qubits of <sigma_x^i> / <psi|psi>.

    Numerator and norm are accumulated pair by pair in the same order, so
    for |+>^n every ratio is exactly 1.
    """
    total = 0.0
    half = psi.shape[0] >> 1
    for q in range(n):
        m = 1 << q
        low = m - 1
        num = 0.0
        den = 0.0
        for t in range(half):
            z = ((t >> q) << (q + 1)) | (t & low)
            a0 = psi[z]
            a1 = psi[z + m]
            num += 2.0 * (a0.real * a1.real + a0.imag * a1.imag)
            den += (a0.real * a0.real + a0.imag * a0.imag) + (a1.real * a1.real + a1.imag * a1.imag)
        total += num / den
    return total


@njit(cache=True, fastmath=True)
def diagonal_expectation(psi, energies):
    total = 0.0
    for z in range(psi.shape[0]):
        a = psi[z]
        total += (a.real * a.real + a.imag * a.imag) * energies[z]
    return total


@njit(cache=True)
def mixed_energy(psi, n, energies, weight_x, weight_p):
    # weight_x * <H_I> + weight_p * <H_P>, with H_I = -sum sigma_x
    value = 0.0
    if weight_x != 0.0:
        value -= weight_x * sum_sigma_x(psi, n)
    if weight_p != 0.0:
        value += weight_p * diagonal_expectation(psi, energies)
    return value


@njit(cache=True)
def layered_energy(n, index, levels, energies, betas, gammas, weight_x, weight_p):
    dim = 1 << n
    psi = np.full(dim, 1.0 / np.sqrt(dim) + 0j)
    apply_layers(psi, n, index, levels, betas, gammas, 0)
    return mixed_energy(psi, n, energies, weight_x, weight_p)


@njit(cache=True)
def central_probes(n, index, levels, energies, betas, gammas, step, weight_x, weight_p):
    """Energies at x +/- step*e_k for x = concat(betas, gammas).

    Layer checkpoints are reused so a probe only replays the layers at and
    after the perturbed one. Returns an array of shape (2p, 2) holding the
    (plus, minus) values in parameter order.
    """
    p = betas.shape[0]
    dim = 1 << n
    checkpoints = np.empty((p, dim), np.complex128)
    psi = np.full(dim, 1.0 / np.sqrt(dim) + 0j)
    for j in range(p):
        checkpoints[j, :] = psi
        apply_phase(psi, index, levels, gammas[j])
        apply_rotation(psi, n, betas[j])
    out = np.empty((2 * p, 2))
    work = np.empty(dim, np.complex128)
    for j in range(p):
        for sign in range(2):
            delta = step if sign == 0 else -step
            # beta_j
            work[:] = checkpoints[j]
            apply_phase(work, index, levels, gammas[j])
            apply_rotation(work, n, betas[j] + delta)
            apply_layers(work, n, index, levels, betas, gammas, j + 1)
            out[j, sign] = mixed_energy(work, n, energies, weight_x, weight_p)
            # gamma_j
            work[:] = checkpoints[j]
            apply_phase(work, index, levels, gammas[j] + delta)
            apply_rotation(work, n, betas[j])
            apply_layers(work, n, index, levels, betas, gammas, j + 1)
            out[p + j, sign] = mixed_energy(work, n, energies, weight_x, weight_p)
    return out


@njit(cache=True, fastmath=True)
def apply_interpolated(x, n, energies, weight_x, weight_p, out):
    # out = weight_x * H_I x + weight_p * diag(E) x
    dim = x.shape[0]
    for z in range(dim):
        out[z] = weight_p * energies[z] * x[z]
    for q in range(n):
        m = 1 << q
        for z in range(dim):
            out[z] -= weight_x * x[z ^ m]
    return out
