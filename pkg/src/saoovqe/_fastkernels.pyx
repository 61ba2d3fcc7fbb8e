# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels.

Same contract as the pure-numpy module: states are contiguous complex128
arrays, bit k of an amplitude index is qubit k, and a Pauli term (x, z)
with letter phase i**popcount(x & z) acts as

    (P psi)[k ^ x] = phase * (-1)**popcount(k & z) * psi[k]

The hot loops run over amplitude pairs (k, k^x) so every gate touches each
amplitude exactly once.
"""

from libc.math cimport cos, sin
from libc.stdint cimport uint64_t

import numpy as np

COMPILED = True

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define SAOO_POPCOUNT(v) __builtin_popcountll(v)
    #else
    static inline int SAOO_POPCOUNT(unsigned long long v) {
        v = v - ((v >> 1) & 0x5555555555555555ULL);
        v = (v & 0x3333333333333333ULL) + ((v >> 2) & 0x3333333333333333ULL);
        v = (v + (v >> 4)) & 0x0f0f0f0f0f0f0f0fULL;
        return (int)((v * 0x0101010101010101ULL) >> 56);
    }
    #endif
    """
    int SAOO_POPCOUNT(unsigned long long v) nogil


# noexcept matters: -1.0 is a legitimate return value, and without it every
# odd-parity amplitude would trip the except? sentinel and grab the GIL
cdef inline double _sgn(uint64_t k, uint64_t z) noexcept nogil:
    return -1.0 if SAOO_POPCOUNT(k & z) & 1 else 1.0


cdef void _pauli_inplace(double complex[::1] psi, uint64_t x, uint64_t z,
                         double complex phase) noexcept nogil:
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t k
    cdef uint64_t j
    cdef double complex a, b
    if x == 0:
        for k in range(dim):
            psi[k] = phase * _sgn(<uint64_t>k, z) * psi[k]
        return
    for k in range(dim):
        j = (<uint64_t>k) ^ x
        if j < <uint64_t>k:
            continue
        a = psi[k]
        b = psi[j]
        psi[j] = phase * _sgn(<uint64_t>k, z) * a
        psi[k] = phase * _sgn(j, z) * b


cdef void _rot_inplace(double complex[::1] psi, uint64_t x, uint64_t z,
                       double complex phase, double theta) noexcept nogil:
    # exp(-i theta/2 P) = cos(theta/2) - i sin(theta/2) P
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t k
    cdef uint64_t j
    cdef double c = cos(0.5 * theta)
    cdef double complex f = -1j * sin(0.5 * theta) * phase
    cdef double complex a, b
    if x == 0:
        for k in range(dim):
            psi[k] = (c + f * _sgn(<uint64_t>k, z)) * psi[k]
        return
    for k in range(dim):
        j = (<uint64_t>k) ^ x
        if j < <uint64_t>k:
            continue
        a = psi[k]
        b = psi[j]
        psi[k] = c * a + f * _sgn(j, z) * b
        psi[j] = c * b + f * _sgn(<uint64_t>k, z) * a


def apply_pauli_inplace(double complex[::1] psi, x, z, phase):
    _pauli_inplace(psi, <uint64_t>int(x), <uint64_t>int(z), <double complex>complex(phase))


def apply_rotations_inplace(double complex[::1] psi,
                            uint64_t[::1] xs, uint64_t[::1] zs,
                            double complex[::1] phases, double[::1] angles,
                            bint reverse=False, bint dagger=False):
    """Apply exp(-i*angles[j]/2 * P_j) for each term, term 0 first.

    ``reverse`` flips the application order; ``dagger`` flips every angle
    sign.  Both together give the inverse of the forward sequence.
    """
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t j
    cdef double s = -1.0 if dagger else 1.0
    with nogil:
        if reverse:
            for j in range(m - 1, -1, -1):
                _rot_inplace(psi, xs[j], zs[j], phases[j], s * angles[j])
        else:
            for j in range(m):
                _rot_inplace(psi, xs[j], zs[j], phases[j], s * angles[j])


def apply_pauli_sum(double complex[::1] psi, double complex[::1] out,
                    uint64_t[::1] xs, uint64_t[::1] zs,
                    double complex[::1] phases, double complex[::1] coeffs):
    """out = (sum_t coeffs[t] P_t) @ psi, overwriting out."""
    cdef Py_ssize_t nt = xs.shape[0]
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t t, k
    cdef uint64_t x, z
    cdef double complex cp
    with nogil:
        for k in range(dim):
            out[k] = 0.0
        for t in range(nt):
            x = xs[t]
            z = zs[t]
            cp = coeffs[t] * phases[t]
            for k in range(dim):
                out[(<uint64_t>k) ^ x] = out[(<uint64_t>k) ^ x] + cp * _sgn(<uint64_t>k, z) * psi[k]


def expectation_value(double complex[::1] psi,
                      uint64_t[::1] xs, uint64_t[::1] zs,
                      double complex[::1] phases, double complex[::1] coeffs):
    """Re <psi| sum_t coeffs[t] P_t |psi> (operator assumed hermitian)."""
    cdef Py_ssize_t nt = xs.shape[0]
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t t, k
    cdef uint64_t x, z
    cdef double complex acc = 0.0
    cdef double complex term
    with nogil:
        for t in range(nt):
            x = xs[t]
            z = zs[t]
            term = 0.0
            for k in range(dim):
                term = term + psi[(<uint64_t>k) ^ x].conjugate() * _sgn(<uint64_t>k, z) * psi[k]
            acc = acc + coeffs[t] * phases[t] * term
    return acc.real


def transition_value(double complex[::1] bra, double complex[::1] ket,
                     uint64_t[::1] xs, uint64_t[::1] zs,
                     double complex[::1] phases, double complex[::1] coeffs):
    """<bra| sum_t coeffs[t] P_t |ket>."""
    cdef Py_ssize_t nt = xs.shape[0]
    cdef Py_ssize_t dim = ket.shape[0]
    cdef Py_ssize_t t, k
    cdef uint64_t x, z
    cdef double complex acc = 0.0
    cdef double complex term
    with nogil:
        for t in range(nt):
            x = xs[t]
            z = zs[t]
            term = 0.0
            for k in range(dim):
                term = term + bra[(<uint64_t>k) ^ x].conjugate() * _sgn(<uint64_t>k, z) * ket[k]
            acc = acc + coeffs[t] * phases[t] * term
    return complex(acc)


def adjoint_sweep(double complex[::1] phi, double complex[::1] lam,
                  uint64_t[::1] xs, uint64_t[::1] zs,
                  double complex[::1] phases, double[::1] angles,
                  double[::1] grad):
    """Reverse-mode gradient of <phi|H|phi> wrt each rotation angle.

    On entry ``phi`` is the fully evolved state and ``lam = H phi``.  Fills
    ``grad[j] = d<H>/d(angles[j])``; on exit both states are rewound to the
    start of the rotation sequence.
    """
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t dim = phi.shape[0]
    cdef Py_ssize_t j, k
    cdef uint64_t x, z
    cdef double complex ph, term
    with nogil:
        for j in range(m - 1, -1, -1):
            x = xs[j]
            z = zs[j]
            ph = phases[j]
            # d<H>/dtheta_j = Im <lam_j|P_j|phi_j>
            term = 0.0
            for k in range(dim):
                term = term + lam[(<uint64_t>k) ^ x].conjugate() * _sgn(<uint64_t>k, z) * phi[k]
            term = ph * term
            grad[j] = term.imag
            _rot_inplace(phi, x, z, ph, -angles[j])
            _rot_inplace(lam, x, z, ph, -angles[j])


def dot(double complex[::1] bra, double complex[::1] ket):
    cdef Py_ssize_t dim = bra.shape[0]
    cdef Py_ssize_t k
    cdef double complex acc = 0.0
    with nogil:
        for k in range(dim):
            acc = acc + bra[k].conjugate() * ket[k]
    return complex(acc)
