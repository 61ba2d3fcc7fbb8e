"""Pure-numpy statevector kernels.

Fallback used when the compiled extension is unavailable or disabled; the
function signatures mirror the compiled module exactly.  States are
contiguous complex128 arrays of length 2**n; bit ``k`` of an amplitude index
is qubit ``k``.  A Pauli term is given by bit masks ``(x, z)`` plus its
letter-product phase ``i**popcount(x & z)``, acting as

    (P psi)[k ^ x] = phase * (-1)**popcount(k & z) * psi[k]
"""

from __future__ import annotations

import math

import numpy as np

COMPILED = False

_INDEX_CACHE: dict[int, np.ndarray] = {}
_SIGN_CACHE: dict[tuple[int, int], np.ndarray] = {}
# sign vectors are cached only for small registers
_SIGN_CACHE_DIM_LIMIT = 1 << 14


def _indices(dim: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(dim)
    if idx is None:
        idx = np.arange(dim, dtype=np.uint64)
        _INDEX_CACHE[dim] = idx
    return idx


def _signs(dim: int, z: int) -> np.ndarray:
    """(-1)**popcount(k & z) for k in range(dim), as float64."""
    if z == 0:
        key = (dim, 0)
        cached = _SIGN_CACHE.get(key)
        if cached is None:
            cached = np.ones(dim, dtype=np.float64)
            _SIGN_CACHE[key] = cached
        return cached
    key = (dim, z)
    cached = _SIGN_CACHE.get(key)
    if cached is not None:
        return cached
    par = np.bitwise_count(_indices(dim) & np.uint64(z)).astype(np.float64)
    out = 1.0 - 2.0 * (par % 2.0)
    if dim <= _SIGN_CACHE_DIM_LIMIT:
        _SIGN_CACHE[key] = out
    return out


def _pauli_action(psi: np.ndarray, x: int, z: int, phase: complex) -> np.ndarray:
    """New array P @ psi."""
    w = psi * (phase * _signs(psi.shape[0], z))
    if x:
        return w[_indices(psi.shape[0]) ^ np.uint64(x)]
    return w


def apply_pauli_inplace(psi: np.ndarray, x: int, z: int, phase: complex) -> None:
    psi[:] = _pauli_action(psi, int(x), int(z), complex(phase))


def apply_rotations_inplace(
    psi: np.ndarray,
    xs: np.ndarray,
    zs: np.ndarray,
    phases: np.ndarray,
    angles: np.ndarray,
    reverse: bool = False,
    dagger: bool = False,
) -> None:
    """Apply exp(-i*angles[j]/2 * P_j) for each term, term 0 first.

    ``reverse`` flips the application order; ``dagger`` flips every angle
    sign.  Both together give the inverse of the forward sequence.
    """
    m = len(xs)
    order = range(m - 1, -1, -1) if reverse else range(m)
    sgn = -1.0 if dagger else 1.0
    for j in order:
        theta = sgn * float(angles[j])
        if theta == 0.0:
            continue
        c = math.cos(0.5 * theta)
        s = math.sin(0.5 * theta)
        w = _pauli_action(psi, int(xs[j]), int(zs[j]), complex(phases[j]))
        np.multiply(psi, c, out=psi)
        psi -= (1j * s) * w


def apply_pauli_sum(
    psi: np.ndarray,
    out: np.ndarray,
    xs: np.ndarray,
    zs: np.ndarray,
    phases: np.ndarray,
    coeffs: np.ndarray,
) -> None:
    """out = (sum_t coeffs[t] P_t) @ psi, overwriting out."""
    out[:] = 0.0
    for t in range(len(xs)):
        out += coeffs[t] * _pauli_action(psi, int(xs[t]), int(zs[t]), complex(phases[t]))


def expectation_value(
    psi: np.ndarray,
    xs: np.ndarray,
    zs: np.ndarray,
    phases: np.ndarray,
    coeffs: np.ndarray,
) -> float:
    """Re <psi| sum_t coeffs[t] P_t |psi> (operator assumed hermitian)."""
    idx = _indices(psi.shape[0])
    acc = 0.0 + 0.0j
    for t in range(len(xs)):
        w = psi * _signs(psi.shape[0], int(zs[t]))
        x = int(xs[t])
        bra = psi[idx ^ np.uint64(x)] if x else psi
        acc += coeffs[t] * complex(phases[t]) * np.vdot(bra, w)
    return acc.real


def transition_value(
    bra: np.ndarray,
    ket: np.ndarray,
    xs: np.ndarray,
    zs: np.ndarray,
    phases: np.ndarray,
    coeffs: np.ndarray,
) -> complex:
    """<bra| sum_t coeffs[t] P_t |ket>."""
    idx = _indices(ket.shape[0])
    acc = 0.0 + 0.0j
    for t in range(len(xs)):
        w = ket * _signs(ket.shape[0], int(zs[t]))
        x = int(xs[t])
        b = bra[idx ^ np.uint64(x)] if x else bra
        acc += coeffs[t] * complex(phases[t]) * np.vdot(b, w)
    return complex(acc)


def adjoint_sweep(
    phi: np.ndarray,
    lam: np.ndarray,
    xs: np.ndarray,
    zs: np.ndarray,
    phases: np.ndarray,
    angles: np.ndarray,
    grad: np.ndarray,
) -> None:
    """Reverse-mode gradient of <phi|H|phi> wrt each rotation angle.

    On entry ``phi`` is the fully evolved state and ``lam = H phi``.  Fills
    ``grad[j] = d<H>/d(angles[j])``; on exit both states are rewound to the
    start of the rotation sequence.  Cost is two Pauli applications and one
    inner product per gate, independent of the parameter count.
    """
    for j in range(len(xs) - 1, -1, -1):
        x, z, ph = int(xs[j]), int(zs[j]), complex(phases[j])
        w = _pauli_action(phi, x, z, ph)
        # d<H>/dtheta_j = 2 Re <lam_j|(-i P_j/2)|phi_j> = Im <lam_j|P_j|phi_j>
        grad[j] = np.vdot(lam, w).imag
        theta = float(angles[j])
        c = math.cos(0.5 * theta)
        s = math.sin(0.5 * theta)
        # R_j^dagger = cos + i sin P_j; w already holds P_j phi
        np.multiply(phi, c, out=phi)
        phi += (1j * s) * w
        v = _pauli_action(lam, x, z, ph)
        np.multiply(lam, c, out=lam)
        lam += (1j * s) * v


def dot(bra: np.ndarray, ket: np.ndarray) -> complex:
    return complex(np.vdot(bra, ket))
