"""Exact statevector utilities: reference states, dense forms, exact spectra.

The exact solver targets a symmetry sector by diagonalizing

    H + penalty * [ (N - n)^2 + (Sz - ms2/2)^2 + (S^2 - s2)^2 ]

whose low end coincides with the sector spectrum of H: the penalty vanishes
on the target sector and pushes everything else up by O(penalty).  Energies
are recomputed as <psi|H|psi>, so a converged state is never biased by the
penalty terms.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg

from . import kernels
from .operators import number_operator, s_squared_operator, sz_operator
from .pauli import PauliSum

#: largest register diagonalized densely; above this Lanczos is used
DENSE_QUBIT_CUTOFF = 12


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def basis_state(n_qubits: int, occupied: "list[int] | tuple[int, ...]") -> np.ndarray:
    idx = 0
    for mode in occupied:
        if not 0 <= mode < n_qubits:
            raise ValueError(f"mode {mode} out of range for {n_qubits} qubits")
        if idx >> mode & 1:
            raise ValueError(f"mode {mode} listed twice")
        idx |= 1 << mode
    psi = np.zeros(2**n_qubits, dtype=np.complex128)
    psi[idx] = 1.0
    return psi


def hartree_fock_state(n_qubits: int, n_alpha: int, n_beta: int) -> np.ndarray:
    """Closed- or open-shell determinant with the lowest orbitals filled.

    Alpha spin orbitals are the even modes, beta the odd ones.
    """
    if 2 * max(n_alpha, n_beta) > n_qubits:
        raise ValueError(
            f"{n_alpha} alpha / {n_beta} beta electrons need more than {n_qubits} modes"
        )
    occupied = [2 * p for p in range(n_alpha)] + [2 * p + 1 for p in range(n_beta)]
    return basis_state(n_qubits, occupied)


def pauli_sum_to_dense(op: PauliSum) -> np.ndarray:
    dim = 2**op.n_qubits
    idx = np.arange(dim, dtype=np.uint64)
    out = np.zeros((dim, dim), dtype=complex)
    c = op.compiled()
    for x, z, ph, co in zip(c.xs, c.zs, c.phases, c.coeffs):
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & z) & np.uint64(1)).astype(float)
        out[idx ^ x, idx] += co * ph * signs
    return out


def pauli_sum_linear_operator(op: PauliSum) -> scipy.sparse.linalg.LinearOperator:
    dim = 2**op.n_qubits
    c = op.compiled()

    def matvec(psi):
        return kernels.apply_operator(c, np.ascontiguousarray(psi, dtype=np.complex128))

    return scipy.sparse.linalg.LinearOperator(
        (dim, dim), matvec=matvec, dtype=np.complex128
    )


def _phase_fixed(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest amplitude is real positive."""
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec * phase.conjugate()


def exact_eigenstates(
    ham: PauliSum,
    n_states: int,
    n_electrons: int,
    ms2: int = 0,
    s2: float | None = 0.0,
    penalty: float = 10.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Lowest eigenstates of ``ham`` within a (N, Sz, S^2) symmetry sector.

    Returns ``(energies, states)`` with energies ascending and states as
    columns.  ``s2`` is the target S(S+1) eigenvalue; pass None to constrain
    only (N, Sz) and admit every spin multiplicity.
    """
    nq = ham.n_qubits
    if n_states < 1:
        raise ValueError("n_states must be at least 1")
    constraints = [
        number_operator(nq) - PauliSum.identity(nq, float(n_electrons)),
        sz_operator(nq) - PauliSum.identity(nq, 0.5 * ms2),
    ]
    if s2 is not None:
        constraints.append(s_squared_operator(nq) - PauliSum.identity(nq, float(s2)))

    if nq <= DENSE_QUBIT_CUTOFF:
        hmat = pauli_sum_to_dense(ham)
        pen = np.zeros_like(hmat)
        for sym in constraints:
            d = pauli_sum_to_dense(sym)
            pen += d @ d
        _, vecs = np.linalg.eigh(hmat + penalty * pen)
        states = vecs[:, :n_states]
    else:
        hop = pauli_sum_linear_operator(ham)
        sym_ops = [pauli_sum_linear_operator(s) for s in constraints]

        def matvec(psi):
            out = hop.matvec(psi)
            for sop in sym_ops:
                out = out + penalty * sop.matvec(sop.matvec(psi))
            return out

        dim = 2**nq
        pen_op = scipy.sparse.linalg.LinearOperator(
            (dim, dim), matvec=matvec, dtype=np.complex128
        )
        # a few extra Krylov states guard against near-degenerate pairs
        _, vecs = scipy.sparse.linalg.eigsh(
            pen_op, k=max(n_states + 2, 4), which="SA", tol=1e-12
        )
        states = vecs[:, :n_states]

    energies = np.empty(n_states)
    out = np.empty((2**nq, n_states), dtype=np.complex128)
    hc = ham.compiled()
    for i in range(n_states):
        vec = _phase_fixed(np.ascontiguousarray(states[:, i], dtype=np.complex128))
        energies[i] = kernels.expectation(hc, vec)
        out[:, i] = vec
    order = np.argsort(energies)
    return energies[order], out[:, order]
