"""Independent dense-matrix oracles used to validate the fast implementations.

Everything in this module is deliberately slow and literal: explicit Kronecker
products, dense fermionic ladder matrices, brute-force expectation values.
Tests compare package output against these constructions so that the two
code paths share no arithmetic.
"""

from __future__ import annotations

import numpy as np

PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(letters: str) -> np.ndarray:
    """Dense matrix of a Pauli letter string, qubit 0 = first character.

    Amplitude index bit k is qubit k (little endian), so qubit 0 is the
    *innermost* Kronecker factor.
    """
    out = np.eye(1, dtype=complex)
    for letter in letters:
        out = np.kron(PAULI_MATS[letter], out)
    return out


def dense_pauli_sum(op) -> np.ndarray:
    """Dense matrix of a PauliSum."""
    dim = 2**op.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for string, coeff in op:
        out += coeff * dense_pauli(string.letters)
    return out


def dense_annihilation(n_modes: int, mode: int) -> np.ndarray:
    """Dense Jordan-Wigner annihilation operator on ``n_modes`` qubits.

    Occupation convention: qubit |1> means occupied.  With bit k of the
    amplitude index equal to qubit k, a_s = Z_0 ... Z_{s-1} (X_s + iY_s)/2
    and (X + iY)/2 = [[0, 1], [0, 0]] acts on the 2x2 block of qubit s.
    """
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    out = np.eye(1, dtype=complex)
    for k in range(n_modes):
        if k < mode:
            factor = PAULI_MATS["Z"]
        elif k == mode:
            factor = lower
        else:
            factor = PAULI_MATS["I"]
        out = np.kron(factor, out)
    return out


def dense_creation(n_modes: int, mode: int) -> np.ndarray:
    return dense_annihilation(n_modes, mode).conj().T


def random_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random normalized complex state vector."""
    vec = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return vec / np.linalg.norm(vec)
