"""Restricted Hartree-Fock with DIIS convergence acceleration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisFunction, build_basis, nuclear_charges
from .integrals import core_hamiltonian, eri_tensor, nuclear_repulsion, overlap_matrix

MAX_ITERATIONS = 200
ENERGY_TOL = 1e-12
ERROR_TOL = 1e-10
DIIS_DEPTH = 8


@dataclass
class AoIntegrals:
    """AO-basis operators for one geometry."""

    s: np.ndarray
    hcore: np.ndarray
    g: np.ndarray
    e_nuc: float
    basis: list[BasisFunction]


@dataclass
class ScfResult:
    energy: float          # total, including nuclear repulsion
    coeffs: np.ndarray     # MO coefficients, columns ordered by energy
    orbital_energies: np.ndarray
    n_occupied: int
    iterations: int


def compute_ao_integrals(symbols, coords) -> AoIntegrals:
    basis = build_basis(symbols, coords)
    charges = nuclear_charges(symbols)
    coords = np.asarray(coords, dtype=float)
    return AoIntegrals(
        s=overlap_matrix(basis),
        hcore=core_hamiltonian(basis, charges, coords),
        g=eri_tensor(basis),
        e_nuc=nuclear_repulsion(charges, coords),
        basis=basis,
    )


def _symmetric_half_inverse(s: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(s)
    if vals.min() < 1e-10:
        raise RuntimeError(f"overlap matrix is near-singular (min eigenvalue {vals.min():.3e})")
    return vecs @ np.diag(vals ** -0.5) @ vecs.T


def restricted_hartree_fock(ao: AoIntegrals, n_electrons: int) -> ScfResult:
    """Solve RHF; raises RuntimeError when SCF fails to converge."""
    if n_electrons % 2 != 0:
        raise ValueError(f"restricted SCF needs an even electron count, got {n_electrons}")
    n_occ = n_electrons // 2
    x = _symmetric_half_inverse(ao.s)

    def fock(density: np.ndarray) -> np.ndarray:
        j = np.einsum("pqrs,rs->pq", ao.g, density)
        k = np.einsum("prqs,rs->pq", ao.g, density)
        return ao.hcore + 2.0 * j - k

    def diagonalize(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        return eps, x @ cp

    eps, coeffs = diagonalize(ao.hcore)
    density = coeffs[:, :n_occ] @ coeffs[:, :n_occ].T
    energy = 0.0
    errors: list[np.ndarray] = []
    focks: list[np.ndarray] = []

    for iteration in range(1, MAX_ITERATIONS + 1):
        f = fock(density)
        err = x.T @ (f @ density @ ao.s - ao.s @ density @ f) @ x
        errors.append(err)
        focks.append(f)
        if len(errors) > DIIS_DEPTH:
            errors.pop(0)
            focks.pop(0)
        if len(errors) > 1:
            m = len(errors)
            b = -np.ones((m + 1, m + 1))
            b[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    b[i, j] = np.vdot(errors[i], errors[j]).real
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                weights = np.linalg.solve(b, rhs)[:m]
                f = sum(w * fi for w, fi in zip(weights, focks))
            except np.linalg.LinAlgError:
                pass  # fall back to the bare Fock matrix this cycle

        eps, coeffs = diagonalize(f)
        density = coeffs[:, :n_occ] @ coeffs[:, :n_occ].T
        new_energy = np.einsum("pq,pq->", density, ao.hcore + fock(density)) + ao.e_nuc
        max_err = np.abs(errors[-1]).max()
        if abs(new_energy - energy) < ENERGY_TOL and max_err < ERROR_TOL:
            return ScfResult(
                energy=float(new_energy),
                coeffs=coeffs,
                orbital_energies=eps,
                n_occupied=n_occ,
                iterations=iteration,
            )
        energy = new_energy

    raise RuntimeError(f"SCF did not converge in {MAX_ITERATIONS} iterations")
