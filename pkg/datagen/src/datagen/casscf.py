"""State-averaged CASSCF by direct minimization over orbital rotations.

The objective is the weighted average of the two lowest singlet CASCI
roots as a function of an orthogonal orbital rotation C exp(K).  Its
exact gradient is the generalized-Fock expression evaluated with the
state-averaged densities (the CI vectors are eigenvectors, so their
response drops out of the ensemble derivative).  Convergence lands on a
canonical representative: core and virtual blocks diagonalize the
state-averaged Fock operator, active orbitals are natural orbitals of
the averaged 1-RDM in descending occupation, and every column's largest
coefficient is made positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.linalg import expm

from .ci import CasciStates, embed_active_space, one_rdm, solve_casci, two_rdm
from .scf import AoIntegrals, ScfResult, restricted_hartree_fock

DEFAULT_WEIGHTS = (0.5, 0.5)
DEFAULT_GTOL = 1e-7
MAX_ITERATIONS = 400


@dataclass(frozen=True)
class OrbitalBlocks:
    n_core: int
    n_active: int
    n_virtual: int

    @property
    def n_orbitals(self) -> int:
        return self.n_core + self.n_active + self.n_virtual

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Non-redundant rotation pairs: anything crossing a block boundary."""
        core = range(self.n_core)
        act = range(self.n_core, self.n_core + self.n_active)
        virt = range(self.n_core + self.n_active, self.n_orbitals)
        out = [(i, t) for i in core for t in act]
        out += [(i, a) for i in core for a in virt]
        out += [(t, a) for t in act for a in virt]
        return tuple(out)


def mo_transform(h_ao: np.ndarray, g_ao: np.ndarray, c: np.ndarray):
    h = c.T @ h_ao @ c
    g = np.einsum("pi,pqrs->iqrs", c, g_ao, optimize=True)
    g = np.einsum("qj,iqrs->ijrs", c, g, optimize=True)
    g = np.einsum("rk,ijrs->ijks", c, g, optimize=True)
    g = np.einsum("sl,ijks->ijkl", c, g, optimize=True)
    return h, g


def _kappa_matrix(blocks: OrbitalBlocks, kappa: np.ndarray) -> np.ndarray:
    k = np.zeros((blocks.n_orbitals, blocks.n_orbitals))
    for value, (i, j) in zip(kappa, blocks.pairs):
        k[i, j] = value
        k[j, i] = -value
    return k


def casci_at(
    c: np.ndarray, ao: AoIntegrals, blocks: OrbitalBlocks,
    n_active_electrons: int, n_roots: int = 2,
) -> CasciStates:
    h_mo, g_mo = mo_transform(ao.hcore, ao.g, c)
    problem = embed_active_space(
        h_mo, g_mo, ao.e_nuc, blocks.n_core, blocks.n_active, n_active_electrons
    )
    return solve_casci(problem, n_roots=n_roots)


def _sa_densities(states: CasciStates, weights) -> tuple[np.ndarray, np.ndarray]:
    n = states.problem.n_orbitals
    g1 = np.zeros((n, n))
    g2 = np.zeros((n, n, n, n))
    for w, k in zip(weights, range(len(weights))):
        v = states.vectors[:, k]
        g1 += w * one_rdm(v, v, states.dets, n)
        g2 += w * two_rdm(v, v, states.dets, n)
    return g1, g2


def sa_orbital_gradient(
    c: np.ndarray, ao: AoIntegrals, blocks: OrbitalBlocks,
    n_active_electrons: int, weights=DEFAULT_WEIGHTS,
) -> np.ndarray:
    """d E_SA / d kappa at kappa = 0 for the rotation C exp(K).

    Generalized-Fock form: F_mn = sum_q D_mq Fi_nq for the core rows plus
    the active rows contracted with the active densities; the gradient of
    the pair (m, n) is 2 (F_mn - F_nm).
    """
    h_mo, g_mo = mo_transform(ao.hcore, ao.g, c)
    states = casci_at(c, ao, blocks, n_active_electrons)
    gamma, gamma2 = _sa_densities(states, weights)

    nc, na = blocks.n_core, blocks.n_active
    n = blocks.n_orbitals
    act = slice(nc, nc + na)
    core = slice(0, nc)

    # inactive Fock: core mean field over all orbitals
    fi = h_mo.copy()
    if nc:
        fi += 2.0 * np.einsum("pqjj->pq", g_mo[:, :, core, core])
        fi -= np.einsum("pjjq->pq", g_mo[:, core, core, :])
    # active Fock from the averaged active 1-RDM
    fa = np.einsum("pqtu,tu->pq", g_mo[:, :, act, act], gamma)
    fa -= 0.5 * np.einsum("ptuq,tu->pq", g_mo[:, act, act, :], gamma)

    f = np.zeros((n, n))
    f[core, :] = 2.0 * (fi + fa)[:, core].T
    f[act, :] = gamma @ fi[:, act].T
    f[act, :] += np.einsum(
        "tuvw,nuvw->tn", gamma2, g_mo[:, act, act, act], optimize=True
    )
    # sign fixed against central differences for the C exp(K) parameterization
    grad = 2.0 * (f.T - f)
    return np.array([grad[i, j] for i, j in blocks.pairs])


@dataclass
class CasscfResult:
    """Converged state-averaged CASSCF solution in canonical orbitals."""

    coeffs: np.ndarray
    states: CasciStates          # at the canonical orbitals
    blocks: OrbitalBlocks
    weights: tuple[float, float]
    e_sa: float
    scf: ScfResult
    gradient_norm: float
    n_evaluations: int

    @property
    def energies(self) -> np.ndarray:
        return self.states.energies


def _canonicalize(
    c: np.ndarray, ao: AoIntegrals, blocks: OrbitalBlocks,
    n_active_electrons: int, weights,
) -> np.ndarray:
    h_mo, g_mo = mo_transform(ao.hcore, ao.g, c)
    states = casci_at(c, ao, blocks, n_active_electrons)
    gamma, _ = _sa_densities(states, weights)
    nc, na = blocks.n_core, blocks.n_active
    n = blocks.n_orbitals

    d = np.zeros((n, n))
    for i in range(nc):
        d[i, i] = 2.0
    d[nc:nc + na, nc:nc + na] = gamma
    f = h_mo + np.einsum("pqrs,rs->pq", g_mo, d) - 0.5 * np.einsum("prqs,rs->pq", g_mo, d)

    u = np.eye(n)
    if nc:
        _, uc = np.linalg.eigh(f[:nc, :nc])
        u[:nc, :nc] = uc
    if na:
        occ, ua = np.linalg.eigh(gamma)
        u[nc:nc + na, nc:nc + na] = ua[:, ::-1]  # descending occupation
    if blocks.n_virtual:
        _, uv = np.linalg.eigh(f[nc + na:, nc + na:])
        u[nc + na:, nc + na:] = uv

    out = c @ u
    for k in range(n):
        lead = np.argmax(np.abs(out[:, k]))
        if out[lead, k] < 0:
            out[:, k] = -out[:, k]
    return out


def solve_sa_casscf(
    ao: AoIntegrals,
    n_electrons: int,
    cas: tuple[int, int],
    weights: tuple[float, float] = DEFAULT_WEIGHTS,
    c_start: np.ndarray | None = None,
    gtol: float = DEFAULT_GTOL,
    max_iterations: int = MAX_ITERATIONS,
) -> CasscfResult:
    """Minimize the two-state ensemble energy over orbital rotations.

    Starts from the RHF orbitals unless c_start provides a frame (for
    displaced-geometry warm starts).  Raises RuntimeError when the
    optimizer stops above gtol; never returns an unconverged solution.
    """
    n_active_electrons, n_active = cas
    if abs(sum(weights) - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {weights}")
    n_core = (n_electrons - n_active_electrons) // 2
    if 2 * n_core + n_active_electrons != n_electrons:
        raise ValueError("electron count does not split into closed core + active")
    scf = restricted_hartree_fock(ao, n_electrons)
    n = ao.s.shape[0]
    blocks = OrbitalBlocks(n_core=n_core, n_active=n_active, n_virtual=n - n_core - n_active)
    c0 = scf.coeffs if c_start is None else np.asarray(c_start, dtype=float)
    evals = 0

    def unpack(kappa: np.ndarray) -> np.ndarray:
        return c0 @ expm(_kappa_matrix(blocks, kappa))

    def objective(kappa: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        states = casci_at(unpack(kappa), ao, blocks, n_active_electrons)
        return float(np.dot(weights, states.energies[:2]))

    def jacobian(kappa: np.ndarray) -> np.ndarray:
        return sa_orbital_gradient(
            unpack(kappa), ao, blocks, n_active_electrons, weights
        )

    x0 = np.zeros(len(blocks.pairs))
    if x0.size:
        # a restart resets the inverse-Hessian estimate, which clears the
        # occasional BFGS stall a factor of a few above gtol
        for attempt in range(3):
            res = optimize.minimize(
                objective, x0, jac=jacobian, method="BFGS",
                options={"gtol": gtol, "maxiter": max_iterations},
            )
            grad_norm = float(np.abs(res.jac).max())
            if grad_norm <= 10 * gtol:
                break
            c0 = unpack(res.x)
            x0 = np.zeros(len(blocks.pairs))
        else:
            raise RuntimeError(
                f"SA-CASSCF did not converge: max |gradient| {grad_norm:.3e} (gtol {gtol:.0e})"
            )
        c_conv = unpack(res.x)
    else:
        grad_norm = 0.0
        c_conv = c0

    c_canon = _canonicalize(c_conv, ao, blocks, n_active_electrons, weights)
    states = casci_at(c_canon, ao, blocks, n_active_electrons)
    e_sa = float(np.dot(weights, states.energies[:2]))
    if states.energies[0] > states.energies[1] + 1e-12:
        raise RuntimeError("state ordering violated after canonicalization")
    return CasscfResult(
        coeffs=c_canon,
        states=states,
        blocks=blocks,
        weights=tuple(weights),
        e_sa=e_sa,
        scf=scf,
        gradient_norm=grad_norm,
        n_evaluations=evals,
    )


def follow_orbitals(
    c_center: np.ndarray, s_center: np.ndarray, s_displaced: np.ndarray
) -> np.ndarray:
    """Transport MO coefficients to a displaced geometry's AO basis.

    Symmetric-orthonormalization following: C' = S_d^{-1/2} S_c^{1/2} C,
    which keeps C' orthonormal in the displaced basis and reduces to C at
    zero displacement.  This defines the fixed-orbital frame used for all
    displaced integral sets.
    """
    def power(s: np.ndarray, exponent: float) -> np.ndarray:
        vals, vecs = np.linalg.eigh(s)
        return vecs @ np.diag(vals ** exponent) @ vecs.T

    return power(s_displaced, -0.5) @ power(s_center, 0.5) @ c_center
