"""Orbital optimization of the state-averaged ensemble energy.

The driver alternates two stages until joint stationarity:

  1. solve the active-space CI problem (circuit ansatz or exact
     diagonalization) at the current orbitals,
  2. take a Newton step in the orbital-rotation parameters at fixed
     reduced density matrices, then rotate the integrals.

Orbital rotations live in the nonredundant blocks (inactive-active,
inactive-virtual, active-virtual); active-active rotations only shuffle
the CI space and are excluded unless explicitly requested.  The orbital
gradient comes from the generalized Fock matrix built with the
state-averaged densities extended to the full orbital space.  Second
derivatives are never formed: the Newton system is solved by conjugate
gradient with Hessian-vector products from central finite differences
of the analytic gradient, capped by a trust radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .ansatz import Ansatz, build_ansatz
from .fcidump import IntegralData
from .operators import embed_with_partition
from .rdm import RdmSet, averaged_rdms, state_rdms, transition_rdms
from .sa_vqe import (
    DEFAULT_S2_PENALTY,
    DEFAULT_WEIGHTS,
    ActiveHamiltonian,
    _check_weights,
    ensemble_gradient,
    reference_states,
    run_sa_vqe,
)
from .simulator import exact_eigenstates

DEFAULT_TRUST_RADIUS = 0.3
DEFAULT_TOL_GRAD = 1e-6
DEFAULT_TOL_ENERGY = 1e-9
FD_HESSIAN_STEP = 1e-5
CG_TOL = 1e-8
MAX_TRUST_HALVINGS = 12


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass(frozen=True)
class OrbitalSpace:
    """Partition of the spatial orbitals with the rotation pair list."""

    inactive: tuple[int, ...]
    active: tuple[int, ...]
    virtual: tuple[int, ...]
    include_active_active: bool = False

    def __post_init__(self) -> None:
        all_indices = sorted(self.inactive + self.active + self.virtual)
        if all_indices != list(range(len(all_indices))):
            raise ValueError("inactive/active/virtual must partition the orbital range")
        if not self.active:
            raise ValueError("active space is empty")

    @property
    def n_orbitals(self) -> int:
        return len(self.inactive) + len(self.active) + len(self.virtual)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Nonredundant rotation pairs (p, q), normalized to p > q."""
        blocks = [
            (self.active, self.inactive),
            (self.virtual, self.inactive),
            (self.virtual, self.active),
        ]
        if self.include_active_active:
            blocks.append((self.active, self.active))
        pairs = set()
        for left, right in blocks:
            for p in left:
                for q in right:
                    if p != q:
                        pairs.add((max(p, q), min(p, q)))
        return tuple(sorted(pairs))


def make_orbital_space(
    n_orbitals: int,
    n_electrons: int,
    n_active_orbitals: int,
    n_active_electrons: int,
    active_indices: Sequence[int] | None = None,
    include_active_active: bool = False,
) -> OrbitalSpace:
    """Choose the partition for a CAS(n_active_electrons, n_active_orbitals).

    Without explicit active_indices the active orbitals sit right above the
    doubly-occupied core.  With explicit indices the core fills the lowest
    remaining orbitals.
    """
    n_core_elec = n_electrons - n_active_electrons
    if n_core_elec < 0 or n_core_elec % 2 != 0:
        raise ValueError(
            f"cannot freeze {n_core_elec} core electrons; "
            "the inactive shell must hold an even non-negative count"
        )
    n_core = n_core_elec // 2
    if n_core + n_active_orbitals > n_orbitals:
        raise ValueError(
            f"{n_core} core + {n_active_orbitals} active orbitals "
            f"do not fit in {n_orbitals}"
        )
    if active_indices is None:
        active = tuple(range(n_core, n_core + n_active_orbitals))
    else:
        active = tuple(int(i) for i in active_indices)
        if len(active) != n_active_orbitals:
            raise ValueError(
                f"active_indices lists {len(active)} orbitals, expected {n_active_orbitals}"
            )
        if len(set(active)) != len(active) or not all(0 <= i < n_orbitals for i in active):
            raise ValueError(f"invalid active_indices {active}")
    rest = [i for i in range(n_orbitals) if i not in active]
    return OrbitalSpace(
        inactive=tuple(rest[:n_core]),
        active=active,
        virtual=tuple(rest[n_core:]),
        include_active_active=include_active_active,
    )


def kappa_matrix(space: OrbitalSpace, x: np.ndarray) -> np.ndarray:
    """Antisymmetric rotation generator from one parameter per pair."""
    pairs = space.pairs
    x = np.asarray(x, dtype=float)
    if x.shape != (len(pairs),):
        raise ValueError(f"expected {len(pairs)} parameters, got shape {x.shape}")
    kappa = np.zeros((space.n_orbitals, space.n_orbitals))
    for value, (p, q) in zip(x, pairs):
        kappa[p, q] = value
        kappa[q, p] = -value
    return kappa


def pair_values(space: OrbitalSpace, matrix: np.ndarray) -> np.ndarray:
    """Extract the (p, q) entries of an antisymmetric matrix over the pairs."""
    return np.array([matrix[p, q] for p, q in space.pairs])


def transform_integrals(data: IntegralData, u: np.ndarray) -> IntegralData:
    """Apply an orbital rotation matrix: h -> u.T h u, g likewise, core kept."""
    n = data.n_orbitals
    if u.shape != (n, n):
        raise ValueError(f"rotation shape {u.shape} does not match {n} orbitals")
    g = data.g
    for _ in range(4):
        # contract the leading axis and cycle it to the back
        g = np.tensordot(g, u, axes=(0, 0))
    return IntegralData(
        n_orbitals=n,
        n_electrons=data.n_electrons,
        ms2=data.ms2,
        core_energy=data.core_energy,
        h=u.T @ data.h @ u,
        g=g,
    )


def rotate_integrals(data: IntegralData, kappa: np.ndarray) -> IntegralData:
    """Rotate by U = exp(-kappa) for an antisymmetric generator kappa."""
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != (data.n_orbitals, data.n_orbitals):
        raise ValueError(
            f"kappa shape {kappa.shape} does not match {data.n_orbitals} orbitals"
        )
    if np.max(np.abs(kappa + kappa.T)) > 1e-12:
        raise ValueError("kappa is not antisymmetric")
    return transform_integrals(data, expm(-kappa))


def extended_densities(
    rdms: RdmSet, space: OrbitalSpace
) -> tuple[np.ndarray, np.ndarray]:
    """Extend active-space RDMs over the full orbital range.

    The inactive block carries the closed-shell values (occupation 2,
    determinant-factorized pair density); the coupling blocks carry the
    standard Coulomb/exchange contractions between the frozen shell and
    the active density.  Virtual rows and columns stay zero.
    """
    if rdms.n_orbitals != len(space.active):
        raise ValueError(
            f"RDMs span {rdms.n_orbitals} orbitals, active space has {len(space.active)}"
        )
    n = space.n_orbitals
    act = np.asarray(space.active, dtype=int)
    gamma = rdms.gamma
    gamma_full = np.zeros((n, n))
    gamma_full[np.ix_(act, act)] = gamma
    for i in space.inactive:
        gamma_full[i, i] = 2.0

    gamma2_full = np.zeros((n, n, n, n))
    gamma2_full[np.ix_(act, act, act, act)] = rdms.gamma2
    for i in space.inactive:
        for j in space.inactive:
            gamma2_full[i, i, j, j] += 4.0
            gamma2_full[i, j, j, i] -= 2.0
        gamma2_full[np.ix_(act, act, [i], [i])] += 2.0 * gamma[:, :, None, None]
        gamma2_full[np.ix_([i], [i], act, act)] += 2.0 * gamma[None, None, :, :]
        gamma2_full[np.ix_(act, [i], [i], act)] -= gamma[:, None, None, :]
        gamma2_full[np.ix_([i], act, act, [i])] -= gamma[None, :, :, None]
    return gamma_full, gamma2_full


def fixed_rdm_energy(
    data: IntegralData, gamma_full: np.ndarray, gamma2_full: np.ndarray
) -> float:
    """Ensemble energy of frozen densities under the given integrals."""
    return float(
        data.core_energy
        + np.einsum("pq,pq->", data.h, gamma_full)
        + 0.5 * np.einsum("pqrs,pqrs->", data.g, gamma2_full)
    )


def generalized_fock(
    data: IntegralData, gamma_full: np.ndarray, gamma2_full: np.ndarray
) -> np.ndarray:
    return gamma_full @ data.h + np.einsum("prst,qrst->pq", gamma2_full, data.g)


def orbital_gradient(
    data: IntegralData, rdms: RdmSet, space: OrbitalSpace
) -> np.ndarray:
    """Gradient of the fixed-RDM energy along each nonredundant rotation.

    Antisymmetric by construction; entries outside the pair list are zeroed.
    Convention matched to rotate_integrals: the (p, q) entry is the
    derivative with respect to the pair's kappa parameter at kappa = 0.
    """
    gamma_full, gamma2_full = extended_densities(rdms, space)
    f = generalized_fock(data, gamma_full, gamma2_full)
    raw = 2.0 * (f - f.T)
    out = np.zeros_like(raw)
    for p, q in space.pairs:
        out[p, q] = raw[p, q]
        out[q, p] = -raw[p, q]
    return out


def fd_hessian_apply(
    data: IntegralData,
    rdms: RdmSet,
    space: OrbitalSpace,
    step: float = FD_HESSIAN_STEP,
) -> Callable[[np.ndarray], np.ndarray]:
    """Hessian-vector products by central differences of the gradient.

    Densities stay frozen; only the integrals move, so each product costs
    two integral rotations.
    """
    gamma_full, gamma2_full = extended_densities(rdms, space)

    def gradient_at(x: np.ndarray) -> np.ndarray:
        rotated = rotate_integrals(data, kappa_matrix(space, x))
        f = generalized_fock(rotated, gamma_full, gamma2_full)
        raw = 2.0 * (f - f.T)
        return pair_values(space, raw)

    def apply(v: np.ndarray) -> np.ndarray:
        norm = np.linalg.norm(v)
        if norm == 0.0:
            return np.zeros_like(v)
        unit = v / norm
        plus = gradient_at(step * unit)
        minus = gradient_at(-step * unit)
        return norm * (plus - minus) / (2.0 * step)

    return apply


def orbital_newton_step(
    grad: np.ndarray,
    hess_apply: Callable[[np.ndarray], np.ndarray],
    trust_radius: float = DEFAULT_TRUST_RADIUS,
    cg_tol: float = CG_TOL,
) -> np.ndarray:
    """Solve H s = -g by CG, capped at the trust radius.

    Negative curvature aborts CG and falls back to steepest descent scaled
    to the trust boundary, which is always a descent direction.
    """
    grad = np.asarray(grad, dtype=float)
    s = np.zeros_like(grad)
    if grad.size == 0 or np.linalg.norm(grad) == 0.0:
        return s
    r = -grad
    d = r.copy()
    rr = float(r @ r)
    for _ in range(max(grad.size, 1) * 2):
        hd = hess_apply(d)
        curvature = float(d @ hd)
        if curvature <= 1e-14 * float(d @ d):
            if np.linalg.norm(s) == 0.0:
                return -grad * (trust_radius / np.linalg.norm(grad))
            return s
        alpha = rr / curvature
        s_next = s + alpha * d
        if np.linalg.norm(s_next) >= trust_radius:
            # clip to the boundary along the current direction
            a = float(d @ d)
            b = 2.0 * float(s @ d)
            c = float(s @ s) - trust_radius**2
            tau = (-b + np.sqrt(b * b - 4 * a * c)) / (2 * a)
            return s + tau * d
        s = s_next
        r = r - alpha * hd
        rr_next = float(r @ r)
        if np.sqrt(rr_next) <= cg_tol:
            break
        d = r + (rr_next / rr) * d
        rr = rr_next
    return s


@dataclass(frozen=True)
class MacroIteration:
    """One row of the optimization history."""

    iteration: int
    e_sa: float
    e0: float
    e1: float
    grad_circuit: float
    grad_orbital: float
    trust_radius: float
    ci_converged: bool


@dataclass
class SaooVqeResult:
    energies: np.ndarray
    e_sa: float
    states: np.ndarray
    theta: np.ndarray | None
    total_rotation: np.ndarray
    integrals: IntegralData
    ham: ActiveHamiltonian
    space: OrbitalSpace
    weights: tuple[float, float]
    rdms: dict[str, RdmSet]
    resolution_angle: float
    converged: bool
    history: list[MacroIteration] = field(repr=False)
    solver: str = "vqe"
    ansatz: Ansatz | None = field(default=None, repr=False)

    @property
    def e0(self) -> float:
        return float(self.energies[0])

    @property
    def e1(self) -> float:
        return float(self.energies[1])


def _solve_ci(
    ham: ActiveHamiltonian,
    solver: str,
    weights: tuple[float, float],
    ansatz: Ansatz | None,
    references,
    theta0: np.ndarray | None,
    optimizer: str,
    s2_penalty: float,
    vqe_gtol: float,
    vqe_max_iters: int,
):
    """One CI solve; returns (energies, states, theta, grad_norm, angle, ok)."""
    if solver == "exact":
        energies, states = exact_eigenstates(
            ham.qubit_op, 2, n_electrons=ham.n_electrons, ms2=0, s2=0.0
        )
        return energies, states, None, 0.0, 0.0, True
    res = run_sa_vqe(
        ham,
        weights=weights,
        theta0=theta0,
        ansatz=ansatz,
        optimizer=optimizer,
        gtol=vqe_gtol,
        s2_penalty=s2_penalty,
        max_iters=vqe_max_iters,
    )
    _, bare_grad = ensemble_gradient(
        res.ansatz, ham.qubit_op.compiled(), references, weights, res.theta
    )
    return (
        res.energies,
        res.states,
        res.theta,
        _inf_norm(bare_grad),
        res.resolution.rotation_angle,
        res.converged,
    )


def run_sa_oo_vqe(
    data: IntegralData,
    n_active_electrons: int,
    n_active_orbitals: int,
    *,
    active_indices: Sequence[int] | None = None,
    weights: tuple[float, float] = DEFAULT_WEIGHTS,
    solver: str = "vqe",
    trotter_reps: int = 1,
    optimizer: str = "bfgs",
    s2_penalty: float = DEFAULT_S2_PENALTY,
    tol_grad: float = DEFAULT_TOL_GRAD,
    tol_energy: float = DEFAULT_TOL_ENERGY,
    max_macro_iters: int = 200,
    trust_radius: float = DEFAULT_TRUST_RADIUS,
    include_active_active: bool = False,
    vqe_gtol: float = 1e-8,
    vqe_max_iters: int = 2000,
    theta0: np.ndarray | None = None,
    initial_rotation: np.ndarray | None = None,
) -> SaooVqeResult:
    """Full state-averaged orbital-optimized eigensolver at one geometry.

    Convergence requires both gradient infinity norms (circuit and orbital)
    below tol_grad and the ensemble energy change below tol_energy.  On
    non-convergence the best visited point is returned with the flag unset.

    theta0 and initial_rotation warm-start the circuit parameters and the
    orbital frame (useful along geometry scans); total_rotation in the
    result always maps the *input* integrals to the converged frame.
    """
    if solver not in ("vqe", "exact"):
        raise ValueError(f"unknown solver {solver!r}, expected 'vqe' or 'exact'")
    _check_weights(weights)
    space = make_orbital_space(
        data.n_orbitals,
        data.n_electrons,
        n_active_orbitals,
        n_active_electrons,
        active_indices=active_indices,
        include_active_active=include_active_active,
    )
    w = (float(weights[0]), float(weights[1]))

    ansatz = build_ansatz(n_active_orbitals, trotter_reps=trotter_reps) if solver == "vqe" else None
    references = reference_states(n_active_orbitals, n_active_electrons)

    if initial_rotation is None:
        current = data
        total_u = np.eye(data.n_orbitals)
    else:
        total_u = np.asarray(initial_rotation, dtype=float)
        if not np.allclose(total_u.T @ total_u, np.eye(data.n_orbitals), atol=1e-8):
            raise ValueError("initial_rotation must be orthogonal")
        current = transform_integrals(data, total_u)
    theta: np.ndarray | None = None if theta0 is None else np.asarray(theta0, dtype=float)
    trust = trust_radius
    prev_e_sa: float | None = None
    history: list[MacroIteration] = []
    best: dict | None = None
    converged = False

    for iteration in range(max_macro_iters):
        h_eff, g_act, e_frozen = embed_with_partition(
            current.h, current.g, current.core_energy, space.inactive, space.active
        )
        ham = ActiveHamiltonian(
            n_orbitals=n_active_orbitals,
            n_electrons=n_active_electrons,
            h_eff=h_eff,
            g_act=g_act,
            e_frozen=e_frozen,
        )
        energies, states, theta, grad_circuit, angle, ci_ok = _solve_ci(
            ham, solver, w, ansatz, references, theta,
            optimizer, s2_penalty, vqe_gtol, vqe_max_iters,
        )
        e_sa = w[0] * energies[0] + w[1] * energies[1]

        r0 = state_rdms(states[:, 0], n_active_orbitals, index=0)
        r1 = state_rdms(states[:, 1], n_active_orbitals, index=1)
        avg = averaged_rdms((r0, r1), w)
        grad_mat = orbital_gradient(current, avg, space)
        grad_vec = pair_values(space, grad_mat)
        grad_orbital = _inf_norm(grad_vec)

        history.append(
            MacroIteration(
                iteration=iteration,
                e_sa=e_sa,
                e0=float(energies[0]),
                e1=float(energies[1]),
                grad_circuit=grad_circuit,
                grad_orbital=grad_orbital,
                trust_radius=trust,
                ci_converged=ci_ok,
            )
        )

        if best is None or e_sa < best["e_sa"]:
            best = {
                "e_sa": e_sa,
                "energies": energies,
                "states": states,
                "theta": None if theta is None else theta.copy(),
                "integrals": current,
                "ham": ham,
                "total_u": total_u.copy(),
                "rdms": {
                    "state0": r0,
                    "state1": r1,
                    "averaged": avg,
                    "transition": transition_rdms(
                        states[:, 0], states[:, 1], n_active_orbitals
                    ),
                },
                "angle": angle,
            }

        stationary = max(grad_circuit, grad_orbital) < tol_grad
        settled = prev_e_sa is None or abs(e_sa - prev_e_sa) < tol_energy
        if stationary and settled:
            converged = True
            break
        prev_e_sa = e_sa

        # trust-region orbital step at frozen densities; the fixed-RDM
        # energy is the model being descended, so reject on any increase
        gamma_full, gamma2_full = extended_densities(avg, space)
        e_fixed = fixed_rdm_energy(current, gamma_full, gamma2_full)
        hess_apply = fd_hessian_apply(current, avg, space)
        accepted = False
        for _ in range(MAX_TRUST_HALVINGS + 1):
            step = orbital_newton_step(grad_vec, hess_apply, trust)
            if np.linalg.norm(step) == 0.0:
                break
            u_step = expm(-kappa_matrix(space, step))
            candidate = transform_integrals(current, u_step)
            if fixed_rdm_energy(candidate, gamma_full, gamma2_full) <= e_fixed + 1e-12:
                current = candidate
                total_u = total_u @ u_step
                accepted = True
                if trust < trust_radius:
                    trust = min(2.0 * trust, trust_radius)
                break
            trust *= 0.5
        if not accepted:
            # no descending orbital move left; stop rather than loop
            break

    assert best is not None
    return SaooVqeResult(
        energies=best["energies"],
        e_sa=best["e_sa"],
        states=best["states"],
        theta=best["theta"],
        total_rotation=best["total_u"],
        integrals=best["integrals"],
        ham=best["ham"],
        space=space,
        weights=w,
        rdms=best["rdms"],
        resolution_angle=best["angle"],
        converged=converged,
        history=history,
        solver=solver,
        ansatz=ansatz,
    )
