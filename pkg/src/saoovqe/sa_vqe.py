"""State-averaged VQE over a two-state singlet ensemble.

One circuit U(theta) acts on two orthogonal references: the closed-shell
determinant and the spin-adapted HOMO->LUMO singlet single excitation.  The
optimizer minimizes the weighted ensemble energy

    E_SA(theta) = w_A <A|U+ H U|A> + w_B <B|U+ H U|B>

and the physical states are recovered afterwards by diagonalizing the 2x2
Hamiltonian in the span of the two evolved references.  Both references are
singlets and the energy gradient along any spin-breaking direction vanishes
at a spin-pure point, so a gradient-following optimizer started at theta = 0
stays in the singlet sector without explicit constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .ansatz import Ansatz, build_ansatz
from .fcidump import IntegralData
from .operators import (
    embed_with_partition,
    qubit_hamiltonian,
    s_squared_operator,
    singlet_single_excitation,
)
from .optimizers import OptimizeResult, minimize_bfgs, minimize_gradient_descent, minimize_pso
from .pauli import PauliSum
from .simulator import hartree_fock_state

DEFAULT_WEIGHTS = (0.5, 0.5)
DEGENERACY_FLOOR = 1e-12
#: weight of the S^2 term added to the optimization objective.  The doubles
#: mix spin-scalar and spin-tensor components under one parameter, so an
#: unconstrained search can drift into a lower-lying spin-contaminated
#: minimum when a triplet sits below the second singlet; the penalty removes
#: those minima while leaving every spin-pure stationary point (value and
#: gradient) untouched, so converged singlet energies carry no bias.
DEFAULT_S2_PENALTY = 0.5


@dataclass
class ActiveHamiltonian:
    """Active-space Hamiltonian with its qubit image."""

    n_orbitals: int
    n_electrons: int
    h_eff: np.ndarray = field(repr=False)
    g_act: np.ndarray = field(repr=False)
    e_frozen: float = 0.0
    qubit_op: PauliSum = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.n_electrons % 2 or self.n_electrons <= 0:
            raise ValueError(
                f"closed-shell reference needs a positive even electron count,"
                f" got {self.n_electrons}"
            )
        if self.n_electrons > 2 * self.n_orbitals:
            raise ValueError("more active electrons than active spin orbitals")
        if self.n_electrons == 2 * self.n_orbitals:
            raise ValueError(
                "active space is completely filled; the excited reference needs"
                " an empty orbital"
            )
        if self.qubit_op is None:
            self.qubit_op = qubit_hamiltonian(self.h_eff, self.g_act, self.e_frozen)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_orbitals


def default_partition(
    n_total_orbitals: int, n_total_electrons: int,
    n_active_orbitals: int, n_active_electrons: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Lowest orbitals inactive, the next ones active, the rest virtual."""
    n_frozen_electrons = n_total_electrons - n_active_electrons
    if n_frozen_electrons < 0 or n_frozen_electrons % 2:
        raise ValueError(
            f"cannot freeze {n_frozen_electrons} electrons into closed shells"
        )
    n_inactive = n_frozen_electrons // 2
    if n_inactive + n_active_orbitals > n_total_orbitals:
        raise ValueError("active space does not fit inside the orbital basis")
    inactive = np.arange(n_inactive)
    active = np.arange(n_inactive, n_inactive + n_active_orbitals)
    return inactive, active


def active_hamiltonian_from_integrals(
    data: IntegralData, n_active_orbitals: int, n_active_electrons: int
) -> ActiveHamiltonian:
    inactive, active = default_partition(
        data.n_orbitals, data.n_electrons, n_active_orbitals, n_active_electrons
    )
    h_eff, g_act, e_frozen = embed_with_partition(
        data.h, data.g, data.core_energy, inactive, active
    )
    return ActiveHamiltonian(
        n_orbitals=n_active_orbitals,
        n_electrons=n_active_electrons,
        h_eff=h_eff,
        g_act=g_act,
        e_frozen=e_frozen,
    )


def reference_states(n_orbitals: int, n_electrons: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-shell determinant and singlet HOMO->LUMO single excitation."""
    n_pairs = n_electrons // 2
    n_qubits = 2 * n_orbitals
    phi_a = hartree_fock_state(n_qubits, n_pairs, n_pairs)
    homo, lumo = n_pairs - 1, n_pairs
    op = singlet_single_excitation(n_qubits, occ=homo, vir=lumo)
    phi_b = kernels.apply_operator(op, phi_a)
    phi_b /= np.linalg.norm(phi_b)
    return phi_a, phi_b


def _check_weights(weights: tuple[float, float]) -> tuple[float, float]:
    w = (float(weights[0]), float(weights[1]))
    if w[0] < 0 or w[1] < 0 or abs(w[0] + w[1] - 1.0) > 1e-12:
        raise ValueError(f"weights must be non-negative and sum to 1, got {w}")
    return w


def ensemble_energy(
    ansatz: Ansatz, ham, refs: tuple[np.ndarray, np.ndarray],
    weights: tuple[float, float], theta: np.ndarray,
) -> float:
    hc = ham.compiled() if isinstance(ham, PauliSum) else ham
    total = 0.0
    for w, ref in zip(weights, refs):
        if w != 0.0:
            total += w * kernels.expectation(hc, ansatz.state(theta, ref))
    return total


def ensemble_gradient(
    ansatz: Ansatz, ham, refs: tuple[np.ndarray, np.ndarray],
    weights: tuple[float, float], theta: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Ensemble energy and its exact theta-gradient via reverse sweeps."""
    hc = ham.compiled() if isinstance(ham, PauliSum) else ham
    energy = 0.0
    grad = np.zeros(ansatz.n_params)
    for w, ref in zip(weights, refs):
        if w == 0.0:
            continue
        e, g = ansatz.energy_gradient(theta, ref, hc)
        energy += w * e
        grad += w * g
    return energy, grad


def ensemble_gradient_parameter_shift(
    ansatz: Ansatz, ham, refs: tuple[np.ndarray, np.ndarray],
    weights: tuple[float, float], theta: np.ndarray,
) -> np.ndarray:
    """Exact gradient from the two-point rotation shift rule.

    Every gate is a Pauli rotation, so shifting one gate angle by +-pi/2
    gives the exact derivative; the per-gate values are then chained onto
    the shared circuit parameters.  Slower than the reverse sweep but free
    of adjoint bookkeeping, which makes it the natural cross-check.
    """
    hc = ham.compiled() if isinstance(ham, PauliSum) else ham
    angles = ansatz.gate_angles(theta)

    def energy_at(gate_angles: np.ndarray) -> float:
        total = 0.0
        for w, ref in zip(weights, refs):
            if w == 0.0:
                continue
            psi = np.array(ref, dtype=np.complex128, copy=True)
            kernels.apply_rotations_inplace(
                psi, ansatz._xs_full, ansatz._zs_full, ansatz._phases_full,
                gate_angles,
            )
            total += w * kernels.expectation(hc, psi)
        return total

    gate_grad = np.zeros(ansatz.n_gates)
    for j in range(ansatz.n_gates):
        shifted = angles.copy()
        shifted[j] += 0.5 * math.pi
        e_plus = energy_at(shifted)
        shifted[j] -= math.pi
        e_minus = energy_at(shifted)
        gate_grad[j] = 0.5 * (e_plus - e_minus)
    return ansatz.param_gradient(gate_grad)


def resolve_states(
    ansatz: Ansatz, ham, refs: tuple[np.ndarray, np.ndarray], theta: np.ndarray,
) -> "ResolvedStates":
    """Diagonalize H in the span of the two evolved references.

    The evolved references stay orthonormal, so the subspace Hamiltonian is
    a real symmetric 2x2 matrix; its eigenbasis gives the physical state
    pair, ordered by energy.
    """
    hc = ham.compiled() if isinstance(ham, PauliSum) else ham
    psi_a = ansatz.state(theta, refs[0])
    psi_b = ansatz.state(theta, refs[1])
    a = kernels.expectation(hc, psi_a)
    b = kernels.expectation(hc, psi_b)
    c_complex = kernels.transition(hc, psi_a, psi_b)
    if abs(c_complex.imag) > 1e-9:
        raise ValueError(
            f"subspace coupling has imaginary part {c_complex.imag:.3e};"
            " states are expected to be real"
        )
    c = c_complex.real

    if abs(a - b) < DEGENERACY_FLOOR:
        phi = 0.25 * math.pi if abs(c) > 0.0 else 0.0
    else:
        phi = 0.5 * math.atan(2.0 * c / (a - b))
    cs, sn = math.cos(phi), math.sin(phi)
    psi_0 = cs * psi_a + sn * psi_b
    psi_1 = -sn * psi_a + cs * psi_b
    e_0 = a * cs * cs + b * sn * sn + 2.0 * c * sn * cs
    e_1 = a * sn * sn + b * cs * cs - 2.0 * c * sn * cs
    swapped = e_0 > e_1
    if swapped:
        psi_0, psi_1 = psi_1, psi_0
        e_0, e_1 = e_1, e_0
    return ResolvedStates(
        energies=np.array([e_0, e_1]),
        states=np.column_stack([psi_0, psi_1]),
        rotation_angle=phi,
        subspace=np.array([[a, c], [c, b]]),
        swapped=swapped,
    )


@dataclass
class ResolvedStates:
    energies: np.ndarray
    states: np.ndarray = field(repr=False)
    rotation_angle: float
    subspace: np.ndarray
    swapped: bool


@dataclass
class SAVQEResult:
    theta: np.ndarray
    ensemble_energy: float
    energies: np.ndarray
    states: np.ndarray = field(repr=False)
    references: tuple[np.ndarray, np.ndarray] = field(repr=False)
    ansatz: Ansatz = field(repr=False)
    weights: tuple[float, float] = DEFAULT_WEIGHTS
    resolution: ResolvedStates = field(default=None, repr=False)  # type: ignore[assignment]
    optimize_result: OptimizeResult = field(default=None, repr=False)  # type: ignore[assignment]

    @property
    def converged(self) -> bool:
        return self.optimize_result.converged


def run_sa_vqe(
    ham: ActiveHamiltonian,
    weights: tuple[float, float] = DEFAULT_WEIGHTS,
    trotter_reps: int = 1,
    theta0: np.ndarray | None = None,
    ansatz: Ansatz | None = None,
    optimizer: str = "bfgs",
    gtol: float = 1e-8,
    max_iters: int = 2000,
    s2_penalty: float = DEFAULT_S2_PENALTY,
    pso_bounds_halfwidth: float = math.pi,
    pso_particles: int = 24,
    pso_seed: int = 0,
) -> SAVQEResult:
    """Minimize the ensemble energy and resolve the two physical states.

    ``optimizer`` is one of "bfgs", "gradient-descent", "pso".  The swarm
    option searches a box of half-width ``pso_bounds_halfwidth`` around
    theta0 and is useful as a derivative-free fallback.

    ``s2_penalty`` adds mu * <S^2> per state to the objective to keep the
    search in the singlet sector; reported energies always come from the
    bare Hamiltonian.
    """
    weights = _check_weights(weights)
    if s2_penalty < 0.0:
        raise ValueError("s2_penalty must be non-negative")
    if ansatz is None:
        ansatz = build_ansatz(ham.n_orbitals, trotter_reps=trotter_reps)
    refs = reference_states(ham.n_orbitals, ham.n_electrons)
    hc = ham.qubit_op.compiled()
    objective_op = ham.qubit_op
    if s2_penalty > 0.0:
        objective_op = objective_op + s_squared_operator(ham.n_qubits) * s2_penalty
    oc = objective_op.compiled()
    if theta0 is None:
        theta0 = np.zeros(ansatz.n_params)
    theta0 = np.asarray(theta0, dtype=float)

    def fun(theta: np.ndarray) -> float:
        return ensemble_energy(ansatz, oc, refs, weights, theta)

    def jac(theta: np.ndarray) -> np.ndarray:
        return ensemble_gradient(ansatz, oc, refs, weights, theta)[1]

    if optimizer == "bfgs":
        opt = minimize_bfgs(fun, theta0, jac, gtol=gtol, max_iters=max_iters)
    elif optimizer == "gradient-descent":
        opt = minimize_gradient_descent(fun, theta0, jac, gtol=gtol, max_iters=max_iters)
    elif optimizer == "pso":
        lo = theta0 - pso_bounds_halfwidth
        hi = theta0 + pso_bounds_halfwidth
        opt = minimize_pso(
            fun, (lo, hi), n_particles=pso_particles, max_iters=max_iters,
            seed=pso_seed,
        )
    else:
        raise ValueError(f"unknown optimizer {optimizer!r}")

    resolution = resolve_states(ansatz, hc, refs, opt.x)
    return SAVQEResult(
        theta=opt.x,
        ensemble_energy=ensemble_energy(ansatz, hc, refs, weights, opt.x),
        energies=resolution.energies,
        states=resolution.states,
        references=refs,
        ansatz=ansatz,
        weights=weights,
        resolution=resolution,
        optimize_result=opt,
    )
