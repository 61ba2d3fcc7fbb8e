"""Unitary product ansatz with generalized singles and paired doubles.

The circuit is an ordered product of fermionic-excitation exponentials

    |psi(theta)> = prod_k exp(theta_k (T_k - T_k^dagger)) |reference>

realized as Pauli rotations: each generator G_k = -i(T_k - T_k^dagger)
expands into Pauli strings with real coefficients c_j that all commute
within one excitation, so exp(i theta G_k) = prod_j R_{P_j}(-2 theta c_j)
holds exactly and only the ordering between different excitations is a
Trotter choice.

Excitations run over all active orbitals (generalized, no occupied/virtual
split): one spin-tied parameter per spatial orbital pair for singles, and
one parameter per Sz-conserving set of four distinct spin orbitals for
doubles, counting an excitation and its conjugate once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .operators import excitation_generator, spin_orbital_index
from .pauli import PauliSum


def enumerate_singles(n_spatial: int) -> list[tuple[int, int]]:
    """Spatial orbital pairs (p, q) with p < q, one tied parameter each."""
    return [(p, q) for p in range(n_spatial) for q in range(p + 1, n_spatial)]


def enumerate_paired_doubles(
    n_spatial: int,
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Doubles ((a1, a2) -> (c1, c2)) over four distinct spin orbitals.

    Kept are Sz-conserving quadruples only, with an excitation and its
    hermitian conjugate (which shares the generator up to sign) counted
    once; the representative has the lexicographically smaller pair on the
    annihilator side.
    """
    n_modes = 2 * n_spatial
    seen = set()
    out = []
    for a1 in range(n_modes):
        for a2 in range(a1 + 1, n_modes):
            for c1 in range(n_modes):
                for c2 in range(c1 + 1, n_modes):
                    if len({a1, a2, c1, c2}) != 4:
                        continue
                    # alpha on even modes: Sz change must vanish
                    dsz = (a1 % 2) + (a2 % 2) - (c1 % 2) - (c2 % 2)
                    if dsz != 0:
                        continue
                    if (a1, a2) > (c1, c2):
                        continue
                    key = ((a1, a2), (c1, c2))
                    if key in seen:
                        continue
                    seen.add(key)
                    out.append(key)
    return out


@dataclass
class Ansatz:
    """Compiled rotation sequence acting on an active-space register."""

    n_qubits: int
    n_params: int
    trotter_reps: int
    labels: list[str]
    xs: np.ndarray = field(repr=False)
    zs: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    prefactors: np.ndarray = field(repr=False)
    param_idx: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.trotter_reps < 1:
            raise ValueError("trotter_reps must be at least 1")
        reps = self.trotter_reps
        self._xs_full = np.tile(self.xs, reps)
        self._zs_full = np.tile(self.zs, reps)
        self._phases_full = np.tile(self.phases, reps)
        self._pref_full = np.tile(self.prefactors / reps, reps)
        self._idx_full = np.tile(self.param_idx, reps)

    @property
    def n_gates(self) -> int:
        return len(self._xs_full)

    def gate_angles(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(
                f"theta has shape {theta.shape}, expected ({self.n_params},)"
            )
        return self._pref_full * theta[self._idx_full]

    def state(self, theta: np.ndarray, reference: np.ndarray) -> np.ndarray:
        """|psi(theta)> for a normalized reference vector."""
        psi = np.array(reference, dtype=np.complex128, copy=True)
        kernels.apply_rotations_inplace(
            psi, self._xs_full, self._zs_full, self._phases_full,
            self.gate_angles(theta),
        )
        return psi

    def param_gradient(self, gate_gradient: np.ndarray) -> np.ndarray:
        """Chain per-gate angle derivatives into parameter derivatives."""
        return np.bincount(
            self._idx_full,
            weights=gate_gradient * self._pref_full,
            minlength=self.n_params,
        )

    def energy_gradient(self, theta: np.ndarray, reference: np.ndarray,
                        ham) -> tuple[float, np.ndarray]:
        """Energy and exact d<H>/dtheta via one reverse sweep.

        ``ham`` is a PauliSum or CompiledPauliSum; cost is two state
        evolutions regardless of the parameter count.
        """
        hc = ham.compiled() if isinstance(ham, PauliSum) else ham
        phi = self.state(theta, reference)
        lam = np.empty_like(phi)
        kernels.apply_pauli_sum(phi, lam, hc.xs, hc.zs, hc.phases, hc.coeffs)
        energy = float(np.real(kernels.dot(phi, lam)))
        ggrad = np.zeros(self.n_gates)
        kernels.adjoint_sweep(
            phi, lam, self._xs_full, self._zs_full, self._phases_full,
            self.gate_angles(theta), ggrad,
        )
        return energy, self.param_gradient(ggrad)


def build_ansatz(n_spatial: int, trotter_reps: int = 1) -> Ansatz:
    """Generalized singles + paired doubles over ``n_spatial`` active orbitals."""
    if n_spatial < 1:
        raise ValueError("need at least one active orbital")
    n_modes = 2 * n_spatial

    generators: list[tuple[str, list[PauliSum]]] = []
    for p, q in enumerate_singles(n_spatial):
        gens = [
            excitation_generator(
                n_modes,
                (spin_orbital_index(q, sigma),),
                (spin_orbital_index(p, sigma),),
            )
            for sigma in (0, 1)
        ]
        generators.append((f"s:{p}->{q}", gens))
    for (a1, a2), (c1, c2) in enumerate_paired_doubles(n_spatial):
        gen = excitation_generator(n_modes, (c1, c2), (a2, a1))
        generators.append((f"d:{a1},{a2}->{c1},{c2}", [gen]))

    xs, zs, phases, prefactors, param_idx, labels = [], [], [], [], [], []
    for k, (label, gens) in enumerate(generators):
        labels.append(label)
        for gen in gens:
            for string, coeff in gen:
                xs.append(string.x)
                zs.append(string.z)
                phases.append(1j ** ((string.x & string.z).bit_count() % 4))
                # exp(i theta c P) = R_P(-2 theta c)
                prefactors.append(-2.0 * coeff.real)
                param_idx.append(k)

    return Ansatz(
        n_qubits=n_modes,
        n_params=len(generators),
        trotter_reps=trotter_reps,
        labels=labels,
        xs=np.array(xs, dtype=np.uint64),
        zs=np.array(zs, dtype=np.uint64),
        phases=np.array(phases, dtype=np.complex128),
        prefactors=np.array(prefactors, dtype=float),
        param_idx=np.array(param_idx, dtype=np.int64),
    )
