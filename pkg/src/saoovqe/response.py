"""Nuclear gradients of the potential energy surfaces and non-adiabatic
couplings between the two resolved states.

Two independent routes are provided and cross-validated:

  * analytic: Hellmann-Feynman contraction of the converged densities
    with derivative integrals.  Exact for the state-averaged energy at
    joint stationarity (fully variational); state-specific gradients and
    the coupling keep only the CI term and omit orbital response.
  * finite difference: re-solves over a stencil of displaced-geometry
    integral sets and differences energies (gradients) or state overlaps
    (couplings).

All displaced inputs use the fixed-orbital convention: integrals at
displaced geometries are expressed in the center geometry's molecular
orbitals, which keeps wavefunction overlaps well-defined in one qubit
basis and makes the Hellmann-Feynman identity hold.

Stencil manifest format (same line scheme as the derivative manifest):

    step <bohr> <tracking>
    center  <relative-path>  <convention_tag>
    <coord>+  <relative-path>  <convention_tag>
    <coord>-  <relative-path>  <convention_tag>

with one +/- pair per nuclear coordinate and `tracking` one of
phase-matched | none.  Blank lines and `#` comments are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fcidump import KNOWN_CONVENTIONS, DerivativeIntegralSet, IntegralData, read_fcidump
from .operators import embed_with_partition
from .orbital_opt import OrbitalSpace, SaooVqeResult, run_sa_oo_vqe, transform_integrals
from .rdm import RdmSet
from .sa_vqe import DEFAULT_S2_PENALTY, ActiveHamiltonian, run_sa_vqe
from .simulator import exact_eigenstates

GAP_FLOOR = 1e-6
TRACKING_THRESHOLD = 0.5
TRACKING_MODES = ("phase-matched", "none")


@dataclass(frozen=True)
class GeometryStencil:
    """Central-difference displacement data for one geometry.

    displaced maps (coordinate_label, direction) with direction +1/-1 to
    the integrals at that displaced geometry; step is the displacement in
    bohr.
    """

    center: IntegralData
    displaced: dict[tuple[str, int], IntegralData]
    step: float
    tracking: str = "phase-matched"

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ValueError(f"stencil step must be positive, got {self.step}")
        if self.tracking not in TRACKING_MODES:
            raise ValueError(f"unknown tracking mode {self.tracking!r}")
        for (label, direction), data in self.displaced.items():
            if direction not in (1, -1):
                raise ValueError(f"direction for {label!r} must be +1 or -1")
            if (label, -direction) not in self.displaced:
                raise ValueError(f"coordinate {label!r} is missing its {-direction:+d} side")
            if data.n_orbitals != self.center.n_orbitals:
                raise ValueError(
                    f"displaced integrals for {label!r} have {data.n_orbitals} "
                    f"orbitals, center has {self.center.n_orbitals}"
                )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted({label for label, _ in self.displaced}))


def parse_stencil_manifest(path: str | Path) -> GeometryStencil:
    """Read a stencil manifest (format in the module docstring)."""
    path = Path(path)
    step: float | None = None
    tracking = "phase-matched"
    center: IntegralData | None = None
    displaced: dict[tuple[str, int], IntegralData] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if parts[0] == "step":
            if len(parts) != 3:
                raise ValueError(
                    f"{path.name} line {lineno}: expected 'step <bohr> <tracking>'"
                )
            step = float(parts[1])
            tracking = parts[2]
            continue
        if len(parts) != 3:
            raise ValueError(
                f"{path.name} line {lineno}: expected "
                f"'<label> <path> <convention>', got {line!r}"
            )
        label, relpath, convention = parts
        if convention not in KNOWN_CONVENTIONS:
            raise ValueError(
                f"{path.name} line {lineno}: unknown convention tag {convention!r}"
            )
        data = read_fcidump(path.parent / relpath)
        if label == "center":
            center = data
        elif label.endswith("+"):
            displaced[label[:-1], 1] = data
        elif label.endswith("-"):
            displaced[label[:-1], -1] = data
        else:
            raise ValueError(
                f"{path.name} line {lineno}: label {label!r} must be 'center' "
                "or end in '+'/'-'"
            )
    if step is None:
        raise ValueError(f"{path.name}: missing 'step' directive")
    if center is None:
        raise ValueError(f"{path.name}: missing 'center' entry")
    return GeometryStencil(center=center, displaced=displaced, step=step, tracking=tracking)


@dataclass
class GradientResult:
    """Per-coordinate derivatives of e0, e1 and the ensemble energy."""

    labels: tuple[str, ...]
    de0: np.ndarray
    de1: np.ndarray
    de_sa: np.ndarray
    method: str
    flags: dict[str, tuple[str, ...]]


@dataclass
class NacResult:
    """First-order coupling <psi0|d/dx psi1> per coordinate (1/bohr).

    Only d01 is stored; d10 is its negative.  d00/d11 carry the
    norm-conservation residuals of the finite-difference route and stay
    None on the analytic route.
    """

    labels: tuple[str, ...]
    d01: np.ndarray
    e_gap: float
    method: str
    flags: dict[str, tuple[str, ...]]
    d00: np.ndarray | None = None
    d11: np.ndarray | None = None


def _match_states(
    center_states: np.ndarray, states: np.ndarray
) -> tuple[list[int], np.ndarray, bool]:
    """Assign displaced states to the center's, fixing phases.

    Returns (permutation, signs, ambiguous): displaced state perm[i] with
    sign signs[i] corresponds to center state i.  Ambiguous when an
    assigned overlap falls below the tracking threshold.
    """
    overlap = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            overlap[i, j] = np.vdot(center_states[:, i], states[:, j]).real
    if abs(overlap[0, 0] * overlap[1, 1]) >= abs(overlap[0, 1] * overlap[1, 0]):
        perm = [0, 1]
    else:
        perm = [1, 0]
    signs = np.array([np.sign(overlap[i, perm[i]]) or 1.0 for i in range(2)])
    ambiguous = any(abs(overlap[i, perm[i]]) < TRACKING_THRESHOLD for i in range(2))
    return perm, signs, ambiguous


def fd_gradient(
    stencil: GeometryStencil,
    n_active_electrons: int,
    n_active_orbitals: int,
    **solve_options,
) -> GradientResult:
    """Central-difference nuclear gradients from full re-optimizations.

    Every stencil point is solved with run_sa_oo_vqe; displaced states are
    matched to the center's by overlap so surface labels stay consistent
    through crossings.
    """
    center = run_sa_oo_vqe(
        stencil.center, n_active_electrons, n_active_orbitals, **solve_options
    )
    if not center.converged:
        raise RuntimeError("SA-OO-VQE did not converge at the stencil center")

    labels = stencil.labels
    de0 = np.empty(len(labels))
    de1 = np.empty(len(labels))
    de_sa = np.empty(len(labels))
    flags: dict[str, tuple[str, ...]] = {}
    for k, label in enumerate(labels):
        sided: dict[int, np.ndarray] = {}
        coord_flags: list[str] = []
        for direction in (1, -1):
            res = run_sa_oo_vqe(
                stencil.displaced[label, direction],
                n_active_electrons,
                n_active_orbitals,
                **solve_options,
            )
            if not res.converged:
                raise RuntimeError(
                    f"SA-OO-VQE did not converge at stencil point {label!r} "
                    f"direction {direction:+d}"
                )
            perm, _, ambiguous = _match_states(center.states, res.states)
            if ambiguous:
                coord_flags.append("tracking-ambiguous")
            sided[direction] = res.energies[perm]
        de0[k], de1[k] = (sided[1] - sided[-1]) / (2.0 * stencil.step)
        w = center.weights
        de_sa[k] = w[0] * de0[k] + w[1] * de1[k]
        flags[label] = tuple(coord_flags)
    return GradientResult(
        labels=labels, de0=de0, de1=de1, de_sa=de_sa,
        method="finite-difference", flags=flags,
    )


def _embedded_derivatives(
    result: SaooVqeResult, derivs: list[DerivativeIntegralSet]
) -> list[tuple[str, np.ndarray, np.ndarray, float]]:
    """Rotate derivative integrals into the converged orbital frame and
    reduce them to the active space: (label, dh_eff, dg_act, de_frozen)."""
    out = []
    space = result.space
    for dset in derivs:
        if dset.convention != "fixed-orbital":
            raise ValueError(
                f"derivative set {dset.label!r} uses convention "
                f"{dset.convention!r}; the analytic route requires 'fixed-orbital'"
            )
        rotated = transform_integrals(dset.data, result.total_rotation)
        dh_eff, dg_act, de_frozen = embed_with_partition(
            rotated.h, rotated.g, rotated.core_energy, space.inactive, space.active
        )
        out.append((dset.label, dh_eff, dg_act, de_frozen))
    return out


def _contract(rdms: RdmSet, dh_eff: np.ndarray, dg_act: np.ndarray) -> float:
    return float(
        np.einsum("pq,pq->", dh_eff, rdms.gamma)
        + 0.5 * np.einsum("pqrs,pqrs->", dg_act, rdms.gamma2)
    )


def hf_gradient(
    result: SaooVqeResult, derivs: list[DerivativeIntegralSet]
) -> GradientResult:
    """Hellmann-Feynman gradients by contracting densities with derivative
    integrals.

    Exact for the ensemble energy (the converged point is stationary in
    every variational parameter); the state-specific columns omit the
    orbital/CI response of the individual states and are validated against
    the finite-difference route instead.
    """
    if not result.converged:
        raise ValueError("analytic gradients require a converged result")
    labels = []
    de0, de1, de_sa = [], [], []
    w = result.weights
    for label, dh_eff, dg_act, de_frozen in _embedded_derivatives(result, derivs):
        labels.append(label)
        g0 = de_frozen + _contract(result.rdms["state0"], dh_eff, dg_act)
        g1 = de_frozen + _contract(result.rdms["state1"], dh_eff, dg_act)
        de0.append(g0)
        de1.append(g1)
        de_sa.append(w[0] * g0 + w[1] * g1)
    return GradientResult(
        labels=tuple(labels),
        de0=np.array(de0),
        de1=np.array(de1),
        de_sa=np.array(de_sa),
        method="hellmann-feynman",
        flags={label: () for label in labels},
    )


def hf_nac(
    result: SaooVqeResult,
    derivs: list[DerivativeIntegralSet],
    gap_floor: float = GAP_FLOOR,
) -> NacResult:
    """Analytic (CI-term) non-adiabatic coupling.

    d01 = <0|dH/dx|1> / (e1 - e0) with the numerator contracted from
    transition densities.  Below gap_floor the division is unreliable, so
    values are withheld and every coordinate is flagged divergent.
    """
    if not result.converged:
        raise ValueError("analytic couplings require a converged result")
    gap = result.e1 - result.e0
    embedded = _embedded_derivatives(result, derivs)
    labels = tuple(label for label, *_ in embedded)
    if gap < gap_floor:
        return NacResult(
            labels=labels,
            d01=np.full(len(labels), np.nan),
            e_gap=gap,
            method="hellmann_feynman",
            flags={label: ("divergent",) for label in labels},
        )
    trans = result.rdms["transition"]
    d01 = np.array(
        [_contract(trans, dh_eff, dg_act) / gap for _, dh_eff, dg_act, _ in embedded]
    )
    return NacResult(
        labels=labels,
        d01=d01,
        e_gap=gap,
        method="hellmann_feynman",
        flags={label: () for label in labels},
    )


def _ci_solve_in_frame(
    data: IntegralData,
    space: OrbitalSpace,
    solver: str,
    weights,
    n_active_electrons: int,
    ansatz,
    theta0,
    s2_penalty: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Solve the CI problem only, keeping the orbital frame fixed."""
    h_eff, g_act, e_frozen = embed_with_partition(
        data.h, data.g, data.core_energy, space.inactive, space.active
    )
    ham = ActiveHamiltonian(
        n_orbitals=len(space.active),
        n_electrons=n_active_electrons,
        h_eff=h_eff,
        g_act=g_act,
        e_frozen=e_frozen,
    )
    if solver == "exact":
        energies, states = exact_eigenstates(
            ham.qubit_op, 2, n_electrons=n_active_electrons, ms2=0, s2=0.0
        )
        return energies, states, None
    res = run_sa_vqe(
        ham, weights=weights, ansatz=ansatz, theta0=theta0, s2_penalty=s2_penalty
    )
    return res.energies, res.states, res.theta


def fd_overlap_nac(
    stencil: GeometryStencil,
    n_active_electrons: int,
    n_active_orbitals: int,
    gap_floor: float = GAP_FLOOR,
    center_result: SaooVqeResult | None = None,
    **solve_options,
) -> NacResult:
    """Finite-difference coupling from wavefunction overlaps.

    d01 ~ [<0(x)|1(x+h)> - <0(x)|1(x-h)>] / (2h).  The center is solved
    with full orbital optimization; displaced points re-solve only the CI
    problem in the center's converged orbital frame, which is what makes
    the overlaps meaningful.  Displaced states are tracked and re-phased
    against the center's (overlap made positive).  Pass center_result to
    reuse an existing converged solve of stencil.center.
    """
    if stencil.tracking != "phase-matched":
        raise ValueError("fd_overlap_nac requires a phase-matched stencil")
    center = center_result
    if center is None:
        center = run_sa_oo_vqe(
            stencil.center, n_active_electrons, n_active_orbitals, **solve_options
        )
    if not center.converged:
        raise RuntimeError("SA-OO-VQE did not converge at the stencil center")
    gap = center.e1 - center.e0

    solver = solve_options.get("solver", "vqe")
    s2_penalty = solve_options.get("s2_penalty", DEFAULT_S2_PENALTY)
    labels = stencil.labels
    d01 = np.empty(len(labels))
    d00 = np.empty(len(labels))
    d11 = np.empty(len(labels))
    flags: dict[str, tuple[str, ...]] = {}
    c0 = center.states[:, 0]
    c1 = center.states[:, 1]
    for k, label in enumerate(labels):
        tracked: dict[int, np.ndarray] = {}
        coord_flags: list[str] = []
        for direction in (1, -1):
            # express the displaced integrals in the center's final frame
            data = transform_integrals(
                stencil.displaced[label, direction], center.total_rotation
            )
            _, states, _ = _ci_solve_in_frame(
                data, center.space, solver, center.weights,
                n_active_electrons, center.ansatz, center.theta, s2_penalty,
            )
            perm, signs, ambiguous = _match_states(center.states, states)
            if ambiguous:
                coord_flags.append(f"tracking-ambiguous{direction:+d}")
            tracked[direction] = states[:, perm] * signs[None, :]
        two_h = 2.0 * stencil.step
        d01[k] = (
            np.vdot(c0, tracked[1][:, 1]).real - np.vdot(c0, tracked[-1][:, 1]).real
        ) / two_h
        d00[k] = (
            np.vdot(c0, tracked[1][:, 0]).real - np.vdot(c0, tracked[-1][:, 0]).real
        ) / two_h
        d11[k] = (
            np.vdot(c1, tracked[1][:, 1]).real - np.vdot(c1, tracked[-1][:, 1]).real
        ) / two_h
        if gap < gap_floor:
            coord_flags.append("divergent")
        flags[label] = tuple(coord_flags)
    return NacResult(
        labels=labels,
        d01=d01,
        e_gap=gap,
        method="fd_overlap",
        flags=flags,
        d00=d00,
        d11=d11,
    )
