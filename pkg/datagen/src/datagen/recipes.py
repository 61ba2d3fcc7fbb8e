"""Fixture recipes: which molecules, grids and files to generate.

Every fixture directory is self-contained: FCIDUMP files in the
converged state-averaged CASSCF orbital basis, displacement stencils and
derivative manifests in the fixed-orbital convention, and a metadata
document recording the geometry, the backend identity and the reference
energies, gradients and couplings the solver is compared against.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .casscf import CasscfResult, follow_orbitals, mo_transform, solve_sa_casscf
from .ci import one_rdm, two_rdm
from .emit import (
    MoIntegrals,
    backend_stamp,
    write_derivative_manifest,
    write_fcidump,
    write_metadata,
    write_scan_manifest,
    write_stencil_manifest,
)
from .molecules import (
    CH_BOND,
    CN_BOND,
    HCN_ANGLE_DEG,
    NH_BOND,
    coordinate_labels,
    formaldimine,
    h2_molecule,
    h4_distorted,
)
from .scf import AoIntegrals, compute_ao_integrals

DERIVATIVE_STEP = 1e-3  # bohr
EQUAL_WEIGHTS = (0.5, 0.5)


@dataclass(frozen=True)
class FixtureRecipe:
    """One fixture's generation plan."""

    name: str
    symbols: tuple[str, ...]
    coords: np.ndarray = field(repr=False)
    cas: tuple[int, int]
    n_electrons: int
    basis: str = "STO-3G"
    scan_alphas: tuple[float, ...] = ()
    phi_deg: float | None = None
    alpha_deg: float | None = None
    stencil_steps: tuple[float, ...] = ()
    stencil_labels: tuple[str, ...] = ()
    derivative_step: float | None = None

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=float)
        if not np.all(np.isfinite(coords)):
            raise ValueError("recipe geometry contains non-finite coordinates")
        if self.scan_alphas is not None and len(self.scan_alphas) == 0 and self.name == "scan":
            raise ValueError("scan recipe needs a non-empty grid")


def h2_recipe() -> FixtureRecipe:
    symbols, coords = h2_molecule(1.4)
    return FixtureRecipe(
        name="h2", symbols=tuple(symbols), coords=coords, cas=(2, 2), n_electrons=2
    )


def h4_recipe() -> FixtureRecipe:
    symbols, coords = h4_distorted()
    return FixtureRecipe(
        name="h4",
        symbols=tuple(symbols),
        coords=coords,
        cas=(2, 2),
        n_electrons=4,
        stencil_steps=(1e-3,),
        stencil_labels=("H0_x", "H1_y", "H3_z"),
        derivative_step=DERIVATIVE_STEP,
    )


def formaldimine_recipe() -> FixtureRecipe:
    symbols, coords = formaldimine(130.0, 90.0)
    return FixtureRecipe(
        name="formaldimine",
        symbols=tuple(symbols),
        coords=coords,
        cas=(4, 3),
        n_electrons=16,
        alpha_deg=130.0,
        phi_deg=90.0,
        stencil_steps=(1e-3, 5e-4),
        stencil_labels=tuple(coordinate_labels(symbols)),
        derivative_step=DERIVATIVE_STEP,
    )


def scan_recipe() -> FixtureRecipe:
    symbols, coords = formaldimine(130.0, 90.0)
    return FixtureRecipe(
        name="scan",
        symbols=tuple(symbols),
        coords=coords,
        cas=(4, 3),
        n_electrons=16,
        scan_alphas=tuple(float(a) for a in range(100, 165, 5)),
        phi_deg=90.0,
    )


def _parse_label(label: str, n_atoms: int) -> tuple[int, int]:
    """C0_x -> (0, 0); element prefix is cosmetic, index and axis bind."""
    stem, _, axis = label.rpartition("_")
    atom = int("".join(ch for ch in stem if ch.isdigit()))
    axis_index = "xyz".index(axis)
    if not 0 <= atom < n_atoms:
        raise ValueError(f"label {label!r} indexes atom {atom} of {n_atoms}")
    return atom, axis_index


def _mo_frame(ao: AoIntegrals, coeffs: np.ndarray, n_electrons: int) -> MoIntegrals:
    h_mo, g_mo = mo_transform(ao.hcore, ao.g, coeffs)
    return MoIntegrals(
        n_orbitals=coeffs.shape[1],
        n_electrons=n_electrons,
        ms2=0,
        core_energy=ao.e_nuc,
        h=h_mo,
        g=g_mo,
    )


def _displaced_ao(args) -> tuple[str, int, AoIntegrals]:
    symbols, coords, label, direction, step = args
    atom, axis = _parse_label(label, len(symbols))
    shifted = np.array(coords, dtype=float)
    shifted[atom, axis] += direction * step
    return label, direction, compute_ao_integrals(list(symbols), shifted)


def _displaced_ao_map(recipe: FixtureRecipe, step: float, jobs: int):
    """AO integrals at every +/- displacement, keyed by (label, direction)."""
    tasks = [
        (recipe.symbols, recipe.coords, label, direction, step)
        for label in recipe.stencil_labels
        for direction in (1, -1)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_displaced_ao, tasks))
    else:
        results = [_displaced_ao(t) for t in tasks]
    return {(label, direction): ao for label, direction, ao in results}


def _solve_center(recipe: FixtureRecipe) -> tuple[AoIntegrals, CasscfResult]:
    ao = compute_ao_integrals(list(recipe.symbols), recipe.coords)
    result = solve_sa_casscf(ao, recipe.n_electrons, recipe.cas, weights=EQUAL_WEIGHTS)
    return ao, result


def _base_metadata(recipe: FixtureRecipe, result: CasscfResult) -> dict:
    n_core = result.blocks.n_core
    meta = {
        "fixture": recipe.name,
        "backend": backend_stamp(),
        "method": "two-state state-averaged CASSCF, equal weights",
        "basis": recipe.basis,
        "geometry": {
            "symbols": list(recipe.symbols),
            "coordinates_bohr": np.asarray(recipe.coords, dtype=float).tolist(),
        },
        "cas": {
            "n_active_electrons": recipe.cas[0],
            "n_active_orbitals": recipe.cas[1],
            "n_core_orbitals": n_core,
            "active_indices": list(range(n_core, n_core + recipe.cas[1])),
        },
        "n_electrons": recipe.n_electrons,
        "ci_phase_gauge": "largest-amplitude-positive",
        "reference": {
            "scf_energy": result.scf.energy,
            "e0": float(result.energies[0]),
            "e1": float(result.energies[1]),
            "e_sa": result.e_sa,
            "s2": [float(v) for v in result.states.s2],
            "orbital_gradient_norm": result.gradient_norm,
        },
        "orbital_coefficients": result.coeffs.tolist(),
    }
    if recipe.alpha_deg is not None:
        meta["geometry"]["alpha_deg"] = recipe.alpha_deg
    if recipe.phi_deg is not None:
        meta["geometry"]["phi_deg"] = recipe.phi_deg
    if recipe.name in ("formaldimine", "scan"):
        meta["geometry"]["bond_lengths_angstrom"] = {
            "CN": CN_BOND, "CH": CH_BOND, "NH": NH_BOND,
        }
        meta["geometry"]["hcn_angle_deg"] = HCN_ANGLE_DEG
    return meta


def _derivative_frames(
    recipe: FixtureRecipe,
    center_frame: MoIntegrals,
    frames: dict[tuple[str, int], MoIntegrals],
    step: float,
) -> dict[str, MoIntegrals]:
    """Central differences of the fixed-orbital integrals per coordinate."""
    out: dict[str, MoIntegrals] = {}
    for label in recipe.stencil_labels:
        plus = frames[label, 1]
        minus = frames[label, -1]
        out[label] = MoIntegrals(
            n_orbitals=center_frame.n_orbitals,
            n_electrons=center_frame.n_electrons,
            ms2=0,
            core_energy=(plus.core_energy - minus.core_energy) / (2 * step),
            h=(plus.h - minus.h) / (2 * step),
            g=(plus.g - minus.g) / (2 * step),
        )
    return out


def _nac_references(
    result: CasscfResult, derivatives: dict[str, MoIntegrals]
) -> dict[str, float]:
    """Coupling d01 from transition densities against derivative integrals.

    The constant (core-energy) derivative multiplies <0|1> = 0 and drops;
    the core-orbital block folds into an effective one-body derivative.
    """
    states = result.states
    blocks = result.blocks
    nc, na = blocks.n_core, blocks.n_active
    act = slice(nc, nc + na)
    core = slice(0, nc)
    v0 = states.vectors[:, 0]
    v1 = states.vectors[:, 1]
    g01 = one_rdm(v0, v1, states.dets, na)
    g01_2 = two_rdm(v0, v1, states.dets, na)
    gap = float(states.energies[1] - states.energies[0])
    out: dict[str, float] = {}
    for label, d in derivatives.items():
        dh_eff = d.h[act, act].copy()
        if nc:
            dh_eff += 2.0 * np.einsum("pqii->pq", d.g[act, act, core, core])
            dh_eff -= np.einsum("piiq->pq", d.g[act, core, core, act])
        numerator = float(
            np.einsum("pq,pq->", g01, dh_eff)
            + 0.5 * np.einsum("pqrs,pqrs->", g01_2, d.g[act, act, act, act])
        )
        out[label] = numerator / gap
    return out


def _fd_reference_gradients(
    recipe: FixtureRecipe,
    result: CasscfResult,
    ao_center: AoIntegrals,
    ao_map: dict[tuple[str, int], AoIntegrals],
    step: float,
) -> dict[str, dict[str, float]]:
    """Central differences of the re-converged state energies per coordinate."""
    energies: dict[tuple[str, int], np.ndarray] = {}
    for (label, direction), ao in ao_map.items():
        c_start = follow_orbitals(result.coeffs, ao_center.s, ao.s)
        displaced = solve_sa_casscf(
            ao, recipe.n_electrons, recipe.cas, weights=EQUAL_WEIGHTS, c_start=c_start
        )
        energies[label, direction] = displaced.energies[:2]
    out: dict[str, dict[str, float]] = {"e0": {}, "e1": {}, "e_sa": {}}
    for label in recipe.stencil_labels:
        de = (energies[label, 1] - energies[label, -1]) / (2 * step)
        out["e0"][label] = float(de[0])
        out["e1"][label] = float(de[1])
        out["e_sa"][label] = float(np.dot(EQUAL_WEIGHTS, de))
    return out


def generate_point_fixture(recipe: FixtureRecipe, outdir: Path, jobs: int = 1) -> list[Path]:
    """FCIDUMP + metadata, plus stencils/derivatives when the recipe has them."""
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    ao, result = _solve_center(recipe)
    center_name = f"{recipe.name}.fcidump" if not recipe.stencil_labels else "center.fcidump"
    center_frame = _mo_frame(ao, result.coeffs, recipe.n_electrons)
    write_fcidump(center_frame, outdir / center_name)
    written.append(outdir / center_name)

    meta = _base_metadata(recipe, result)

    for step in recipe.stencil_steps:
        tag = f"{step:.0e}".replace("-0", "").replace("-", "")  # 1e-3 -> 1e3
        dispdir = outdir / f"disp_{tag}"
        dispdir.mkdir(exist_ok=True)
        ao_map = _displaced_ao_map(recipe, step, jobs)
        frames = {
            key: _mo_frame(a, follow_orbitals(result.coeffs, ao.s, a.s), recipe.n_electrons)
            for key, a in ao_map.items()
        }
        entries = []
        for label in recipe.stencil_labels:
            for direction in (1, -1):
                suffix = "p" if direction > 0 else "m"
                rel = f"disp_{tag}/{label}{suffix}.fcidump"
                write_fcidump(frames[label, direction], outdir / rel)
                written.append(outdir / rel)
                entries.append((label, direction, rel))
        manifest = outdir / f"stencil_{tag}.txt"
        write_stencil_manifest(manifest, step, center_name, entries)
        written.append(manifest)

        if step == recipe.derivative_step:
            derivdir = outdir / "deriv"
            derivdir.mkdir(exist_ok=True)
            derivatives = _derivative_frames(recipe, center_frame, frames, step)
            deriv_entries = []
            for label, frame in derivatives.items():
                rel = f"deriv/{label}.fcidump"
                write_fcidump(frame, outdir / rel)
                written.append(outdir / rel)
                deriv_entries.append((label, rel))
            manifest = outdir / "derivs.txt"
            write_derivative_manifest(manifest, deriv_entries)
            written.append(manifest)

            meta["reference"]["nacs_d01"] = _nac_references(result, derivatives)
            meta["reference"]["gradients"] = _fd_reference_gradients(
                recipe, result, ao, ao_map, step
            )
            meta["reference"]["gradient_step_bohr"] = step
            meta["reference"]["nac_convention"] = (
                "d01 = <0|dH/dx|1> / (e1 - e0), fixed-orbital derivative integrals, "
                "sign follows the CI phase gauge"
            )

    metapath = outdir / "metadata.json"
    write_metadata(metapath, meta)
    written.append(metapath)
    return written


def generate_scan_fixture(recipe: FixtureRecipe, outdir: Path, jobs: int = 1) -> list[Path]:
    """One FCIDUMP per grid point, each in its own converged orbital basis."""
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    points: list[tuple[float, str]] = []
    refs: list[dict] = []
    results: list[tuple[float, AoIntegrals, CasscfResult]] = []
    for alpha in recipe.scan_alphas:
        symbols, coords = formaldimine(alpha, recipe.phi_deg)
        ao = compute_ao_integrals(symbols, coords)
        result = solve_sa_casscf(ao, recipe.n_electrons, recipe.cas, weights=EQUAL_WEIGHTS)
        results.append((alpha, ao, result))

    # cold starts can hop between local solutions; a kinked energy curve
    # would poison every downstream comparison, so check smoothness here
    e0 = np.array([r.energies[0] for _, _, r in results])
    e1 = np.array([r.energies[1] for _, _, r in results])
    for name, curve in (("e0", e0), ("e1", e1)):
        second = np.abs(np.diff(curve, 2))
        if second.max() > 5e-3:
            raise RuntimeError(
                f"scan {name} curve has a kink (max second difference "
                f"{second.max():.2e}); a point likely converged to a different solution"
            )

    for alpha, ao, result in results:
        rel = f"alpha_{alpha:g}.fcidump"
        frame = _mo_frame(ao, result.coeffs, recipe.n_electrons)
        write_fcidump(frame, outdir / rel)
        written.append(outdir / rel)
        points.append((alpha, rel))
        refs.append(
            {
                "alpha_deg": alpha,
                "e0": float(result.energies[0]),
                "e1": float(result.energies[1]),
                "e_sa": result.e_sa,
                "file": rel,
            }
        )

    manifest = outdir / "scan.txt"
    write_scan_manifest(manifest, points)
    written.append(manifest)

    meta = {
        "fixture": recipe.name,
        "backend": backend_stamp(),
        "method": "two-state state-averaged CASSCF, equal weights",
        "basis": recipe.basis,
        "phi_deg": recipe.phi_deg,
        "cas": {
            "n_active_electrons": recipe.cas[0],
            "n_active_orbitals": recipe.cas[1],
        },
        "n_electrons": recipe.n_electrons,
        "points": refs,
    }
    metapath = outdir / "metadata.json"
    write_metadata(metapath, meta)
    written.append(metapath)
    return written


def generate_all(root: Path, jobs: int = 1) -> list[Path]:
    written = []
    written += generate_point_fixture(h2_recipe(), root / "h2", jobs)
    written += generate_point_fixture(h4_recipe(), root / "h4", jobs)
    written += generate_point_fixture(formaldimine_recipe(), root / "formaldimine", jobs)
    written += generate_scan_fixture(scan_recipe(), root / "scan", jobs)
    return written
