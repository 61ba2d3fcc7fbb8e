"""Writers for the interchange formats the solver package consumes.

FCIDUMP: namelist header, `value i j k l` lines with 1-based indices,
one canonical representative per 8-fold symmetry class, core energy
last.  Derivative files reuse the same layout with dh/dx, dg/dx and
de_core/dx in place of the integrals.  Manifests are whitespace-split
text with `#` comments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class MoIntegrals:
    """One geometry's integrals (or their derivatives) in a fixed MO frame."""

    n_orbitals: int
    n_electrons: int
    ms2: int
    core_energy: float
    h: np.ndarray
    g: np.ndarray


def write_fcidump(data: MoIntegrals, path: str | Path) -> None:
    n = data.n_orbitals
    lines = [
        f"&FCI NORB={n},NELEC={data.n_electrons},MS2={data.ms2},",
        " ORBSYM=" + "1," * n,
        " ISYM=1,",
        "/",
    ]

    def fmt(value: float, i: int, j: int, k: int, l: int) -> str:
        return f"{value:23.16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    for p in range(n):
        for q in range(p + 1):
            for r in range(p + 1):
                s_max = q if r == p else r
                for s in range(s_max + 1):
                    value = data.g[p, q, r, s]
                    if value != 0.0:
                        lines.append(fmt(value, p + 1, q + 1, r + 1, s + 1))
    for p in range(n):
        for q in range(p + 1):
            if data.h[p, q] != 0.0:
                lines.append(fmt(data.h[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(data.core_energy, 0, 0, 0, 0))
    Path(path).write_text("\n".join(lines) + "\n")


def write_stencil_manifest(
    path: str | Path,
    step: float,
    center_relpath: str,
    displaced: list[tuple[str, int, str]],
    tracking: str = "phase-matched",
) -> None:
    """displaced: (coordinate_label, direction +1/-1, relative path) triples."""
    lines = [
        f"step {step:.10g} {tracking}",
        f"center {center_relpath} fixed-orbital",
    ]
    for label, direction, relpath in displaced:
        suffix = "+" if direction > 0 else "-"
        lines.append(f"{label}{suffix} {relpath} fixed-orbital")
    Path(path).write_text("\n".join(lines) + "\n")


def write_derivative_manifest(path: str | Path, entries: list[tuple[str, str]]) -> None:
    """entries: (coordinate_label, relative path) pairs."""
    lines = [f"{label} {relpath} fixed-orbital" for label, relpath in entries]
    Path(path).write_text("\n".join(lines) + "\n")


def write_scan_manifest(path: str | Path, points: list[tuple[float, str]]) -> None:
    """points: (alpha_degrees, relative path) pairs."""
    lines = [f"{alpha:.10g} {relpath}" for alpha, relpath in points]
    Path(path).write_text("\n".join(lines) + "\n")


def write_metadata(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def backend_stamp() -> dict:
    import scipy

    from . import __version__

    return {
        "name": "datagen",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
