"""Minimal-basis (STO-3G) shells for H, C and N.

Exponents and contraction coefficients are the standard published values;
coefficients are stored for normalized primitives and every contracted
function is renormalized numerically so its self-overlap is exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# shared 1s / 2s / 2p contraction patterns (first-row STO-3G)
_S1_COEFFS = (0.1543289673, 0.5353281423, 0.4446345422)
_S2_COEFFS = (-0.09996722919, 0.3995128261, 0.7001154689)
_P2_COEFFS = (0.1559162750, 0.6076837186, 0.3919573931)

# per-element shell table: (shell_kind, exponents, coefficients)
STO3G = {
    "H": (
        ("s", (3.425250914, 0.6239137298, 0.1688554040), _S1_COEFFS),
    ),
    "C": (
        ("s", (71.61683735, 13.04509632, 3.530512160), _S1_COEFFS),
        ("s", (2.941249355, 0.6834830964, 0.2222899159), _S2_COEFFS),
        ("p", (2.941249355, 0.6834830964, 0.2222899159), _P2_COEFFS),
    ),
    "N": (
        ("s", (99.10616896, 18.05231239, 4.885660238), _S1_COEFFS),
        ("s", (3.780455879, 0.8784966449, 0.2857143744), _S2_COEFFS),
        ("p", (3.780455879, 0.8784966449, 0.2857143744), _P2_COEFFS),
    ),
}

CHARGES = {"H": 1, "C": 6, "N": 7}

_DOUBLE_FACTORIAL = {-1: 1, 0: 1, 1: 1, 2: 2, 3: 3}


@dataclass(frozen=True)
class BasisFunction:
    """One contracted Cartesian Gaussian: sum_k c_k x^l y^m z^n exp(-a_k r^2)."""

    center: tuple[float, float, float]
    lmn: tuple[int, int, int]
    exps: tuple[float, ...]
    coeffs: tuple[float, ...]


def _primitive_norm(a: float, lmn: tuple[int, int, int]) -> float:
    l, m, n = lmn
    df = _DOUBLE_FACTORIAL[2 * l - 1] * _DOUBLE_FACTORIAL[2 * m - 1] * _DOUBLE_FACTORIAL[2 * n - 1]
    return (2.0 * a / np.pi) ** 0.75 * (4.0 * a) ** (0.5 * (l + m + n)) / np.sqrt(df)


def _contracted_self_overlap(exps, coeffs, lmn) -> float:
    l, m, n = lmn
    df = _DOUBLE_FACTORIAL[2 * l - 1] * _DOUBLE_FACTORIAL[2 * m - 1] * _DOUBLE_FACTORIAL[2 * n - 1]
    total = 0.0
    for ca, a in zip(coeffs, exps):
        for cb, b in zip(coeffs, exps):
            p = a + b
            total += ca * cb * df / (2.0 * p) ** (l + m + n) * (np.pi / p) ** 1.5
    return total


def _contract(center, lmn, exps, raw_coeffs) -> BasisFunction:
    scaled = [c * _primitive_norm(a, lmn) for c, a in zip(raw_coeffs, exps)]
    norm = 1.0 / np.sqrt(_contracted_self_overlap(exps, scaled, lmn))
    return BasisFunction(
        center=tuple(float(x) for x in center),
        lmn=lmn,
        exps=tuple(float(a) for a in exps),
        coeffs=tuple(float(c * norm) for c in scaled),
    )


def build_basis(symbols, coords) -> list[BasisFunction]:
    """Expand a molecule into contracted functions, atoms in input order.

    Each s shell contributes one function, each p shell three (x, y, z).
    coords are in bohr.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (len(symbols), 3):
        raise ValueError(f"coords shape {coords.shape} does not match {len(symbols)} atoms")
    if not np.all(np.isfinite(coords)):
        raise ValueError("geometry contains non-finite coordinates")
    functions: list[BasisFunction] = []
    for symbol, xyz in zip(symbols, coords):
        try:
            shells = STO3G[symbol]
        except KeyError:
            raise ValueError(f"no basis tabulated for element {symbol!r}") from None
        for kind, exps, coeffs in shells:
            if kind == "s":
                functions.append(_contract(xyz, (0, 0, 0), exps, coeffs))
            else:
                for lmn in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    functions.append(_contract(xyz, lmn, exps, coeffs))
    return functions


def nuclear_charges(symbols) -> np.ndarray:
    return np.array([CHARGES[s] for s in symbols], dtype=float)
