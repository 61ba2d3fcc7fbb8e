"""Geometry builders for the fixture molecules.  All coordinates in bohr."""

from __future__ import annotations

import numpy as np

BOHR_PER_ANGSTROM = 1.8897259886

# methanimine frame: standard equilibrium bond lengths (angstrom) and a
# symmetric CH2 group; the two scan angles alpha (C=N-H bend) and phi
# (out-of-plane torsion of the N-H bond) stay free
CN_BOND = 1.273
CH_BOND = 1.090
NH_BOND = 1.023
HCN_ANGLE_DEG = 121.5


def h2_molecule(separation: float = 1.4):
    return ["H", "H"], np.array([[0.0, 0.0, 0.0], [0.0, 0.0, separation]])


def h4_distorted():
    """Four hydrogens near a 1.5 x 2.6 bohr rectangle, mildly skewed.

    The distortion removes all point-group symmetry so couplings and
    gradients have no accidental zeros, while the short/long pairing keeps
    the two lowest singlets well separated.
    """
    return ["H", "H", "H", "H"], np.array(
        [
            [0.00, 0.00, 0.00],
            [1.52, 0.08, 0.00],
            [0.12, 2.62, 0.05],
            [1.46, 2.70, -0.07],
        ]
    )


def formaldimine(alpha_deg: float, phi_deg: float):
    """H2C=NH with bending angle alpha and torsion phi, in degrees.

    Atom order C, N, H, H, H: carbon at the origin, nitrogen on +z, the
    CH2 hydrogens in the xz-plane behind the carbon.  alpha is the C=N-H
    angle at the nitrogen; phi rotates the N-H hydrogen about the C=N
    axis, measured from the CH2 plane (phi = 90 puts it perpendicular).
    """
    b = BOHR_PER_ANGSTROM
    r_cn = CN_BOND * b
    r_ch = CH_BOND * b
    r_nh = NH_BOND * b
    gam = np.radians(HCN_ANGLE_DEG)
    alp = np.radians(alpha_deg)
    phi = np.radians(phi_deg)

    carbon = np.zeros(3)
    nitrogen = np.array([0.0, 0.0, r_cn])
    h_c1 = r_ch * np.array([np.sin(gam), 0.0, np.cos(gam)])
    h_c2 = r_ch * np.array([-np.sin(gam), 0.0, np.cos(gam)])
    h_n = nitrogen + r_nh * np.array(
        [np.sin(alp) * np.cos(phi), np.sin(alp) * np.sin(phi), -np.cos(alp)]
    )
    coords = np.vstack([carbon, nitrogen, h_c1, h_c2, h_n])
    return ["C", "N", "H", "H", "H"], coords


def coordinate_labels(symbols) -> list[str]:
    """Flat per-coordinate labels: element + atom index + axis, e.g. C0_x."""
    return [
        f"{symbol}{i}_{axis}"
        for i, symbol in enumerate(symbols)
        for axis in ("x", "y", "z")
    ]
