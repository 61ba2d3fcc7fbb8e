"""One- and two-electron integrals over contracted Cartesian Gaussians.

McMurchie-Davidson scheme: Cartesian overlap distributions are expanded in
Hermite Gaussians (E coefficients), Coulomb integrals reduce to Hermite
integrals R_tuv built from Boys functions.  All primitive loops are
vectorized over the primitive-pair (or pair-pair) axis; angular momenta
here never exceed p functions, so the recursions stay shallow.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .basis import BasisFunction

__all__ = [
    "overlap_matrix",
    "kinetic_matrix",
    "nuclear_attraction_matrix",
    "eri_tensor",
    "nuclear_repulsion",
    "core_hamiltonian",
]


def _boys(n: int, t: np.ndarray) -> np.ndarray:
    """Boys function F_n(t), elementwise; series expansion near t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t < 1e-13
    if np.any(small):
        ts = t[small]
        out[small] = 1.0 / (2 * n + 1) - ts / (2 * n + 3) + ts * ts / (2 * (2 * n + 5))
    if np.any(~small):
        tb = t[~small]
        a = n + 0.5
        out[~small] = 0.5 * tb ** (-a) * special.gamma(a) * special.gammainc(a, tb)
    return out


def _e_coefficients(la: int, lb: int, q: float, a: np.ndarray, b: np.ndarray) -> list:
    """Hermite expansion coefficients E_t for x^la about A times x^lb about B.

    q = A_d - B_d for the direction at hand; a, b are primitive exponent
    arrays of a common shape.  Returns [E_0, ..., E_{la+lb}].
    """
    p = a + b
    cache: dict[tuple[int, int, int], np.ndarray | float] = {}

    def e(i: int, j: int, t: int):
        if t < 0 or t > i + j:
            return 0.0
        key = (i, j, t)
        if key in cache:
            return cache[key]
        if i == j == t == 0:
            val = np.exp(-a * b / p * q * q)
        elif i > 0:
            val = (
                e(i - 1, j, t - 1) / (2.0 * p)
                - (b * q / p) * e(i - 1, j, t)
                + (t + 1) * e(i - 1, j, t + 1)
            )
        else:
            val = (
                e(i, j - 1, t - 1) / (2.0 * p)
                + (a * q / p) * e(i, j - 1, t)
                + (t + 1) * e(i, j - 1, t + 1)
            )
        cache[key] = val
        return val

    return [e(la, lb, t) for t in range(la + lb + 1)]


class _Pair:
    """Precomputed primitive-pair data for one ordered basis-function pair."""

    __slots__ = ("p", "center", "cc", "e", "lmn_a", "lmn_b")

    def __init__(self, fa: BasisFunction, fb: BasisFunction):
        a = np.asarray(fa.exps)
        b = np.asarray(fb.exps)
        af = np.repeat(a, b.size)
        bf = np.tile(b, a.size)
        p = af + bf
        pa = np.asarray(fa.center)
        pb = np.asarray(fb.center)
        self.p = p
        self.center = (af[:, None] * pa + bf[:, None] * pb) / p[:, None]
        self.cc = np.outer(np.asarray(fa.coeffs), np.asarray(fb.coeffs)).ravel()
        self.lmn_a = fa.lmn
        self.lmn_b = fb.lmn
        q = pa - pb
        self.e = [
            _e_coefficients(fa.lmn[d], fb.lmn[d], q[d], af, bf) for d in range(3)
        ]


def overlap_matrix(basis: list[BasisFunction]) -> np.ndarray:
    n = len(basis)
    s = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            pair = _Pair(basis[i], basis[j])
            val = pair.cc * (np.pi / pair.p) ** 1.5
            for d in range(3):
                val = val * pair.e[d][0]
            s[i, j] = s[j, i] = val.sum()
    return s


def kinetic_matrix(basis: list[BasisFunction]) -> np.ndarray:
    n = len(basis)
    t = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            fa, fb = basis[i], basis[j]
            a = np.asarray(fa.exps)
            b = np.asarray(fb.exps)
            af = np.repeat(a, b.size)
            bf = np.tile(b, a.size)
            cc = np.outer(np.asarray(fa.coeffs), np.asarray(fb.coeffs)).ravel()
            p = af + bf
            qd = np.asarray(fa.center) - np.asarray(fb.center)

            s1 = []   # E_0 for (la, lb)
            sp2 = []  # E_0 for (la, lb + 2)
            sm2 = []  # E_0 for (la, lb - 2), zero when lb < 2
            for d in range(3):
                la, lb = fa.lmn[d], fb.lmn[d]
                s1.append(_e_coefficients(la, lb, qd[d], af, bf)[0])
                sp2.append(_e_coefficients(la, lb + 2, qd[d], af, bf)[0])
                if lb >= 2:
                    sm2.append(_e_coefficients(la, lb - 2, qd[d], af, bf)[0])
                else:
                    sm2.append(0.0)

            total = 0.0
            for d in range(3):
                lb = fb.lmn[d]
                td = (
                    bf * (2 * lb + 1) * s1[d]
                    - 2.0 * bf * bf * sp2[d]
                    - 0.5 * lb * (lb - 1) * sm2[d]
                )
                term = td
                for o in range(3):
                    if o != d:
                        term = term * s1[o]
                total = total + term
            val = cc * (np.pi / p) ** 1.5 * total
            t[i, j] = t[j, i] = val.sum()
    return t


def _hermite_coulomb(tmax: tuple[int, int, int], p: np.ndarray, pc: np.ndarray) -> dict:
    """Hermite Coulomb integrals R^0_tuv for all t<=tmax[0], u<=tmax[1], v<=tmax[2]."""
    tt = p * np.einsum("ij,ij->i", pc, pc)
    nmax = sum(tmax)
    fn = [_boys(n, tt) for n in range(nmax + 1)]
    cache: dict[tuple[int, int, int, int], np.ndarray | float] = {}

    def r(t: int, u: int, v: int, n: int):
        if t < 0 or u < 0 or v < 0:
            return 0.0
        key = (t, u, v, n)
        if key in cache:
            return cache[key]
        if t == u == v == 0:
            val = (-2.0 * p) ** n * fn[n]
        elif t > 0:
            val = (t - 1) * r(t - 2, u, v, n + 1) + pc[:, 0] * r(t - 1, u, v, n + 1)
        elif u > 0:
            val = (u - 1) * r(t, u - 2, v, n + 1) + pc[:, 1] * r(t, u - 1, v, n + 1)
        else:
            val = (v - 1) * r(t, u, v - 2, n + 1) + pc[:, 2] * r(t, u, v - 1, n + 1)
        cache[key] = val
        return val

    return {
        (t, u, v): r(t, u, v, 0)
        for t in range(tmax[0] + 1)
        for u in range(tmax[1] + 1)
        for v in range(tmax[2] + 1)
    }


def nuclear_attraction_matrix(
    basis: list[BasisFunction], charges: np.ndarray, coords: np.ndarray
) -> np.ndarray:
    n = len(basis)
    coords = np.asarray(coords, dtype=float)
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            pair = _Pair(basis[i], basis[j])
            lims = tuple(len(pair.e[d]) - 1 for d in range(3))
            acc = 0.0
            for z, c in zip(charges, coords):
                rtuv = _hermite_coulomb(lims, pair.p, pair.center - c[None, :])
                total = 0.0
                for t in range(lims[0] + 1):
                    for u in range(lims[1] + 1):
                        for w in range(lims[2] + 1):
                            total = total + pair.e[0][t] * pair.e[1][u] * pair.e[2][w] * rtuv[t, u, w]
                acc = acc - z * (pair.cc * 2.0 * np.pi / pair.p * total).sum()
            v[i, j] = v[j, i] = acc
    return v


def _pair_hermite(pair: _Pair) -> tuple[dict, tuple[int, int, int]]:
    """Coefficient-weighted bra Hermite factors B[t,u,v] for one pair."""
    lims = tuple(len(pair.e[d]) - 1 for d in range(3))
    out = {}
    for t in range(lims[0] + 1):
        for u in range(lims[1] + 1):
            for v in range(lims[2] + 1):
                out[t, u, v] = pair.cc * pair.e[0][t] * pair.e[1][u] * pair.e[2][v]
    return out, lims


def eri_tensor(basis: list[BasisFunction]) -> np.ndarray:
    """Full (pq|rs) tensor in chemists' notation with 8-fold symmetry."""
    n = len(basis)
    pairs: list[list[_Pair | None]] = [[None] * n for _ in range(n)]
    hermite: dict[tuple[int, int], tuple[dict, tuple[int, int, int]]] = {}
    for i in range(n):
        for j in range(i + 1):
            pair = _Pair(basis[i], basis[j])
            pairs[i][j] = pair
            hermite[i, j] = _pair_hermite(pair)

    g = np.zeros((n, n, n, n))
    for p in range(n):
        for q in range(p + 1):
            bra = pairs[p][q]
            eb, bl = hermite[p, q]
            for r in range(p + 1):
                s_top = q if r == p else r
                for s in range(s_top + 1):
                    ket = pairs[r][s]
                    ek, kl = hermite[r, s]
                    npb = bra.p.size
                    npk = ket.p.size
                    pp = np.repeat(bra.p, npk)
                    qq = np.tile(ket.p, npb)
                    alpha = pp * qq / (pp + qq)
                    pq = (
                        bra.center[:, None, :] - ket.center[None, :, :]
                    ).reshape(-1, 3)
                    lims = (bl[0] + kl[0], bl[1] + kl[1], bl[2] + kl[2])
                    rtuv = _hermite_coulomb(lims, alpha, pq)
                    pref = 2.0 * np.pi ** 2.5 / (pp * qq * np.sqrt(pp + qq))
                    total = np.zeros(npb * npk)
                    for (t, u, v), bw in eb.items():
                        for (tt, uu, vv), kw in ek.items():
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            total += (
                                sign
                                * np.outer(bw, kw).ravel()
                                * rtuv[t + tt, u + uu, v + vv]
                            )
                    value = float((pref * total).sum())
                    for a, b, c, d in (
                        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
                    ):
                        g[a, b, c, d] = value
    return g


def nuclear_repulsion(charges: np.ndarray, coords: np.ndarray) -> float:
    coords = np.asarray(coords, dtype=float)
    total = 0.0
    for i in range(len(charges)):
        for j in range(i):
            total += charges[i] * charges[j] / np.linalg.norm(coords[i] - coords[j])
    return total


def core_hamiltonian(
    basis: list[BasisFunction], charges: np.ndarray, coords: np.ndarray
) -> np.ndarray:
    return kinetic_matrix(basis) + nuclear_attraction_matrix(basis, charges, coords)
