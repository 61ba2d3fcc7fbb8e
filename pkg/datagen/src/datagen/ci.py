"""Determinant-basis CI in a small active space, with spin projection.

Determinants are (alpha, beta) occupation bitmask pairs over the active
orbitals.  Operators are applied right-to-left with fermionic signs
tracked inside each spin string only: for the spin-paired operator
strings used here (a+_p a_q, a+_p a+_r a_s a_q summed over spins, and
S-S+) the alpha/beta crossing signs always cancel, so they are omitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "ActiveSpaceProblem",
    "CasciStates",
    "embed_active_space",
    "solve_casci",
    "one_rdm",
    "two_rdm",
]


def _popcount_below(mask: int, p: int) -> int:
    return bin(mask & ((1 << p) - 1)).count("1")


def _annihilate(mask: int, p: int) -> tuple[int, int] | None:
    if not (mask >> p) & 1:
        return None
    sign = -1 if _popcount_below(mask, p) & 1 else 1
    return mask & ~(1 << p), sign


def _create(mask: int, p: int) -> tuple[int, int] | None:
    if (mask >> p) & 1:
        return None
    sign = -1 if _popcount_below(mask, p) & 1 else 1
    return mask | (1 << p), sign


def build_determinants(n_orbitals: int, n_alpha: int, n_beta: int) -> list[tuple[int, int]]:
    """All (alpha_mask, beta_mask) determinants, in a fixed canonical order."""
    def strings(k: int) -> list[int]:
        return [sum(1 << i for i in occ) for occ in combinations(range(n_orbitals), k)]

    return [(a, b) for a in strings(n_alpha) for b in strings(n_beta)]


def _apply_pair(det: tuple[int, int], p: int, q: int, spin: int):
    """a+_p a_q acting on one spin string; returns (new_det, sign) or None."""
    mask = det[spin]
    step = _annihilate(mask, q)
    if step is None:
        return None
    mask, s1 = step
    step = _create(mask, p)
    if step is None:
        return None
    mask, s2 = step
    new = (mask, det[1]) if spin == 0 else (det[0], mask)
    return new, s1 * s2


@dataclass
class ActiveSpaceProblem:
    """Effective Hamiltonian over the active orbitals.

    e_frozen folds the nuclear repulsion and the doubly-occupied core into
    a constant; h_eff carries the core mean field.
    """

    n_orbitals: int
    n_electrons: int
    e_frozen: float
    h_eff: np.ndarray
    g: np.ndarray


def embed_active_space(
    h_mo: np.ndarray, g_mo: np.ndarray, e_nuc: float, n_core: int, n_active: int,
    n_active_electrons: int,
) -> ActiveSpaceProblem:
    core = list(range(n_core))
    act = list(range(n_core, n_core + n_active))
    e_frozen = e_nuc + 2.0 * sum(h_mo[i, i] for i in core)
    for i in core:
        for j in core:
            e_frozen += 2.0 * g_mo[i, i, j, j] - g_mo[i, j, j, i]
    h_eff = h_mo[np.ix_(act, act)].copy()
    for a, p in enumerate(act):
        for b, q in enumerate(act):
            for i in core:
                h_eff[a, b] += 2.0 * g_mo[p, q, i, i] - g_mo[p, i, i, q]
    g_act = g_mo[np.ix_(act, act, act, act)].copy()
    return ActiveSpaceProblem(
        n_orbitals=n_active,
        n_electrons=n_active_electrons,
        e_frozen=float(e_frozen),
        h_eff=h_eff,
        g=g_act,
    )


def _hamiltonian_matrix(problem: ActiveSpaceProblem, dets: list[tuple[int, int]]) -> np.ndarray:
    index = {det: i for i, det in enumerate(dets)}
    n = problem.n_orbitals
    dim = len(dets)
    ham = np.zeros((dim, dim))
    for col, det in enumerate(dets):
        for spin in (0, 1):
            for p in range(n):
                for q in range(n):
                    hit = _apply_pair(det, p, q, spin)
                    if hit is None:
                        continue
                    new, sign = hit
                    ham[index[new], col] += sign * problem.h_eff[p, q]
        # 1/2 sum_pqrs (pq|rs) a+_p(s) a+_r(t) a_s(t) a_q(s)
        for s1 in (0, 1):
            for q in range(n):
                step1 = _annihilate(det[s1], q)
                if step1 is None:
                    continue
                m1, sg1 = step1
                d1 = (m1, det[1]) if s1 == 0 else (det[0], m1)
                for s2 in (0, 1):
                    for s in range(n):
                        step2 = _annihilate(d1[s2], s)
                        if step2 is None:
                            continue
                        m2, sg2 = step2
                        d2 = (m2, d1[1]) if s2 == 0 else (d1[0], m2)
                        for r in range(n):
                            step3 = _create(d2[s2], r)
                            if step3 is None:
                                continue
                            m3, sg3 = step3
                            d3 = (m3, d2[1]) if s2 == 0 else (d2[0], m3)
                            for p in range(n):
                                step4 = _create(d3[s1], p)
                                if step4 is None:
                                    continue
                                m4, sg4 = step4
                                d4 = (m4, d3[1]) if s1 == 0 else (d3[0], m4)
                                ham[index[d4], col] += (
                                    0.5 * sg1 * sg2 * sg3 * sg4 * problem.g[p, q, r, s]
                                )
    return ham


def _s2_matrix(n_orbitals: int, dets: list[tuple[int, int]]) -> np.ndarray:
    """S^2 = S-S+ + Sz + Sz^2 restricted to the spanned ms sector."""
    index = {det: i for i, det in enumerate(dets)}
    dim = len(dets)
    s2 = np.zeros((dim, dim))
    for col, det in enumerate(dets):
        na = bin(det[0]).count("1")
        nb = bin(det[1]).count("1")
        ms = 0.5 * (na - nb)
        s2[col, col] += ms * ms + ms
        # S-S+ = sum_pq a+_p(beta) a_p(alpha) a+_q(alpha) a_q(beta)
        for q in range(n_orbitals):
            step1 = _annihilate(det[1], q)
            if step1 is None:
                continue
            m1b, sg1 = step1
            step2 = _create(det[0], q)
            if step2 is None:
                continue
            m2a, sg2 = step2
            for p in range(n_orbitals):
                step3 = _annihilate(m2a, p)
                if step3 is None:
                    continue
                m3a, sg3 = step3
                step4 = _create(m1b, p)
                if step4 is None:
                    continue
                m4b, sg4 = step4
                s2[index[(m3a, m4b)], col] += sg1 * sg2 * sg3 * sg4
    return s2


@dataclass
class CasciStates:
    """Lowest spin-selected CASCI roots and their determinant expansion."""

    energies: np.ndarray               # total energies including e_frozen
    vectors: np.ndarray                # (ndets, nroots), sign-gauged
    dets: list[tuple[int, int]]
    s2: np.ndarray                     # <S^2> per root
    problem: ActiveSpaceProblem


def solve_casci(
    problem: ActiveSpaceProblem,
    n_roots: int = 2,
    s2_target: float = 0.0,
) -> CasciStates:
    """Diagonalize within the ms=0 sector, restricted to one spin eigenspace.

    The Hamiltonian is projected onto the eigenspace of S^2 with eigenvalue
    s2_target before diagonalization, so roots come out spin-pure even at
    singlet-triplet degeneracies.  Vectors are sign-gauged: the largest
    |amplitude| entry is made positive.
    """
    if problem.n_electrons % 2 != 0:
        raise ValueError("ms=0 sector needs an even active electron count")
    n_half = problem.n_electrons // 2
    dets = build_determinants(problem.n_orbitals, n_half, n_half)
    ham = _hamiltonian_matrix(problem, dets)
    s2 = _s2_matrix(problem.n_orbitals, dets)

    s2_vals, s2_vecs = np.linalg.eigh(s2)
    keep = np.abs(s2_vals - s2_target) < 1e-8
    if not np.any(keep):
        raise ValueError(f"no states with S^2 = {s2_target} in this sector")
    basis = s2_vecs[:, keep]
    h_proj = basis.T @ ham @ basis
    vals, vecs = np.linalg.eigh(h_proj)
    if n_roots > vals.size:
        raise ValueError(f"requested {n_roots} roots, sector holds {vals.size}")
    full = basis @ vecs[:, :n_roots]
    for k in range(full.shape[1]):
        lead = np.argmax(np.abs(full[:, k]))
        if full[lead, k] < 0:
            full[:, k] = -full[:, k]
    energies = vals[:n_roots] + problem.e_frozen
    s2_out = np.einsum("ik,ij,jk->k", full, s2, full)
    return CasciStates(
        energies=energies, vectors=full, dets=dets, s2=s2_out, problem=problem
    )


def one_rdm(
    bra: np.ndarray, ket: np.ndarray, dets: list[tuple[int, int]], n_orbitals: int
) -> np.ndarray:
    """gamma_pq = <bra| sum_s a+_p(s) a_q(s) |ket>."""
    index = {det: i for i, det in enumerate(dets)}
    gamma = np.zeros((n_orbitals, n_orbitals))
    for col, det in enumerate(dets):
        c = ket[col]
        if c == 0.0:
            continue
        for spin in (0, 1):
            for p in range(n_orbitals):
                for q in range(n_orbitals):
                    hit = _apply_pair(det, p, q, spin)
                    if hit is None:
                        continue
                    new, sign = hit
                    gamma[p, q] += sign * c * bra[index[new]]
    return gamma


def two_rdm(
    bra: np.ndarray, ket: np.ndarray, dets: list[tuple[int, int]], n_orbitals: int
) -> np.ndarray:
    """Gamma_pqrs = <bra| sum_st a+_p(s) a+_r(t) a_s(t) a_q(s) |ket>.

    Index order pairs with chemists' integrals: E = sum gamma*h_eff
    + 1/2 sum Gamma*(pq|rs) + e_frozen.
    """
    index = {det: i for i, det in enumerate(dets)}
    n = n_orbitals
    gamma2 = np.zeros((n, n, n, n))
    for col, det in enumerate(dets):
        c = ket[col]
        if c == 0.0:
            continue
        for s1 in (0, 1):
            for q in range(n):
                step1 = _annihilate(det[s1], q)
                if step1 is None:
                    continue
                m1, sg1 = step1
                d1 = (m1, det[1]) if s1 == 0 else (det[0], m1)
                for s2 in (0, 1):
                    for s in range(n):
                        step2 = _annihilate(d1[s2], s)
                        if step2 is None:
                            continue
                        m2, sg2 = step2
                        d2 = (m2, d1[1]) if s2 == 0 else (d1[0], m2)
                        for r in range(n):
                            step3 = _create(d2[s2], r)
                            if step3 is None:
                                continue
                            m3, sg3 = step3
                            d3 = (m3, d2[1]) if s2 == 0 else (d2[0], m3)
                            for p in range(n):
                                step4 = _create(d3[s1], p)
                                if step4 is None:
                                    continue
                                m4, sg4 = step4
                                d4 = (m4, d3[1]) if s1 == 0 else (d3[0], m4)
                                gamma2[p, q, r, s] += (
                                    sg1 * sg2 * sg3 * sg4 * c * bra[index[d4]]
                                )
    return gamma2
