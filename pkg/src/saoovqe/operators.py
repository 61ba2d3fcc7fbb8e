"""Fermionic operators on qubits and active-space integral embedding.

Spin orbitals are interleaved: spin orbital ``s = 2p + sigma`` for spatial
orbital ``p`` and sigma = 0 (alpha) / 1 (beta), and qubit ``s`` in state |1>
means spin orbital ``s`` is occupied.  Ladder operators follow the
Jordan-Wigner mapping

    a_s = Z_0 ... Z_{s-1} (X_s + i Y_s) / 2

which preserves the canonical anticommutation relations exactly.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString, PauliSum

ALPHA = 0
BETA = 1


def spin_orbital_index(p: int, sigma: int) -> int:
    if sigma not in (ALPHA, BETA):
        raise ValueError(f"sigma must be 0 (alpha) or 1 (beta), got {sigma}")
    return 2 * p + sigma


def annihilation_op(n_modes: int, mode: int) -> PauliSum:
    """Jordan-Wigner image of a_mode."""
    if not 0 <= mode < n_modes:
        raise ValueError(f"mode {mode} out of range for {n_modes} modes")
    zmask = (1 << mode) - 1  # Z on every mode below
    xbit = 1 << mode
    return PauliSum(
        n_modes,
        {
            (xbit, zmask): 0.5,  # Z...Z X / 2
            (xbit, zmask | xbit): 0.5j,  # Z...Z Y * i/2
        },
    )


def creation_op(n_modes: int, mode: int) -> PauliSum:
    return annihilation_op(n_modes, mode).dagger()


def number_operator(n_modes: int) -> PauliSum:
    terms: dict[tuple[int, int], complex] = {(0, 0): 0.5 * n_modes}
    for s in range(n_modes):
        terms[(0, 1 << s)] = -0.5
    return PauliSum(n_modes, terms)


def sz_operator(n_modes: int) -> PauliSum:
    """Total spin projection; beta spin orbitals are the odd modes."""
    if n_modes % 2:
        raise ValueError("interleaved register needs an even mode count")
    terms: dict[tuple[int, int], complex] = {}
    for p in range(n_modes // 2):
        terms[(0, 1 << (2 * p))] = -0.25
        terms[(0, 1 << (2 * p + 1))] = 0.25
    return PauliSum(n_modes, terms)


def s_plus_operator(n_modes: int) -> PauliSum:
    if n_modes % 2:
        raise ValueError("interleaved register needs an even mode count")
    out = PauliSum.zero(n_modes)
    for p in range(n_modes // 2):
        out = out + creation_op(n_modes, 2 * p) * annihilation_op(n_modes, 2 * p + 1)
    return out


def s_squared_operator(n_modes: int) -> PauliSum:
    """Total spin S^2 = S- S+ + Sz (Sz + 1)."""
    sp = s_plus_operator(n_modes)
    sz = sz_operator(n_modes)
    out = sp.dagger() * sp + sz * sz + sz
    return out.real_part_enforced()


def excitation_generator(
    n_modes: int, creators: tuple[int, ...], annihilators: tuple[int, ...]
) -> PauliSum:
    """Hermitian generator G = -i (T - T^dagger) of exp(theta (T - T^dagger)).

    T is the ordered ladder product a^dag_{c0} a^dag_{c1} ... a_{a0} a_{a1} ...
    All indices within one excitation must be distinct.
    """
    indices = tuple(creators) + tuple(annihilators)
    if len(set(indices)) != len(indices):
        raise ValueError(f"excitation indices must be distinct, got {indices}")
    t_op = PauliSum.identity(n_modes)
    for c in creators:
        t_op = t_op * creation_op(n_modes, c)
    for a in annihilators:
        t_op = t_op * annihilation_op(n_modes, a)
    gen = (t_op - t_op.dagger()) * (-1j)
    gen = gen.real_part_enforced()
    if len(gen) == 0:
        raise ValueError(f"excitation {creators}<-{annihilators} has a null generator")
    return gen


def singlet_single_excitation(n_modes: int, occ: int, vir: int) -> PauliSum:
    """Spin-traced single excitation E_{vir,occ} = sum_sigma a^dag_v a_o."""
    out = PauliSum.zero(n_modes)
    for sigma in (ALPHA, BETA):
        out = out + creation_op(n_modes, spin_orbital_index(vir, sigma)) * annihilation_op(
            n_modes, spin_orbital_index(occ, sigma)
        )
    return out


def qubit_hamiltonian(h: np.ndarray, g: np.ndarray, e_const: float = 0.0) -> PauliSum:
    """Qubit image of the spin-free electronic Hamiltonian.

    H = e_const + sum_{pq,sigma} h[p,q] a+_{p sigma} a_{q sigma}
        + 1/2 sum_{pqrs,sigma tau} g[p,q,r,s] a+_{p sigma} a+_{r tau} a_{s tau} a_{q sigma}

    with g in chemists' notation (pq|rs).  Integrals must be real symmetric;
    hermiticity of the result is enforced and acts as a consistency check.
    """
    n = h.shape[0]
    n_modes = 2 * n
    create = [creation_op(n_modes, s) for s in range(n_modes)]
    destroy = [annihilation_op(n_modes, s) for s in range(n_modes)]

    acc: dict[tuple[int, int], complex] = {}
    if e_const != 0.0:
        acc[(0, 0)] = complex(e_const)

    def add(op: PauliSum, scale: complex) -> None:
        for string, coeff in op:
            key = (string.x, string.z)
            acc[key] = acc.get(key, 0.0) + scale * coeff

    for p in range(n):
        for q in range(n):
            if h[p, q] == 0.0:
                continue
            for sigma in (ALPHA, BETA):
                add(create[2 * p + sigma] * destroy[2 * q + sigma], h[p, q])

    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    if g[p, q, r, s] == 0.0:
                        continue
                    half = 0.5 * g[p, q, r, s]
                    for sigma in (ALPHA, BETA):
                        for tau in (ALPHA, BETA):
                            op = (
                                create[2 * p + sigma]
                                * create[2 * r + tau]
                                * destroy[2 * s + tau]
                                * destroy[2 * q + sigma]
                            )
                            add(op, half)

    return PauliSum(n_modes, acc).simplified().real_part_enforced()


def embed_with_partition(
    h: np.ndarray,
    g: np.ndarray,
    e_core: float,
    inactive: np.ndarray,
    active: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Fold doubly occupied inactive orbitals into effective active integrals.

    Returns ``(h_eff, g_act, e_frozen)`` such that for any two active-space
    states embedded on a closed inactive shell the full Hamiltonian matrix
    element equals ``e_frozen * delta_IJ + <I|H_act|J>``.  The map is linear
    in ``(h, g, e_core)``, so it applies to derivative integrals unchanged.
    """
    inactive = np.asarray(inactive, dtype=int)
    active = np.asarray(active, dtype=int)
    overlap = set(inactive.tolist()) & set(active.tolist())
    if overlap:
        raise ValueError(f"orbital partitions overlap: {sorted(overlap)}")

    ii = np.ix_(inactive, inactive)
    e_frozen = float(e_core) + 2.0 * float(np.trace(h[ii]))
    if inactive.size:
        g_iijj = g[np.ix_(inactive, inactive, inactive, inactive)]
        e_frozen += 2.0 * float(np.einsum("iijj->", g_iijj))
        e_frozen -= float(np.einsum("ijji->", g_iijj))

    h_eff = h[np.ix_(active, active)].copy()
    if inactive.size:
        h_eff += 2.0 * np.einsum(
            "tuii->tu", g[np.ix_(active, active, inactive, inactive)]
        )
        h_eff -= np.einsum("tiiu->tu", g[np.ix_(active, inactive, inactive, active)])

    g_act = g[np.ix_(active, active, active, active)].copy()
    return h_eff, g_act, e_frozen
