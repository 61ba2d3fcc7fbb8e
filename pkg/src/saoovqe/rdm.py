"""Spin-summed reduced density matrices computed from statevectors.

Conventions, fixed once here because they are the usual source of silent
factor-of-2 and transposition bugs:

  gamma[p, q]        = <bra| sum_s  a+_{p,s} a_{q,s} |ket>
  gamma2[p, q, r, s] = <bra| sum_st a+_{p,s} a+_{r,t} a_{s',t} a_{q,s} |ket>

i.e. the rank-4 tensor uses chemists' pairing: (p, q) and (r, s) are the
two one-electron index pairs, matching the (pq|rs) integral layout.  The
tensor is obtained from products of the spin-summed single excitations
E_pq via  gamma2[p,q,r,s] = <E_pq E_rs> - delta_qr * gamma[p,s].

Matrix elements are evaluated by applying Jordan-Wigner mapped operators
to the ket; no ansatz-specific shortcuts.  At the 6-10 qubit sizes this
package targets that is both exact and cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .operators import ALPHA, BETA, annihilation_op, creation_op, spin_orbital_index

RDM_KINDS = ("state", "transition", "averaged")


@lru_cache(maxsize=16)
def _excitation_ops(n_orbitals: int):
    """Compiled spin-summed excitation operators E_pq, keyed by (p, q)."""
    n_modes = 2 * n_orbitals
    ops = {}
    for p in range(n_orbitals):
        for q in range(n_orbitals):
            total = None
            for spin in (ALPHA, BETA):
                term = creation_op(n_modes, spin_orbital_index(p, spin)) * (
                    annihilation_op(n_modes, spin_orbital_index(q, spin))
                )
                total = term if total is None else total + term
            ops[p, q] = total.simplified().compiled()
    return ops


def _check_sizes(bra: np.ndarray, ket: np.ndarray, n_orbitals: int) -> None:
    dim = 1 << (2 * n_orbitals)
    if bra.shape != (dim,) or ket.shape != (dim,):
        raise ValueError(
            f"statevector size does not match {n_orbitals} orbitals: "
            f"expected length {dim}, got bra {bra.shape} and ket {ket.shape}"
        )


def one_rdm(bra: np.ndarray, ket: np.ndarray, n_orbitals: int) -> np.ndarray:
    """gamma[p, q] = <bra| E_pq |ket>.

    Only the real part is kept: the imaginary part is antisymmetric in
    (p, q) and drops out of every contraction with symmetric integrals.
    """
    _check_sizes(bra, ket, n_orbitals)
    gamma = np.empty((n_orbitals, n_orbitals))
    for (p, q), op in _excitation_ops(n_orbitals).items():
        gamma[p, q] = kernels.transition(op, bra, ket).real
    return gamma


def two_rdm(bra: np.ndarray, ket: np.ndarray, n_orbitals: int) -> np.ndarray:
    """gamma2[p, q, r, s] in chemists' pairing (see module docstring)."""
    _check_sizes(bra, ket, n_orbitals)
    ops = _excitation_ops(n_orbitals)
    gamma = one_rdm(bra, ket, n_orbitals)
    n = n_orbitals
    # <bra| E_pq E_rs |ket> = <E_qp bra | E_rs ket>, so 2n^2 operator
    # applications cover all n^4 elements
    bra_images = {(p, q): kernels.apply_operator(ops[q, p], bra) for p in range(n) for q in range(n)}
    ket_images = {(r, s): kernels.apply_operator(ops[r, s], ket) for r in range(n) for s in range(n)}
    gamma2 = np.empty((n, n, n, n))
    for p in range(n):
        for q in range(n):
            left = bra_images[p, q]
            for r in range(n):
                correction = gamma[p] if q == r else None
                for s in range(n):
                    val = np.vdot(left, ket_images[r, s]).real
                    if correction is not None:
                        val -= correction[s]
                    gamma2[p, q, r, s] = val
    return gamma2


@dataclass(frozen=True)
class RdmSet:
    """A matched pair of one- and two-body density matrices.

    kind is one of "state" (bra == ket), "transition" (bra != ket) or
    "averaged" (weighted combination of state sets).  bra_index and
    ket_index carry the 0/1 state labels for bookkeeping; an averaged
    set keeps the defaults.
    """

    gamma: np.ndarray
    gamma2: np.ndarray
    kind: str
    bra_index: int = 0
    ket_index: int = 0

    def __post_init__(self) -> None:
        if self.kind not in RDM_KINDS:
            raise ValueError(f"unknown RDM kind {self.kind!r}, expected one of {RDM_KINDS}")
        n = self.gamma.shape[0]
        if self.gamma.shape != (n, n) or self.gamma2.shape != (n, n, n, n):
            raise ValueError(
                f"inconsistent RDM shapes {self.gamma.shape} / {self.gamma2.shape}"
            )
        if self.kind == "state" and self.bra_index != self.ket_index:
            raise ValueError("state-kind RDMs require bra_index == ket_index")
        if self.kind == "transition" and self.bra_index == self.ket_index:
            raise ValueError("transition-kind RDMs require distinct state labels")

    @property
    def n_orbitals(self) -> int:
        return self.gamma.shape[0]


def state_rdms(psi: np.ndarray, n_orbitals: int, index: int = 0) -> RdmSet:
    return RdmSet(
        gamma=one_rdm(psi, psi, n_orbitals),
        gamma2=two_rdm(psi, psi, n_orbitals),
        kind="state",
        bra_index=index,
        ket_index=index,
    )


def transition_rdms(
    bra: np.ndarray,
    ket: np.ndarray,
    n_orbitals: int,
    bra_index: int = 0,
    ket_index: int = 1,
) -> RdmSet:
    return RdmSet(
        gamma=one_rdm(bra, ket, n_orbitals),
        gamma2=two_rdm(bra, ket, n_orbitals),
        kind="transition",
        bra_index=bra_index,
        ket_index=ket_index,
    )


def averaged_rdms(sets: Sequence[RdmSet], weights: Sequence[float]) -> RdmSet:
    """Weight-combination of state-kind RDM sets."""
    if len(sets) != len(weights) or not sets:
        raise ValueError("need one weight per RDM set")
    for s in sets:
        if s.kind != "state":
            raise ValueError("only state-kind RDMs can be averaged")
        if s.n_orbitals != sets[0].n_orbitals:
            raise ValueError("RDM sets span different orbital counts")
    gamma = sum(w * s.gamma for w, s in zip(weights, sets))
    gamma2 = sum(w * s.gamma2 for w, s in zip(weights, sets))
    return RdmSet(gamma=gamma, gamma2=gamma2, kind="averaged")


def energy_from_rdms(ham, rdms: RdmSet) -> float:
    """E = e_frozen + sum h_eff*gamma + 1/2 sum (tu|vw)*gamma2.

    Cross-check bridge between the circuit layer and the orbital layer;
    must reproduce the qubit-space expectation value exactly.
    """
    if rdms.kind == "transition":
        raise ValueError("transition RDMs have no total energy; use transition_energy_element")
    return float(
        ham.e_frozen
        + np.einsum("pq,pq->", ham.h_eff, rdms.gamma)
        + 0.5 * np.einsum("pqrs,pqrs->", ham.g_act, rdms.gamma2)
    )


def transition_energy_element(ham, rdms: RdmSet) -> float:
    """<bra|H|ket> from transition RDMs of two orthogonal states.

    No frozen-core term: it multiplies the overlap, which is zero.
    """
    if rdms.kind != "transition":
        raise ValueError(f"expected transition RDMs, got kind {rdms.kind!r}")
    return float(
        np.einsum("pq,pq->", ham.h_eff, rdms.gamma)
        + 0.5 * np.einsum("pqrs,pqrs->", ham.g_act, rdms.gamma2)
    )
