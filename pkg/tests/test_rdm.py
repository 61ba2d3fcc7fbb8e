import numpy as np
import pytest

from saoovqe import kernels
from saoovqe.ansatz import build_ansatz
from saoovqe.rdm import (
    RdmSet,
    averaged_rdms,
    energy_from_rdms,
    one_rdm,
    state_rdms,
    transition_energy_element,
    transition_rdms,
    two_rdm,
)
from saoovqe.sa_vqe import reference_states, run_sa_vqe
from saoovqe.simulator import hartree_fock_state
from oracles import dense_annihilation, dense_creation
from toysystems import three_orbital_hamiltonian, two_orbital_hamiltonian


def dense_excitation(n_modes, p, q):
    """Spin-summed E_pq as a dense matrix, built from ladder oracles."""
    out = 0
    for spin in (0, 1):
        out = out + dense_creation(n_modes, 2 * p + spin) @ dense_annihilation(n_modes, 2 * q + spin)
    return out


def random_real_state(rng, n_qubits):
    v = rng.normal(size=1 << n_qubits)
    return (v / np.linalg.norm(v)).astype(complex)


def ansatz_state(n_orbitals, n_electrons, seed):
    ansatz = build_ansatz(n_orbitals)
    phi, _ = reference_states(n_orbitals, n_electrons)
    rng = np.random.default_rng(seed)
    return ansatz.state(rng.normal(scale=0.4, size=ansatz.n_params), phi)


def test_one_rdm_matches_dense_oracle():
    n = 2
    rng = np.random.default_rng(11)
    for seed in range(3):
        bra = random_real_state(rng, 2 * n)
        ket = random_real_state(rng, 2 * n)
        gamma = one_rdm(bra, ket, n)
        for p in range(n):
            for q in range(n):
                want = np.vdot(bra, dense_excitation(2 * n, p, q) @ ket)
                assert abs(gamma[p, q] - want) < 1e-12


def test_two_rdm_matches_dense_oracle():
    n = 2
    rng = np.random.default_rng(12)
    bra = random_real_state(rng, 2 * n)
    ket = random_real_state(rng, 2 * n)
    gamma2 = two_rdm(bra, ket, n)
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    op = dense_excitation(2 * n, p, q) @ dense_excitation(2 * n, r, s)
                    if q == r:
                        op = op - dense_excitation(2 * n, p, s)
                    assert abs(gamma2[p, q, r, s] - np.vdot(bra, op @ ket)) < 1e-11


def test_closed_shell_determinant_rdms():
    # 2 electrons in 2 orbitals, both alpha+beta in orbital 0
    psi = hartree_fock_state(4, 1, 1)
    gamma = one_rdm(psi, psi, 2)
    np.testing.assert_allclose(gamma, np.diag([2.0, 0.0]), atol=1e-14)
    gamma2 = two_rdm(psi, psi, 2)
    # single determinant factorization
    want = np.einsum("pq,rs->pqrs", gamma, gamma) - 0.5 * np.einsum(
        "ps,rq->pqrs", gamma, gamma
    )
    np.testing.assert_allclose(gamma2, want, atol=1e-13)
    assert abs(gamma2[0, 0, 0, 0] - 2.0) < 1e-14


def test_trace_and_eigenvalue_bounds_on_ansatz_states():
    for seed in range(4):
        psi = ansatz_state(3, 4, seed)
        gamma = one_rdm(psi, psi, 3)
        np.testing.assert_allclose(gamma, gamma.T, atol=1e-12)
        assert abs(np.trace(gamma) - 4.0) < 1e-10
        evals = np.linalg.eigvalsh(gamma)
        assert evals.min() > -1e-10
        assert evals.max() < 2.0 + 1e-10


def test_partial_trace_identity():
    # sum_r gamma2[p,q,r,r] = (N - 1) gamma[p,q] on particle-number eigenstates
    for n, nelec, seed in ((2, 2, 0), (3, 4, 1)):
        psi = ansatz_state(n, nelec, seed)
        gamma = one_rdm(psi, psi, n)
        gamma2 = two_rdm(psi, psi, n)
        np.testing.assert_allclose(
            np.einsum("pqrr->pq", gamma2), (nelec - 1) * gamma, atol=1e-10
        )


def test_state_kind_index_symmetries():
    psi = ansatz_state(3, 4, 7)
    gamma2 = two_rdm(psi, psi, 3)
    # pair exchange (pq,rs) -> (rs,pq)
    np.testing.assert_allclose(gamma2, gamma2.transpose(2, 3, 0, 1), atol=1e-12)
    # simultaneous within-pair swap (hermiticity for a real wavefunction)
    np.testing.assert_allclose(gamma2, gamma2.transpose(1, 0, 3, 2), atol=1e-12)


def test_transition_trace_vanishes_for_orthogonal_states():
    phi_a, phi_b = reference_states(3, 4)
    gamma = one_rdm(phi_a, phi_b, 3)
    assert abs(np.trace(gamma)) < 1e-10


def test_energy_reconstruction_identity():
    # master cross-check: RDM contraction == direct qubit expectation
    for ham, nelec, seeds in (
        (two_orbital_hamiltonian(), 2, range(3)),
        (three_orbital_hamiltonian(), 4, range(3)),
    ):
        for seed in seeds:
            psi = ansatz_state(ham.n_orbitals, nelec, seed)
            rdms = state_rdms(psi, ham.n_orbitals)
            direct = kernels.expectation(ham.qubit_op, psi)
            assert abs(energy_from_rdms(ham, rdms) - direct) < 1e-10


def test_energy_reconstruction_arbitrary_real_state():
    ham = three_orbital_hamiltonian()
    rng = np.random.default_rng(21)
    psi = random_real_state(rng, 6)
    rdms = state_rdms(psi, 3)
    direct = kernels.expectation(ham.qubit_op, psi)
    assert abs(energy_from_rdms(ham, rdms) - direct) < 1e-10


def test_zero_integrals_reproduce_frozen_energy():
    ham = two_orbital_hamiltonian()
    psi = ansatz_state(2, 2, 3)
    rdms = state_rdms(psi, 2)

    class Bare:
        h_eff = np.zeros((2, 2))
        g_act = np.zeros((2, 2, 2, 2))
        e_frozen = -3.25

    assert abs(energy_from_rdms(Bare, rdms) + 3.25) < 1e-14


def test_transition_energy_element_cross_check():
    ham = three_orbital_hamiltonian()
    rng = np.random.default_rng(22)
    a = random_real_state(rng, 6)
    b = random_real_state(rng, 6)
    b = b - np.vdot(a, b) * a
    b /= np.linalg.norm(b)
    rdms = transition_rdms(a, b, 3)
    direct = kernels.transition(ham.qubit_op, a, b).real - ham.e_frozen * np.vdot(a, b).real
    assert abs(transition_energy_element(ham, rdms) - direct) < 1e-10
    # hermiticity with real wavefunctions: swapping bra and ket changes nothing
    swapped = transition_rdms(b, a, 3)
    assert abs(
        transition_energy_element(ham, rdms) - transition_energy_element(ham, swapped)
    ) < 1e-12


def test_resolved_states_decouple():
    ham = two_orbital_hamiltonian()
    res = run_sa_vqe(ham)
    rdms = transition_rdms(res.states[:, 0], res.states[:, 1], 2)
    assert abs(transition_energy_element(ham, rdms)) < 1e-8


def test_averaged_rdms_are_linear():
    ham = two_orbital_hamiltonian()
    res = run_sa_vqe(ham)
    r0 = state_rdms(res.states[:, 0], 2, index=0)
    r1 = state_rdms(res.states[:, 1], 2, index=1)
    avg = averaged_rdms((r0, r1), (0.5, 0.5))
    assert avg.kind == "averaged"
    np.testing.assert_array_equal(avg.gamma, 0.5 * r0.gamma + 0.5 * r1.gamma)
    np.testing.assert_array_equal(avg.gamma2, 0.5 * r0.gamma2 + 0.5 * r1.gamma2)
    e_avg = energy_from_rdms(ham, avg)
    assert abs(e_avg - res.energies.mean()) < 1e-8


def test_validation_errors():
    psi = hartree_fock_state(4, 1, 1)
    with pytest.raises(ValueError, match="size"):
        one_rdm(psi, psi, 3)
    with pytest.raises(ValueError, match="size"):
        two_rdm(psi[:8], psi[:8], 2)
    g = np.zeros((2, 2))
    g2 = np.zeros((2, 2, 2, 2))
    with pytest.raises(ValueError, match="kind"):
        RdmSet(gamma=g, gamma2=g2, kind="diagonal")
    with pytest.raises(ValueError, match="shapes"):
        RdmSet(gamma=np.zeros((3, 3)), gamma2=g2, kind="state")
    with pytest.raises(ValueError, match="distinct"):
        RdmSet(gamma=g, gamma2=g2, kind="transition", bra_index=1, ket_index=1)
    rdm_state = RdmSet(gamma=g, gamma2=g2, kind="state")
    rdm_trans = RdmSet(gamma=g, gamma2=g2, kind="transition", bra_index=0, ket_index=1)
    with pytest.raises(ValueError, match="one weight per"):
        averaged_rdms((rdm_state,), (0.5, 0.5))
    with pytest.raises(ValueError, match="state-kind"):
        averaged_rdms((rdm_trans,), (1.0,))
    ham = two_orbital_hamiltonian()
    with pytest.raises(ValueError, match="transition"):
        energy_from_rdms(ham, rdm_trans)
    with pytest.raises(ValueError, match="transition"):
        transition_energy_element(ham, rdm_state)
