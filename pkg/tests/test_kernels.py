from __future__ import annotations

import importlib

import numpy as np
import pytest
from scipy.linalg import expm

from oracles import dense_pauli_sum, random_state
from saoovqe.pauli import PauliSum

_BACKENDS = []
_pyk = importlib.import_module("saoovqe._pykernels")
_BACKENDS.append(pytest.param(_pyk, id="python"))
try:
    _fastk = importlib.import_module("saoovqe._fastkernels")
    _BACKENDS.append(pytest.param(_fastk, id="compiled"))
except ImportError:
    pass


@pytest.fixture(params=_BACKENDS)
def kern(request):
    return request.param


def _random_sum(rng, n_qubits, n_terms, hermitian=False):
    terms = {}
    for _ in range(n_terms):
        x = int(rng.integers(0, 2**n_qubits))
        z = int(rng.integers(0, 2**n_qubits))
        c = complex(rng.normal(), 0.0 if hermitian else rng.normal())
        terms[(x, z)] = c
    return PauliSum(n_qubits, terms)


def _rotation_set(rng, n_qubits, n_gates):
    xs = rng.integers(0, 2**n_qubits, size=n_gates).astype(np.uint64)
    zs = rng.integers(0, 2**n_qubits, size=n_gates).astype(np.uint64)
    phases = np.array(
        [1j ** ((int(x) & int(z)).bit_count() % 4) for x, z in zip(xs, zs)],
        dtype=np.complex128,
    )
    angles = rng.normal(scale=0.7, size=n_gates)
    return xs, zs, phases, angles


def _dense_rotation(n_qubits, x, z, phase, theta):
    op = PauliSum(n_qubits, {(int(x), int(z)): 1.0})
    return expm(-0.5j * theta * dense_pauli_sum(op))


def test_apply_pauli_matches_dense(kern):
    rng = np.random.default_rng(21)
    n = 4
    for _ in range(25):
        x = int(rng.integers(0, 2**n))
        z = int(rng.integers(0, 2**n))
        op = PauliSum(n, {(x, z): 1.0})
        psi = random_state(n, rng)
        out = psi.copy()
        phase = 1j ** ((x & z).bit_count() % 4)
        kern.apply_pauli_inplace(out, x, z, phase)
        np.testing.assert_allclose(out, dense_pauli_sum(op) @ psi, atol=1e-13)


def test_apply_rotations_matches_dense_expm(kern):
    rng = np.random.default_rng(22)
    n = 3
    xs, zs, phases, angles = _rotation_set(rng, n, 6)
    psi = random_state(n, rng)
    out = psi.copy()
    kern.apply_rotations_inplace(out, xs, zs, phases, angles)
    ref = psi.copy()
    for j in range(len(xs)):
        ref = _dense_rotation(n, xs[j], zs[j], phases[j], angles[j]) @ ref
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_reverse_dagger_inverts_forward(kern):
    rng = np.random.default_rng(23)
    n = 4
    xs, zs, phases, angles = _rotation_set(rng, n, 10)
    psi = random_state(n, rng)
    out = psi.copy()
    kern.apply_rotations_inplace(out, xs, zs, phases, angles)
    kern.apply_rotations_inplace(out, xs, zs, phases, angles, True, True)
    np.testing.assert_allclose(out, psi, atol=1e-12)


def test_rotations_preserve_norm_over_many_gates(kern):
    rng = np.random.default_rng(24)
    n = 5
    psi = random_state(n, rng)
    total = 0
    while total < 10_000:
        xs, zs, phases, angles = _rotation_set(rng, n, 500)
        kern.apply_rotations_inplace(psi, xs, zs, phases, angles)
        total += 500
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_apply_pauli_sum_matches_dense(kern):
    rng = np.random.default_rng(25)
    n = 3
    op = _random_sum(rng, n, 8)
    c = op.compiled()
    psi = random_state(n, rng)
    out = np.empty_like(psi)
    kern.apply_pauli_sum(psi, out, c.xs, c.zs, c.phases, c.coeffs)
    np.testing.assert_allclose(out, dense_pauli_sum(op) @ psi, atol=1e-12)


def test_expectation_matches_dense(kern):
    rng = np.random.default_rng(26)
    n = 4
    op = _random_sum(rng, n, 10, hermitian=True)
    c = op.compiled()
    mat = dense_pauli_sum(op)
    for _ in range(10):
        psi = random_state(n, rng)
        got = kern.expectation_value(psi, c.xs, c.zs, c.phases, c.coeffs)
        want = np.vdot(psi, mat @ psi).real
        assert abs(got - want) < 1e-12


def test_transition_matches_dense(kern):
    rng = np.random.default_rng(27)
    n = 3
    op = _random_sum(rng, n, 8)
    c = op.compiled()
    mat = dense_pauli_sum(op)
    for _ in range(10):
        bra = random_state(n, rng)
        ket = random_state(n, rng)
        got = kern.transition_value(bra, ket, c.xs, c.zs, c.phases, c.coeffs)
        want = np.vdot(bra, mat @ ket)
        assert abs(got - want) < 1e-12


def test_dot_matches_vdot(kern):
    rng = np.random.default_rng(28)
    a = random_state(4, rng)
    b = random_state(4, rng)
    assert abs(kern.dot(a, b) - np.vdot(a, b)) < 1e-14


def test_adjoint_sweep_matches_finite_difference(kern):
    rng = np.random.default_rng(29)
    n = 4
    ham = _random_sum(rng, n, 12, hermitian=True)
    hc = ham.compiled()
    xs, zs, phases, angles = _rotation_set(rng, n, 8)
    ref = random_state(n, rng)

    def energy(a):
        psi = ref.copy()
        kern.apply_rotations_inplace(psi, xs, zs, phases, a)
        return kern.expectation_value(psi, hc.xs, hc.zs, hc.phases, hc.coeffs)

    phi = ref.copy()
    kern.apply_rotations_inplace(phi, xs, zs, phases, angles)
    lam = np.empty_like(phi)
    kern.apply_pauli_sum(phi, lam, hc.xs, hc.zs, hc.phases, hc.coeffs)
    grad = np.zeros(len(xs))
    kern.adjoint_sweep(phi, lam, xs, zs, phases, angles, grad)

    # sweep rewinds phi back to the reference state
    np.testing.assert_allclose(phi, ref, atol=1e-12)

    h = 1e-6
    for j in range(len(xs)):
        ap = angles.copy()
        am = angles.copy()
        ap[j] += h
        am[j] -= h
        fd = (energy(ap) - energy(am)) / (2 * h)
        assert abs(grad[j] - fd) < 1e-7


def test_backends_agree():
    if len(_BACKENDS) < 2:
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(30)
    n = 5
    ham = _random_sum(rng, n, 20, hermitian=True)
    hc = ham.compiled()
    xs, zs, phases, angles = _rotation_set(rng, n, 15)
    psi0 = random_state(n, rng)

    results = []
    for kern in (_pyk, _fastk):
        psi = psi0.copy()
        kern.apply_rotations_inplace(psi, xs, zs, phases, angles)
        e = kern.expectation_value(psi, hc.xs, hc.zs, hc.phases, hc.coeffs)
        lam = np.empty_like(psi)
        kern.apply_pauli_sum(psi, lam, hc.xs, hc.zs, hc.phases, hc.coeffs)
        grad = np.zeros(len(xs))
        kern.adjoint_sweep(psi, lam, xs, zs, phases, angles, grad)
        results.append((psi.copy(), e, grad.copy()))

    np.testing.assert_allclose(results[0][0], results[1][0], atol=1e-13)
    assert abs(results[0][1] - results[1][1]) < 1e-13
    np.testing.assert_allclose(results[0][2], results[1][2], atol=1e-12)
