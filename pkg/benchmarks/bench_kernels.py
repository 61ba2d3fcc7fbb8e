#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-numpy statevector kernels.

Exercises the three hot paths (Hamiltonian expectation, rotation sweep,
adjoint gradient sweep) on random Pauli workloads and prints a speedup
table.  Both backends are checked against each other before timing, so
this doubles as a quick consistency probe.

    python3 benchmarks/bench_kernels.py --qubits 8 12 --terms 160
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from saoovqe import _pykernels

try:
    from saoovqe import _fastkernels
except ImportError:  # extension not built
    _fastkernels = None


def random_workload(rng: np.random.Generator, n_qubits: int, n_terms: int):
    dim = 1 << n_qubits
    xs = rng.integers(0, dim, size=n_terms, dtype=np.uint64)
    zs = rng.integers(0, dim, size=n_terms, dtype=np.uint64)
    phases = np.array([1j ** int(x & z).bit_count() for x, z in zip(xs, zs)],
                      dtype=np.complex128)
    coeffs = (rng.normal(size=n_terms) * 0.3).astype(np.complex128)
    angles = rng.normal(size=n_terms) * 0.2
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi = (psi / np.linalg.norm(psi)).astype(np.complex128)
    return xs, zs, phases, coeffs, angles, psi


def check_agreement(work) -> None:
    xs, zs, phases, coeffs, angles, psi = work
    e_py = _pykernels.expectation_value(psi.copy(), xs, zs, phases, coeffs)
    e_fast = _fastkernels.expectation_value(psi.copy(), xs, zs, phases, coeffs)
    if abs(e_py - e_fast) > 1e-10:
        raise AssertionError(f"expectation mismatch: {e_py} vs {e_fast}")

    a, b = psi.copy(), psi.copy()
    _pykernels.apply_rotations_inplace(a, xs, zs, phases, angles)
    _fastkernels.apply_rotations_inplace(b, xs, zs, phases, angles)
    err = np.abs(a - b).max()
    if err > 1e-10:
        raise AssertionError(f"rotation sweep mismatch: {err}")

    ga, gb = np.empty(len(xs)), np.empty(len(xs))
    lam_a, lam_b = a.copy(), b.copy()
    _pykernels.adjoint_sweep(a, lam_a, xs, zs, phases, angles, ga)
    _fastkernels.adjoint_sweep(b, lam_b, xs, zs, phases, angles, gb)
    err = np.abs(ga - gb).max()
    if err > 1e-10:
        raise AssertionError(f"adjoint sweep mismatch: {err}")


def timeit(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_backend(impl, work, repeats: int) -> dict[str, float]:
    xs, zs, phases, coeffs, angles, psi = work
    out = np.empty_like(psi)
    grad = np.empty(len(xs))

    def expectation():
        impl.expectation_value(psi, xs, zs, phases, coeffs)

    def rotations():
        state = psi.copy()
        impl.apply_rotations_inplace(state, xs, zs, phases, angles)

    def adjoint():
        phi = psi.copy()
        impl.apply_pauli_sum(phi, out, xs, zs, phases, coeffs)
        impl.adjoint_sweep(phi, out.copy(), xs, zs, phases, angles, grad)

    return {
        "expectation": timeit(expectation, repeats),
        "rotation sweep": timeit(rotations, repeats),
        "adjoint gradient": timeit(adjoint, repeats),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+", default=[6, 8, 10, 12])
    parser.add_argument("--terms", type=int, default=120, help="Pauli terms per workload")
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (best kept)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _fastkernels is None:
        print("compiled extension not available; showing pure-python timings only")

    rng = np.random.default_rng(args.seed)
    header = f"{'qubits':>6}  {'kernel':<18} {'python':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n_qubits in args.qubits:
        work = random_workload(rng, n_qubits, args.terms)
        if _fastkernels is not None:
            check_agreement(work)
        t_py = bench_backend(_pykernels, work, args.repeats)
        t_fast = (
            bench_backend(_fastkernels, work, args.repeats)
            if _fastkernels is not None
            else None
        )
        for name, py_time in t_py.items():
            if t_fast is None:
                print(f"{n_qubits:>6}  {name:<18} {py_time * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
            else:
                fast_time = t_fast[name]
                print(
                    f"{n_qubits:>6}  {name:<18} {py_time * 1e3:>8.2f}ms "
                    f"{fast_time * 1e3:>8.2f}ms {py_time / fast_time:>7.1f}x"
                )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
