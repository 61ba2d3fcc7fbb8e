"""Kernel selection and operator-level convenience wrappers.

The compiled extension is used when importable; set SAOOVQE_PURE_PYTHON=1
to force the numpy fallback.  Both backends implement the identical
function contract, so everything above this module is backend-agnostic.
"""

from __future__ import annotations

import os

import numpy as np

from .pauli import CompiledPauliSum, PauliSum

if os.environ.get("SAOOVQE_PURE_PYTHON") == "1":
    from . import _pykernels as _impl
else:
    try:
        from . import _fastkernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pykernels as _impl  # type: ignore[no-redef]

BACKEND = "compiled" if _impl.COMPILED else "python"

apply_pauli_inplace = _impl.apply_pauli_inplace
apply_rotations_inplace = _impl.apply_rotations_inplace
apply_pauli_sum = _impl.apply_pauli_sum
expectation_value = _impl.expectation_value
transition_value = _impl.transition_value
adjoint_sweep = _impl.adjoint_sweep
dot = _impl.dot


def _compiled(op: PauliSum | CompiledPauliSum) -> CompiledPauliSum:
    return op.compiled() if isinstance(op, PauliSum) else op


def _state(psi: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(psi, dtype=np.complex128)


def expectation(op: PauliSum | CompiledPauliSum, psi: np.ndarray) -> float:
    """Re <psi|op|psi> for a hermitian operator."""
    c = _compiled(op)
    return float(expectation_value(_state(psi), c.xs, c.zs, c.phases, c.coeffs))


def transition(
    op: PauliSum | CompiledPauliSum, bra: np.ndarray, ket: np.ndarray
) -> complex:
    """<bra|op|ket>."""
    c = _compiled(op)
    return complex(
        transition_value(_state(bra), _state(ket), c.xs, c.zs, c.phases, c.coeffs)
    )


def apply_operator(op: PauliSum | CompiledPauliSum, psi: np.ndarray) -> np.ndarray:
    """op @ psi as a new array."""
    c = _compiled(op)
    psi = _state(psi)
    out = np.empty_like(psi)
    apply_pauli_sum(psi, out, c.xs, c.zs, c.phases, c.coeffs)
    return out
