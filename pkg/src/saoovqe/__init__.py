"""State-averaged orbital-optimized VQE on an exact statevector backend."""

from __future__ import annotations

__version__ = "0.1.0"

from .fcidump import (
    DerivativeIntegralSet,
    IntegralData,
    lint_fcidump,
    parse_derivative_manifest,
    read_fcidump,
    write_fcidump,
)
from .orbital_opt import OrbitalSpace, SaooVqeResult, make_orbital_space, run_sa_oo_vqe
from .response import (
    GeometryStencil,
    GradientResult,
    NacResult,
    fd_gradient,
    fd_overlap_nac,
    hf_gradient,
    hf_nac,
    parse_stencil_manifest,
)
from .sa_vqe import ActiveHamiltonian, SAVQEResult, run_sa_vqe
from .simulator import exact_eigenstates

__all__ = [
    "ActiveHamiltonian",
    "DerivativeIntegralSet",
    "GeometryStencil",
    "GradientResult",
    "IntegralData",
    "NacResult",
    "OrbitalSpace",
    "SAVQEResult",
    "SaooVqeResult",
    "exact_eigenstates",
    "fd_gradient",
    "fd_overlap_nac",
    "hf_gradient",
    "hf_nac",
    "lint_fcidump",
    "make_orbital_space",
    "parse_derivative_manifest",
    "parse_stencil_manifest",
    "read_fcidump",
    "run_sa_oo_vqe",
    "run_sa_vqe",
    "write_fcidump",
    "__version__",
]
