"""Reference-data generator for the SA-OO-VQE solver's fixture suite.

Self-contained minimal-basis electronic structure (Gaussian integrals,
restricted Hartree-Fock, determinant CASCI, state-averaged CASSCF) used
once to produce committed FCIDUMP files, displacement stencils,
derivative-integral manifests and reference energies/gradients/couplings.
The solver package is only ever touched through its file formats and
command line.
"""

__version__ = "0.1.0"
