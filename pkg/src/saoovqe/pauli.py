"""Pauli-string and Pauli-sum algebra over a fixed-size qubit register.

A Pauli string is stored as a pair of bit masks ``(x, z)`` with bit ``k``
describing qubit ``k``::

    (0, 0) -> I      (1, 0) -> X      (1, 1) -> Y      (0, 1) -> Z

and carries the phase convention ``P = i**popcount(x & z) * X^x Z^z`` so that
a string equals the literal tensor product of its letters.  All group phases
(+-1, +-i) produced by multiplication are tracked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

#: coefficients with magnitude below this are dropped by simplification
SIMPLIFY_FLOOR = 1e-14

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


class QubitCountMismatch(ValueError):
    """Raised when operands act on registers of different sizes."""


@dataclass(frozen=True)
class PauliString:
    """An n-qubit tensor product of I/X/Y/Z letters."""

    n_qubits: int
    x: int
    z: int

    def __post_init__(self) -> None:
        mask = (1 << self.n_qubits) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("mask exceeds register size")

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        """Build from a letter string; character ``k`` is the letter on qubit ``k``."""
        x = z = 0
        for k, letter in enumerate(letters):
            try:
                xb, zb = _LETTER_BITS[letter]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r}") from None
            x |= xb << k
            z |= zb << k
        return cls(len(letters), x, z)

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_LETTER[((self.x >> k) & 1, (self.z >> k) & 1)]
            for k in range(self.n_qubits)
        )

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return (self.x | self.z).bit_count()

    @property
    def phase(self) -> complex:
        """Internal phase ``i**n_Y`` relating ``X^x Z^z`` to the letter product."""
        return _I_POW[(self.x & self.z).bit_count() % 4]

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n_qubits != other.n_qubits:
            raise QubitCountMismatch("qubit counts differ")
        anti = (self.x & other.z).bit_count() + (self.z & other.x).bit_count()
        return anti % 2 == 0

    def __mul__(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Group product; returns ``(phase, string)`` with phase in {1, i, -1, -i}."""
        if self.n_qubits != other.n_qubits:
            raise QubitCountMismatch("qubit counts differ")
        x3 = self.x ^ other.x
        z3 = self.z ^ other.z
        k = (
            (self.x & self.z).bit_count()
            + (other.x & other.z).bit_count()
            - (x3 & z3).bit_count()
            + 2 * (self.z & other.x).bit_count()
        )
        return _I_POW[k % 4], PauliString(self.n_qubits, x3, z3)

    def __str__(self) -> str:
        return self.letters

    def sort_key(self) -> tuple:
        return (self.letters,)


def identity_string(n_qubits: int) -> PauliString:
    return PauliString(n_qubits, 0, 0)


def single_letter(n_qubits: int, qubit: int, letter: str) -> PauliString:
    """One non-identity letter on ``qubit``, identity elsewhere."""
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits}-qubit register")
    xb, zb = _LETTER_BITS[letter]
    return PauliString(n_qubits, xb << qubit, zb << qubit)


class PauliSum:
    """Linear combination of Pauli strings with complex coefficients.

    Terms are kept merged; coefficients below :data:`SIMPLIFY_FLOOR` are
    dropped on simplification.  Instances behave as immutable values once
    handed out; all arithmetic returns new objects.
    """

    __slots__ = ("n_qubits", "_terms", "_compiled")

    def __init__(
        self,
        n_qubits: int,
        terms: dict[tuple[int, int], complex] | None = None,
    ) -> None:
        self.n_qubits = n_qubits
        self._terms: dict[tuple[int, int], complex] = dict(terms) if terms else {}
        self._compiled = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coeff)})

    @classmethod
    def from_string(cls, string: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(string.n_qubits, {(string.x, string.z): complex(coeff)})

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, PauliString]]) -> "PauliSum":
        terms = list(terms)
        if not terms:
            raise ValueError("cannot infer qubit count from an empty term list")
        n = terms[0][1].n_qubits
        out = cls(n)
        for coeff, string in terms:
            if string.n_qubits != n:
                raise QubitCountMismatch("qubit counts differ")
            key = (string.x, string.z)
            out._terms[key] = out._terms.get(key, 0.0) + complex(coeff)
        return out.simplified()

    # -- inspection --------------------------------------------------------

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        """Iterate ``(string, coeff)`` in a deterministic canonical order."""
        for (x, z) in sorted(self._terms):
            yield PauliString(self.n_qubits, x, z), self._terms[(x, z)]

    def coefficient(self, string: PauliString) -> complex:
        if string.n_qubits != self.n_qubits:
            raise QubitCountMismatch("qubit counts differ")
        return self._terms.get((string.x, string.z), 0.0 + 0.0j)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def norm1(self) -> float:
        return float(sum(abs(c) for c in self._terms.values()))

    def __repr__(self) -> str:
        parts = [f"({c:+.6g})*{s}" for s, c in list(self)[:6]]
        more = "" if len(self) <= 6 else f" ... [{len(self)} terms]"
        return f"PauliSum({' + '.join(parts) or '0'}{more})"

    # -- algebra -----------------------------------------------------------

    def _check(self, other: "PauliSum") -> None:
        if self.n_qubits != other.n_qubits:
            raise QubitCountMismatch(
                f"qubit counts differ: {self.n_qubits} vs {other.n_qubits}"
            )

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check(other)
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            terms[key] = terms.get(key, 0.0) + coeff
        return PauliSum(self.n_qubits, terms).simplified()

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check(other)
            terms: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in self._terms.items():
                for (x2, z2), c2 in other._terms.items():
                    x3 = x1 ^ x2
                    z3 = z1 ^ z2
                    k = (
                        (x1 & z1).bit_count()
                        + (x2 & z2).bit_count()
                        - (x3 & z3).bit_count()
                        + 2 * (z1 & x2).bit_count()
                    )
                    key = (x3, z3)
                    terms[key] = terms.get(key, 0.0) + c1 * c2 * _I_POW[k % 4]
            return PauliSum(self.n_qubits, terms).simplified()
        return PauliSum(
            self.n_qubits, {k: complex(other) * c for k, c in self._terms.items()}
        ).simplified()

    __rmul__ = __mul__

    def dagger(self) -> "PauliSum":
        return PauliSum(
            self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()}
        )

    def simplified(self, floor: float = SIMPLIFY_FLOOR) -> "PauliSum":
        return PauliSum(
            self.n_qubits,
            {k: c for k, c in self._terms.items() if abs(c) >= floor},
        )

    def real_part_enforced(self, tol: float = 1e-10) -> "PauliSum":
        """Drop imaginary coefficient residue; raise if it exceeds ``tol``."""
        worst = max((abs(c.imag) for c in self._terms.values()), default=0.0)
        if worst > tol:
            raise ValueError(f"non-hermitian residue {worst:.3e} exceeds {tol:.1e}")
        return PauliSum(
            self.n_qubits, {k: complex(c.real, 0.0) for k, c in self._terms.items()}
        ).simplified()

    # -- kernel interface ----------------------------------------------------

    def compiled(self) -> "CompiledPauliSum":
        """Flat array view consumed by the statevector kernels (cached)."""
        if self._compiled is None:
            self._compiled = CompiledPauliSum(self)
        return self._compiled


class CompiledPauliSum:
    """Mask/phase/coefficient arrays of a PauliSum, in canonical term order."""

    __slots__ = ("n_qubits", "xs", "zs", "phases", "coeffs")

    def __init__(self, op: PauliSum) -> None:
        keys = sorted(op._terms)
        self.n_qubits = op.n_qubits
        self.xs = np.array([k[0] for k in keys], dtype=np.uint64)
        self.zs = np.array([k[1] for k in keys], dtype=np.uint64)
        self.phases = np.array(
            [_I_POW[(k[0] & k[1]).bit_count() % 4] for k in keys], dtype=np.complex128
        )
        self.coeffs = np.array([op._terms[k] for k in keys], dtype=np.complex128)


def pauli_mul(a: PauliSum, b: PauliSum) -> PauliSum:
    """Product of two Pauli sums with exact group phases."""
    return a * b


def pauli_add(a: PauliSum, b: PauliSum) -> PauliSum:
    return a + b


def pauli_simplify(a: PauliSum, floor: float = SIMPLIFY_FLOOR) -> PauliSum:
    return a.simplified(floor)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return a * b - b * a
