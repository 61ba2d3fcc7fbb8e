"""FCIDUMP electron-integral file reading and writing.

The format is a Fortran-namelist header followed by ``value i j k l`` lines
with 1-based orbital indices:

    i = j = k = l = 0   core (nuclear repulsion + frozen shell) energy
    k = l = 0           one-electron integral h[i, j]
    otherwise           two-electron integral (ij|kl), chemists' notation

Two-electron values carry the full 8-fold permutational symmetry
(ij|kl) = (ji|kl) = (ij|lk) = (kl|ij) = ...; the writer emits one canonical
representative per class and expands on read.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# duplicate data lines for one canonical slot: last wins when they agree
# to this tolerance, otherwise the file is considered corrupted
DUPLICATE_TOL = 1e-12

KNOWN_CONVENTIONS = ("fixed-orbital",)


@dataclass
class IntegralData:
    """Molecular-orbital integrals for an electronic Hamiltonian."""

    n_orbitals: int
    n_electrons: int
    ms2: int
    core_energy: float
    h: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    orbsym: tuple[int, ...] | None = None
    isym: int | None = None

    def __post_init__(self) -> None:
        n = self.n_orbitals
        if n <= 0:
            raise ValueError(f"n_orbitals must be positive, got {n}")
        if self.n_electrons < 0:
            raise ValueError(f"n_electrons must be non-negative, got {self.n_electrons}")
        self.h = np.asarray(self.h, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.h.shape != (n, n):
            raise ValueError(f"h has shape {self.h.shape}, expected {(n, n)}")
        if self.g.shape != (n, n, n, n):
            raise ValueError(f"g has shape {self.g.shape}, expected 4-index")

    def validate_symmetry(self, tol: float = 1e-10) -> None:
        """Check hermiticity of h and 8-fold permutational symmetry of g."""
        if not np.allclose(self.h, self.h.T, atol=tol):
            raise ValueError("one-electron integrals are not symmetric")
        g = self.g
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(g, g.transpose(perm), atol=tol):
                raise ValueError("two-electron integrals break 8-fold symmetry")


_HEADER_INT = {
    "NORB": "n_orbitals",
    "NELEC": "n_electrons",
    "MS2": "ms2",
}


def _parse_orbsym(header: str) -> tuple[int, ...] | None:
    km = re.search(r"ORBSYM\s*=\s*([\d,*\s]+)", header, flags=re.IGNORECASE)
    if km is None:
        return None
    syms: list[int] = []
    for token in km.group(1).replace(",", " ").split():
        if "*" in token:  # Fortran repeat syntax, e.g. 3*1
            count, value = token.split("*")
            syms.extend([int(value)] * int(count))
        else:
            syms.append(int(token))
    return tuple(syms) or None


def _parse_header(text: str) -> tuple[dict, int]:
    """Parse the namelist header; returns (fields, data start offset)."""
    m = re.search(r"&FCI\b", text, flags=re.IGNORECASE)
    if m is None:
        raise ValueError("missing &FCI namelist header")
    end = re.search(r"(&END|/)", text[m.end():], flags=re.IGNORECASE)
    if end is None:
        raise ValueError("unterminated namelist header")
    header = text[m.end(): m.end() + end.start()]
    fields: dict = {}
    for key, attr in _HEADER_INT.items():
        km = re.search(rf"{key}\s*=\s*(-?\d+)", header, flags=re.IGNORECASE)
        if km is not None:
            fields[attr] = int(km.group(1))
    for key, attr in _HEADER_INT.items():
        if key != "MS2" and attr not in fields:
            raise ValueError(f"header is missing {key}")
    fields.setdefault("ms2", 0)
    fields["orbsym"] = _parse_orbsym(header)
    km = re.search(r"ISYM\s*=\s*(\d+)", header, flags=re.IGNORECASE)
    fields["isym"] = int(km.group(1)) if km is not None else None
    return fields, m.end() + end.end()


def _canonical_g_key(p: int, q: int, r: int, s: int) -> tuple[int, int, int, int]:
    a, b = (p, q) if p >= q else (q, p)
    c, d = (r, s) if r >= s else (s, r)
    if _pair_index(a, b) < _pair_index(c, d):
        a, b, c, d = c, d, a, b
    return a, b, c, d


def read_fcidump(path: str | Path) -> IntegralData:
    """Read an FCIDUMP file, expanding all index symmetries.

    A value repeated for the same canonical slot is accepted (last wins)
    when consistent to DUPLICATE_TOL and rejected as corruption otherwise.
    """
    text = Path(path).read_text()
    fields, offset = _parse_header(text)
    n = fields["n_orbitals"]
    h = np.zeros((n, n))
    g = np.zeros((n, n, n, n))
    core = 0.0
    seen: dict[tuple, float] = {}

    start = text.count("\n", 0, offset) + 1
    for lineno, line in enumerate(text[offset:].splitlines(), start=start):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise ValueError(f"malformed integral line {lineno}: {line!r}")
        value = float(parts[0].replace("D", "E").replace("d", "e"))
        i, j, k, l = (int(p) for p in parts[1:])
        if min(i, j, k, l) < 0 or max(i, j, k, l) > n:
            raise ValueError(f"orbital index out of range on line {lineno}: {line!r}")
        if i == 0 and j == 0 and k == 0 and l == 0:
            key: tuple = ("core",)
            core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise ValueError(f"bad one-electron indices on line {lineno}: {line!r}")
            key = ("h", max(i, j), min(i, j))
            h[i - 1, j - 1] = value
            h[j - 1, i - 1] = value
        else:
            if min(i, j, k, l) == 0:
                raise ValueError(f"bad two-electron indices on line {lineno}: {line!r}")
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            key = ("g",) + _canonical_g_key(p, q, r, s)
            for a, b, c, d in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                g[a, b, c, d] = value
        if key in seen and abs(seen[key] - value) > DUPLICATE_TOL:
            raise ValueError(
                f"line {lineno} repeats an integral slot with a conflicting "
                f"value ({seen[key]!r} vs {value!r}): {line!r}"
            )
        seen[key] = value

    return IntegralData(
        n_orbitals=n,
        n_electrons=fields["n_electrons"],
        ms2=fields["ms2"],
        core_energy=core,
        h=h,
        g=g,
        orbsym=fields["orbsym"],
        isym=fields["isym"],
    )


def _pair_index(a: int, b: int) -> int:
    # composite index for a >= b
    return a * (a + 1) // 2 + b


def write_fcidump(data: IntegralData, path: str | Path) -> None:
    """Write integrals with one canonical line per symmetry class.

    Values are printed with 17 significant digits so doubles round-trip
    exactly; exact zeros are skipped; the core energy line comes last.
    """
    n = data.n_orbitals
    orbsym = data.orbsym if data.orbsym is not None else (1,) * n
    isym = data.isym if data.isym is not None else 1
    lines = [
        f"&FCI NORB={n},NELEC={data.n_electrons},MS2={data.ms2},",
        " ORBSYM=" + "".join(f"{s}," for s in orbsym),
        f" ISYM={isym},",
        "/",
    ]

    def fmt(value: float, i: int, j: int, k: int, l: int) -> str:
        return f"{value:23.16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    for p in range(n):
        for q in range(p + 1):
            for r in range(p + 1):
                s_max = q if r == p else r
                for s in range(s_max + 1):
                    value = data.g[p, q, r, s]
                    if value != 0.0:
                        lines.append(fmt(value, p + 1, q + 1, r + 1, s + 1))
    for p in range(n):
        for q in range(p + 1):
            if data.h[p, q] != 0.0:
                lines.append(fmt(data.h[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(data.core_energy, 0, 0, 0, 0))
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class DerivativeIntegralSet:
    """Integral derivatives for one nuclear coordinate, FCIDUMP layout.

    data.h holds dh/dx, data.g holds dg/dx and data.core_energy holds
    de_core/dx, all in Hartree/bohr.  The convention tag records the
    orbital frame the derivatives were taken in.
    """

    label: str
    convention: str
    data: IntegralData


def parse_derivative_manifest(
    path: str | Path, reference: IntegralData
) -> list[DerivativeIntegralSet]:
    """Read a manifest of per-coordinate derivative-integral files.

    One line per coordinate: `<label> <relative-path> <convention_tag>`.
    Blank lines and lines starting with `#` are ignored.  Every file must
    match the reference orbital count.
    """
    path = Path(path)
    sets: list[DerivativeIntegralSet] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise ValueError(
                f"{path.name} line {lineno}: expected "
                f"'<label> <path> <convention>', got {line!r}"
            )
        label, relpath, convention = parts
        if convention not in KNOWN_CONVENTIONS:
            raise ValueError(
                f"{path.name} line {lineno}: unknown convention tag "
                f"{convention!r}, expected one of {KNOWN_CONVENTIONS}"
            )
        data = read_fcidump(path.parent / relpath)
        if data.n_orbitals != reference.n_orbitals:
            raise ValueError(
                f"{path.name} line {lineno}: {relpath} has "
                f"{data.n_orbitals} orbitals, reference has {reference.n_orbitals}"
            )
        sets.append(DerivativeIntegralSet(label=label, convention=convention, data=data))
    return sets


@dataclass(frozen=True)
class LintIssue:
    severity: str  # "error" | "warning"
    line: int      # 1-based, 0 for file-level issues
    message: str


def lint_fcidump(path: str | Path) -> list[LintIssue]:
    """Scan an FCIDUMP file and report every problem found, with line numbers.

    Unlike read_fcidump, which stops at the first defect, this collects all
    of them so a corrupted fixture can be repaired in one pass.
    """
    issues: list[LintIssue] = []
    text = Path(path).read_text()
    try:
        fields, offset = _parse_header(text)
    except ValueError as exc:
        issues.append(LintIssue("error", 1, str(exc)))
        return issues
    n = fields["n_orbitals"]
    if n <= 0:
        issues.append(LintIssue("error", 1, f"NORB must be positive, got {n}"))
        return issues
    nelec = fields["n_electrons"]
    if not 0 <= nelec <= 2 * n:
        issues.append(
            LintIssue("error", 1, f"NELEC={nelec} outside 0..{2 * n} for NORB={n}")
        )
    if abs(fields["ms2"]) > nelec or (fields["ms2"] - nelec) % 2 != 0:
        issues.append(
            LintIssue("error", 1, f"MS2={fields['ms2']} inconsistent with NELEC={nelec}")
        )
    if fields["orbsym"] is not None and len(fields["orbsym"]) != n:
        issues.append(
            LintIssue("warning", 1, f"ORBSYM lists {len(fields['orbsym'])} entries for NORB={n}")
        )

    seen: dict[tuple, tuple[float, int]] = {}
    saw_core = False
    start = text.count("\n", 0, offset) + 1
    for lineno, line in enumerate(text[offset:].splitlines(), start=start):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            issues.append(LintIssue("error", lineno, f"malformed integral line: {line!r}"))
            continue
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            issues.append(LintIssue("error", lineno, f"unparseable fields: {line!r}"))
            continue
        if min(i, j, k, l) < 0 or max(i, j, k, l) > n:
            issues.append(LintIssue("error", lineno, f"orbital index out of range: {line!r}"))
            continue
        if i == 0 and j == 0 and k == 0 and l == 0:
            key: tuple = ("core",)
            saw_core = True
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                issues.append(LintIssue("error", lineno, f"bad one-electron indices: {line!r}"))
                continue
            key = ("h", max(i, j), min(i, j))
        else:
            if min(i, j, k, l) == 0:
                issues.append(LintIssue("error", lineno, f"bad two-electron indices: {line!r}"))
                continue
            key = ("g",) + _canonical_g_key(i - 1, j - 1, k - 1, l - 1)
        if key in seen:
            old_value, old_line = seen[key]
            if abs(old_value - value) > DUPLICATE_TOL:
                issues.append(
                    LintIssue(
                        "error",
                        lineno,
                        f"conflicts with line {old_line} for the same integral slot "
                        f"({old_value!r} vs {value!r})",
                    )
                )
            else:
                issues.append(
                    LintIssue("warning", lineno, f"duplicates line {old_line} (consistent)")
                )
        seen[key] = (value, lineno)
    if not saw_core:
        issues.append(LintIssue("warning", 0, "no core-energy line; assuming 0.0"))
    return issues
