"""Command-line interface: configuration, orchestration, result files.

Config files use TOML.  Recognized keys (defaults in parentheses):

    fcidump = "path"                 integrals for single-geometry commands
    active_electrons = N             active-space electron count
    active_orbitals = N              active-space orbital count
    active_indices = [..]            explicit active orbitals (contiguous default)
    weights = [0.5, 0.5]             ensemble weights
    solver = "vqe"                   vqe | exact
    ansatz = "guccsd"                only choice
    trotter_reps = 1
    optimizer = "bfgs"               bfgs | gradient-descent | pso
    output = "path"                  default result path

    [tolerances]  gradient (1e-6), energy (1e-9)
    [vqe]         gtol (1e-8), max_iters (2000), s2_penalty (0.5)
    [orbital]     max_macro_iters (200), trust_radius (0.3),
                  include_active_active (false)
    [scan]        manifest, solvers (["vqe"]), warm_start (true)
    [response]    stencil, derivatives   (manifest paths)
    [exact]       k (4)

Relative paths resolve against the config file's directory.  The scan
manifest lists `<alpha> <relative-path>` per line, ordered by alpha;
stencil and derivative manifests are defined in the response and
fcidump modules.

Exit codes: 0 success, 1 config/parse errors, 2 dimension errors,
3 non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fcidump import lint_fcidump, parse_derivative_manifest, read_fcidump
from .orbital_opt import make_orbital_space, run_sa_oo_vqe
from .pauli import PauliString, PauliSum
from .response import fd_gradient, fd_overlap_nac, hf_gradient, hf_nac, parse_stencil_manifest
from .sa_vqe import default_partition
from .simulator import DENSE_QUBIT_CUTOFF, exact_eigenstates, pauli_sum_to_dense
from .operators import embed_with_partition, qubit_hamiltonian

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIMENSION = 2
EXIT_NONCONVERGENCE = 3

RESPONSE_CSV_HEADER = "coordinate_label,dE0,dE1,dE_SA,d01_hf,d01_fd,flags"


class ConfigError(Exception):
    """Bad configuration or unparseable input file (exit 1)."""


class DimensionError(Exception):
    """Active space inconsistent with the integral dimensions (exit 2)."""


class ConvergenceError(Exception):
    """The requested calculation did not converge (exit 3)."""


# --------------------------------------------------------------------- config

try:  # pragma: no cover - depends on interpreter version
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover
    _toml = None


def _split_top_level(text: str) -> list[str]:
    """Split on commas that are not nested in brackets or strings."""
    parts, depth, start, quote = [], 0, 0, None
    for i, ch in enumerate(text):
        if quote:
            if ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
        elif ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    tail = text[start:]
    if tail.strip():
        parts.append(tail)
    return parts


def _parse_value(text: str, where: str):
    text = text.strip()
    if not text:
        raise ConfigError(f"{where}: empty value")
    if text[0] in "\"'":
        if len(text) < 2 or text[-1] != text[0]:
            raise ConfigError(f"{where}: unterminated string {text!r}")
        return text[1:-1]
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"{where}: unterminated array {text!r}")
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_value(part, where) for part in _split_top_level(inner)]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse value {text!r}") from None


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def parse_toml_text(text: str) -> dict:
    """Minimal TOML subset: tables, scalars, one-line arrays, comments.

    Used when the interpreter lacks tomllib; covers everything the config
    format needs.
    """
    root: dict = {}
    table = root
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed table header {line!r}")
            name = line[1:-1].strip()
            if not name or "[" in name:
                raise ConfigError(f"{where}: malformed table header {line!r}")
            table = root.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        table[key.strip()] = _parse_value(value, where)
    return root


def load_toml(path: Path) -> dict:
    text = path.read_text()
    if _toml is not None:
        try:
            return _toml.loads(text)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return parse_toml_text(text)


@dataclass
class RunConfig:
    """Fully resolved settings for one calculation."""

    fcidump: str | None = None
    active_electrons: int | None = None
    active_orbitals: int | None = None
    active_indices: tuple[int, ...] | None = None
    weights: tuple[float, float] = (0.5, 0.5)
    solver: str = "vqe"
    ansatz: str = "guccsd"
    trotter_reps: int = 1
    optimizer: str = "bfgs"
    output: str | None = None
    tol_grad: float = 1e-6
    tol_energy: float = 1e-9
    vqe_gtol: float = 1e-8
    vqe_max_iters: int = 2000
    s2_penalty: float = 0.5
    max_macro_iters: int = 200
    trust_radius: float = 0.3
    include_active_active: bool = False
    scan_manifest: str | None = None
    scan_solvers: tuple[str, ...] | None = None
    warm_start: bool = True
    stencil_manifest: str | None = None
    derivative_manifest: str | None = None
    exact_k: int = 4
    base_dir: str = "."

    def resolve(self, path: str | None) -> Path | None:
        if path is None:
            return None
        return (Path(self.base_dir) / path).resolve()


_TOP_KEYS = {
    "fcidump": "fcidump",
    "active_electrons": "active_electrons",
    "active_orbitals": "active_orbitals",
    "active_indices": "active_indices",
    "weights": "weights",
    "solver": "solver",
    "ansatz": "ansatz",
    "trotter_reps": "trotter_reps",
    "optimizer": "optimizer",
    "output": "output",
}

_SECTION_KEYS = {
    "tolerances": {"gradient": "tol_grad", "energy": "tol_energy"},
    "vqe": {"gtol": "vqe_gtol", "max_iters": "vqe_max_iters", "s2_penalty": "s2_penalty"},
    "orbital": {
        "max_macro_iters": "max_macro_iters",
        "trust_radius": "trust_radius",
        "include_active_active": "include_active_active",
    },
    "scan": {"manifest": "scan_manifest", "solvers": "scan_solvers", "warm_start": "warm_start"},
    "response": {"stencil": "stencil_manifest", "derivatives": "derivative_manifest"},
    "exact": {"k": "exact_k"},
}


def config_from_mapping(doc: dict, base_dir: str = ".") -> RunConfig:
    fields: dict = {"base_dir": base_dir}
    for key, value in doc.items():
        if key in _TOP_KEYS:
            fields[_TOP_KEYS[key]] = value
        elif key in _SECTION_KEYS:
            if not isinstance(value, dict):
                raise ConfigError(f"config section [{key}] must be a table")
            for sub, subval in value.items():
                if sub not in _SECTION_KEYS[key]:
                    raise ConfigError(f"unknown config key {key}.{sub}")
                fields[_SECTION_KEYS[key][sub]] = subval
        else:
            raise ConfigError(f"unknown config key {key!r}")

    for tup_key in ("active_indices", "scan_solvers"):
        if fields.get(tup_key) is not None:
            fields[tup_key] = tuple(fields[tup_key])
    if "weights" in fields:
        w = fields["weights"]
        if not isinstance(w, (list, tuple)) or len(w) != 2:
            raise ConfigError("weights must be a two-element array")
        fields["weights"] = (float(w[0]), float(w[1]))

    config = RunConfig(**fields)
    if config.solver not in ("vqe", "exact"):
        raise ConfigError(f"solver must be 'vqe' or 'exact', got {config.solver!r}")
    if config.ansatz != "guccsd":
        raise ConfigError(f"unknown ansatz {config.ansatz!r} (available: guccsd)")
    for s in config.scan_solvers or ():
        if s not in ("vqe", "exact"):
            raise ConfigError(f"scan solver must be 'vqe' or 'exact', got {s!r}")
    return config


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return config_from_mapping(load_toml(path), base_dir=str(path.parent))


# ------------------------------------------------------------------- helpers


def _require(config: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(config, name) is None:
            raise ConfigError(f"config key {name!r} is required for this command")


def _read_integrals(config: RunConfig, path: Path | None = None):
    path = path or config.resolve(config.fcidump)
    if path is None:
        raise ConfigError("no fcidump path configured")
    if not path.exists():
        raise ConfigError(f"integral file not found: {path}")
    try:
        return read_fcidump(path)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _check_dimensions(config: RunConfig, data) -> None:
    try:
        make_orbital_space(
            data.n_orbitals,
            data.n_electrons,
            config.active_orbitals,
            config.active_electrons,
            active_indices=config.active_indices,
            include_active_active=config.include_active_active,
        )
    except (ValueError, TypeError) as exc:
        raise DimensionError(str(exc)) from None


def _solve(config: RunConfig, data, solver: str, theta0=None, initial_rotation=None):
    return run_sa_oo_vqe(
        data,
        config.active_electrons,
        config.active_orbitals,
        active_indices=config.active_indices,
        weights=config.weights,
        solver=solver,
        trotter_reps=config.trotter_reps,
        optimizer=config.optimizer,
        s2_penalty=config.s2_penalty,
        tol_grad=config.tol_grad,
        tol_energy=config.tol_energy,
        max_macro_iters=config.max_macro_iters,
        trust_radius=config.trust_radius,
        include_active_active=config.include_active_active,
        vqe_gtol=config.vqe_gtol,
        vqe_max_iters=config.vqe_max_iters,
        theta0=theta0,
        initial_rotation=initial_rotation,
    )


def _config_echo(config: RunConfig) -> dict:
    echo = dataclasses.asdict(config)
    for key, value in echo.items():
        if isinstance(value, tuple):
            echo[key] = list(value)
    return echo


def _history_rows(result) -> list[dict]:
    return [dataclasses.asdict(rec) for rec in result.history]


def _write_json(path: Path, document: dict) -> None:
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.12f}"


# ------------------------------------------------------------------ commands


def cmd_run(config: RunConfig, out: str | None = None) -> int:
    _require(config, "fcidump", "active_electrons", "active_orbitals")
    data = _read_integrals(config)
    _check_dimensions(config, data)

    start = time.perf_counter()
    result = _solve(config, data, config.solver)
    wall = time.perf_counter() - start

    document = {
        "command": "run",
        "config": _config_echo(config),
        "e0": result.e0,
        "e1": result.e1,
        "e_sa": result.e_sa,
        "resolution_angle": result.resolution_angle,
        "converged": result.converged,
        "solver": result.solver,
        "n_macro_iterations": len(result.history),
        "history": _history_rows(result),
        "rdm_traces": {
            name: float(np.trace(rdms.gamma)) for name, rdms in result.rdms.items()
        },
        "timing": {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "wall_time_s": wall,
        },
    }
    path = Path(out) if out else config.resolve(config.output)
    if path is None:
        path = Path("saoovqe_run.json")
    _write_json(path, document)
    print(f"e0={result.e0:.10f}  e1={result.e1:.10f}  e_sa={result.e_sa:.10f}  "
          f"converged={result.converged}  -> {path}")
    if not result.converged:
        raise ConvergenceError(
            f"not converged after {len(result.history)} macro-iterations "
            f"(result written to {path})"
        )
    return EXIT_OK


def _parse_scan_manifest(path: Path) -> list[tuple[float, Path]]:
    if not path.exists():
        raise ConfigError(f"scan manifest not found: {path}")
    points = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ConfigError(
                f"{path.name} line {lineno}: expected '<alpha> <path>', got {line!r}"
            )
        try:
            alpha = float(parts[0])
        except ValueError:
            raise ConfigError(
                f"{path.name} line {lineno}: cannot parse alpha {parts[0]!r}"
            ) from None
        points.append((alpha, path.parent / parts[1]))
    if not points:
        raise ConfigError(f"{path.name}: no scan points")
    return points


def _scan_point(payload) -> dict:
    """One scan row; module-level so a process pool can pickle it."""
    config_fields, alpha, fcidump_path, solvers = payload
    config = RunConfig(**config_fields)
    row: dict = {"alpha": alpha, "status": "ok"}
    for solver in solvers:
        try:
            data = _read_integrals(config, Path(fcidump_path))
            _check_dimensions(config, data)
            result = _solve(config, data, solver)
            row[f"e0_{solver}"] = result.e0
            row[f"e1_{solver}"] = result.e1
            if not result.converged:
                row["status"] = f"not-converged[{solver}]"
        except Exception as exc:  # per-point failure; the scan continues
            row[f"e0_{solver}"] = None
            row[f"e1_{solver}"] = None
            row["status"] = f"error[{solver}]: {str(exc).replace(',', ';')}"
    return row


def cmd_scan(
    config: RunConfig,
    out: str | None = None,
    jobs: int = 1,
    warm_start: bool | None = None,
) -> int:
    _require(config, "active_electrons", "active_orbitals")
    if config.scan_manifest is None:
        raise ConfigError("scan requires [scan] manifest in the config")
    points = _parse_scan_manifest(config.resolve(config.scan_manifest))
    solvers = config.scan_solvers or (config.solver,)
    use_warm = config.warm_start if warm_start is None else warm_start
    if jobs > 1 and use_warm:
        raise ConfigError(
            "parallel scans and warm-starting are mutually exclusive; "
            "pass --no-warm-start to use --jobs"
        )

    rows: list[dict]
    if jobs > 1:
        payloads = [
            (dataclasses.asdict(config), alpha, str(p), solvers) for alpha, p in points
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scan_point, payloads))
    else:
        rows = []
        carry: dict[str, tuple] = {s: (None, None) for s in solvers}
        for alpha, fcidump_path in points:
            row: dict = {"alpha": alpha, "status": "ok"}
            for solver in solvers:
                try:
                    data = _read_integrals(config, fcidump_path)
                    _check_dimensions(config, data)
                    theta0, u0 = carry[solver] if use_warm else (None, None)
                    result = _solve(config, data, solver, theta0=theta0, initial_rotation=u0)
                    row[f"e0_{solver}"] = result.e0
                    row[f"e1_{solver}"] = result.e1
                    if result.converged:
                        carry[solver] = (result.theta, result.total_rotation)
                    else:
                        row["status"] = f"not-converged[{solver}]"
                except Exception as exc:  # record and keep scanning
                    row[f"e0_{solver}"] = None
                    row[f"e1_{solver}"] = None
                    row["status"] = f"error[{solver}]: {str(exc).replace(',', ';')}"
            rows.append(row)

    header = ["alpha"]
    for solver in solvers:
        header += [f"e0_{solver}", f"e1_{solver}"]
    header.append("status")
    lines = [",".join(header)]
    for row in rows:
        cells = [f"{row['alpha']:g}"]
        for solver in solvers:
            cells += [_fmt(row[f"e0_{solver}"]), _fmt(row[f"e1_{solver}"])]
        cells.append(row["status"])
        lines.append(",".join(cells))

    path = Path(out) if out else config.resolve(config.output)
    if path is None:
        path = Path("saoovqe_scan.csv")
    path.write_text("\n".join(lines) + "\n")
    print(f"{len(rows)} scan points ({', '.join(solvers)}) -> {path}")
    return EXIT_OK


def _response_csv(path: Path, rows: list[dict]) -> None:
    lines = [RESPONSE_CSV_HEADER]
    for row in rows:
        lines.append(",".join([
            row["label"],
            _fmt(row.get("de0")),
            _fmt(row.get("de1")),
            _fmt(row.get("de_sa")),
            _fmt(row.get("d01_hf")),
            _fmt(row.get("d01_fd")),
            ";".join(row.get("flags", ())),
        ]))
    path.write_text("\n".join(lines) + "\n")


def cmd_grad(config: RunConfig, out: str | None = None) -> int:
    """Finite-difference surface gradients over a displacement stencil."""
    _require(config, "active_electrons", "active_orbitals")
    if config.stencil_manifest is None:
        raise ConfigError("grad requires [response] stencil in the config")
    try:
        stencil = parse_stencil_manifest(config.resolve(config.stencil_manifest))
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    _check_dimensions(config, stencil.center)

    try:
        grad = fd_gradient(
            stencil, config.active_electrons, config.active_orbitals,
            **_solve_options(config),
        )
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from None

    rows = [
        {
            "label": label,
            "de0": grad.de0[k],
            "de1": grad.de1[k],
            "de_sa": grad.de_sa[k],
            "flags": grad.flags[label],
        }
        for k, label in enumerate(grad.labels)
    ]
    path = Path(out) if out else config.resolve(config.output)
    if path is None:
        path = Path("saoovqe_grad.csv")
    _response_csv(path, rows)
    print(f"gradients for {len(rows)} coordinates -> {path}")
    return EXIT_OK


def _solve_options(config: RunConfig) -> dict:
    return dict(
        active_indices=config.active_indices,
        weights=config.weights,
        solver=config.solver,
        trotter_reps=config.trotter_reps,
        optimizer=config.optimizer,
        s2_penalty=config.s2_penalty,
        tol_grad=config.tol_grad,
        tol_energy=config.tol_energy,
        max_macro_iters=config.max_macro_iters,
        trust_radius=config.trust_radius,
        include_active_active=config.include_active_active,
        vqe_gtol=config.vqe_gtol,
        vqe_max_iters=config.vqe_max_iters,
    )


def cmd_nac(config: RunConfig, out: str | None = None) -> int:
    """Analytic gradients plus both coupling routes at the stencil center."""
    _require(config, "active_electrons", "active_orbitals")
    if config.stencil_manifest is None or config.derivative_manifest is None:
        raise ConfigError("nac requires [response] stencil and derivatives in the config")
    try:
        stencil = parse_stencil_manifest(config.resolve(config.stencil_manifest))
        derivs = parse_derivative_manifest(
            config.resolve(config.derivative_manifest), stencil.center
        )
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    _check_dimensions(config, stencil.center)

    center = _solve(config, stencil.center, config.solver)
    if not center.converged:
        raise ConvergenceError("SA-OO-VQE did not converge at the stencil center")
    grad = hf_gradient(center, derivs)
    nac_hf = hf_nac(center, derivs)
    try:
        nac_fd = fd_overlap_nac(
            stencil, config.active_electrons, config.active_orbitals,
            center_result=center, **_solve_options(config),
        )
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from None

    hf_by_label = dict(zip(nac_hf.labels, nac_hf.d01))
    grad_by_label = {
        label: (grad.de0[k], grad.de1[k], grad.de_sa[k])
        for k, label in enumerate(grad.labels)
    }
    rows = []
    for k, label in enumerate(nac_fd.labels):
        flags = list(nac_fd.flags[label]) + list(nac_hf.flags.get(label, ()))
        de = grad_by_label.get(label)
        d01_hf = hf_by_label.get(label)
        rows.append({
            "label": label,
            "de0": de[0] if de else None,
            "de1": de[1] if de else None,
            "de_sa": de[2] if de else None,
            "d01_hf": None if d01_hf is None or np.isnan(d01_hf) else d01_hf,
            "d01_fd": nac_fd.d01[k],
            "flags": tuple(dict.fromkeys(flags)),
        })
    path = Path(out) if out else config.resolve(config.output)
    if path is None:
        path = Path("saoovqe_nac.csv")
    _response_csv(path, rows)
    print(f"couplings for {len(rows)} coordinates (gap {nac_hf.e_gap:.6f}) -> {path}")
    return EXIT_OK


def _parse_pauli_file(path: Path) -> PauliSum:
    if not path.exists():
        raise ConfigError(f"operator file not found: {path}")
    terms = []
    n_qubits = None
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ConfigError(
                f"{path.name} line {lineno}: expected '<coeff> <letters>', got {line!r}"
            )
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ConfigError(
                f"{path.name} line {lineno}: cannot parse coefficient {parts[0]!r}"
            ) from None
        try:
            string = PauliString.from_letters(parts[1].upper())
        except ValueError as exc:
            raise ConfigError(f"{path.name} line {lineno}: {exc}") from None
        if n_qubits is None:
            n_qubits = string.n_qubits
        elif string.n_qubits != n_qubits:
            raise ConfigError(
                f"{path.name} line {lineno}: expected {n_qubits} letters, "
                f"got {string.n_qubits}"
            )
        terms.append((coeff, string))
    if not terms:
        raise ConfigError(f"{path.name}: no operator terms")
    return PauliSum.from_terms(terms)


def cmd_exact(
    config: RunConfig | None,
    fcidump: str | None = None,
    pauli: str | None = None,
    cas: tuple[int, int] | None = None,
    k: int | None = None,
) -> int:
    """Print the k lowest exact eigenvalues, one per line."""
    if pauli is not None:
        op = _parse_pauli_file(Path(pauli))
        if op.n_qubits > DENSE_QUBIT_CUTOFF:
            raise ConfigError(
                f"{op.n_qubits} qubits exceeds the dense diagonalization "
                f"cutoff of {DENSE_QUBIT_CUTOFF}"
            )
        energies = np.linalg.eigvalsh(pauli_sum_to_dense(op))
        count = min(k or len(energies), len(energies))
        for i in range(count):
            print(f"{i}  {energies[i]:.12f}")
        return EXIT_OK

    if config is None:
        raise ConfigError("exact requires --config or --pauli")
    path = Path(fcidump).resolve() if fcidump else None
    _require(config, "active_electrons", "active_orbitals")
    data = _read_integrals(config, path)
    _check_dimensions(config, data)
    if config.active_indices is not None:
        space = make_orbital_space(
            data.n_orbitals, data.n_electrons,
            config.active_orbitals, config.active_electrons,
            active_indices=config.active_indices,
        )
        inactive, active = np.array(space.inactive), np.array(space.active)
    else:
        inactive, active = default_partition(
            data.n_orbitals, data.n_electrons,
            config.active_orbitals, config.active_electrons,
        )
    h_eff, g_act, e_frozen = embed_with_partition(
        data.h, data.g, data.core_energy, inactive, active
    )
    op = qubit_hamiltonian(h_eff, g_act, e_frozen)
    n_states = k or config.exact_k
    energies, _ = exact_eigenstates(
        op, n_states, n_electrons=config.active_electrons, ms2=data.ms2, s2=None
    )
    for i, energy in enumerate(energies):
        print(f"{i}  {energy:.12f}")
    return EXIT_OK


def cmd_validate(path: Path) -> int:
    if not path.exists():
        raise ConfigError(f"integral file not found: {path}")
    issues = lint_fcidump(path)
    for issue in issues:
        print(f"{issue.severity} line {issue.line}: {issue.message}")
    n_errors = sum(1 for issue in issues if issue.severity == "error")
    n_warnings = len(issues) - n_errors
    print(f"{path.name}: {n_errors} error(s), {n_warnings} warning(s)")
    return EXIT_CONFIG if n_errors else EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saoovqe",
        description="State-averaged orbital-optimized VQE on an exact statevector backend",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="TOML config file")
        p.add_argument("--out", help="output path (overrides config `output`)")
        p.add_argument("--solver", choices=("vqe", "exact"), help="override config solver")

    p_run = sub.add_parser("run", help="single-geometry SA-OO-VQE, JSON result")
    add_common(p_run)

    p_scan = sub.add_parser("scan", help="energy scan over a geometry manifest, CSV")
    add_common(p_scan)
    p_scan.add_argument("--jobs", type=int, default=1, help="parallel scan points")
    p_scan.add_argument(
        "--no-warm-start", action="store_true",
        help="solve every point from scratch (required with --jobs > 1)",
    )

    p_grad = sub.add_parser("grad", help="finite-difference nuclear gradients, CSV")
    add_common(p_grad)

    p_nac = sub.add_parser("nac", help="gradients and non-adiabatic couplings, CSV")
    add_common(p_nac)

    p_exact = sub.add_parser("exact", help="exact eigenvalues of the active Hamiltonian")
    p_exact.add_argument("--config", help="TOML config file")
    p_exact.add_argument("--fcidump", help="integral file (overrides config)")
    p_exact.add_argument("--pauli", help="plain-text Pauli operator file instead of integrals")
    p_exact.add_argument("--cas", help="active space as '<electrons>,<orbitals>'")
    p_exact.add_argument("-k", type=int, help="number of eigenvalues")

    p_val = sub.add_parser("validate", help="lint an FCIDUMP file")
    p_val.add_argument("fcidump", help="integral file to check")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(Path(args.fcidump))

        config = None
        if getattr(args, "config", None):
            config = load_config(args.config)
            if getattr(args, "solver", None):
                config = dataclasses.replace(config, solver=args.solver)

        if args.command == "run":
            return cmd_run(config, out=args.out)
        if args.command == "scan":
            return cmd_scan(
                config, out=args.out, jobs=args.jobs,
                warm_start=False if args.no_warm_start else None,
            )
        if args.command == "grad":
            return cmd_grad(config, out=args.out)
        if args.command == "nac":
            return cmd_nac(config, out=args.out)
        if args.command == "exact":
            cas = None
            if args.cas:
                try:
                    e, o = args.cas.split(",")
                    cas = (int(e), int(o))
                except ValueError:
                    raise ConfigError(
                        f"--cas expects '<electrons>,<orbitals>', got {args.cas!r}"
                    ) from None
            if cas is not None:
                base = config or RunConfig()
                config = dataclasses.replace(
                    base, active_electrons=cas[0], active_orbitals=cas[1]
                )
            return cmd_exact(
                config, fcidump=args.fcidump, pauli=args.pauli, k=args.k
            )
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
