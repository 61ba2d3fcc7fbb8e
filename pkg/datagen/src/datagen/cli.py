"""Command line driver for fixture generation.

Every emitted FCIDUMP is round-tripped through the solver CLI's
``validate`` command as a final gate, so a fixture that the consumer
cannot parse never lands on disk unnoticed.
"""

from __future__ import annotations

import argparse
import shutil
import subprocess
import sys
import time
from pathlib import Path

from . import __version__, recipes

GENERATORS = {
    "h2": lambda out, jobs: recipes.generate_point_fixture(recipes.h2_recipe(), out / "h2", jobs),
    "h4": lambda out, jobs: recipes.generate_point_fixture(recipes.h4_recipe(), out / "h4", jobs),
    "formaldimine": lambda out, jobs: recipes.generate_point_fixture(
        recipes.formaldimine_recipe(), out / "formaldimine", jobs
    ),
    "scan": lambda out, jobs: recipes.generate_scan_fixture(
        recipes.scan_recipe(), out / "scan", jobs
    ),
    "all": lambda out, jobs: recipes.generate_all(out, jobs),
}


def validate_outputs(paths: list[Path]) -> int:
    """Run the solver's validate command over every generated FCIDUMP."""
    exe = shutil.which("saoovqe")
    if exe is None:
        print("datagen: saoovqe CLI not found on PATH, skipping validation", file=sys.stderr)
        return 0
    failures = 0
    for path in paths:
        if path.suffix != ".fcidump":
            continue
        proc = subprocess.run(
            [exe, "validate", str(path)], capture_output=True, text=True
        )
        if proc.returncode != 0:
            failures += 1
            print(f"datagen: validation failed for {path}", file=sys.stderr)
            sys.stderr.write(proc.stdout)
            sys.stderr.write(proc.stderr)
    return failures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datagen",
        description="generate solver test fixtures: FCIDUMP files, displacement "
        "stencils, derivative manifests and reference data",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "fixture",
        choices=sorted(GENERATORS),
        help="which fixture set to generate",
    )
    parser.add_argument(
        "--out",
        type=Path,
        default=Path("fixtures"),
        help="output root directory (default: ./fixtures)",
    )
    parser.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="worker processes for displaced-geometry integrals",
    )
    parser.add_argument(
        "--skip-validate",
        action="store_true",
        help="do not round-trip outputs through the solver CLI",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("datagen: --jobs must be at least 1", file=sys.stderr)
        return 2
    started = time.perf_counter()
    written = GENERATORS[args.fixture](args.out, args.jobs)
    elapsed = time.perf_counter() - started
    n_dumps = sum(1 for p in written if p.suffix == ".fcidump")
    print(f"datagen: wrote {len(written)} files ({n_dumps} FCIDUMP) in {elapsed:.1f}s")
    if not args.skip_validate:
        failures = validate_outputs(written)
        if failures:
            print(f"datagen: {failures} files failed validation", file=sys.stderr)
            return 1
        print(f"datagen: all {n_dumps} FCIDUMP files validated")
    return 0


if __name__ == "__main__":
    sys.exit(main())
