from __future__ import annotations

import numpy as np
import pytest

from saoovqe.fcidump import (
    IntegralData,
    lint_fcidump,
    parse_derivative_manifest,
    read_fcidump,
    write_fcidump,
)


def random_integrals(rng, n, nelec=2, ms2=0):
    h0 = rng.normal(size=(n, n))
    h = 0.5 * (h0 + h0.T)
    g0 = rng.normal(size=(n, n, n, n))
    g = 0.25 * (
        g0
        + g0.transpose(1, 0, 2, 3)
        + g0.transpose(0, 1, 3, 2)
        + g0.transpose(1, 0, 3, 2)
    )
    g = 0.5 * (g + g.transpose(2, 3, 0, 1))
    return IntegralData(
        n_orbitals=n,
        n_electrons=nelec,
        ms2=ms2,
        core_energy=rng.normal(),
        h=h,
        g=g,
    )


def test_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(42)
    data = random_integrals(rng, 4, nelec=4)
    path = tmp_path / "random.fcidump"
    write_fcidump(data, path)
    back = read_fcidump(path)
    assert back.n_orbitals == 4
    assert back.n_electrons == 4
    assert back.ms2 == 0
    assert back.core_energy == data.core_energy
    np.testing.assert_allclose(back.h, data.h, rtol=1e-15, atol=0)
    np.testing.assert_allclose(back.g, data.g, rtol=1e-14, atol=1e-16)
    # once the data is canonically symmetrized, the round trip is bitwise exact:
    # 17 significant digits reproduce every double
    path2 = tmp_path / "again.fcidump"
    write_fcidump(back, path2)
    again = read_fcidump(path2)
    assert again.core_energy == back.core_energy
    np.testing.assert_array_equal(again.h, back.h)
    np.testing.assert_array_equal(again.g, back.g)


def test_roundtrip_preserves_symmetry(tmp_path):
    rng = np.random.default_rng(43)
    data = random_integrals(rng, 5)
    path = tmp_path / "sym.fcidump"
    write_fcidump(data, path)
    read_fcidump(path).validate_symmetry()


def test_writer_emits_canonical_lines_only(tmp_path):
    rng = np.random.default_rng(44)
    n = 3
    data = random_integrals(rng, n)
    path = tmp_path / "canon.fcidump"
    write_fcidump(data, path)
    body = [
        line.split()
        for line in path.read_text().splitlines()
        if len(line.split()) == 5 and not line.lstrip().startswith("&")
    ]
    two_e = [p for p in body if p[3] != "0"]
    # number of canonical two-electron classes: npair*(npair+1)/2, npair = n(n+1)/2
    npair = n * (n + 1) // 2
    assert len(two_e) == npair * (npair + 1) // 2
    for p in two_e:
        i, j, k, l = (int(v) for v in p[1:])
        assert i >= j and k >= l
        assert i * (i + 1) // 2 + j >= k * (k + 1) // 2 + l


def test_writer_skips_zeros_and_puts_core_last(tmp_path):
    data = IntegralData(
        n_orbitals=2,
        n_electrons=2,
        ms2=0,
        core_energy=0.5,
        h=np.array([[1.0, 0.0], [0.0, -2.0]]),
        g=np.zeros((2, 2, 2, 2)),
    )
    path = tmp_path / "sparse.fcidump"
    write_fcidump(data, path)
    body = [l for l in path.read_text().splitlines() if len(l.split()) == 5]
    assert len(body) == 3  # two nonzero h entries + core
    assert body[-1].split()[1:] == ["0", "0", "0", "0"]


def test_reader_accepts_format_variants(tmp_path):
    text = (
        "&FCI NORB=  2, NELEC=2,\n"
        "  MS2=0, ORBSYM=1,1, ISYM=1,\n"
        "&END\n"
        "  1.5D+00  1 1 1 1\n"
        " -0.75e0   2 1 0 0\n"
        "  0.25     0 0 0 0\n"
    )
    path = tmp_path / "variant.fcidump"
    path.write_text(text)
    data = read_fcidump(path)
    assert data.n_orbitals == 2 and data.n_electrons == 2
    assert data.g[0, 0, 0, 0] == 1.5
    assert data.h[1, 0] == -0.75 and data.h[0, 1] == -0.75
    assert data.core_energy == 0.25


def test_reader_expands_eightfold_symmetry(tmp_path):
    text = "&FCI NORB=3,NELEC=2,MS2=0,/\n  2.0  2 1 3 1\n  0.0 0 0 0 0\n"
    path = tmp_path / "eight.fcidump"
    path.write_text(text)
    g = read_fcidump(path).g
    for idx in (
        (1, 0, 2, 0), (0, 1, 2, 0), (1, 0, 0, 2), (0, 1, 0, 2),
        (2, 0, 1, 0), (0, 2, 1, 0), (2, 0, 0, 1), (0, 2, 0, 1),
    ):
        assert g[idx] == 2.0
    assert np.count_nonzero(g) == 8


def test_reader_rejects_bad_input(tmp_path):
    path = tmp_path / "bad.fcidump"
    path.write_text("no header here\n")
    with pytest.raises(ValueError, match="FCI"):
        read_fcidump(path)
    path.write_text("&FCI NORB=2,NELEC=2,/\n 1.0 3 1 0 0\n")
    with pytest.raises(ValueError, match="out of range"):
        read_fcidump(path)
    path.write_text("&FCI NORB=2,NELEC=2,/\n 1.0 1 1 1\n")
    with pytest.raises(ValueError, match="malformed"):
        read_fcidump(path)
    path.write_text("&FCI NELEC=2,/\n")
    with pytest.raises(ValueError, match="NORB"):
        read_fcidump(path)


def test_integral_data_validation():
    with pytest.raises(ValueError, match="n_orbitals"):
        IntegralData(0, 2, 0, 0.0, np.zeros((0, 0)), np.zeros((0, 0, 0, 0)))
    with pytest.raises(ValueError, match="shape"):
        IntegralData(2, 2, 0, 0.0, np.zeros((3, 3)), np.zeros((2, 2, 2, 2)))
    bad_h = np.array([[0.0, 1.0], [0.0, 0.0]])
    data = IntegralData(2, 2, 0, 0.0, bad_h, np.zeros((2, 2, 2, 2)))
    with pytest.raises(ValueError, match="not symmetric"):
        data.validate_symmetry()


def test_duplicate_entries_last_wins_when_consistent(tmp_path):
    path = tmp_path / "dup.fcidump"
    # same canonical slot spelled through two different permutations
    path.write_text(
        "&FCI NORB=2,NELEC=2,MS2=0,/\n"
        " 1.25 2 1 1 1\n"
        " 1.25 1 2 1 1\n"
        " 0.0 0 0 0 0\n"
    )
    data = read_fcidump(path)
    assert data.g[1, 0, 0, 0] == 1.25

    path.write_text(
        "&FCI NORB=2,NELEC=2,MS2=0,/\n"
        " 1.25 2 1 1 1\n"
        " 1.30 1 2 1 1\n"
    )
    with pytest.raises(ValueError, match="conflicting"):
        read_fcidump(path)


def test_lint_reports_line_numbers(tmp_path):
    path = tmp_path / "corrupt.fcidump"
    path.write_text(
        "&FCI NORB=2,NELEC=2,MS2=0,/\n"
        " 0.5 1 1 1 1\n"
        " 0.9 1 1 1 1\n"
        " 1.0 3 1 0 0\n"
        " 1.0 1 1 1\n"
    )
    issues = lint_fcidump(path)
    errors = [i for i in issues if i.severity == "error"]
    assert any(i.line == 3 and "conflicts with line 2" in i.message for i in errors)
    assert any(i.line == 4 and "out of range" in i.message for i in errors)
    assert any(i.line == 5 and "malformed" in i.message for i in errors)
    assert any(i.severity == "warning" and "core" in i.message for i in issues)


def test_lint_clean_file(tmp_path):
    rng = np.random.default_rng(45)
    path = tmp_path / "clean.fcidump"
    write_fcidump(random_integrals(rng, 3), path)
    assert lint_fcidump(path) == []


def test_orbsym_preserved(tmp_path):
    path = tmp_path / "syms.fcidump"
    path.write_text(
        "&FCI NORB=3,NELEC=2,MS2=0,ORBSYM=1,2*3,ISYM=2,/\n 0.5 0 0 0 0\n"
    )
    data = read_fcidump(path)
    assert data.orbsym == (1, 3, 3)
    assert data.isym == 2
    out = tmp_path / "syms_out.fcidump"
    write_fcidump(data, out)
    assert read_fcidump(out).orbsym == (1, 3, 3)
    assert read_fcidump(out).isym == 2


def test_derivative_manifest_parsing(tmp_path):
    rng = np.random.default_rng(46)
    reference = random_integrals(rng, 3)
    for label in ("n0_x", "n0_y"):
        write_fcidump(random_integrals(rng, 3), tmp_path / f"d_{label}.fcidump")
    manifest = tmp_path / "derivs.manifest"
    manifest.write_text(
        "# derivative integrals, Hartree/bohr\n"
        "n0_x d_n0_x.fcidump fixed-orbital\n"
        "\n"
        "n0_y d_n0_y.fcidump fixed-orbital\n"
    )
    sets = parse_derivative_manifest(manifest, reference)
    assert [s.label for s in sets] == ["n0_x", "n0_y"]
    assert all(s.convention == "fixed-orbital" for s in sets)
    assert sets[0].data.n_orbitals == 3

    empty = tmp_path / "empty.manifest"
    empty.write_text("# nothing\n")
    assert parse_derivative_manifest(empty, reference) == []


def test_derivative_manifest_errors(tmp_path):
    rng = np.random.default_rng(47)
    reference = random_integrals(rng, 3)
    write_fcidump(random_integrals(rng, 2), tmp_path / "small.fcidump")
    manifest = tmp_path / "bad.manifest"

    manifest.write_text("n0_x small.fcidump fixed-orbital\n")
    with pytest.raises(ValueError, match="2 orbitals, reference has 3"):
        parse_derivative_manifest(manifest, reference)

    manifest.write_text("n0_x small.fcidump moving-orbital\n")
    with pytest.raises(ValueError, match="unknown convention"):
        parse_derivative_manifest(manifest, reference)

    manifest.write_text("n0_x missing.fcidump fixed-orbital\n")
    with pytest.raises(FileNotFoundError):
        parse_derivative_manifest(manifest, reference)

    manifest.write_text("too few\n")
    with pytest.raises(ValueError, match="expected"):
        parse_derivative_manifest(manifest, reference)
