import cmath
import io
import math

import numpy as np
import pytest

from charsense.charseq import Family, modulate
from charsense.errors import FamilyMismatch, FormatError, RangeError
from charsense.galois import build_field, with_generator
from charsense.sensing import (
    ColumnIndex,
    build_gaussian_matrix,
    build_matrix,
    build_partial_fourier_matrix,
    build_power_residue_matrix,
    build_sidelnikov_matrix,
    column,
    export_matrix_text,
    import_matrix,
)
from charsense.analysis import coherence_bruteforce, spectral_norm

SMALL = [
    ("power-residue", 7, 1, 3),
    ("power-residue", 13, 1, 4),
    ("power-residue", 47, 1, 46),
    ("sidelnikov", 3, 2, 4),
    ("sidelnikov", 3, 3, 26),
    ("sidelnikov", 7, 2, 48),
]


@pytest.fixture(scope="module", params=SMALL, ids=lambda t: f"{t[0]}-{t[1]}^{t[2]}-M{t[3]}")
def det_matrix(request):
    fam, p, m, M = request.param
    return build_matrix(fam, p, M, m)


def test_power_residue_dimensions():
    a = build_power_residue_matrix(47, 46)
    assert (a.K, a.N, a.M) == (47, 2115, 46)
    assert a.family is Family.POWER_RESIDUE


@pytest.mark.parametrize("p,m,M,K,N", [(7, 2, 48, 48, 2256), (3, 3, 26, 26, 650), (3, 2, 4, 8, 24)])
def test_sidelnikov_dimensions(p, m, M, K, N):
    a = build_sidelnikov_matrix(p, m, M)
    assert (a.K, a.N) == (K, N)


def test_power_residue_small_case_by_hand():
    a = build_power_residue_matrix(7, 3)
    r = [0, 0, 2, 1, 1, 2, 0]
    assert a.shape == (7, 14)
    assert ColumnIndex.from_column(7, 7) == (0, 2)
    want = [cmath.exp(2j * math.pi * (2 * r[k] % 3) / 3) / math.sqrt(7) for k in range(7)]
    assert np.allclose(a.dense[:, 7], want, atol=1e-15)
    # psi(0) = 1 entries are exactly 1/sqrt(K)
    assert a.dense[0, 0] == 1 / math.sqrt(7)


def test_sidelnikov_small_case_by_hand():
    s = [0, 3, 3, 1, 0, 2, 1, 2]
    a = build_sidelnikov_matrix(3, 2, 4)
    want = np.empty((8, 24), dtype=int)
    for n in range(24):
        b, c = n % 8, n // 8 + 1
        for k in range(8):
            want[k, n] = c * s[(k + b) % 8] % 4
    assert np.array_equal(a.exponents, want)


def test_invariants(det_matrix):
    a = det_matrix
    assert a.N == (a.M - 1) * a.K
    assert np.allclose(np.abs(a.dense), 1 / math.sqrt(a.K), atol=1e-15)
    assert np.allclose(np.linalg.norm(a.dense, axis=0), 1.0, atol=1e-12)
    assert a.exponents.min() >= 0 and a.exponents.max() < a.M


def test_column_index_round_trip(det_matrix):
    K = det_matrix.K
    for n in range(det_matrix.N):
        idx = ColumnIndex.from_column(n, K)
        assert 0 <= idx.b < K and 1 <= idx.c <= det_matrix.M - 1
        assert idx.to_column(K) == n


def test_column_matches_dense_exactly(det_matrix):
    a = det_matrix
    for n in range(a.N):
        assert np.array_equal(column(a, n), a.dense[:, n])
    assert np.array_equal(column(a, 0), modulate(a.sequence, 1, 0) / math.sqrt(a.K))
    assert np.array_equal(column(a, a.K), a.scale * modulate(a.sequence, 2, 0))


def test_column_errors():
    a = build_power_residue_matrix(7, 3)
    with pytest.raises(RangeError):
        column(a, 14)
    with pytest.raises(FamilyMismatch):
        column(build_gaussian_matrix(4, 8, 0), 0)


def _column_multiset(mat):
    return sorted(map(tuple, mat.exponents.T.tolist()))


@pytest.mark.parametrize("p,M,alt", [(7, 3, 5), (13, 4, 6), (13, 6, 11), (11, 5, 7)])
def test_power_residue_primitive_element_invariance(p, M, alt):
    base = build_field(p)
    a = build_power_residue_matrix(p, M)
    b = build_power_residue_matrix(p, M, ctx=with_generator(base, alt))
    assert b.provenance["alpha"] == alt != a.provenance["alpha"]
    assert _column_multiset(a) == _column_multiset(b)
    assert abs(spectral_norm(a) - spectral_norm(b)) < 1e-12
    assert abs(coherence_bruteforce(a) - coherence_bruteforce(b)) < 1e-12


def test_sidelnikov_primitive_element_invariance():
    base = build_field(3, 2)
    other = next(x for x in range(2, 9) if x != base.alpha and math.gcd(int(base.log[x]), 8) == 1)
    a = build_sidelnikov_matrix(3, 2, 4)
    b = build_sidelnikov_matrix(3, 2, 4, ctx=with_generator(base, other))
    assert abs(spectral_norm(a) - spectral_norm(b)) < 1e-12
    assert abs(coherence_bruteforce(a) - coherence_bruteforce(b)) < 1e-12


def test_rebuild_is_bit_identical():
    a = build_matrix("sidelnikov", 7, 48, 2)
    b = build_matrix("sidelnikov", 7, 48, 2)
    assert np.array_equal(a.exponents, b.exponents)
    assert export_matrix_text(a) == export_matrix_text(b)


def test_gaussian_baseline():
    g = build_gaussian_matrix(48, 20, 3)
    assert g.dense.shape == (48, 20) and not np.iscomplexobj(g.dense)
    assert np.allclose(np.linalg.norm(g.dense, axis=0), 1.0, atol=1e-12)
    assert np.array_equal(g.dense, build_gaussian_matrix(48, 20, 3).dense)
    assert not np.array_equal(g.dense, build_gaussian_matrix(48, 20, 4).dense)


def test_partial_fourier_baseline():
    f = build_partial_fourier_matrix(48, 2256, 9)
    assert f.shape == (48, 2256)
    assert np.allclose(np.abs(f.dense), 1 / math.sqrt(48), atol=1e-15)
    assert np.allclose(np.linalg.norm(f.dense, axis=0), 1.0, atol=1e-12)
    rows = f.provenance["rows"]
    assert len(set(rows)) == 48
    k = 5
    assert np.allclose(f.dense[k], np.exp(-2j * np.pi * rows[k] * np.arange(2256) / 2256) / math.sqrt(48))
    assert np.array_equal(f.dense, build_partial_fourier_matrix(48, 2256, 9).dense)


def test_partial_fourier_full_is_unitary():
    f = build_partial_fourier_matrix(16, 16, 0)
    assert np.allclose(f.dense.conj().T @ f.dense, np.eye(16), atol=1e-12)
    assert coherence_bruteforce(f) < 1e-12
    with pytest.raises(RangeError):
        build_partial_fourier_matrix(17, 16, 0)


@pytest.mark.parametrize("fam,p,m,M", [("power-residue", 7, 1, 3), ("sidelnikov", 3, 3, 26)])
def test_export_round_trip_deterministic(fam, p, m, M):
    a = build_matrix(fam, p, M, m)
    text = export_matrix_text(a)
    b = import_matrix(io.StringIO(text))
    assert b.family is a.family and (b.K, b.N, b.M) == (a.K, a.N, a.M)
    assert np.array_equal(a.exponents, b.exponents)
    assert np.array_equal(a.dense, b.dense)
    assert export_matrix_text(b) == text
    for n in range(b.N):
        assert np.array_equal(column(b, n), a.dense[:, n])


@pytest.mark.parametrize("builder", [build_gaussian_matrix, build_partial_fourier_matrix])
def test_export_round_trip_baseline(builder):
    a = builder(6, 10, 21)
    b = import_matrix(io.StringIO(export_matrix_text(a)))
    assert np.array_equal(a.dense, b.dense)
    assert b.provenance["seed"] == 21


def test_import_rejects_garbage():
    with pytest.raises(FormatError):
        import_matrix(io.StringIO("not json\n1,2\n"))
    text = export_matrix_text(build_power_residue_matrix(7, 3))
    with pytest.raises(FormatError):
        import_matrix(io.StringIO(text.rsplit("\n", 2)[0] + "\n"))
    with pytest.raises(FormatError):
        import_matrix(io.StringIO(text.replace("0,0,2", "0,0,9", 1)))


def test_build_matrix_family_errors():
    with pytest.raises(FamilyMismatch):
        build_matrix("gaussian", 7, 3)
    with pytest.raises(FamilyMismatch):
        build_matrix("power-residue", 7, 3, m=2)
