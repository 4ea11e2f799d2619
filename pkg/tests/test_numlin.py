import numpy as np
import pytest

from subspace_mismatch import numlin
from subspace_mismatch.errors import (
    AsymmetryTooLargeError,
    CsvFormatError,
    NonSquareError,
    NotOrthonormalError,
    NotPdError,
    NotPsdError,
)

from helpers import rand_orthonormal


def test_sym_eig_identity():
    dec = numlin.sym_eig(np.eye(3))
    assert np.allclose(dec.eigenvalues, [1, 1, 1])


def test_sym_eig_diagonal_sorted_descending():
    dec = numlin.sym_eig(np.diag([0.0, 2.0, 1.0]))
    assert np.allclose(dec.eigenvalues, [2, 1, 0])


def test_sym_eig_reconstructs_random_symmetric():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((8, 8))
    a = (a + a.T) / 2
    dec = numlin.sym_eig(a)
    norm = np.linalg.norm(a, 2)
    assert np.linalg.norm(dec.reconstruct() - a, 2) <= 1e-8 * norm
    gram = dec.eigenvectors.T @ dec.eigenvectors
    assert np.abs(gram - np.eye(8)).max() <= 1e-10


def test_sym_eig_rejects_nonsquare_and_asymmetric():
    with pytest.raises(NonSquareError):
        numlin.sym_eig(np.zeros((2, 3)))
    bad = np.array([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(AsymmetryTooLargeError):
        numlin.sym_eig(bad)


def test_sym_eig_symmetrizes_small_asymmetry():
    a = np.eye(3)
    a[0, 1] = 1e-12  # below the gate, averaged away
    dec = numlin.sym_eig(a)
    assert np.allclose(dec.eigenvalues, [1, 1, 1])


def test_svd_trivial_cases():
    assert np.allclose(numlin.svd(np.eye(2)).singular_values, [1, 1])
    assert np.allclose(numlin.svd(np.zeros((2, 3))).singular_values, [0, 0])
    # permutation matrix: both singular values are 1
    assert np.allclose(numlin.svd(np.array([[0.0, 1.0], [1.0, 0.0]])).singular_values, [1, 1])


def test_svd_reconstruction_and_orthonormality():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((5, 3))
    res = numlin.svd(a)
    approx = (res.left * res.singular_values) @ res.right.T
    assert np.linalg.norm(approx - a, 2) <= 1e-8 * np.linalg.norm(a, 2)
    assert np.abs(res.left.T @ res.left - np.eye(3)).max() <= 1e-10
    assert np.abs(res.right.T @ res.right - np.eye(3)).max() <= 1e-10


def test_rank_with_tol():
    assert numlin.rank_with_tol([2, 1, 1e-15], 1e-10) == 2
    assert numlin.rank_with_tol([0, 0, 0]) == 0
    assert numlin.rank_with_tol([1, 1e-9, 1e-12], 1e-10) == 2
    with pytest.raises(ValueError):
        numlin.rank_with_tol([1.0], rel_tol=0.0)


def test_orthonormal_complement_basics():
    c = numlin.orthonormal_complement(np.array([[1.0], [0.0]]))
    assert c.shape == (2, 1)
    assert abs(abs(c[1, 0]) - 1.0) <= 1e-12  # spans e2 up to sign
    assert numlin.orthonormal_complement(np.eye(3)).shape == (3, 0)


def test_orthonormal_complement_random():
    rng = np.random.default_rng(2)
    b = rand_orthonormal(rng, 6, 2)
    c = numlin.orthonormal_complement(b)
    assert c.shape == (6, 4)
    full = np.hstack([b, c])
    assert np.abs(full.T @ full - np.eye(6)).max() <= 1e-10
    assert np.abs(b.T @ c).max() <= 1e-10


def test_orthonormal_complement_rejects_nonorthonormal():
    with pytest.raises(NotOrthonormalError):
        numlin.orthonormal_complement(np.array([[1.0], [1.0]]))


def test_pdet_examples():
    assert numlin.pdet(np.diag([1.0, 2.0, 0.0])) == pytest.approx(2.0)
    assert numlin.pdet(np.eye(4)) == pytest.approx(1.0)
    assert numlin.pdet(np.zeros((3, 3))) == 1.0
    rng = np.random.default_rng(3)
    u = rand_orthonormal(rng, 4, 2)
    a = (u * np.array([3.0, 5.0])) @ u.T
    assert numlin.pdet(a) == pytest.approx(15.0, abs=1e-9)


def test_pdet_rejects_negative():
    with pytest.raises(NotPsdError):
        numlin.pdet(np.diag([1.0, -1e-3]))


def test_pdet_scaling_law():
    rng = np.random.default_rng(4)
    u = rand_orthonormal(rng, 5, 3)
    vals = np.array([2.0, 1.5, 0.7])
    a = (u * vals) @ u.T
    for c in (0.5, 3.0):
        assert numlin.pdet(c * a) == pytest.approx(c**3 * numlin.pdet(a), rel=1e-9)


def test_logdet_pd():
    assert numlin.logdet_pd(np.eye(5)) == pytest.approx(0.0)
    assert numlin.logdet_pd(np.diag([np.e, np.e])) == pytest.approx(2.0)
    rng = np.random.default_rng(5)
    m = rng.standard_normal((6, 6))
    spd = m @ m.T + 6 * np.eye(6)
    sign, logdet = np.linalg.slogdet(spd)  # LU-based oracle
    assert sign > 0
    assert numlin.logdet_pd(spd) == pytest.approx(logdet, rel=1e-8)
    with pytest.raises(NotPdError):
        numlin.logdet_pd(np.diag([1.0, 0.0]))


def test_is_pd():
    assert numlin.is_pd(np.eye(2))
    assert not numlin.is_pd(np.diag([1.0, 0.0]))
    assert not numlin.is_pd(np.diag([1.0, -1e-6]))


def test_min_eig_sym():
    assert numlin.min_eig_sym(np.diag([3.0, -2.0])) == pytest.approx(-2.0)
    assert numlin.min_eig_sym(np.eye(3)) == pytest.approx(1.0)
    rng = np.random.default_rng(6)
    a = rng.standard_normal((7, 7))
    a = (a + a.T) / 2
    assert numlin.min_eig_sym(a) == pytest.approx(numlin.sym_eig(a).eigenvalues[-1])


def test_trace_identity_random():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        dec = numlin.sym_eig(a)
        tr = np.trace(a)
        assert abs(dec.eigenvalues.sum() - tr) <= 1e-8 * (1 + abs(tr))


def test_svd_matches_eig_on_psd():
    rng = np.random.default_rng(8)
    m = rng.standard_normal((6, 4))
    psd = m @ m.T
    sv = numlin.svd(psd).singular_values
    ev = numlin.sym_eig(psd).eigenvalues
    assert np.abs(sv - ev).max() <= 1e-9 * max(1.0, ev[0])


def test_matrix_csv_roundtrip(tmp_path):
    a = np.array([[1.0, -0.25], [3.5e-7, 2.0]])
    path = tmp_path / "m.csv"
    numlin.write_matrix_csv(path, a)
    back = numlin.read_matrix_csv(path)
    assert np.array_equal(a, back)


def test_matrix_csv_rejects_ragged(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(CsvFormatError):
        numlin.read_matrix_csv(path)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(CsvFormatError):
        numlin.read_matrix_csv(empty)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        numlin.as_matrix([[np.inf, 0.0]])
