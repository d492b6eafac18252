import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qicca import InvalidInput, center_columns, svd


def test_identity():
    np.testing.assert_allclose(svd(np.eye(3)).sigma, [1, 1, 1])


def test_diag():
    np.testing.assert_allclose(svd(np.diag([3.0, 1.0])).sigma, [3, 1])


def test_matches_eigen_oracle(rng):
    A = rng.standard_normal((6, 4))
    eig = np.sort(np.linalg.eigvalsh(A.T @ A))[::-1]
    np.testing.assert_allclose(svd(A).sigma ** 2, eig, rtol=1e-8)


def test_rank_truncation(rng):
    A = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 20))
    f = svd(A)
    assert f.rank == 3
    np.testing.assert_allclose(f.U * f.sigma @ f.V.T, A, atol=1e-10)


def test_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        svd([[1.0, np.inf]])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 500), st.integers(1, 500), st.integers(0, 2**31))
def test_svd_invariants(I, J, seed):
    A = np.random.default_rng(seed).standard_normal((I, min(J, 120)))
    U, s, V = svd(A)
    r = s.shape[0]
    assert np.all(np.diff(s) <= 0) and np.all(s > 1e-10 * s[0])
    assert np.max(np.abs(U.T @ U - np.eye(r))) <= 1e-8
    assert np.max(np.abs(V.T @ V - np.eye(r))) <= 1e-8
    assert np.linalg.norm(A - (U * s) @ V.T) <= 1e-8 * np.linalg.norm(A)


def test_center_examples():
    c, m = center_columns([[1.0], [3.0]])
    np.testing.assert_allclose(c, [[-1.0], [1.0]])
    np.testing.assert_allclose(m, [2.0])
    already = np.array([[1.0, -2.0], [-1.0, 2.0]])
    c, m = center_columns(already)
    np.testing.assert_allclose(c, already, atol=1e-12)
    np.testing.assert_allclose(m, 0.0, atol=1e-12)


def test_center_random(rng):
    c, _ = center_columns(rng.standard_normal((100, 5)) * 10 + 3)
    assert np.all(np.abs(c.mean(axis=0)) < 1e-12)


def test_center_needs_two_rows():
    with pytest.raises(InvalidInput):
        center_columns([[1.0, 2.0]])
