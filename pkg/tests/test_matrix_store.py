import numpy as np
import pytest

from qicca import DegenerateDistribution, DegenerateInput, InvalidInput, MatrixStore, build_store, matrix_sampling
from qicca.matrix_store import sample_column, sample_row, sketch_entries


def g_direct(X, row_indices):
    """Column law evaluated straight from the formula, one column at a time."""
    P = len(row_indices)
    g = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        for i in row_indices:
            g[j] += X[i, j] ** 2 / np.sum(X[i] ** 2) / P
    return g


def within_4_sigma(counts, p, M):
    big = p >= 0.01
    sigma = np.sqrt(p * (1 - p) / M)
    return np.all(np.abs(counts / M - p)[big] <= 4 * sigma[big])


def test_examples():
    s = build_store([[2.0]])
    assert s.frob_sq == 4.0 and s.rows == 1
    s = build_store([[3.0, 0.0], [0.0, 4.0]])
    np.testing.assert_array_equal(s.row_norms_sq, [9.0, 16.0])
    assert s.frob_sq == 25.0
    assert sample_row(s, 0.1) == 0
    s2 = build_store([[0.0, 0.0], [1.0, 1.0]])
    assert all(sample_row(s2, u) == 1 for u in (0.0, 0.4, 0.99))
    assert sample_column(build_store([[3.0, 4.0]]), [0], 0.5, 0.3) == 0


def test_frob_direct_loop(rng):
    X = rng.standard_normal((50, 30))
    s = build_store(X)
    direct = 0.0
    for i in range(50):
        for j in range(30):
            direct += X[i, j] ** 2
    assert abs(s.frob_sq - direct) <= 1e-9 * direct
    assert s.check()


def test_errors():
    with pytest.raises(DegenerateInput):
        build_store(np.zeros((3, 2)))
    with pytest.raises(InvalidInput):
        build_store(np.zeros((0, 2)))
    with pytest.raises(InvalidInput):
        build_store([[1.0, np.nan]])
    s = build_store([[1.0, 2.0], [0.0, 0.0]])
    with pytest.raises(DegenerateDistribution):
        s.sample_column([1], 0.2, 0.2)
    with pytest.raises(InvalidInput):
        s.sample_column([], 0.2, 0.2)
    with pytest.raises(InvalidInput):
        s.sample_column([0], 1.0, 0.2)
    with pytest.raises(InvalidInput):
        matrix_sampling(s, 0, 1)


def test_input_not_mutated(rng):
    X = rng.standard_normal((5, 4))
    before = X.copy()
    s = build_store(X)
    matrix_sampling(s, 3, 0)
    np.testing.assert_array_equal(X, before)
    assert not s.data.flags.writeable


def test_row_frequencies(rng):
    X = rng.standard_normal((20, 20))
    s = build_store(X)
    M = 100_000
    counts = np.bincount(s.sample_rows(rng.random(M)), minlength=20)
    assert within_4_sigma(counts, np.sum(X**2, 1) / np.sum(X**2), M)


def test_single_row_column_law(rng):
    X = rng.standard_normal((6, 12))
    s = build_store(X)
    M = 100_000
    cols = s.sample_columns([3, 3, 3], rng.random(M), rng.random(M))
    assert within_4_sigma(np.bincount(cols, minlength=12), X[3] ** 2 / np.sum(X[3] ** 2), M)


def test_mixed_row_column_law(rng):
    X = rng.standard_normal((10, 10))
    s = build_store(X)
    rows = [0, 4, 4, 7, 9]
    M = 100_000
    cols = s.sample_columns(rows, rng.random(M), rng.random(M))
    g = g_direct(X, rows)
    np.testing.assert_allclose(s.column_probability(rows, np.arange(10)), g, rtol=1e-12)
    assert within_4_sigma(np.bincount(cols, minlength=10), g, M)


def test_one_by_one_sketch():
    sk = matrix_sampling(build_store([[-3.5]]), 1, 0)
    np.testing.assert_array_equal(sk.W, [[-3.5]])


def test_sketch_deterministic_and_reproducible(rng):
    s = build_store(rng.standard_normal((30, 25)))
    a = matrix_sampling(s, 10, 99)
    b = matrix_sampling(s, 10, 99)
    np.testing.assert_array_equal(a.W, b.W)
    np.testing.assert_array_equal(a.row_indices, b.row_indices)
    np.testing.assert_array_equal(a.col_indices, b.col_indices)
    # recompute each entry from its definition
    X = s.data
    P = 10
    F = np.sum(X**2, 1) / np.sum(X**2)
    G = g_direct(X, a.row_indices)
    for p in range(P):
        for q in range(P):
            i, j = a.row_indices[p], a.col_indices[q]
            assert a.W[p, q] == pytest.approx(X[i, j] / (P * np.sqrt(F[i] * G[j])), rel=1e-12)
    np.testing.assert_array_equal(sketch_entries(s, a.row_indices, a.col_indices, a.row_prob, a.col_prob), a.W)


def test_sketch_preserves_frobenius_in_expectation(rng):
    X = rng.standard_normal((40, 40))
    s = build_store(X)
    gen = np.random.default_rng(5)
    norms = [np.sum(matrix_sampling(s, 20, gen).W ** 2) for _ in range(200)]
    assert abs(np.mean(norms) - s.frob_sq) <= 0.15 * s.frob_sq


def test_store_accepts_store_api(rng):
    s = MatrixStore(rng.standard_normal((4, 3)))
    assert s.shape == (4, 3)
    assert s.row_tree(2).n == 3
    np.testing.assert_allclose(s.row_tree(2).total, s.row_norms_sq[2])
