import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qicca import CapacityExceeded, FeatureMap, InvalidInput, expand_second_order


def test_three_features():
    np.testing.assert_array_equal(expand_second_order(np.array([[1.0, 2.0, 3.0]])), [[1, 2, 3, 2, 3, 6]])


def test_single_feature(rng):
    X = rng.standard_normal((5, 1))
    np.testing.assert_array_equal(expand_second_order(X), X)


def test_dim_64():
    assert FeatureMap(64).output_dim == 2080
    assert expand_second_order(np.ones((2, 64))).shape == (2, 2080)


def test_pair_order_lexicographic():
    first, second = FeatureMap(4).pair_index
    assert list(zip(first.tolist(), second.tolist())) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_squares_flag():
    out = expand_second_order(np.array([[2.0, 3.0]]), include_squares=True)
    np.testing.assert_array_equal(out, [[2, 3, 4, 6, 9]])


def test_capacity_guard():
    with pytest.raises(CapacityExceeded):
        expand_second_order(np.ones((1, 100)), max_columns=1000)
    with pytest.raises(InvalidInput):
        expand_second_order(np.ones((3, 0)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(1, 8), st.integers(0, 2**31))
def test_count_and_row_commutation(D, N, seed):
    X = np.random.default_rng(seed).standard_normal((N, D))
    E = expand_second_order(X)
    assert E.shape[1] == D + D * (D - 1) // 2
    for n in range(N):
        np.testing.assert_array_equal(E[n], expand_second_order(X[n]))
