import numpy as np
import pytest

from qicca import FormatError, InvalidInput, ParseError, cca, gen_lowrank, gen_pcca, load_matrix, save_matrix, svd
from qicca.data import MAGIC, gen_pcca_quadratic


def test_lowrank_rank_one():
    X = gen_lowrank(10, 7, 1, 0)
    assert np.linalg.matrix_rank(X) == 1


def test_lowrank_numerical_rank():
    X = gen_lowrank(200, 150, 20, 3)
    s = np.linalg.svd(X, compute_uv=False)
    assert s[19] > 1e-8 * s[0]
    assert s[20] < 1e-8 * s[0]
    assert svd(X).rank == 20


def test_lowrank_deterministic():
    np.testing.assert_array_equal(gen_lowrank(20, 10, 3, 5), gen_lowrank(20, 10, 3, 5))
    with pytest.raises(InvalidInput):
        gen_lowrank(5, 4, 6, 0)


def test_pcca_shapes_and_determinism():
    d = gen_pcca(30, 5, 7, 2, 1)
    assert d.X.shape == (30, 5) and d.Y.shape == (30, 7)
    e = gen_pcca(30, 5, 7, 2, 1)
    np.testing.assert_array_equal(d.X, e.X)
    np.testing.assert_array_equal(d.Y, e.Y)
    with pytest.raises(InvalidInput):
        gen_pcca(30, 2, 7, 3, 0)


def test_pcca_latent_structure():
    d = gen_pcca(5000, 64, 64, 10, 0)
    corr = cca(d.X, d.Y, 12).correlations
    assert np.all(corr[:10] > 0.5)
    assert corr[10] < 0.5 * corr[9]


def test_pcca_noise_scale():
    # view minus latent part is exactly 0.5 * standard normal noise
    g = np.random.default_rng(11)
    Z = g.standard_normal((400, 3))
    B1 = g.standard_normal((3, 6))
    g.standard_normal((3, 4))
    E1 = g.standard_normal((400, 6))
    d = gen_pcca(400, 6, 4, 3, 11)
    np.testing.assert_allclose(d.X, Z @ B1 + 0.5 * E1)


def test_quadratic_extends_pcca():
    a = gen_pcca(50, 4, 5, 2, 9)
    b = gen_pcca_quadratic(50, 4, 5, 2, 9)
    np.testing.assert_array_equal(a.X, b.X)
    assert not np.allclose(a.Y, b.Y)


def test_normality_sanity():
    # entries of Z @ B are sums of r products of independent standard normals: mean 0, variance r
    X = gen_lowrank(400, 500, 4, 2)
    assert abs(X.mean()) < 5 * 2 / np.sqrt(X.size)
    assert abs(X.var() - 4) < 0.2
    kurt = np.mean(X**4) / X.var() ** 2
    assert abs(kurt - (3 + 6 / 4)) < 0.3


def test_csv_parse(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("1,2\n3,4\n")
    np.testing.assert_array_equal(load_matrix(p), [[1, 2], [3, 4]])


def test_csv_round_trip(tmp_path, rng):
    A = rng.standard_normal((20, 6)) * 1e3
    p = str(tmp_path / "a.csv")
    save_matrix(A, p)
    np.testing.assert_allclose(load_matrix(p), A, rtol=1e-12, atol=0)


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,x\n")
    with pytest.raises(ParseError, match="row 2, column 2"):
        load_matrix(p)
    p.write_text("1,2\n3\n")
    with pytest.raises(ParseError, match="row 2"):
        load_matrix(p)


def test_binary_round_trip(tmp_path, rng):
    A = rng.standard_normal((100, 50))
    p = str(tmp_path / "a.bin")
    save_matrix(A, p)
    B = load_matrix(p)
    assert B.tobytes() == A.tobytes()
    raw = open(p, "rb").read()
    assert raw[:8] == MAGIC
    assert int.from_bytes(raw[8:16], "little") == 100
    assert int.from_bytes(raw[16:24], "little") == 50


def test_binary_errors(tmp_path, rng):
    p = str(tmp_path / "a.bin")
    save_matrix(rng.standard_normal((3, 3)), p)
    raw = open(p, "rb").read()
    open(p, "wb").write(raw[:-8])
    with pytest.raises(FormatError):
        load_matrix(p)
    open(p, "wb").write(b"NOTMAGIC" + raw[8:])
    with pytest.raises(FormatError):
        load_matrix(p)
