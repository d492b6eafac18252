import json
import os

import numpy as np
import pytest

from qicca import load_matrix
from qicca.cli import main, parse_dims


def run(*argv):
    return main([str(a) for a in argv])


def read(path):
    with open(path) as fh:
        return json.load(fh)


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("QICCA_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def test_gen_then_cca(outdir):
    assert run("gen", "--pcca", "N=400", "D1=12", "D2=10", "K=3", "--seed", 4) == 0
    rec = read(outdir / "gen.json")
    assert rec["schema"] == 1 and rec["results"]["shapes"] == {"x": [400, 12], "y": [400, 10]}
    X, Y = outdir / "X.bin", outdir / "Y.bin"
    assert run("cca", "--x", X, "--y", Y, "--k", 3, "--model-out", outdir / "m.json") == 0
    rec = read(outdir / "cca.json")
    corr = rec["results"]["correlations"]
    assert len(corr) == 3 and all(c > 0.5 for c in corr)
    assert run("eval", "--model", outdir / "m.json", "--x", X, "--y", Y) == 0
    ev = read(outdir / "eval.json")["results"]
    assert ev["sum_correlations"] == pytest.approx(sum(corr), abs=1e-9)


def test_gen_csv(outdir):
    assert run("gen", "--lowrank", "I=5", "J=4", "R=2", "--format", "csv") == 0
    X = load_matrix(str(outdir / "X.csv"))
    assert X.shape == (5, 4) and np.linalg.matrix_rank(X) == 2


def test_qisvd_reproducible(outdir):
    run("gen", "--lowrank", "I=300", "J=80", "R=5", "--seed", 1)
    records = []
    for name in ("a.json", "b.json"):
        assert run("qisvd", "--x", outdir / "X.bin", "--k", 5, "--seed", 9, "--compare-exact",
                   "--out", outdir / name) == 0
        rec = read(outdir / name)
        records.append({k: v for k, v in rec.items() if k != "timing"})
        assert set(rec["timing"]) >= {"sketch_s", "total_s"}
    assert records[0] == records[1]
    res = records[0]["results"]
    assert res["recovery"] >= 0.9 * res["recovery_exact"]


def test_qicca_and_eval(outdir):
    run("gen", "--pcca", "N=300", "D1=20", "D2=16", "K=3", "--seed", 2)
    assert run("qicca", "--x", outdir / "X.bin", "--y", outdir / "Y.bin", "--k", 3, "--l", 8,
               "--seed", 5, "--model-out", outdir / "q.json", "--compare-exact") == 0
    res = read(outdir / "qicca.json")["results"]
    assert res["k_actual"] == 3 and "exact_train_sum" in res
    assert run("eval", "--model", outdir / "q.json", "--x", outdir / "X.bin", "--y", outdir / "Y.bin") == 0
    assert 0.5 < read(outdir / "eval.json")["results"]["mean_auc"] <= 1.0


def test_expand(outdir):
    src = outdir / "s.csv"
    src.write_text("1,2,3\n")
    assert run("expand", "--x", src, "--matrix-out", outdir / "e.csv") == 0
    np.testing.assert_array_equal(load_matrix(str(outdir / "e.csv")), [[1, 2, 3, 2, 3, 6]])


def test_sweep_csv(outdir):
    assert run("sweep", "--qisvd", "--dims", "32..128", "--rows", 100, "--rank", 4, "--k", 4,
               "--repeats", 1, "--csv", outdir / "s.csv") == 0
    lines = (outdir / "s.csv").read_text().strip().splitlines()
    dims = [int(line.split(",")[0]) for line in lines[1:]]
    assert dims == [32, 64, 128]
    assert parse_dims("32..4096") == [2**k for k in range(5, 13)]


def test_error_is_one_line_and_rolls_back(outdir, capsys):
    (outdir / "blocker").mkdir()
    code = run("gen", "--pcca", "N=20", "D1=3", "D2=3", "K=2", "--x-out", outdir / "x.bin",
               "--y-out", outdir / "blocker")
    assert code == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: ")
    assert not (outdir / "x.bin").exists()
    assert not (outdir / "gen.json").exists()


def test_invalid_parameters(outdir, capsys):
    assert run("gen", "--pcca", "N=20", "D1=2", "D2=3", "K=3") == 1
    assert "InvalidInput" in capsys.readouterr().err
    bad = outdir / "bad.csv"
    bad.write_text("1,2\nx,4\n")
    assert run("svd", "--x", bad, "--k", 1) == 1
    assert "ParseError" in capsys.readouterr().err
    assert not os.path.exists(outdir / "svd.json")
