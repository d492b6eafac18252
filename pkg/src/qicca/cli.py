"""Command-line harness.

Every command writes one JSON record (``schema: 1``) holding parameters,
seed, results and a separate ``timing`` block; rerunning with the recorded
arguments reproduces every field outside ``timing``.  Files are written
atomically.  On failure the command prints one line ``error: <Type>: <msg>``
to stderr, removes anything it already wrote and exits with status 1.

Output files default to the directory in ``$QICCA_OUTPUT_DIR`` (or ``.``).
"""
import argparse
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .cca import CcaModel, cca
from .data import gen_lowrank, gen_pcca, gen_pcca_quadratic, load_matrix, save_matrix
from .errors import InvalidInput, QiccaError
from .features import DEFAULT_MAX_COLUMNS, expand_second_order
from .linalg import center_columns, svd
from .matrix_store import MatrixStore, matrix_sampling
from .metrics import mean_auc, recovery_score, sum_correlations
from .qi_cca import QiCcaModel, default_l, default_p, qicca
from .qisvd import describe_from_sketch

SCHEMA = 1
SECOND_ORDER_L = 256


class _Outputs:
    """Tracks files written by a command so they can be removed on failure."""

    def __init__(self):
        self.paths = []

    def json(self, record, path):
        _ensure_dir(path)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), prefix=".tmp-")
        with os.fdopen(fd, "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
        self.paths.append(path)

    def matrix(self, A, path):
        _ensure_dir(path)
        save_matrix(A, path)
        self.paths.append(path)

    def text(self, text, path):
        _ensure_dir(path)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), prefix=".tmp-")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
        self.paths.append(path)

    def rollback(self):
        for p in self.paths:
            try:
                os.unlink(p)
            except OSError:
                pass


def _ensure_dir(path):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def _out_dir():
    return os.environ.get("QICCA_OUTPUT_DIR", ".")


def _default_path(args, name):
    return args.out if getattr(args, "out", None) else os.path.join(_out_dir(), name)


def _record(command, params, results, timing):
    return {"schema": SCHEMA, "version": __version__, "command": command,
            "params": params, "results": results, "timing": timing}


def _keyvals(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise InvalidInput(f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().upper()] = int(v)
    return out


def _load_pair(args):
    X = load_matrix(args.x)
    Y = load_matrix(args.y)
    if X.shape[0] != Y.shape[0]:
        raise InvalidInput(f"views disagree on rows: {X.shape[0]} vs {Y.shape[0]}")
    return X, Y


def _floats(a):
    return [float(v) for v in np.asarray(a).ravel()]


# -- commands ------------------------------------------------------------


def cmd_gen(args, out):
    p = _keyvals(args.params)
    t0 = time.perf_counter()
    if args.kind == "lowrank":
        need = ("I", "J", "R")
        missing = [k for k in need if k not in p]
        if missing:
            raise InvalidInput(f"--lowrank needs {', '.join(need)}; missing {missing}")
        X = gen_lowrank(p["I"], p["J"], p["R"], args.seed)
        mats = {"x": X}
    else:
        need = ("N", "D1", "D2", "K")
        missing = [k for k in need if k not in p]
        if missing:
            raise InvalidInput(f"--{args.kind} needs {', '.join(need)}; missing {missing}")
        gen = gen_pcca_quadratic if args.kind == "pcca-quadratic" else gen_pcca
        pair = gen(p["N"], p["D1"], p["D2"], p["K"], args.seed)
        mats = {"x": pair.X, "y": pair.Y}
    elapsed = time.perf_counter() - t0
    ext = "csv" if args.format == "csv" else "bin"
    files = {}
    for name, A in mats.items():
        path = getattr(args, f"{name}_out") or os.path.join(_out_dir(), f"{name.upper()}.{ext}")
        out.matrix(A, path)
        files[name] = path
    results = {"files": files, "shapes": {k: list(v.shape) for k, v in mats.items()}}
    params = {"generator": args.kind, **p, "seed": args.seed, "format": ext}
    out.json(_record("gen", params, results, {"total_s": elapsed}), _default_path(args, "gen.json"))


def _maybe_center(X, flag):
    return center_columns(X)[0] if flag else X


def cmd_svd(args, out):
    X = _maybe_center(load_matrix(args.x), args.center)
    t0 = time.perf_counter()
    f = svd(X)
    elapsed = time.perf_counter() - t0
    k = min(args.k, f.rank)
    V = f.V[:, :k]
    results = {"k_actual": k, "sigma": _floats(f.sigma[:k]), "recovery": recovery_score(X, V)}
    if args.v_out:
        out.matrix(V, args.v_out)
        results["v_file"] = args.v_out
    params = {"x": args.x, "k": args.k, "center": args.center}
    out.json(_record("svd", params, results, {"total_s": elapsed}), _default_path(args, "svd.json"))


def _orthonormal_span(V):
    Q, R = np.linalg.qr(V)
    keep = np.abs(np.diag(R)) > 1e-10 * max(np.abs(np.diag(R)).max(), 1e-300)
    return Q[:, keep]


def cmd_qisvd(args, out):
    X = _maybe_center(load_matrix(args.x), args.center)
    P = default_p(args.k) if args.p is None else args.p
    if args.k > P:
        raise InvalidInput(f"K={args.k} exceeds P={P}")
    t0 = time.perf_counter()
    store = MatrixStore(X)
    t1 = time.perf_counter()
    sketch = matrix_sampling(store, P, args.seed)
    t2 = time.perf_counter()
    desc = describe_from_sketch(store, sketch, args.k, orthonormal=not args.no_orthonormalize)
    t3 = time.perf_counter()
    V = desc.materialize(store)
    gram = float(np.max(np.abs(V.T @ V - np.eye(V.shape[1]))))
    results = {
        "k_actual": desc.k_actual,
        "gram_max_dev": gram,
        "recovery": recovery_score(X, V if not args.no_orthonormalize else _orthonormal_span(V)),
        "description": {"source_rows": [int(i) for i in desc.source_rows], "coeffs": desc.coeffs.tolist()},
    }
    if args.compare_exact:
        f = svd(X)
        results["recovery_exact"] = recovery_score(X, f.V[:, :min(args.k, f.rank)])
    params = {"x": args.x, "k": args.k, "p": P, "seed": args.seed, "center": args.center,
              "orthonormalize": not args.no_orthonormalize}
    timing = {"store_s": t1 - t0, "sketch_s": t2 - t1, "total_s": t3 - t1}
    out.json(_record("qisvd", params, results, timing), _default_path(args, "qisvd.json"))


def _eval_block(Cx, Cy, n_targets=None, seed=None):
    k = Cx.shape[1]
    return {"sum_correlations": sum_correlations(Cx, Cy, k),
            "mean_auc": mean_auc(Cx, Cy, n_targets=n_targets, rng=seed)}


def _cca_model_dict(model, params):
    return {"schema": SCHEMA, "kind": "cca", "params": params,
            "W_x": model.W_x.tolist(), "W_y": model.W_y.tolist(),
            "correlations": _floats(model.correlations), "raw_correlations": _floats(model.raw_correlations),
            "mean_x": _floats(model.mean_x), "mean_y": _floats(model.mean_y)}


def _cca_model_from_dict(d):
    arr = lambda v: np.asarray(v, dtype=np.float64)  # noqa: E731
    W_x = arr(d["W_x"]).reshape(len(d["mean_x"]), -1)
    W_y = arr(d["W_y"]).reshape(len(d["mean_y"]), -1)
    return CcaModel(W_x, W_y, arr(d["correlations"]), arr(d["mean_x"]), arr(d["mean_y"]),
                    arr(d["raw_correlations"]))


def _held_out(args, model, transform=None):
    if not (args.test_x and args.test_y):
        return None
    Xt = load_matrix(args.test_x)
    Yt = load_matrix(args.test_y)
    if transform is not None:
        Xt, Yt = transform(Xt), transform(Yt)
    Cx, Cy = model.transform(Xt, Yt)
    return _eval_block(Cx, Cy, args.n_targets, args.seed if hasattr(args, "seed") else None)


def cmd_cca(args, out):
    X, Y = _load_pair(args)
    t0 = time.perf_counter()
    model = cca(X, Y, args.k, center=not args.no_center)
    elapsed = time.perf_counter() - t0
    Cx, Cy = model.transform(X, Y)
    results = {"k_actual": model.k_actual, "correlations": _floats(model.correlations),
               "train": _eval_block(Cx, Cy, args.n_targets, 0)}
    held = _held_out(args, model)
    if held is not None:
        results["test"] = held
    params = {"x": args.x, "y": args.y, "k": args.k, "center": not args.no_center}
    if args.model_out:
        out.json(_cca_model_dict(model, params), args.model_out)
    out.json(_record("cca", params, results, {"total_s": elapsed}), _default_path(args, "cca.json"))


def _qicca_params(args, D1, D2):
    if args.l is not None:
        L = args.l
    elif args.second_order:
        L = min(SECOND_ORDER_L, default_l(D1, D2))
    else:
        L = default_l(D1, D2)
    L1 = args.l1 if args.l1 is not None else L
    L2 = args.l2 if args.l2 is not None else L
    P1 = args.p1 if args.p1 is not None else (args.p if args.p is not None else default_p(L1))
    P2 = args.p2 if args.p2 is not None else (args.p if args.p is not None else default_p(L2))
    K = args.k if args.k is not None else min(L1, L2)
    return K, L1, L2, P1, P2


def cmd_qicca(args, out):
    X, Y = _load_pair(args)
    expand = None
    t_expand = 0.0
    if args.second_order:
        expand = lambda A: expand_second_order(A, args.include_squares, args.max_columns)  # noqa: E731
        t0 = time.perf_counter()
        X, Y = expand(X), expand(Y)
        t_expand = time.perf_counter() - t0
    K, L1, L2, P1, P2 = _qicca_params(args, X.shape[1], Y.shape[1])
    mean_x = mean_y = None
    if not args.no_center:
        X, mean_x = center_columns(X)
        Y, mean_y = center_columns(Y)
    t0 = time.perf_counter()
    store_x, store_y = MatrixStore(X.T), MatrixStore(Y.T)
    t1 = time.perf_counter()
    model = qicca(store_x, store_y, K, L1, L2, P1, P2, args.seed, orthonormal=not args.no_orthonormalize)
    t2 = time.perf_counter()
    model.mean_x, model.mean_y = mean_x, mean_y
    params = {"x": args.x, "y": args.y, "K": K, "L1": L1, "L2": L2, "P1": P1, "P2": P2, "seed": args.seed,
              "center": not args.no_center, "orthonormalize": not args.no_orthonormalize,
              "second_order": args.second_order, "include_squares": args.include_squares,
              "dims": [X.shape[1], Y.shape[1]]}
    model.params = params
    Cx, Cy = model.desc_x.variates(X), model.desc_y.variates(Y)
    results = {"k_actual": model.k_actual, "correlations": _floats(model.correlations),
               "raw_correlations": _floats(model.raw_correlations),
               "train": _eval_block(Cx, Cy, args.n_targets, args.seed)}
    held = _held_out(args, model, expand)
    if held is not None:
        results["test"] = held
    if args.compare_exact:
        ex = cca(X, Y, K, center=False)
        results["exact_train_sum"] = sum_correlations(*ex.transform(X, Y))
    if args.model_out:
        out.json(model.to_dict(), args.model_out)
    timing = {"expand_s": t_expand, "store_s": t1 - t0, "total_s": t2 - t1}
    out.json(_record("qicca", params, results, timing), _default_path(args, "qicca.json"))


def cmd_expand(args, out):
    X = load_matrix(args.x)
    t0 = time.perf_counter()
    E = expand_second_order(X, args.include_squares, args.max_columns)
    elapsed = time.perf_counter() - t0
    out.matrix(E, args.matrix_out)
    params = {"x": args.x, "include_squares": args.include_squares}
    results = {"input_dim": X.shape[1], "output_dim": E.shape[1], "file": args.matrix_out}
    out.json(_record("expand", params, results, {"total_s": elapsed}), _default_path(args, "expand.json"))


def cmd_eval(args, out):
    with open(args.model) as fh:
        d = json.load(fh)
    X, Y = _load_pair(args)
    if d.get("kind") == "qicca":
        model = QiCcaModel.from_dict(d)
        p = model.params
        if p.get("second_order"):
            X = expand_second_order(X, p.get("include_squares", False))
            Y = expand_second_order(Y, p.get("include_squares", False))
    elif d.get("kind") == "cca":
        model = _cca_model_from_dict(d)
    else:
        raise InvalidInput(f"unknown model kind {d.get('kind')!r}")
    t0 = time.perf_counter()
    Cx, Cy = model.transform(X, Y)
    k = model.k_actual if args.k is None else min(args.k, model.k_actual)
    results = _eval_block(Cx[:, :k], Cy[:, :k], args.n_targets, args.seed)
    results["K"] = k
    results["n_samples"] = X.shape[0]
    params = {"model": args.model, "x": args.x, "y": args.y, "k": args.k, "n_targets": args.n_targets,
              "seed": args.seed}
    out.json(_record("eval", params, results, {"total_s": time.perf_counter() - t0}),
             _default_path(args, "eval.json"))


def parse_dims(text):
    """``'32..4096'`` -> powers of two from 32 to 4096; ``'100,200'`` -> explicit list."""
    if ".." in text:
        lo, hi = (int(s) for s in text.split(".."))
        if lo < 1 or hi < lo:
            raise InvalidInput(f"bad dimension range {text!r}")
        dims = []
        d = lo
        while d <= hi:
            dims.append(d)
            d *= 2
        return dims
    return [int(s) for s in text.split(",") if s]


def _timed(fn, repeats):
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return result, float(np.mean(times))


def cmd_sweep(args, out):
    dims = parse_dims(args.dims)
    # compile the sampling kernels outside the timed region
    matrix_sampling(MatrixStore(np.ones((2, 2))), 2, 0)
    rows = []
    for dim in dims:
        if args.target == "qisvd":
            rank = min(args.rank, args.rows, dim)
            X = gen_lowrank(args.rows, dim, rank, args.seed)
            K = min(args.k, rank)
            P = default_p(K) if args.p is None else args.p
            f, t_exact = _timed(lambda: svd(X), args.repeats)
            store = MatrixStore(X)
            sketch, t_sketch = _timed(lambda: matrix_sampling(store, P, args.seed), args.repeats)

            def run():
                return describe_from_sketch(store, matrix_sampling(store, P, args.seed), K)

            desc, t_total = _timed(run, args.repeats)
            rows.append({"dim": dim, "rows": args.rows, "K": K, "P": P,
                         "exact_s": t_exact, "sketch_s": t_sketch, "qi_total_s": t_total,
                         "recovery_exact": recovery_score(X, f.V[:, :K]),
                         "recovery_qi": recovery_score(X, desc.materialize(store))})
        else:
            latent = min(args.rank, dim)
            pair = gen_pcca(args.rows, dim, dim, latent, args.seed)
            X, _ = center_columns(pair.X)
            Y, _ = center_columns(pair.Y)
            L = min(args.l, dim) if args.l is not None else default_l(dim, dim)
            P = default_p(L) if args.p is None else args.p
            K = min(args.k, L)
            ex, t_exact = _timed(lambda: cca(X, Y, K, center=False), args.repeats)
            sx, sy = MatrixStore(X.T), MatrixStore(Y.T)
            model, t_qi = _timed(lambda: qicca(sx, sy, K, L, L, P, P, args.seed), args.repeats)
            rows.append({"dim": dim, "rows": args.rows, "K": K, "L": L, "P": P,
                         "exact_s": t_exact, "qi_total_s": t_qi,
                         "sum_exact": sum_correlations(*ex.transform(X, Y)),
                         "sum_qi": sum_correlations(*model.transform(X, Y))})
    header = list(rows[0].keys()) if rows else ["dim"]
    lines = [",".join(header)] + [",".join(repr(r[h]) for h in header) for r in rows]
    csv_path = args.csv or os.path.join(_out_dir(), f"sweep_{args.target}.csv")
    out.text("\n".join(lines) + "\n", csv_path)
    timing_keys = {"exact_s", "sketch_s", "qi_total_s"}
    results = {"csv": csv_path, "rows": [{k: v for k, v in r.items() if k not in timing_keys} for r in rows]}
    timing = {"rows": [{k: v for k, v in r.items() if k in timing_keys or k == "dim"} for r in rows]}
    params = {"target": args.target, "dims": dims, "rows": args.rows, "rank": args.rank, "k": args.k,
              "p": args.p, "l": args.l, "repeats": args.repeats, "seed": args.seed}
    out.json(_record("sweep", params, results, timing), _default_path(args, f"sweep_{args.target}.json"))


# -- parser --------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="qicca", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", help="result JSON path (default $QICCA_OUTPUT_DIR/<command>.json)")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen", help="generate synthetic matrices")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--lowrank", dest="kind", action="store_const", const="lowrank", help="I= J= R=")
    kind.add_argument("--pcca", dest="kind", action="store_const", const="pcca", help="N= D1= D2= K=")
    kind.add_argument("--pcca-quadratic", dest="kind", action="store_const", const="pcca-quadratic",
                      help="N= D1= D2= K=; view 2 also driven by squared latents")
    p.add_argument("params", nargs="*", metavar="KEY=VALUE")
    p.add_argument("--format", choices=("bin", "csv"), default="bin")
    p.add_argument("--x-out")
    p.add_argument("--y-out")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("svd", help="exact SVD baseline")
    p.add_argument("--x", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--center", action="store_true")
    p.add_argument("--v-out")
    common(p, seed=False)
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("qisvd", help="sampling-based SVD")
    p.add_argument("--x", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=int, help="sketch size (default ceil(1.5 K))")
    p.add_argument("--center", action="store_true")
    p.add_argument("--no-orthonormalize", action="store_true")
    p.add_argument("--compare-exact", action="store_true")
    common(p)
    p.set_defaults(func=cmd_qisvd)

    def held_out(p):
        p.add_argument("--test-x")
        p.add_argument("--test-y")
        p.add_argument("--n-targets", type=int, help="sample this many AUC targets instead of all")
        p.add_argument("--model-out")

    p = sub.add_parser("cca", help="exact CCA baseline")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--no-center", action="store_true")
    held_out(p)
    common(p, seed=False)
    p.set_defaults(func=cmd_cca)

    p = sub.add_parser("qicca", help="sampling-based CCA")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--k", type=int, help="components (default min(L1, L2))")
    p.add_argument("--l", type=int, help="components per qiSVD (default ceil(0.5 max(D1, D2)))")
    p.add_argument("--p", type=int, help="sketch size (default ceil(1.5 L))")
    for name in ("l1", "l2", "p1", "p2"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--no-center", action="store_true")
    p.add_argument("--no-orthonormalize", action="store_true")
    p.add_argument("--second-order", action="store_true", help="expand both views first (default L 256)")
    p.add_argument("--include-squares", action="store_true")
    p.add_argument("--max-columns", type=int, default=DEFAULT_MAX_COLUMNS)
    p.add_argument("--compare-exact", action="store_true")
    held_out(p)
    common(p)
    p.set_defaults(func=cmd_qicca)

    p = sub.add_parser("expand", help="second-order monomial expansion")
    p.add_argument("--x", required=True)
    p.add_argument("--matrix-out", required=True)
    p.add_argument("--include-squares", action="store_true")
    p.add_argument("--max-columns", type=int, default=DEFAULT_MAX_COLUMNS)
    common(p, seed=False)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("eval", help="evaluate a saved model on a view pair")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--n-targets", type=int)
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="timing/quality sweep over dimension")
    tgt = p.add_mutually_exclusive_group(required=True)
    tgt.add_argument("--qisvd", dest="target", action="store_const", const="qisvd")
    tgt.add_argument("--qicca", dest="target", action="store_const", const="qicca")
    p.add_argument("--dims", default="32..4096")
    p.add_argument("--rows", type=int, default=1000, help="I for qisvd, N for qicca")
    p.add_argument("--rank", type=int, default=20, help="latent rank of generated data")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--p", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--csv")
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = _Outputs()
    try:
        args.func(args, out)
    except (QiccaError, OSError, ValueError) as exc:
        out.rollback()
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
