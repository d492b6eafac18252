"""Sampling-based CCA built on two :func:`qicca.qisvd.qisvd` calls.

qiSVD on ``X.T`` and ``Y.T`` yields descriptions of the left singular bases
of each view.  The small matrix ``(U1~)^T U2~`` is decomposed exactly and its
singular vectors are folded back into per-view coefficient vectors.  Each
view's weights are then a :class:`WeightDescription`: a list of selected
feature indices plus one coefficient vector per component, so that the
canonical variates are ``X[:, selector] @ coeffs``.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .cca import fix_signs
from .errors import InvalidInput
from .linalg import center_columns
from .matrix_store import MatrixStore
from .qisvd import qisvd

SCHEMA = 1


@dataclass
class WeightDescription:
    selector_rows: np.ndarray  # (P,) feature indices, duplicates allowed
    coeffs: np.ndarray  # (P, K)
    view_dim: int

    @property
    def k(self):
        return self.coeffs.shape[1]

    def variates(self, X):
        """``X @ A^T @ coeffs`` computed by gathering the selected columns."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.view_dim:
            raise InvalidInput(f"expected {self.view_dim} columns, got shape {X.shape}")
        return X[:, self.selector_rows] @ self.coeffs

    def dense(self):
        """The implied ``D x K`` weight matrix; duplicate selectors are summed."""
        W = np.zeros((self.view_dim, self.k))
        np.add.at(W, self.selector_rows, self.coeffs)
        return W

    def to_dict(self):
        return {
            "view_dim": int(self.view_dim),
            "selector_rows": [int(i) for i in self.selector_rows],
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        coeffs = np.asarray(d["coeffs"], dtype=np.float64).reshape(len(d["selector_rows"]), -1)
        return cls(np.asarray(d["selector_rows"], dtype=np.int64), coeffs, int(d["view_dim"]))


def variates_from_description(X, desc):
    return desc.variates(X)


def dense_weights(desc):
    return desc.dense()


@dataclass
class QiCcaModel:
    desc_x: WeightDescription
    desc_y: WeightDescription
    correlations: np.ndarray
    raw_correlations: np.ndarray
    mean_x: np.ndarray = None
    mean_y: np.ndarray = None
    params: dict = field(default_factory=dict)

    @property
    def k_actual(self):
        return self.correlations.shape[0]

    def transform(self, X, Y):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if self.mean_x is not None:
            X = X - self.mean_x
        if self.mean_y is not None:
            Y = Y - self.mean_y
        return self.desc_x.variates(X), self.desc_y.variates(Y)

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "kind": "qicca",
            "params": self.params,
            "view_x": self.desc_x.to_dict(),
            "view_y": self.desc_y.to_dict(),
            "correlations": self.correlations.tolist(),
            "raw_correlations": self.raw_correlations.tolist(),
            "mean_x": None if self.mean_x is None else self.mean_x.tolist(),
            "mean_y": None if self.mean_y is None else self.mean_y.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") != "qicca":
            raise InvalidInput(f"not a qicca model record: kind={d.get('kind')!r}")
        mean = lambda v: None if v is None else np.asarray(v, dtype=np.float64)  # noqa: E731
        return cls(
            WeightDescription.from_dict(d["view_x"]),
            WeightDescription.from_dict(d["view_y"]),
            np.asarray(d["correlations"], dtype=np.float64),
            np.asarray(d["raw_correlations"], dtype=np.float64),
            mean(d.get("mean_x")),
            mean(d.get("mean_y")),
            dict(d.get("params", {})),
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def default_l(d1, d2):
    return int(np.ceil(0.5 * max(d1, d2)))


def default_p(L):
    return int(np.ceil(1.5 * L))


def view_streams(rng):
    """Two independent generators for the two views, derived from one seed.

    Integer seeds go through ``SeedSequence(seed).spawn(2)``; a ``Generator``
    is split with ``Generator.spawn(2)``.
    """
    if isinstance(rng, np.random.Generator):
        return rng.spawn(2)
    if not isinstance(rng, np.random.SeedSequence):
        rng = np.random.SeedSequence(rng)
    return [np.random.default_rng(s) for s in rng.spawn(2)]


def qicca(store_xt, store_yt, K, L1, L2, P1, P2, rng=None, orthonormal=True):
    """Approximate CCA from stores built over the transposed views.

    Parameters
    ----------
    store_xt, store_yt : MatrixStore
        Stores over ``X.T`` (``D1 x N``) and ``Y.T`` (``D2 x N``).
    K : int
        Requested component count, ``K <= min(L1, L2)``.
    L1, L2 : int
        Components kept by each qiSVD.
    P1, P2 : int
        Sketch sizes, ``L1 <= P1`` and ``L2 <= P2``.
    rng : int, SeedSequence or Generator
        Master seed; split into one stream per view by :func:`view_streams`.
    orthonormal : bool
        Forwarded to both qiSVD calls.
    """
    K, L1, L2, P1, P2 = (int(v) for v in (K, L1, L2, P1, P2))
    if store_xt.cols != store_yt.cols:
        raise InvalidInput(f"views disagree on sample count: {store_xt.cols} vs {store_yt.cols}")
    if min(K, L1, L2, P1, P2) < 1:
        raise InvalidInput("K, L1, L2, P1, P2 must all be >= 1")
    if K > min(L1, L2):
        raise InvalidInput(f"K={K} exceeds min(L1, L2)={min(L1, L2)}")
    if L1 > P1 or L2 > P2:
        raise InvalidInput("need L1 <= P1 and L2 <= P2")
    g1, g2 = view_streams(rng)
    d1 = qisvd(store_xt, L1, P1, g1, orthonormal=orthonormal)
    d2 = qisvd(store_yt, L2, P2, g2, orthonormal=orthonormal)
    left = d1.coeffs.T @ d1.rows_matrix(store_xt)  # L1 x N
    right = d2.rows_matrix(store_yt).T @ d2.coeffs  # N x L2
    U3, s3, V3t = np.linalg.svd(left @ right, full_matrices=False)
    k = min(K, d1.k_actual, d2.k_actual)
    w1, w2 = fix_signs(d1.coeffs @ U3[:, :k], d2.coeffs @ V3t[:k].T)
    raw = s3[:k].copy()
    return QiCcaModel(
        WeightDescription(d1.source_rows, w1, store_xt.rows),
        WeightDescription(d2.source_rows, w2, store_yt.rows),
        np.clip(raw, 0.0, 1.0),
        raw,
    )


def fit_qicca(X, Y, K=None, L=None, P=None, seed=None, center=True, orthonormal=True,
              L1=None, L2=None, P1=None, P2=None):
    """Center (optionally), build both stores and run :func:`qicca`.

    Defaults: ``L = ceil(0.5 * max(D1, D2))``, ``P = ceil(1.5 * L)``,
    ``K = min(L1, L2)``.  Per-view ``L1``/``L2``/``P1``/``P2`` override.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise InvalidInput(f"views must be 2-D with equal rows, got {X.shape} and {Y.shape}")
    L = default_l(X.shape[1], Y.shape[1]) if L is None else int(L)
    L1 = L if L1 is None else int(L1)
    L2 = L if L2 is None else int(L2)
    P1 = (default_p(L1) if P is None else int(P)) if P1 is None else int(P1)
    P2 = (default_p(L2) if P is None else int(P)) if P2 is None else int(P2)
    K = min(L1, L2) if K is None else int(K)
    mean_x = mean_y = None
    if center:
        X, mean_x = center_columns(X)
        Y, mean_y = center_columns(Y)
    model = qicca(MatrixStore(X.T), MatrixStore(Y.T), K, L1, L2, P1, P2, seed, orthonormal)
    model.mean_x, model.mean_y = mean_x, mean_y
    model.params = {"K": K, "L1": L1, "L2": L2, "P1": P1, "P2": P2, "seed": seed,
                    "center": bool(center), "orthonormal": bool(orthonormal)}
    return model
