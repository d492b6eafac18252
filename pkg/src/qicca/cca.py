"""Exact canonical correlation analysis via three SVDs.

With ``X = U1 S1 V1^T`` and ``Y = U2 S2 V2^T``, the SVD ``U1^T U2 = U3 S3 V3^T``
gives the weights ``W_X = V1 S1^-1 U3`` and ``W_Y = V2 S2^-1 V3`` and the
canonical correlations on the diagonal of ``S3``.

Scaling convention: canonical variates have unit Euclidean norm
(``C^T C = I``), i.e. the usual unit-variance constraint divided by
``N - 1``.  Signs are fixed so the largest-magnitude entry of each ``W_X``
column is positive.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, InvalidInput
from .linalg import center_columns, svd


@dataclass
class CcaModel:
    W_x: np.ndarray
    W_y: np.ndarray
    correlations: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray
    raw_correlations: np.ndarray = field(default=None)

    @property
    def k_actual(self):
        return self.correlations.shape[0]

    def transform(self, X, Y):
        """Canonical variates of (possibly held-out) data using the training means."""
        return (canonical_variates(np.asarray(X) - self.mean_x, self.W_x),
                canonical_variates(np.asarray(Y) - self.mean_y, self.W_y))


def _check_pair(X, Y):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2:
        raise InvalidInput("both views must be 2-D matrices")
    if X.shape[0] != Y.shape[0]:
        raise InvalidInput(f"row counts differ: {X.shape[0]} vs {Y.shape[0]}")
    if X.shape[0] < 2:
        raise InvalidInput("need at least 2 samples")
    return X, Y


def fix_signs(W_x, W_y):
    """Flip column pairs so the largest-magnitude entry of each ``W_x`` column is positive."""
    if W_x.shape[1] == 0:
        return W_x, W_y
    pivot = W_x[np.argmax(np.abs(W_x), axis=0), np.arange(W_x.shape[1])]
    signs = np.where(pivot < 0, -1.0, 1.0)
    return W_x * signs, W_y * signs


def cca(X, Y, K, center=True):
    """Fit exact CCA with up to ``K`` components.

    ``K`` is clamped to ``min(K, rank(X), rank(Y))``; the model's
    ``correlations`` are clamped to ``[0, 1]``.
    """
    X, Y = _check_pair(X, Y)
    K = int(K)
    if K < 1:
        raise InvalidInput("K must be >= 1")
    if center:
        X, mean_x = center_columns(X)
        Y, mean_y = center_columns(Y)
    else:
        mean_x = np.zeros(X.shape[1])
        mean_y = np.zeros(Y.shape[1])
    f1 = svd(X)
    f2 = svd(Y)
    if f1.rank == 0 or f2.rank == 0:
        raise DegenerateInput("a view has rank zero")
    U3, s3, V3t = np.linalg.svd(f1.U.T @ f2.U, full_matrices=False)
    k = min(K, f1.rank, f2.rank)
    W_x = f1.V @ (U3[:, :k] / f1.sigma[:, None])
    W_y = f2.V @ (V3t[:k].T / f2.sigma[:, None])
    W_x, W_y = fix_signs(W_x, W_y)
    raw = s3[:k].copy()
    return CcaModel(W_x, W_y, np.clip(raw, 0.0, 1.0), mean_x, mean_y, raw)


def canonical_variates(X, W):
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if X.ndim != 2 or W.ndim != 2 or X.shape[1] != W.shape[0]:
        raise InvalidInput(f"cannot project shape {X.shape} with weights {W.shape}")
    return X @ W
