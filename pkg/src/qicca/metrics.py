"""Evaluation metrics: low-rank recovery, sum of correlations, retrieval AUC."""
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateInput, InvalidInput


class ZeroVarianceWarning(RuntimeWarning):
    """A canonical variate column is constant; its correlation was scored as 0."""


@dataclass
class EvalReport:
    metric_name: str
    value: float
    K: int
    n_samples: int
    parameters: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def recovery_score(X, V, orth_tol=1e-6):
    """``1 - ||X - X V V^T||_F^2 / ||X||_F^2`` for column-orthonormal ``V``.

    Evaluated as ``||X V||_F^2 / ||X||_F^2``, which is equal when ``V^T V = I``
    and avoids forming the residual.
    """
    X = np.asarray(X, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != X.shape[1]:
        raise InvalidInput(f"V must have {X.shape[1]} rows, got shape {V.shape}")
    frob_sq = float(np.sum(X * X))
    if frob_sq == 0.0:
        raise DegenerateInput("X is identically zero")
    if V.shape[1] == 0:
        return 0.0
    gram_err = np.max(np.abs(V.T @ V - np.eye(V.shape[1])))
    if gram_err > orth_tol:
        raise InvalidInput(f"V is not column-orthonormal (max |V^T V - I| = {gram_err:.3g})")
    XV = X @ V
    return float(np.sum(XV * XV)) / frob_sq


def column_correlations(C_x, C_y):
    """Pearson correlation of matching columns; constant columns give 0.

    Returns ``(corr, zero_variance_mask)``.
    """
    C_x = np.asarray(C_x, dtype=np.float64)
    C_y = np.asarray(C_y, dtype=np.float64)
    if C_x.shape != C_y.shape or C_x.ndim != 2:
        raise InvalidInput(f"variate shapes differ: {C_x.shape} vs {C_y.shape}")
    if C_x.shape[0] < 2:
        raise InvalidInput("need at least 2 samples")
    a = C_x - C_x.mean(axis=0)
    b = C_y - C_y.mean(axis=0)
    n1 = C_x.shape[0] - 1
    sa = np.sqrt(np.sum(a * a, axis=0) / n1)
    sb = np.sqrt(np.sum(b * b, axis=0) / n1)
    cov = np.sum(a * b, axis=0) / n1
    degenerate = (sa == 0.0) | (sb == 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(degenerate, 0.0, cov / np.where(degenerate, 1.0, sa * sb))
    return corr, degenerate


def sum_correlations(C_x, C_y, k_max=None):
    """Sum of Pearson correlations over the first ``k_max`` variate pairs."""
    corr, degenerate = column_correlations(C_x, C_y)
    k_max = corr.shape[0] if k_max is None else int(k_max)
    if not 0 <= k_max <= corr.shape[0]:
        raise InvalidInput(f"k_max={k_max} outside [0, {corr.shape[0]}]")
    if np.any(degenerate[:k_max]):
        warnings.warn(f"zero-variance variates in columns {np.flatnonzero(degenerate[:k_max]).tolist()}",
                      ZeroVarianceWarning, stacklevel=2)
    return float(np.sum(corr[:k_max]))


def retrieval_auc(C_x, C_y, targets=None, chunk_elems=1 << 22):
    """Per-target AUC: ``1 - #{n : tau(n) < tau(target)} / N``.

    ``tau(n) = ||C_x[target] - C_y[n]||``.  Ties are not counted against the
    target.  ``targets`` restricts the evaluation to a subset of rows.
    """
    C_x = np.asarray(C_x, dtype=np.float64)
    C_y = np.asarray(C_y, dtype=np.float64)
    if C_x.shape != C_y.shape or C_x.ndim != 2:
        raise InvalidInput(f"variate shapes differ: {C_x.shape} vs {C_y.shape}")
    N, K = C_x.shape
    if N < 2:
        raise InvalidInput("need at least 2 samples")
    targets = np.arange(N) if targets is None else np.asarray(targets, dtype=np.int64)
    step = max(1, chunk_elems // max(1, N * K))
    out = np.empty(targets.shape[0])
    for start in range(0, targets.shape[0], step):
        t = targets[start:start + step]
        diff = C_x[t, None, :] - C_y[None, :, :]
        tau = np.einsum("tnk,tnk->tn", diff, diff)
        own = tau[np.arange(t.shape[0]), t]
        out[start:start + step] = 1.0 - np.count_nonzero(tau < own[:, None], axis=1) / N
    return out


def mean_auc(C_x, C_y, n_targets=None, rng=None):
    """Mean retrieval AUC over all targets, or over ``n_targets`` sampled ones."""
    targets = None
    if n_targets is not None:
        N = np.asarray(C_x).shape[0]
        targets = np.random.default_rng(rng).choice(N, size=min(int(n_targets), N), replace=False)
    return float(retrieval_auc(C_x, C_y, targets).mean())
