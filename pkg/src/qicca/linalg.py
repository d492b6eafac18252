"""Exact dense kernels: rank-truncated economy SVD and column centering."""
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput

RANK_RTOL = 1e-10


class SvdFactors(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return self.sigma.shape[0]


def svd(A, rtol=RANK_RTOL):
    """Economy SVD of ``A`` keeping singular values above ``rtol * sigma_max``.

    Backed by LAPACK ``gesdd`` through ``numpy.linalg.svd``.  Returns
    ``SvdFactors(U, sigma, V)`` with ``A ~= U @ diag(sigma) @ V.T``.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInput(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput("matrix contains non-finite entries")
    if A.size == 0:
        return SvdFactors(np.zeros((A.shape[0], 0)), np.zeros(0), np.zeros((A.shape[1], 0)))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        keep = 0
    else:
        keep = int(np.count_nonzero(s > rtol * s[0]))
    return SvdFactors(U[:, :keep], s[:keep], Vt[:keep].T)


def center_columns(A):
    """Subtract column means.  Returns ``(centered, means)``."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 2:
        raise InvalidInput("centering needs a 2-D matrix with at least 2 rows")
    means = A.mean(axis=0)
    centered = A - means
    # second pass removes the rounding residue of the first
    residue = centered.mean(axis=0)
    return centered - residue, means + residue
