"""Sampling-based SVD returning a compact description of right singular vectors.

A :class:`Description` stores ``P`` row indices into the source matrix
(the rows of ``S``) and ``K`` coefficient vectors; approximate right singular
vector ``k`` is ``S.T @ coeffs[:, k]``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, InvalidInput
from .linalg import RANK_RTOL, svd
from .matrix_store import matrix_sampling

DROP_RTOL = 1e-12


@dataclass
class Description:
    source_rows: np.ndarray  # (P,) indices into the store's rows
    coeffs: np.ndarray  # (P, K_actual)
    n_cols: int
    sketch_sigma: np.ndarray  # singular values of the sketch W

    @property
    def k_actual(self):
        return self.coeffs.shape[1]

    @property
    def P(self):
        return self.source_rows.shape[0]

    def rows_matrix(self, store):
        """The ``P x J`` matrix ``S`` (duplicated rows kept)."""
        return store.data[self.source_rows]

    def entry(self, store, j, k):
        """Entry ``j`` of approximate singular vector ``k`` in O(P) work."""
        if not 0 <= j < self.n_cols:
            raise InvalidInput(f"column index {j} out of range [0, {self.n_cols})")
        if not 0 <= k < self.k_actual:
            raise InvalidInput(f"component index {k} out of range [0, {self.k_actual})")
        return float(store.data[self.source_rows, j] @ self.coeffs[:, k])

    def materialize(self, store):
        """Dense ``J x K_actual`` matrix ``S.T @ coeffs``."""
        return self.rows_matrix(store).T @ self.coeffs


def orthonormalize(S, coeff_inits, drop_rtol=DROP_RTOL):
    """Gram-Schmidt on coefficient vectors under the metric ``M = S S^T``.

    Makes the vectors ``S.T @ u_k`` Euclidean-orthonormal while only ever
    touching ``P``-vectors after ``M`` is formed.  Each candidate is projected
    twice against the accepted set (modified Gram-Schmidt plus one
    reorthogonalisation pass).  Candidates whose residual M-norm squared falls
    below ``drop_rtol`` times their initial M-norm squared are dropped.

    Parameters
    ----------
    S : ndarray, shape (P, J)
    coeff_inits : ndarray, shape (P, K)
        Candidate vectors as columns.

    Returns
    -------
    ndarray, shape (P, K_actual)
    """
    S = np.asarray(S, dtype=np.float64)
    C = np.asarray(coeff_inits, dtype=np.float64)
    if C.ndim == 1:
        C = C[:, None]
    if C.shape[0] != S.shape[0]:
        raise InvalidInput(f"coefficient length {C.shape[0]} does not match {S.shape[0]} rows of S")
    if not np.all(np.isfinite(C)):
        raise InvalidInput("coefficient vectors contain non-finite entries")
    M = S @ S.T
    basis = []
    m_basis = []
    for k in range(C.shape[1]):
        u_hat = C[:, k]
        ref = float(u_hat @ M @ u_hat)
        if ref <= 0.0:
            if k == 0:
                raise DegenerateInput("first candidate has zero norm under S S^T")
            continue
        v = u_hat.copy()
        for _ in range(2):
            for u_l, mu_l in zip(basis, m_basis):
                v -= (v @ mu_l) * u_l
        mv = M @ v
        norm_sq = float(v @ mv)
        if norm_sq < drop_rtol * ref:
            continue
        scale = 1.0 / np.sqrt(norm_sq)
        basis.append(v * scale)
        m_basis.append(mv * scale)
    if not basis:
        return np.zeros((C.shape[0], 0))
    return np.column_stack(basis)


def coefficients_from_sketch(sketch, K):
    """Initial coefficients U_W[p, k] / (sigma_k * sqrt(P * F(i_p))).

    Components whose sketch singular value is at or below ``1e-10 * sigma_1``
    are skipped.
    """
    P = sketch.W.shape[0]
    factors = svd(sketch.W, rtol=RANK_RTOL)
    k_keep = min(K, factors.rank)
    denom = np.sqrt(P * sketch.row_prob)[:, None] * factors.sigma[None, :k_keep]
    return factors.U[:, :k_keep] / denom, factors.sigma


def describe_from_sketch(store, sketch, K, orthonormal=True):
    u_hat, sigma = coefficients_from_sketch(sketch, K)
    if orthonormal and u_hat.shape[1]:
        coeffs = orthonormalize(store.data[sketch.row_indices], u_hat)
    else:
        coeffs = u_hat
    if coeffs.shape[1] == 0:
        raise DegenerateInput("no component survived the rank cut")
    return Description(np.asarray(sketch.row_indices, dtype=np.int64), coeffs, store.cols, sigma)


def qisvd(store, K, P=None, rng=None, orthonormal=True):
    """Approximate the top-``K`` right singular vectors of the stored matrix.

    Parameters
    ----------
    store : MatrixStore
    K : int
        Requested component count.
    P : int, optional
        Rows and columns sampled into the sketch; defaults to ``ceil(1.5 K)``.
    rng : int, SeedSequence or Generator
    orthonormal : bool
        Apply the metric Gram-Schmidt step.  ``False`` returns the raw
        sketch-derived coefficients, whose vectors are only near-orthonormal.
    """
    K = int(K)
    if K < 1:
        raise InvalidInput("K must be >= 1")
    P = default_p(K) if P is None else int(P)
    if K > P:
        raise InvalidInput(f"K={K} exceeds P={P}")
    sketch = matrix_sampling(store, P, rng)
    return describe_from_sketch(store, sketch, K, orthonormal=orthonormal)


def default_p(K):
    return int(np.ceil(1.5 * K))


def description_entry(desc, store, j, k):
    return desc.entry(store, j, k)


def materialize(desc, store):
    return desc.materialize(store)
