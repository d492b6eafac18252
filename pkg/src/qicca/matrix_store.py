"""Length-square sampling store over a dense matrix and the sketch built from it.

The store keeps one prefix-sum tree per row plus one tree over the squared
row norms, so a row is drawn with probability ||X[i]||^2 / ||X||_F^2 and a
column is drawn by picking one of a given set of rows uniformly and then
descending that row's tree.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateDistribution, DegenerateInput, InvalidInput
from .sampling_tree import SamplingTree


def as_generator(rng):
    """Accept a seed, a ``SeedSequence`` or a ``Generator``.

    Integer seeds go through ``numpy.random.default_rng`` (PCG64), which is
    the generator family used everywhere in this package.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class MatrixStore:
    """Dense ``I x J`` matrix with ``I + 1`` sampling trees.

    Attributes
    ----------
    data : ndarray, shape (I, J)
        Read-only copy of the input.
    row_nodes : ndarray, shape (I, 2 * cap)
        One heap-layout tree per row over the squared entries.
    row_norm_tree : SamplingTree
        Leaf ``i`` is the total of ``row_nodes[i]``.
    frob_sq : float
        ``||X||_F^2``, the root of ``row_norm_tree``.
    """

    def __init__(self, X):
        X = np.array(X, dtype=np.float64, copy=True)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise InvalidInput(f"expected a non-empty 2-D matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidInput("matrix contains non-finite entries")
        X.setflags(write=False)
        self.data = X
        n_rows, n_cols = X.shape
        self.col_cap = _kernels.capacity_for(n_cols)
        row_nodes = np.zeros((n_rows, 2 * self.col_cap), dtype=np.float64)
        row_nodes[:, self.col_cap:self.col_cap + n_cols] = X * X
        _kernels.fill_internal(row_nodes)
        self.row_nodes = row_nodes

        row_cap = _kernels.capacity_for(n_rows)
        norm_nodes = np.zeros(2 * row_cap, dtype=np.float64)
        norm_nodes[row_cap:row_cap + n_rows] = row_nodes[:, 1]
        _kernels.fill_internal(norm_nodes)
        self.row_norm_tree = SamplingTree(norm_nodes, n_rows)
        self.frob_sq = self.row_norm_tree.total
        if self.frob_sq <= 0.0:
            raise DegenerateInput("matrix is identically zero")

    @property
    def shape(self):
        return self.data.shape

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def row_norms_sq(self):
        return self.row_norm_tree.leaves

    def row_tree(self, i):
        return SamplingTree(self.row_nodes[i], self.cols)

    def row_probability(self, rows):
        """F(i) = ||X[i]||^2 / ||X||_F^2."""
        return self.row_norms_sq[rows] / self.frob_sq

    def column_probability(self, row_indices, cols):
        """G(j) = mean over p of X[i_p, j]^2 / ||X[i_p]||^2, evaluated exactly."""
        row_indices = np.asarray(row_indices, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        norms = self.row_norms_sq[row_indices]
        if np.any(norms <= 0.0):
            raise DegenerateDistribution("a referenced row is identically zero")
        block = self.data[np.ix_(row_indices, cols)]
        return ((block * block) / norms[:, None]).mean(axis=0)

    def sample_row(self, u):
        return self.row_norm_tree.sample(u)

    def sample_rows(self, us):
        return self.row_norm_tree.sample_many(us)

    def sample_column(self, row_indices, u1, u2):
        """Two-stage draw: pick ``row_indices[floor(u1 * P)]``, then descend its tree with ``u2``."""
        for u in (u1, u2):
            if not 0.0 <= u < 1.0:
                raise InvalidInput(f"u must lie in [0, 1), got {u}")
        return int(self.sample_columns(row_indices, np.array([u1]), np.array([u2]))[0])

    def sample_columns(self, row_indices, u1s, u2s):
        row_indices = np.asarray(row_indices, dtype=np.int64)
        if row_indices.size == 0:
            raise InvalidInput("row_indices must be non-empty")
        if row_indices.min() < 0 or row_indices.max() >= self.rows:
            raise InvalidInput("row index out of range")
        u1s = np.asarray(u1s, dtype=np.float64)
        u2s = np.asarray(u2s, dtype=np.float64)
        if u1s.shape != u2s.shape:
            raise InvalidInput("u1s and u2s must have the same length")
        if u1s.size and (min(u1s.min(), u2s.min()) < 0.0 or max(u1s.max(), u2s.max()) >= 1.0):
            raise InvalidInput("all uniforms must lie in [0, 1)")
        picked = row_indices[np.minimum((u1s * row_indices.size).astype(np.int64), row_indices.size - 1)]
        totals = self.row_norms_sq[picked]
        if np.any(totals <= 0.0):
            raise DegenerateDistribution("a referenced row is identically zero")
        return _kernels.descend_rows(self.row_nodes, self.col_cap, picked, u2s * totals)

    def check(self, rtol=1e-9):
        if abs(self.frob_sq - float(np.sum(self.data * self.data))) > rtol * self.frob_sq:
            return False
        row_tot = self.row_nodes[:, 1]
        return bool(np.all(np.abs(row_tot - self.row_norms_sq) <= rtol * np.maximum(row_tot, 1e-300)))

    def __repr__(self):
        return f"MatrixStore(shape={self.shape}, frob_sq={self.frob_sq:g})"


def build_store(X):
    return MatrixStore(X)


def sample_row(store, u):
    return store.sample_row(u)


def sample_column(store, row_indices, u1, u2):
    return store.sample_column(row_indices, u1, u2)


@dataclass
class SketchResult:
    """Importance-weighted ``P x P`` sketch and the indices it was built from."""

    W: np.ndarray
    row_indices: np.ndarray
    col_indices: np.ndarray
    row_prob: np.ndarray
    col_prob: np.ndarray


def sketch_entries(store, row_indices, col_indices, row_prob, col_prob):
    """W[p, q] = X[i_p, j_q] / (P * sqrt(F(i_p) * G(j_q)))."""
    P = len(row_indices)
    block = store.data[np.ix_(row_indices, col_indices)]
    return block / (P * np.sqrt(np.outer(row_prob, col_prob)))


def matrix_sampling(store, P, rng=None):
    """Draw ``P`` rows from F and ``P`` columns from G (with replacement) and build W.

    The generator consumes three blocks of ``P`` uniforms in a fixed order:
    row draws, row-picker draws, within-row draws.
    """
    P = int(P)
    if P < 1:
        raise InvalidInput("P must be >= 1")
    rng = as_generator(rng)
    u_rows = rng.random(P)
    u_pick = rng.random(P)
    u_cols = rng.random(P)
    row_indices = store.sample_rows(u_rows)
    col_indices = store.sample_columns(row_indices, u_pick, u_cols)
    row_prob = store.row_probability(row_indices)
    col_prob = store.column_probability(row_indices, col_indices)
    W = sketch_entries(store, row_indices, col_indices, row_prob, col_prob)
    return SketchResult(W, row_indices, col_indices, row_prob, col_prob)
