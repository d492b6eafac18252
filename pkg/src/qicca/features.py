"""Second-order monomial feature expansion."""
from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded, InvalidInput

DEFAULT_MAX_COLUMNS = 10**7


@dataclass(frozen=True)
class FeatureMap:
    """Raw features followed by pairwise products ``x[a] * x[b]`` for ``a < b``.

    Pairs are enumerated lexicographically: (0, 1), (0, 2), ..., (1, 2), ...
    With ``include_squares`` the pairs run over ``a <= b`` instead.
    """

    input_dim: int
    include_squares: bool = False

    @property
    def pair_index(self):
        return np.triu_indices(self.input_dim, k=0 if self.include_squares else 1)

    @property
    def output_dim(self):
        D = self.input_dim
        return D + D * (D - 1) // 2 + (D if self.include_squares else 0)

    def __call__(self, X, max_columns=DEFAULT_MAX_COLUMNS):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            return self(X[None, :], max_columns)[0]
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise InvalidInput(f"expected {self.input_dim} columns, got shape {X.shape}")
        if self.output_dim > max_columns:
            raise CapacityExceeded(f"expansion would produce {self.output_dim} columns (cap {max_columns})")
        first, second = self.pair_index
        out = np.empty((X.shape[0], self.output_dim))
        out[:, :self.input_dim] = X
        np.multiply(X[:, first], X[:, second], out=out[:, self.input_dim:])
        return out


def expand_second_order(X, include_squares=False, max_columns=DEFAULT_MAX_COLUMNS):
    X = np.asarray(X, dtype=np.float64)
    D = X.shape[-1] if X.ndim else 0
    if D < 1:
        raise InvalidInput("need at least one input feature")
    return FeatureMap(D, include_squares)(X, max_columns)
