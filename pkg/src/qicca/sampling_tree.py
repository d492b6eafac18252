"""Prefix-sum binary tree for sampling index ``n`` with probability x(n)^2 / ||x||^2."""
import numpy as np

from . import _kernels
from .errors import DegenerateDistribution, InvalidInput


class SamplingTree:
    """Complete binary tree over the squared entries of a vector.

    Leaf ``n`` holds ``x[n] ** 2``; every internal node holds the sum of its
    two children, so the root is ``||x||^2``.  Non-power-of-two lengths are
    padded with zero leaves, which the descent never selects.

    Indices are 0-based throughout.

    The tree is safe for concurrent sampling once built; :meth:`update`
    needs exclusive access.
    """

    __slots__ = ("n", "cap", "nodes")

    def __init__(self, nodes, n):
        self.nodes = nodes
        self.n = int(n)
        self.cap = nodes.shape[0] // 2

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] == 0:
            raise InvalidInput("expected a non-empty 1-D vector")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("vector contains non-finite entries")
        cap = _kernels.capacity_for(values.shape[0])
        nodes = np.zeros(2 * cap, dtype=np.float64)
        nodes[cap:cap + values.shape[0]] = values * values
        _kernels.fill_internal(nodes)
        return cls(nodes, values.shape[0])

    @property
    def total(self):
        return float(self.nodes[1])

    @property
    def leaves(self):
        return self.nodes[self.cap:self.cap + self.n]

    @property
    def depth(self):
        """Number of internal nodes visited by one descent."""
        return self.cap.bit_length() - 1

    def probabilities(self):
        return self.leaves / self.total

    def sample(self, u):
        """Index ``n`` with ``prefix(n) <= u * total < prefix(n + 1)``."""
        if not 0.0 <= u < 1.0:
            raise InvalidInput(f"u must lie in [0, 1), got {u}")
        total = self.total
        if total <= 0.0:
            raise DegenerateDistribution("tree has zero total weight")
        nodes = self.nodes
        t = u * total
        i = 1
        while i < self.cap:
            left = nodes[2 * i]
            if t < left or nodes[2 * i + 1] <= 0.0:
                i = 2 * i
            else:
                t -= left
                i = 2 * i + 1
        return i - self.cap

    def sample_many(self, us):
        """Vectorised :meth:`sample` over an array of uniforms."""
        us = np.asarray(us, dtype=np.float64)
        if us.size and (us.min() < 0.0 or us.max() >= 1.0):
            raise InvalidInput("all uniforms must lie in [0, 1)")
        total = self.total
        if total <= 0.0:
            raise DegenerateDistribution("tree has zero total weight")
        return _kernels.descend(self.nodes, self.cap, us * total)

    def update(self, n, value):
        """Set leaf ``n`` to ``value ** 2`` and refresh its ancestors."""
        if not 0 <= n < self.n:
            raise InvalidInput(f"leaf index {n} out of range [0, {self.n})")
        value = float(value)
        if not np.isfinite(value):
            raise InvalidInput("value must be finite")
        nodes = self.nodes
        i = self.cap + n
        nodes[i] = value * value
        i //= 2
        while i >= 1:
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1]
            i //= 2
        return self

    def check(self, rtol=1e-9):
        """Return True if the sum and non-negativity invariants hold."""
        nodes = self.nodes
        if np.any(nodes < 0.0):
            return False
        atol = rtol * max(self.total, 0.0)
        internal = np.arange(1, self.cap)
        if not np.all(np.abs(nodes[internal] - nodes[2 * internal] - nodes[2 * internal + 1]) <= atol):
            return False
        return abs(self.total - self.leaves.sum()) <= atol

    def __repr__(self):
        return f"SamplingTree(n={self.n}, total={self.total:g})"


def build_tree(values):
    return SamplingTree.from_values(values)


def sample_index(tree, u):
    return tree.sample(u)


def update_leaf(tree, n, value):
    return tree.update(n, value)
