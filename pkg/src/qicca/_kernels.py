"""Hot inner loops: prefix-sum tree descents.

Every kernel exists twice, a numba version (``*_nb``) and a vectorised numpy
version (``*_np``).  The module-level names without suffix point at whichever
backend ``qicca._backend.BACKEND`` selected.  Both versions apply the same
descent rule so they return identical indices for identical targets.

Trees use the implicit heap layout: ``nodes`` has length ``2 * cap`` with the
root at position 1, node ``i`` has children ``2i`` and ``2i + 1`` and leaf
``n`` sits at ``cap + n``.  Position 0 is unused.
"""
import numpy as np

from ._backend import BACKEND, njit


def capacity_for(n):
    """Smallest power of two >= n."""
    cap = 1
    while cap < n:
        cap <<= 1
    return cap


def fill_internal(nodes):
    """Recompute all internal nodes from the leaves, bottom-up.

    ``nodes`` is either a single tree (1-D) or a stack of trees with equal
    capacity (2-D, one tree per row).  Sums run leaf-to-root pairwise.
    """
    cap = nodes.shape[-1] // 2
    width = cap // 2
    while width >= 1:
        nodes[..., width:2 * width] = nodes[..., 2 * width:4 * width:2] + nodes[..., 2 * width + 1:4 * width:2]
        width //= 2
    return nodes


# -- numba ---------------------------------------------------------------


# Descents advance BLOCK independent draws level by level so their memory
# loads overlap; on trees larger than cache this hides most of the latency.
BLOCK = 16


@njit(cache=True)
def descend_nb(nodes, cap, targets):
    m_total = targets.shape[0]
    out = np.empty(m_total, dtype=np.int64)
    t = np.empty(BLOCK, dtype=np.float64)
    idx = np.empty(BLOCK, dtype=np.int64)
    for start in range(0, m_total, BLOCK):
        width = min(BLOCK, m_total - start)
        for b in range(width):
            t[b] = targets[start + b]
            idx[b] = 1
        level = cap
        while level > 1:
            for b in range(width):
                i = 2 * idx[b]
                left = nodes[i]
                if t[b] < left or nodes[i + 1] <= 0.0:
                    idx[b] = i
                else:
                    t[b] -= left
                    idx[b] = i + 1
            level >>= 1
        for b in range(width):
            out[start + b] = idx[b] - cap
    return out


@njit(cache=True)
def descend_rows_nb(row_nodes, cap, rows, targets):
    out = np.empty(targets.shape[0], dtype=np.int64)
    for m in range(targets.shape[0]):
        t = targets[m]
        r = rows[m]
        i = 1
        while i < cap:
            left = row_nodes[r, 2 * i]
            right = row_nodes[r, 2 * i + 1]
            if t < left or right <= 0.0:
                i = 2 * i
            else:
                t -= left
                i = 2 * i + 1
        out[m] = i - cap
    return out


@njit(cache=True)
def linear_scan_nb(weights, targets):
    n = weights.shape[0]
    out = np.empty(targets.shape[0], dtype=np.int64)
    for m in range(targets.shape[0]):
        t = targets[m]
        acc = 0.0
        k = n - 1
        for j in range(n):
            acc += weights[j]
            if t < acc:
                k = j
                break
        # land on a positive-weight entry when rounding pushed t past the end
        while weights[k] <= 0.0 and k > 0:
            k -= 1
        out[m] = k
    return out


# -- numpy ---------------------------------------------------------------


def descend_np(nodes, cap, targets):
    t = np.array(targets, dtype=np.float64, copy=True)
    idx = np.ones(t.shape[0], dtype=np.int64)
    while cap > 1:
        left_pos = 2 * idx
        left = nodes[left_pos]
        right = nodes[left_pos + 1]
        go_right = (t >= left) & (right > 0.0)
        t = np.where(go_right, t - left, t)
        idx = left_pos + go_right
        cap //= 2
    return idx - nodes.shape[0] // 2


def descend_rows_np(row_nodes, cap, rows, targets):
    t = np.array(targets, dtype=np.float64, copy=True)
    rows = np.asarray(rows, dtype=np.int64)
    idx = np.ones(t.shape[0], dtype=np.int64)
    level = cap
    while level > 1:
        left_pos = 2 * idx
        left = row_nodes[rows, left_pos]
        right = row_nodes[rows, left_pos + 1]
        go_right = (t >= left) & (right > 0.0)
        t = np.where(go_right, t - left, t)
        idx = left_pos + go_right
        level //= 2
    return idx - cap


def linear_scan_np(weights, targets):
    out = np.empty(len(targets), dtype=np.int64)
    positive = np.flatnonzero(weights > 0.0)
    for m, t in enumerate(targets):
        # naive: rebuild the running sum for every draw
        k = int(np.searchsorted(np.cumsum(weights), t, side="right"))
        k = min(k, weights.shape[0] - 1)
        if weights[k] <= 0.0:
            k = int(positive[np.searchsorted(positive, k, side="right") - 1])
        out[m] = k
    return out


if BACKEND == "numba":
    descend = descend_nb
    descend_rows = descend_rows_nb
    linear_scan = linear_scan_nb
else:
    descend = descend_np
    descend_rows = descend_rows_np
    linear_scan = linear_scan_np
