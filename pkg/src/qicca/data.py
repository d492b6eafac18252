"""Synthetic generators and matrix file I/O.

Random numbers come from ``numpy.random.default_rng`` (PCG64); normal
variates use that generator's ``standard_normal`` (ziggurat).  Every
generator is a deterministic function of its arguments and seed.

Binary matrix format (little-endian)::

    8 bytes   magic  b"QCCAMAT1"
    u64       rows
    u64       cols
    f64 * rows * cols, row-major
"""
import csv
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InvalidInput, ParseError
from .matrix_store import as_generator

MAGIC = b"QCCAMAT1"
_HEADER = struct.Struct("<8sQQ")


@dataclass
class DatasetPair:
    X: np.ndarray
    Y: np.ndarray
    provenance: dict = field(default_factory=dict)


def gen_lowrank(I, J, r, rng=None):
    """``Z @ B`` with ``Z: I x r`` and ``B: r x J`` standard normal."""
    I, J, r = int(I), int(J), int(r)
    if min(I, J, r) < 1 or r > min(I, J):
        raise InvalidInput(f"need 1 <= r <= min(I, J), got I={I} J={J} r={r}")
    rng = as_generator(rng)
    Z = rng.standard_normal((I, r))
    B = rng.standard_normal((r, J))
    return Z @ B


def _pcca_parts(N, D1, D2, K, rng):
    N, D1, D2, K = int(N), int(D1), int(D2), int(K)
    if N < 2 or min(D1, D2, K) < 1 or K > min(D1, D2):
        raise InvalidInput(f"need N >= 2 and 1 <= K <= min(D1, D2), got N={N} D1={D1} D2={D2} K={K}")
    rng = as_generator(rng)
    Z = rng.standard_normal((N, K))
    B1 = rng.standard_normal((K, D1))
    B2 = rng.standard_normal((K, D2))
    E1 = rng.standard_normal((N, D1))
    E2 = rng.standard_normal((N, D2))
    return rng, Z, Z @ B1 + 0.5 * E1, Z @ B2 + 0.5 * E2


def gen_pcca(N, D1, D2, K, rng=None):
    """Paired views sharing a latent ``Z``: ``X = Z B1 + 0.5 E1``, ``Y = Z B2 + 0.5 E2``."""
    _, _, X, Y = _pcca_parts(N, D1, D2, K, rng)
    return DatasetPair(X, Y, {"generator": "pcca", "N": N, "D1": D1, "D2": D2, "K": K})


def gen_pcca_quadratic(N, D1, D2, K, rng=None, strength=1.0):
    """:func:`gen_pcca` with view 2 also driven by the squared latents.

    ``Y += strength * (Z**2 - 1) @ B3`` with ``B3: K x D2`` standard normal,
    drawn after all :func:`gen_pcca` blocks.  The shift by 1 keeps the added
    term zero-mean.
    """
    rng, Z, X, Y = _pcca_parts(N, D1, D2, K, rng)
    B3 = rng.standard_normal((Z.shape[1], Y.shape[1]))
    Y = Y + strength * (Z * Z - 1.0) @ B3
    return DatasetPair(X, Y, {"generator": "pcca_quadratic", "N": N, "D1": D1, "D2": D2, "K": K,
                              "strength": strength})


def _format_for(path, fmt):
    if fmt is not None:
        if fmt not in ("csv", "bin"):
            raise InvalidInput(f"unknown matrix format {fmt!r}")
        return fmt
    return "csv" if str(path).lower().endswith(".csv") else "bin"


def save_matrix(A, path, fmt=None):
    """Write ``A`` atomically (temp file then rename).  ``fmt`` is ``'csv'`` or ``'bin'``."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInput(f"expected a 2-D matrix, got shape {A.shape}")
    fmt = _format_for(path, fmt)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            if fmt == "bin":
                fh.write(_HEADER.pack(MAGIC, A.shape[0], A.shape[1]))
                fh.write(np.ascontiguousarray(A, dtype="<f8").tobytes())
            else:
                np.savetxt(fh, A, fmt="%.17g", delimiter=",")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_bin(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        payload = fh.read()
    if len(payload) != 8 * rows * cols:
        raise FormatError(f"{path}: header says {rows}x{cols} but payload holds {len(payload) // 8} values")
    return np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(rows, cols)


def _load_csv(path):
    rows = []
    width = None
    with open(path, newline="") as fh:
        for r, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(f"{path}: row {r} has {len(record)} fields, expected {width}")
            values = []
            for c, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"{path}: row {r}, column {c}: not a number: {cell!r}") from None
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def load_matrix(path, fmt=None):
    fmt = _format_for(path, fmt)
    return _load_bin(path) if fmt == "bin" else _load_csv(path)
