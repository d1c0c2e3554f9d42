"""Moment Hankel matrices, Vandermonde factors, maximal minors and numerical rank."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import kernels
from .errors import ShapeError
from .signal import Signal, moments

MAX_MINOR_SIZE = 10


def as_moment_vector(m) -> np.ndarray:
    m = np.asarray(m, dtype=float).reshape(-1)
    if m.size < 1:
        raise ShapeError("a moment vector needs at least one entry")
    return m


def build_hankel(m, d: int) -> np.ndarray:
    """d x d matrix with entry (i, j) = m[i + j]; uses m[0..2d-2]."""
    m = as_moment_vector(m)
    if d < 1:
        raise ShapeError("d must be positive")
    if m.size < 2 * d - 1:
        raise ShapeError(f"H_{d} needs {2 * d - 1} moments, got {m.size}")
    idx = np.add.outer(np.arange(d), np.arange(d))
    return m[idx]


def vandermonde(x, rows: int) -> np.ndarray:
    """rows x d matrix with entry (r, c) = x[c] ** r."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if rows < 1 or x.size < 1:
        raise ShapeError("need rows >= 1 and at least one node")
    return np.vander(x, rows, increasing=True).T


def hankel_from_signal(G: Signal, d: int, check: bool = False) -> np.ndarray:
    """H_d(G) from the first 2d-1 moments of G (which may have fewer than d nodes).

    With ``check=True`` the factorization ``V diag(a) V^T`` is formed as well
    and the two are required to agree to 1e-12 relative to the largest entry.
    """
    if G.d > d:
        raise ShapeError(f"signal has {G.d} nodes, more than d={d}")
    H = build_hankel(moments(G, 2 * d - 1), d)
    if check and G.d > 0:
        H2 = factored_hankel(G, d)
        scale = max(1.0, float(np.max(np.abs(H))))
        err = float(np.max(np.abs(H - H2)))
        if err > 1e-12 * scale:
            raise AssertionError(f"Hankel factorization mismatch {err:.3e}")
    return H


def factored_hankel(G: Signal, d: int) -> np.ndarray:
    """The triple product V^{0:d-1}(x) diag(a) V^{0:d-1}(x)^T."""
    if G.d == 0:
        return np.zeros((d, d))
    V = vandermonde(G.nodes, d)
    return (V * G.amplitudes) @ V.T


@dataclass(frozen=True)
class MinorReport:
    """The l-minor of largest absolute determinant.

    ``delta`` is that absolute value; ``value`` keeps the sign. Index sets are
    0-based and sorted.
    """

    order: int
    value: float
    row_indices: Tuple[int, ...]
    col_indices: Tuple[int, ...]
    delta: float

    @property
    def moment_indices(self) -> Tuple[int, ...]:
        """Moment indices i + j that enter the minor."""
        return tuple(sorted({i + j for i in self.row_indices for j in self.col_indices}))

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "value": self.value,
            "row_indices": list(self.row_indices),
            "col_indices": list(self.col_indices),
            "delta": self.delta,
        }


def delta_l(H, l: int, backend: str | None = None) -> MinorReport:
    """Maximum |det| over all C(d,l)^2 l-minors of H.

    Ties within a relative 64 eps go to the lexicographically first
    (row set, column set).
    """
    H = np.ascontiguousarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeError("H must be square")
    d = H.shape[0]
    if not 1 <= l <= d:
        raise ShapeError(f"minor order {l} outside 1..{d}")
    if d > MAX_MINOR_SIZE:
        raise ShapeError(f"exhaustive minor scan limited to d <= {MAX_MINOR_SIZE}")
    val, rows, cols = kernels.get_backend(backend).max_abs_minor(H, l)
    return MinorReport(l, float(val), rows, cols, abs(float(val)))


def numerical_rank(H, tolerance: float) -> int:
    """Count singular values above ``tolerance * sigma_max``; 0 for the zero matrix."""
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    s = np.linalg.svd(np.asarray(H, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tolerance * s[0]))
