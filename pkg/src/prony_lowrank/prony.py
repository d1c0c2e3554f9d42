"""Classical Prony inversion: recover an l-node signal from its first 2l moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoRealSolution, ShapeError, ZeroMass
from .hankel import as_moment_vector, build_hankel, numerical_rank, vandermonde
from .signal import DUPLICATE_TOL, Signal, validate_signal

IMAG_TOL = 1e-8
AMP_DROP_TOL = 1e-10
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class PronyProblem:
    moments: np.ndarray
    target_nodes: int

    def __post_init__(self):
        m = as_moment_vector(self.moments)
        object.__setattr__(self, "moments", m)
        if self.target_nodes < 1:
            raise ShapeError("target_nodes must be >= 1")
        if m.size != 2 * self.target_nodes:
            raise ShapeError(
                f"{self.target_nodes} nodes need exactly {2 * self.target_nodes} moments, got {m.size}"
            )


@dataclass(frozen=True)
class PronySolution:
    signal: Signal
    residual: float

    def to_json(self) -> dict:
        return {"signal": self.signal.to_json(), "residual": self.residual}


def _fit_amplitudes(m, nodes):
    V = vandermonde(nodes, m.size)
    a, *_ = np.linalg.lstsq(V, m, rcond=None)
    return a


def _residual(m, a, nodes) -> float:
    if nodes.size == 0:
        return float(np.max(np.abs(m)))
    return float(np.max(np.abs(vandermonde(nodes, m.size) @ a - m)))


def _prony_roots(m, r):
    """Roots of z^r + c_{r-1} z^{r-1} + ... + c_0 with H_r c = -(m_r..m_{2r-1})."""
    H = build_hankel(m[: 2 * r - 1], r)
    c = np.linalg.solve(H, -m[r : 2 * r])
    companion = np.zeros((r, r))
    companion[1:, :-1] = np.eye(r - 1)
    companion[:, -1] = -c
    return np.linalg.eigvals(companion)


def prony_solve(p: PronyProblem) -> PronySolution:
    """Solve sum_j a_j x_j^k = m_k, k < 2l, with real nodes and nonzero amplitudes.

    Node counts r = 1..l are tried in turn and the first one whose fit meets
    ``residual <= 1e-8 * (1 + max|m|)`` is returned, so rank-deficient data
    yield the representation with fewest nodes.

    Raises
    ------
    NoRealSolution
        every admissible r produced complex or repeated roots, or no fit met
        the residual bound.
    """
    m = p.moments
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        return PronySolution(Signal.zero(), 0.0)
    tol = RESIDUAL_RTOL * (1.0 + scale)
    reasons = []
    for r in range(1, p.target_nodes + 1):
        H = build_hankel(m[: 2 * r - 1], r)
        if numerical_rank(H, 1e-13) < r:
            reasons.append(f"r={r}: singular Hankel block")
            continue
        z = _prony_roots(m, r)
        if np.any(np.abs(z.imag) > IMAG_TOL * (1.0 + np.abs(z))):
            reasons.append(f"r={r}: complex roots")
            continue
        nodes = np.sort(z.real)
        if r > 1 and np.min(np.diff(nodes)) <= DUPLICATE_TOL * max(1.0, float(np.max(np.abs(nodes)))):
            reasons.append(f"r={r}: repeated roots")
            continue
        a = _fit_amplitudes(m, nodes)
        keep = np.abs(a) > AMP_DROP_TOL
        if not np.all(keep):
            nodes = nodes[keep]
            a = _fit_amplitudes(m, nodes) if nodes.size else np.empty(0)
        res = _residual(m, a, nodes)
        if res <= tol:
            return PronySolution(validate_signal(a, nodes), res)
        reasons.append(f"r={r}: residual {res:.3e}")
    raise NoRealSolution("; ".join(reasons))


def fit_single_node(m) -> Signal:
    """The one-node signal a delta(x - t) with a = m_0 and t = m_1 / m_0."""
    m = as_moment_vector(m)
    if m.size < 2:
        raise ShapeError("need m_0 and m_1")
    if m[0] == 0:
        raise ZeroMass("m_0 = 0: only the zero signal matches")
    return Signal([m[0]], [m[1] / m[0]])
