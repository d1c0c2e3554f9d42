"""Signals whose first three moments are matched by at most one node.

For F = (a, x) with d >= 2 nodes there are two mutually exclusive ways to
belong to this set:

* ``CaseI``: m_0(F) = 0 and a lies in the null space of the 3 x d
  Vandermonde block, so the zero signal matches m_0, m_1, m_2.
* ``CaseII``: m_0(F) != 0 and a^T D(x) a = 0, where D is the squared
  distance matrix of the nodes; the matching node is (m_0, m_1 / m_0).

The zero set in case II is parametrized as
``a = lambda * (1/d + alpha * xbar + u)`` with ``u`` orthogonal to 1 and
``xbar = x - mean(x)``. Expanding the form gives

    a^T D a / (2 lambda^2) = S/d^2 - alpha^2 |xbar|^4 + alpha (xbar^T D 1)/d + (1^T D u)/d

with ``S = sum_{i<j} D_ij``. The last term vanishes only for u = 0 (or
d = 2), so the admissible ``alpha`` depends on ``u``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .errors import BadLambda, DegenerateNodes, NoRealRoots, ShapeError, ZeroMass
from .hankel import vandermonde
from .prony import fit_single_node
from .signal import DUPLICATE_TOL, Signal, validate_signal

TOL_REL = 1e-9
GAP_TOL = 1e-9
ZERO_ENTRY_TOL = 1e-12
SMALL_D = 32


def distance_matrix(x, check: bool = False) -> np.ndarray:
    """Matrix of squared node differences D_ij = (x_i - x_j)^2."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size < 1:
        raise ShapeError("need at least one node")
    D = np.subtract.outer(x, x) ** 2
    if check:
        s = x * x
        D2 = s[:, None] + s[None, :] - 2.0 * np.outer(x, x)
        err = float(np.max(np.abs(D - D2)))
        if err > 1e-12 * max(1.0, float(np.max(s))):
            raise AssertionError(f"distance matrix factorization mismatch {err:.3e}")
    return D


def _pair_arrays(a, x):
    a = np.asarray(a, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != x.shape:
        raise ShapeError(f"{a.size} amplitudes but {x.size} nodes")
    return a, x


def quad_form(a, x) -> float:
    """a^T D(x) a, evaluated as 2 * sum_{i<j} a_i a_j (x_i - x_j)^2."""
    a, x = _pair_arrays(a, x)
    if a.size <= SMALL_D:
        # plain loop: index arrays cost more than the arithmetic at this size
        pairs = list(zip(a.tolist(), x.tolist()))
        terms = [ai * aj * (xi - xj) ** 2 for (ai, xi), (aj, xj) in itertools.combinations(pairs, 2)]
    else:
        i, j = np.triu_indices(a.size, 1)
        terms = (a[i] * a[j] * (x[i] - x[j]) ** 2).tolist()
    return 2.0 * math.fsum(terms)


def quad_form_matrix(a, x) -> float:
    """Same quantity through the full matrix product, for cross-checks."""
    a, x = _pair_arrays(a, x)
    return float(a @ distance_matrix(x) @ a)


def quad_tolerance(a, x, tol_rel: float = TOL_REL) -> float:
    """Zero threshold for the form: tol_rel * |a|^2 * max D."""
    a, x = _pair_arrays(a, x)
    span = float(np.max(x) - np.min(x)) if x.size else 0.0
    return tol_rel * float(a @ a) * span * span


def m2_gap(F: Signal, check: bool = True) -> float:
    """m_2(Ft) - m_2(F), where Ft is the single node matching m_0 and m_1.

    Evaluated as ``-a^T D a / (2 sum a)``. With ``check`` the single-node
    fit is also carried out (see :func:`m2_gap_direct`) and the two must
    agree to a relative 1e-10.
    """
    if F.d < 2:
        raise ShapeError("m2_gap needs at least two nodes")
    m0 = math.fsum(F.amplitudes)
    if m0 == 0:
        raise ZeroMass("m_0 = 0")
    formula = -quad_form(F.amplitudes, F.nodes) / (2.0 * m0)
    if check:
        direct = m2_gap_direct(F)
        if abs(formula - direct) > 1e-10 * max(abs(formula), abs(direct)):
            raise AssertionError(f"m2_gap paths disagree: {direct!r} vs {formula!r}")
    return formula


def m2_gap_direct(F: Signal) -> float:
    """m_2(Ft) - m_2(F) by fitting Ft = (m_0, m_1/m_0) and differencing moments.

    Runs in exact rational arithmetic on the float inputs, since
    ``m_1^2/m_0 - m_2`` cancels badly in floating point when nodes are close.
    """
    a = [Fraction(v) for v in F.amplitudes.tolist()]
    x = [Fraction(v) for v in F.nodes.tolist()]
    m0 = sum(a)
    if m0 == 0:
        raise ZeroMass("m_0 = 0")
    m1 = sum(ai * xi for ai, xi in zip(a, x))
    m2 = sum(ai * xi * xi for ai, xi in zip(a, x))
    t = m1 / m0
    return float(m0 * t * t - m2)


@dataclass(frozen=True)
class CenteredNodes:
    mean: float
    centered: np.ndarray
    norm4: float


def center_nodes(x) -> CenteredNodes:
    x = np.asarray(x, dtype=float).reshape(-1)
    mu = float(np.mean(x))
    xb = x - mu
    n2 = float(xb @ xb)
    return CenteredNodes(mu, xb, n2 * n2)


@dataclass(frozen=True)
class AlphaRoots:
    """Roots alpha1 >= alpha2 of the amplitude quadratic, with c1 = -c2 >= 0."""

    alpha1: float
    alpha2: float
    c1: float
    c2: float

    def root(self, branch: int) -> float:
        if branch == 1:
            return self.alpha1
        if branch == 2:
            return self.alpha2
        raise ValueError(f"branch must be 1 or 2, got {branch}")


def _check_nodes(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size < 2:
        raise DegenerateNodes("need at least two nodes")
    xs = np.sort(x)
    if np.min(np.diff(xs)) < DUPLICATE_TOL:
        raise DegenerateNodes(f"coincident nodes in {x.tolist()}")
    return x


def alpha_roots(x, u=None) -> AlphaRoots:
    """Solve S/d^2 - alpha^2 |xbar|^4 + alpha (xbar^T D 1)/d + (1^T D u)/d = 0.

    ``u`` must be orthogonal to 1 and xbar; omitted, it is zero and the
    discriminant is a sum of squares, so both roots are real and distinct.

    Raises
    ------
    DegenerateNodes
        fewer than two nodes, or two coincide.
    NoRealRoots
        the u-term drives the discriminant negative.
    """
    x = _check_nodes(x)
    d = x.size
    D = distance_matrix(x)
    cn = center_nodes(x)
    p = float(cn.centered @ D.sum(axis=1)) / d
    const = float(np.sum(np.triu(D, 1))) / d**2
    if u is not None:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.size != d:
            raise ShapeError(f"u has length {u.size}, expected {d}")
        const += float(D.sum(axis=0) @ u) / d
    disc = p * p + 4.0 * cn.norm4 * const
    if disc < 0:
        raise NoRealRoots(f"discriminant {disc:.3e} < 0")
    c = float(np.sqrt(disc))
    return AlphaRoots((p + c) / (2.0 * cn.norm4), (p - c) / (2.0 * cn.norm4), c, -c)


def complement_basis(x) -> np.ndarray:
    """Orthonormal basis (d x (d-2)) of the complement of span(1, xbar).

    Gram-Schmidt (two passes) over 1, xbar, e_1, ..., e_d in that order,
    keeping the first d - 2 standard-basis survivors.
    """
    x = _check_nodes(x)
    d = x.size
    q = [np.ones(d) / np.sqrt(d)]
    xb = center_nodes(x).centered
    q.append(xb / np.linalg.norm(xb))
    out = []
    for i in range(d):
        if len(out) == d - 2:
            break
        v = np.zeros(d)
        v[i] = 1.0
        for _ in range(2):
            for w in q + out:
                v = v - (w @ v) * w
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            out.append(v / nv)
    return np.column_stack(out) if out else np.zeros((d, 0))


@dataclass(frozen=True)
class Rejection:
    """A sampled amplitude vector that leaves the parameter space."""

    reason: str
    amplitudes: Optional[np.ndarray] = None


def sample_P(x, branch: int, lam: float, u_coeffs) -> Signal | Rejection:
    """Amplitudes lam * (1/d + alpha_branch(x, u) * xbar + u) on nodes x.

    ``u = B @ u_coeffs`` with ``B = complement_basis(x)``. Returns a
    :class:`Rejection` when an entry of the amplitude vector vanishes (to
    1e-12 relative) or when no real alpha exists for this u.
    """
    if lam == 0:
        raise BadLambda("lambda must be nonzero")
    x = _check_nodes(x)
    d = x.size
    B = complement_basis(x)
    u_coeffs = np.asarray(u_coeffs, dtype=float).reshape(-1)
    if u_coeffs.size != B.shape[1]:
        raise ShapeError(f"expected {B.shape[1]} complement coefficients, got {u_coeffs.size}")
    u = B @ u_coeffs
    try:
        alpha = alpha_roots(x, u).root(branch)
    except NoRealRoots as exc:
        return Rejection(str(exc))
    a = lam * (np.full(d, 1.0 / d) + alpha * center_nodes(x).centered + u)
    if np.any(np.abs(a) <= ZERO_ENTRY_TOL * np.max(np.abs(a))):
        return Rejection("zero amplitude entry", a)
    F = validate_signal(a, x)
    q = abs(quad_form(F.amplitudes, F.nodes))
    if q > quad_tolerance(F.amplitudes, F.nodes):
        raise AssertionError(f"sampled amplitudes miss the zero set: {q:.3e}")
    return F


def decompose_amplitudes(a, x) -> Tuple[float, float, np.ndarray]:
    """Write a = lam * (1/d + alpha * xbar + B c); return (lam, alpha, c)."""
    a, x = _pair_arrays(a, x)
    lam = float(np.sum(a))
    if lam == 0:
        raise ZeroMass("sum of amplitudes is zero")
    v = a / lam
    xb = center_nodes(x).centered
    alpha = float(v @ xb) / float(xb @ xb)
    B = complement_basis(x)
    return lam, alpha, B.T @ v


class SigmaCase(str, enum.Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    NOT_MEMBER = "NotMember"


@dataclass(frozen=True)
class SigmaCertificate:
    member: bool
    case_tag: SigmaCase
    witness: Optional[Signal]
    quad_value: float
    moment_gaps: Tuple[float, float, float]

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "case": self.case_tag.value,
            "witness": None if self.witness is None else self.witness.to_json(),
            "quad_value": self.quad_value,
            "moment_gaps": list(self.moment_gaps),
        }


def sigma_membership(F: Signal, tol_rel: float = TOL_REL, gap_tol: float = GAP_TOL) -> SigmaCertificate:
    """Decide whether at most one node matches m_0, m_1, m_2 of F.

    ``m_0`` counts as zero when ``|m_0| <= tol_rel * sum|a|``; the form
    counts as zero below :func:`quad_tolerance`. A member must also have all
    three witness gaps within ``gap_tol``. Single-node inputs are answered
    NotMember with no witness.
    """
    a, x = F.amplitudes, F.nodes
    q = quad_form(a, x) if F.d >= 2 else 0.0
    if F.d < 2:
        return SigmaCertificate(False, SigmaCase.NOT_MEMBER, None, q, (np.nan,) * 3)
    V = vandermonde(x, 3)
    m = V @ a
    abs_m = np.abs(V) @ np.abs(a)
    if abs(m[0]) <= tol_rel * abs_m[0]:
        witness = Signal.zero()
        gaps = tuple(float(g) for g in m)
        ok = abs(m[1]) <= tol_rel * abs_m[1] and abs(m[2]) <= tol_rel * abs_m[2]
        ok = ok and max(abs(g) for g in gaps) <= gap_tol
        tag = SigmaCase.CASE_I if ok else SigmaCase.NOT_MEMBER
        return SigmaCertificate(ok, tag, witness, q, gaps)
    witness = fit_single_node(m)
    w, t = float(witness.amplitudes[0]), float(witness.nodes[0])
    m0, m1, m2 = (float(v) for v in m)
    gaps = (m0 - w, m1 - w * t, m2 - w * t * t)
    ok = abs(q) <= quad_tolerance(a, x, tol_rel) and max(abs(g) for g in gaps) <= gap_tol
    tag = SigmaCase.CASE_II if ok else SigmaCase.NOT_MEMBER
    return SigmaCertificate(ok, tag, witness, q, gaps)
