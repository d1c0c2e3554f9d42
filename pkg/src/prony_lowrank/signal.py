"""Spike-train signals F = sum_j a_j delta(x - x_j) and their power moments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    BadNoise,
    BadParams,
    BadScale,
    DegenerateNodes,
    NotNormalized,
    ShapeError,
    ZeroAmplitude,
)

DUPLICATE_TOL = 1e-12


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """Amplitudes and strictly increasing nodes of a spike train.

    ``d == 0`` is the zero signal. Build instances with :func:`validate_signal`
    (or :meth:`Signal.from_arrays`); the constructor itself checks the
    invariants but does not sort.
    """

    amplitudes: np.ndarray
    nodes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes)
        x = _frozen(self.nodes)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "nodes", x)
        if a.shape != x.shape:
            raise ShapeError(f"{a.size} amplitudes but {x.size} nodes")
        if not (np.isfinite(a).all() and np.isfinite(x).all()):
            raise ShapeError("non-finite amplitude or node")
        if not a.all():
            raise ZeroAmplitude(f"zero amplitude in {a.tolist()}")
        if x.size > 1:
            gmin = float((x[1:] - x[:-1]).min())
            if gmin < -DUPLICATE_TOL:
                raise ShapeError("nodes must be sorted; use validate_signal")
            if gmin < DUPLICATE_TOL:
                raise DegenerateNodes(f"nodes closer than {DUPLICATE_TOL}: {x.tolist()}")

    @classmethod
    def from_arrays(cls, amplitudes, nodes) -> "Signal":
        return validate_signal(amplitudes, nodes)

    @classmethod
    def zero(cls) -> "Signal":
        return cls(np.empty(0), np.empty(0))

    @property
    def d(self) -> int:
        return int(self.nodes.size)

    @property
    def is_normalized(self) -> bool:
        return bool(np.all(np.abs(self.nodes) <= 1) and np.all(np.abs(self.amplitudes) <= 1))

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes) and np.array_equal(
            self.nodes, other.nodes
        )

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(amplitudes={self.amplitudes.tolist()}, nodes={self.nodes.tolist()})"

    def to_json(self) -> dict:
        return {"amplitudes": self.amplitudes.tolist(), "nodes": self.nodes.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Signal":
        try:
            return validate_signal(obj["amplitudes"], obj["nodes"])
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"not a signal object: {exc}") from exc


class NormalizedSignal(Signal):
    """A signal whose nodes and amplitudes all lie in [-1, 1]."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_normalized:
            raise NotNormalized(f"signal leaves the unit box: {self!r}")


def normalized(F: Signal) -> NormalizedSignal:
    """Re-tag ``F`` as normalized, raising NotNormalized if it is not."""
    if isinstance(F, NormalizedSignal):
        return F
    return NormalizedSignal(F.amplitudes, F.nodes)


def validate_signal(amplitudes, nodes) -> Signal:
    """Build a Signal, sorting nodes and permuting amplitudes to match.

    Raises
    ------
    ShapeError
        lengths differ or inputs are not 1-D.
    ZeroAmplitude
        some ``a_i == 0``.
    DegenerateNodes
        two nodes closer than ``1e-12``.
    """
    a = np.asarray(amplitudes, dtype=float)
    x = np.asarray(nodes, dtype=float)
    if a.ndim != 1 or x.ndim != 1:
        raise ShapeError("amplitudes and nodes must be 1-D")
    if a.size != x.size:
        raise ShapeError(f"{a.size} amplitudes but {x.size} nodes")
    order = np.argsort(x, kind="stable")
    return Signal(a[order], x[order])


@dataclass(frozen=True)
class RegularityParams:
    eta: float
    gamma: float
    h: Optional[float] = None

    def __post_init__(self):
        if not self.eta > 0:
            raise BadParams(f"eta must be positive, got {self.eta}")
        if not 0 < self.gamma <= 1:
            raise BadParams(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.h is not None and not 0 < self.h <= 1:
            raise BadScale(f"h must lie in (0, 1], got {self.h}")

    def valid_for(self, d: int) -> bool:
        """True when ``eta <= 2/(d-1)``, the largest gap d nodes in [-1, 1] allow."""
        return d < 2 or self.eta <= 2.0 / (d - 1)


def moments(F: Signal, count: int) -> np.ndarray:
    """Return ``(m_0, ..., m_{count-1})`` with ``m_k = sum_j a_j x_j**k``."""
    if count < 1:
        raise ShapeError("count must be at least 1")
    if F.d == 0:
        return np.zeros(count)
    powers = np.vander(F.nodes, count, increasing=True)
    return F.amplitudes @ powers


def check_regularity(F: Signal, params: RegularityParams) -> bool:
    """Whether F is (eta, gamma)-regular: node gaps >= eta and |a_j| >= gamma."""
    if F.d < 1:
        raise ShapeError("regularity needs at least one node")
    if not F.is_normalized:
        raise NotNormalized(f"signal leaves the unit box: {F!r}")
    gap_ok = F.d < 2 or float(np.min(np.diff(F.nodes))) >= params.eta
    return bool(gap_ok and float(np.min(np.abs(F.amplitudes))) >= params.gamma)


def downscale_cluster(G: Signal, h: float) -> Signal:
    """Shrink the nodes of G by ``h`` toward the origin; amplitudes are kept."""
    if not 0 < h <= 1:
        raise BadScale(f"h must lie in (0, 1], got {h}")
    if h == 1:
        return G
    return type(G)(G.amplitudes, h * G.nodes)


def perturb_moments(m, epsilon: float, rng_seed: int) -> np.ndarray:
    """Add independent uniform noise on ``[-epsilon, epsilon]`` to each moment."""
    if epsilon < 0:
        raise BadNoise(f"epsilon must be >= 0, got {epsilon}")
    m = np.asarray(m, dtype=float)
    if epsilon == 0:
        return m.copy()
    rng = np.random.default_rng(rng_seed)
    nu = m + rng.uniform(-epsilon, epsilon, size=m.shape)
    # rounding in the addition can overshoot epsilon by an ulp
    over = np.abs(nu - m) > epsilon
    while np.any(over):
        nu[over] = np.nextafter(nu[over], m[over])
        over = np.abs(nu - m) > epsilon
    return nu


def random_regular_signal(
    rng: np.random.Generator, d: int, eta: float, gamma: float
) -> NormalizedSignal:
    """Draw an (eta, gamma)-regular signal in the unit box.

    Nodes: d points in [-1, 1] with every gap >= eta, sampled by spreading the
    slack ``2 - (d-1)*eta`` uniformly. Amplitudes: random sign times a
    magnitude uniform on [gamma, 1]. At the packing limit eta = 2/(d-1) the
    nodes are the float equispaced grid, whose gaps may fall a few ulps short
    of eta (d = 6 is one such case).
    """
    params = RegularityParams(eta, gamma)
    if not params.valid_for(d):
        raise BadParams(f"eta={eta} too large for d={d}")
    slack = max(2.0 - (d - 1) * eta, 0.0)
    offsets = np.sort(rng.uniform(0.0, slack, size=d))
    x = -1.0 + offsets + eta * np.arange(d)
    # float rounding can leave a gap an ulp short of eta; nudge upward
    for i in range(1, d):
        while x[i] - x[i - 1] < eta:
            x[i] = np.nextafter(x[i], np.inf)
    if x[-1] > 1.0:
        # tight packing (eta at or within ulps of 2/(d-1)): equispaced grid
        x = np.linspace(-1.0, 1.0, d)
    x = np.clip(x, -1.0, 1.0)
    mags = rng.uniform(gamma, 1.0, size=d)
    signs = rng.choice([-1.0, 1.0], size=d)
    return NormalizedSignal(signs * mags, x)
