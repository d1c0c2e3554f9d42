"""Lower bounds on the moment error of low-rank approximants.

For F in the unit box with d nodes and any Ft with at most l - 1 nodes,

    |mbar(F) - mbar(Ft)| >= min(1, delta_l(F) / zeta(d, l)),
    zeta(d, l) = sqrt(2l - 1) * l^2 * l! * (d + 1)^(l - 1),

where mbar holds the first 2d - 1 moments and delta_l is the largest
absolute l-minor of H_d(F). The bound also holds when the distance is taken
only over the moments entering the maximizing minor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import BadParams, BadScale, ShapeError
from .hankel import MinorReport, delta_l, hankel_from_signal
from .signal import RegularityParams, Signal, normalized

MAX_D = 10
UNDERFLOW = 1e-300


def _check_d(d: int):
    if not 1 <= d <= MAX_D:
        raise ShapeError(f"d must lie in 1..{MAX_D}, got {d}")


def zeta(d: int, l: int) -> float:
    """sqrt(2l-1) * l^2 * l! * (d+1)^(l-1); the integer factor is exact."""
    _check_d(d)
    if not 1 <= l <= d:
        raise ShapeError(f"l must lie in 1..{d}, got {l}")
    return math.sqrt(2 * l - 1) * float(l * l * math.factorial(l) * (d + 1) ** (l - 1))


@dataclass(frozen=True)
class BoundCertificate:
    d: int
    l: int
    delta: float
    zeta: float
    theta: float
    restricted: bool = False
    minor: Optional[MinorReport] = None

    @property
    def moment_indices(self):
        """Moment coordinates the bound is stated over."""
        if self.restricted and self.minor is not None:
            return self.minor.moment_indices
        return tuple(range(2 * self.d - 1))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "l": self.l,
            "delta": self.delta,
            "zeta": self.zeta,
            "theta": self.theta,
            "restricted": self.restricted,
            "moment_indices": list(self.moment_indices),
            "minor": None if self.minor is None else self.minor.to_json(),
        }


def theta_bound(F: Signal, l: int, restricted: bool = False) -> BoundCertificate:
    """Certificate min(1, delta_l(F)/zeta(d, l)) for a signal in the unit box.

    Raises NotNormalized when F leaves the box.
    """
    F = normalized(F)
    d = F.d
    z = zeta(d, l)
    minor = delta_l(hankel_from_signal(F, d), l)
    return BoundCertificate(d, l, minor.delta, z, min(1.0, minor.delta / z), restricted, minor)


def _factorial_square_product(d: int) -> float:
    return float(math.prod(math.factorial(i) ** 2 for i in range(1, d)))


def regular_delta_lower_bound(d: int, params: RegularityParams) -> float:
    """prod_{i<d} (i!)^2 * eta^(d(d-1)) * gamma^d."""
    _check_d(d)
    if not params.valid_for(d):
        raise BadParams(f"eta={params.eta} exceeds 2/(d-1) for d={d}")
    return _factorial_square_product(d) * params.eta ** (d * (d - 1)) * params.gamma**d


def regular_theta(d: int, params: RegularityParams) -> float:
    """Bound for every (eta, gamma)-regular F against all signals with < d nodes."""
    return min(1.0, regular_delta_lower_bound(d, params) / zeta(d, d))


@dataclass(frozen=True)
class ClusterCertificate:
    base: BoundCertificate
    h: float
    theta_h: float
    underflow: bool = field(default=False)

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "h": self.h,
            "theta_h": self.theta_h,
            "underflow": self.underflow,
        }


def cluster_theta(d: int, params: RegularityParams) -> ClusterCertificate:
    """theta_h = min(h^(2d-2), h^(2d-2) * regular bound / zeta(d, d)).

    Values below 1e-300 are reported as 0 with ``underflow`` set.
    """
    h = params.h
    if h is None or not 0 < h <= 1:
        raise BadScale(f"h must lie in (0, 1], got {h}")
    lb = regular_delta_lower_bound(d, params)
    z = zeta(d, d)
    base = BoundCertificate(d, d, lb, z, min(1.0, lb / z))
    scale = h ** (2 * d - 2)
    # h^(2d-2) * min(1, lb/zeta) keeps theta_h an exact multiple of the h = 1 value
    theta_h = scale * base.theta
    if theta_h < UNDERFLOW:
        return ClusterCertificate(base, h, 0.0, True)
    return ClusterCertificate(base, h, theta_h)
