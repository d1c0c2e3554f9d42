"""Multi-start simplex search for the closest low-rank moment vector.

Given F with d nodes, minimize |mbar(F) - mbar(Ft)| over signals Ft with a
fixed number of nodes, where mbar is the first 2d - 1 moments. The search
is boxed (|x| <= node_box, |a| <= amp_box), which stands in for the
unbounded parameter space; runs that end on the box boundary are flagged.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .bounds import theta_bound
from .errors import NoRealSolution, ShapeError, ZeroMass
from .prony import PronyProblem, fit_single_node, prony_solve
from .signal import DUPLICATE_TOL, Signal, moments, validate_signal

MAX_POLISH_ROUNDS = 6
PRUNE_TOL = 1e-12
XATOL = 1e-10
BOX_HIT_RTOL = 1e-6


@dataclass(frozen=True)
class SearchConfig:
    target_nodes: int
    restarts: int = 20
    max_iters: int = 4000
    tol: float = 1e-13
    node_box: float = 3.0
    amp_box: float = 10.0
    rng_seed: int = 0
    restricted: bool = False
    backend: Optional[str] = None

    def __post_init__(self):
        if self.target_nodes < 0:
            raise ShapeError("target_nodes must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not (self.node_box > 0 and self.amp_box > 0):
            raise ValueError("search boxes must be positive")


@dataclass(frozen=True)
class SearchResult:
    best: Signal
    distance: float
    certificate_theta: float
    margin: float
    converged: bool
    box_hit: bool
    moment_indices: Tuple[int, ...]
    config: SearchConfig

    def to_json(self) -> dict:
        return {
            "best": self.best.to_json(),
            "distance": self.distance,
            "certificate_theta": self.certificate_theta,
            "margin": self.margin,
            "converged": self.converged,
            "box_hit": self.box_hit,
            "moment_indices": list(self.moment_indices),
            "config": asdict(self.config),
        }


Start = Tuple[np.ndarray, np.ndarray]


def _into_box(a, x, cfg: SearchConfig) -> Start:
    return (
        np.clip(np.asarray(a, dtype=float), -cfg.amp_box, cfg.amp_box),
        np.clip(np.asarray(x, dtype=float), -cfg.node_box, cfg.node_box),
    )


def _pad(a, x, k, rng, cfg) -> Start:
    """Extend a start with fewer than k nodes by zero-amplitude random nodes."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    extra = k - a.size
    if extra > 0:
        a = np.concatenate([a, np.zeros(extra)])
        x = np.concatenate([x, rng.uniform(-1.0, 1.0, size=extra)])
    return a, x


def seeded_starts(F: Signal, cfg: SearchConfig) -> List[Start]:
    """Initial (amplitudes, nodes) pairs, ``cfg.restarts`` of them.

    Order: the single-node moment fit (target 1), the Prony solution of the
    truncated system m_0..m_{2k-1} when it is real, then seeded random draws
    with nodes uniform in the node box. Random draws alternate between
    uniform amplitudes and least-squares amplitudes for the drawn nodes.
    """
    k = cfg.target_nodes
    rng = np.random.default_rng(cfg.rng_seed)
    if k == 0:
        return [(np.empty(0), np.empty(0))]
    starts: List[Start] = []
    m = moments(F, max(2 * F.d - 1, 2 * k))
    if k == 1:
        try:
            G = fit_single_node(m)
            starts.append(_into_box(G.amplitudes, G.nodes, cfg))
        except ZeroMass:
            pass
    try:
        G = prony_solve(PronyProblem(m[: 2 * k], k)).signal
        starts.append(_into_box(*_pad(G.amplitudes, G.nodes, k, rng, cfg), cfg))
    except NoRealSolution:
        pass
    V_rows = 2 * F.d - 1
    target = m[:V_rows]
    i = 0
    while len(starts) < cfg.restarts:
        x = rng.uniform(-cfg.node_box, cfg.node_box, size=k)
        if i % 2 == 0:
            a = rng.uniform(-cfg.amp_box, cfg.amp_box, size=k)
        else:
            V = np.vander(x, V_rows, increasing=True)
            a, *_ = np.linalg.lstsq(V.T, target, rcond=None)
        starts.append(_into_box(a, x, cfg))
        i += 1
    return starts[: cfg.restarts]


def canonical_signal(a, x) -> Signal:
    """Sort nodes, merge coincident ones and prune near-zero amplitudes."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    a, x = a[order], x[order]
    merged_a: List[float] = []
    merged_x: List[float] = []
    for ai, xi in zip(a.tolist(), x.tolist()):
        if merged_x and xi - merged_x[-1] < DUPLICATE_TOL:
            merged_a[-1] += ai
        else:
            merged_a.append(ai)
            merged_x.append(xi)
    keep = [j for j, ai in enumerate(merged_a) if abs(ai) > PRUNE_TOL]
    return validate_signal([merged_a[j] for j in keep], [merged_x[j] for j in keep])


def moment_distance(F: Signal, G: Signal, indices: Optional[Sequence[int]] = None) -> float:
    """Euclidean distance between the first 2d - 1 moments of F and G (d = F.d)."""
    n = 2 * F.d - 1
    diff = moments(F, n) - moments(G, n)
    if indices is not None:
        diff = diff[list(indices)]
    return float(np.linalg.norm(diff))


def _polish(backend, target, mask, z0, cfg, lo, hi):
    """Restart the simplex from its own optimum until it stops improving.

    Each round uses ``fatol = tol * f`` so the stopping rule tightens as the
    misfit shrinks.
    """
    z = np.clip(np.asarray(z0, dtype=float), lo, hi)
    f = backend.moment_objective(target, mask, np.ascontiguousarray(z))
    converged = False
    for _ in range(MAX_POLISH_ROUNDS):
        step = 0.1 * np.maximum(np.abs(z), 0.1)
        z_new, f_new, _, converged = backend.nelder_mead(
            target, mask, np.ascontiguousarray(z), step, lo, hi,
            cfg.max_iters, cfg.tol * f, XATOL,
        )
        improved = f_new < f * (1.0 - 1e-9)
        if f_new <= f:
            z, f = z_new, f_new
        if not improved or f == 0.0:
            break
    return z, f, converged


def min_moment_distance(
    F: Signal,
    cfg: SearchConfig,
    extra_starts: Optional[Sequence[Start]] = None,
    moments_override=None,
) -> SearchResult:
    """Best approximant with ``cfg.target_nodes`` nodes found by the search.

    ``extra_starts`` are tried before the seeded ones. ``moments_override``
    replaces mbar(F) as the target (e.g. noisy measurements); the
    certificate still refers to F itself. The certificate
    theta for l = target_nodes + 1 is attached when F is in the unit box
    (NaN otherwise); with ``cfg.restricted`` both the objective and the
    certificate use only the moments of the maximizing minor.

    Raises
    ------
    ShapeError
        target_nodes >= d.
    """
    d = F.d
    k = cfg.target_nodes
    if d < 1:
        raise ShapeError("signal must have at least one node")
    if k >= d:
        raise ShapeError(f"target_nodes={k} is not below d={d}")
    n = 2 * d - 1
    cert = theta_bound(F, k + 1, restricted=cfg.restricted) if F.is_normalized else None
    if cfg.restricted:
        if cert is None:
            raise ShapeError("restricted search needs a signal in the unit box")
        indices = cert.minor.moment_indices
    else:
        indices = tuple(range(n))
    theta = cert.theta if cert is not None else math.nan
    target = moments(F, n)
    if moments_override is not None:
        target = np.asarray(moments_override, dtype=float).reshape(-1)
        if target.size != n:
            raise ShapeError(f"moments_override needs {n} entries, got {target.size}")
    target = np.ascontiguousarray(target)
    mask = np.zeros(n, dtype=np.uint8)
    mask[list(indices)] = 1

    if k == 0:
        best = Signal.zero()
        dist = float(np.linalg.norm(target[list(indices)]))
        return SearchResult(best, dist, theta, dist - theta, True, False, indices, cfg)

    backend = kernels.get_backend(cfg.backend)
    lo = np.concatenate([np.full(k, -cfg.amp_box), np.full(k, -cfg.node_box)])
    hi = -lo
    starts = list(extra_starts or []) + seeded_starts(F, cfg)
    best_key = None
    for a0, x0 in starts:
        a0, x0 = _into_box(a0, x0, cfg)
        z, f, conv = _polish(backend, target, mask, np.concatenate([a0, x0]), cfg, lo, hi)
        G = canonical_signal(z[:k], z[k:])
        dist = float(np.linalg.norm((target - moments(G, n))[list(indices)]))
        key = (dist, G.nodes.tolist(), G.amplitudes.tolist())
        if best_key is None or key < best_key:
            best_key = key
            best = (G, dist, conv, bool(np.any(np.abs(z) >= hi * (1.0 - BOX_HIT_RTOL))))
    G, dist, conv, box_hit = best
    return SearchResult(G, dist, theta, dist - theta, conv, box_hit, indices, cfg)
