"""Grid experiments behind the ``bound sweep`` and ``rank-drop`` commands.

A sweep spec is a JSON object of lists (the grid) plus scalars. Every row
records its full parameter set and the seed, and per-sample randomness is
derived from ``(seed, d, sample)`` only, so a row does not depend on what
else is in the grid.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List

import numpy as np

from .bounds import cluster_theta, theta_bound
from .hankel import build_hankel, numerical_rank
from .search import SearchConfig, min_moment_distance
from .signal import (
    RegularityParams,
    downscale_cluster,
    moments,
    perturb_moments,
    random_regular_signal,
)

BOUND_COLUMNS = [
    "d", "l", "eta", "gamma", "h", "epsilon", "seed", "sample",
    "delta_l", "zeta", "theta", "theta_h", "noisy_theta",
    "distance", "margin", "restricted_distance", "restricted_margin", "box_hit",
]
RANK_COLUMNS = ["d", "h", "epsilon", "tol", "eta", "gamma", "seed", "sample", "rank"]

BOUND_DEFAULTS = {
    "l": None, "h": [1.0], "epsilon": [0.0], "samples": 1, "seed": 0,
    "restarts": 20, "max_iters": 4000, "node_box": 3.0, "amp_box": 10.0,
}
RANK_DEFAULTS = {
    "h": [1.0], "epsilon": [0.0], "tol": [1e-9], "eta": None, "gamma": 0.5,
    "samples": 1, "seed": 0,
}


class SpecError(ValueError):
    """The experiment spec is malformed."""


def _as_list(value, name):
    if value is None:
        raise SpecError(f"missing grid {name!r}")
    vals = list(value) if isinstance(value, (list, tuple)) else [value]
    if not vals:
        raise SpecError(f"grid {name!r} is empty")
    return vals


def _sample_rng(seed: int, d: int, sample: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(d, sample, stream)))


def _merge(spec: Dict[str, Any], defaults: Dict[str, Any]) -> Dict[str, Any]:
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    out = dict(defaults)
    out.update(spec)
    return out


def bound_tasks(spec: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Expand a bound-sweep spec into one task per (grid cell, sample), in key order."""
    s = _merge(spec, BOUND_DEFAULTS)
    ds = sorted(int(v) for v in _as_list(s.get("d"), "d"))
    etas = sorted(float(v) for v in _as_list(s.get("eta"), "eta"))
    gammas = sorted(float(v) for v in _as_list(s.get("gamma"), "gamma"))
    hs = sorted((float(v) for v in _as_list(s["h"], "h")), reverse=True)
    eps = sorted(float(v) for v in _as_list(s["epsilon"], "epsilon"))
    if any(e < 0 for e in eps):
        raise SpecError("epsilon must be >= 0")
    samples = int(s["samples"])
    if samples < 1:
        raise SpecError("samples must be >= 1")
    tasks = []
    for d, eta, gamma, h, e in itertools.product(ds, etas, gammas, hs, eps):
        params = RegularityParams(eta, gamma, h)
        if not params.valid_for(d):
            raise SpecError(f"eta={eta} exceeds 2/(d-1) for d={d}")
        ls = range(1, d + 1) if s["l"] is None else sorted(int(v) for v in _as_list(s["l"], "l"))
        for l in ls:
            if not 1 <= l <= d:
                raise SpecError(f"l={l} outside 1..{d}")
            for sample in range(samples):
                tasks.append({
                    "d": d, "l": l, "eta": eta, "gamma": gamma, "h": h, "epsilon": e,
                    "seed": int(s["seed"]), "sample": sample,
                    "restarts": int(s["restarts"]), "max_iters": int(s["max_iters"]),
                    "node_box": float(s["node_box"]), "amp_box": float(s["amp_box"]),
                })
    return tasks


def run_bound_task(t: Dict[str, Any]) -> Dict[str, Any]:
    """One row: sample G, downscale by h, certify and search."""
    d, l, h = t["d"], t["l"], t["h"]
    G = random_regular_signal(_sample_rng(t["seed"], d, t["sample"]), d, t["eta"], t["gamma"])
    F = downscale_cluster(G, h)
    n = 2 * d - 1
    nu = perturb_moments(moments(F, n), t["epsilon"], _noise_seed(t))
    cert = theta_bound(F, l)
    theta_h = cluster_theta(d, RegularityParams(t["eta"], t["gamma"], h)).theta_h if l == d else math.nan
    noisy_theta = max(0.0, cert.theta - t["epsilon"] * math.sqrt(n))
    common = dict(
        restarts=t["restarts"], max_iters=t["max_iters"], node_box=t["node_box"],
        amp_box=t["amp_box"], rng_seed=t["seed"] * 1000003 + t["sample"],
    )
    res = min_moment_distance(F, SearchConfig(l - 1, **common), moments_override=nu)
    rres = min_moment_distance(F, SearchConfig(l - 1, restricted=True, **common), moments_override=nu)
    best_theta = noisy_theta if t["epsilon"] > 0 else cert.theta
    row = {k: t[k] for k in ("d", "l", "eta", "gamma", "h", "epsilon", "seed", "sample")}
    row.update(
        delta_l=cert.delta, zeta=cert.zeta, theta=cert.theta, theta_h=theta_h,
        noisy_theta=noisy_theta, distance=res.distance, margin=res.distance - best_theta,
        restricted_distance=rres.distance, restricted_margin=rres.distance - best_theta,
        box_hit=res.box_hit or rres.box_hit,
    )
    return row


def _noise_seed(t) -> int:
    return int(np.random.SeedSequence(t["seed"], spawn_key=(t["d"], t["sample"], 1)).generate_state(1)[0])


def bound_sweep(spec: Dict[str, Any], jobs: int = 1) -> List[Dict[str, Any]]:
    """Rows for every task of a sweep spec, in grid-key order regardless of ``jobs``."""
    tasks = bound_tasks(spec)
    return _run(run_bound_task, tasks, jobs)


def rank_tasks(spec: Dict[str, Any]) -> List[Dict[str, Any]]:
    s = _merge(spec, RANK_DEFAULTS)
    ds = sorted(int(v) for v in _as_list(s.get("d"), "d"))
    hs = sorted((float(v) for v in _as_list(s["h"], "h")), reverse=True)
    eps = sorted(float(v) for v in _as_list(s["epsilon"], "epsilon"))
    tols = sorted(float(v) for v in _as_list(s["tol"], "tol"))
    if any(e < 0 for e in eps):
        raise SpecError("epsilon must be >= 0")
    if any(not tol > 0 for tol in tols):
        raise SpecError("tol must be positive")
    samples = int(s["samples"])
    if samples < 1:
        raise SpecError("samples must be >= 1")
    tasks = []
    for d, h, e, tol in itertools.product(ds, hs, eps, tols):
        eta = float(s["eta"]) if s["eta"] is not None else (1.0 / (d - 1) if d > 1 else 1.0)
        for sample in range(samples):
            tasks.append({
                "d": d, "h": h, "epsilon": e, "tol": tol, "eta": eta,
                "gamma": float(s["gamma"]), "seed": int(s["seed"]), "sample": sample,
            })
    return tasks


def run_rank_task(t: Dict[str, Any]) -> Dict[str, Any]:
    """Numerical rank of H_d from noisy moments of an h-cluster."""
    d = t["d"]
    G = random_regular_signal(_sample_rng(t["seed"], d, t["sample"]), d, t["eta"], t["gamma"])
    F = downscale_cluster(G, t["h"])
    nu = perturb_moments(moments(F, 2 * d - 1), t["epsilon"], _noise_seed(t))
    row = {k: t[k] for k in RANK_COLUMNS if k != "rank"}
    row["rank"] = numerical_rank(build_hankel(nu, d), t["tol"])
    return row


def rank_drop(spec: Dict[str, Any], jobs: int = 1) -> List[Dict[str, Any]]:
    return _run(run_rank_task, rank_tasks(spec), jobs)


def _run(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))
