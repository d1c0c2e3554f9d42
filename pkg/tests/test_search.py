import math

import numpy as np
import pytest
from scipy import optimize

from prony_lowrank.bounds import theta_bound
from prony_lowrank.errors import ShapeError
from prony_lowrank.search import (
    SearchConfig,
    canonical_signal,
    min_moment_distance,
    moment_distance,
    seeded_starts,
)
from prony_lowrank.signal import moments, random_regular_signal, validate_signal

PAIR = validate_signal([1, 1], [-1, 1])


def one_node_oracle(target):
    """min over (a, t) of |target - a (1, t, t^2, ...)| via profile least squares."""
    n = len(target)

    def profile(t):
        v = t ** np.arange(n)
        a = v @ target / (v @ v)
        return float(np.linalg.norm(target - a * v))

    grid = np.linspace(-3, 3, 6001)
    vals = [profile(t) for t in grid]
    i = int(np.argmin(vals))
    res = optimize.minimize_scalar(profile, bracket=(grid[max(i - 1, 0)], grid[i], grid[min(i + 1, 6000)]))
    return min(res.fun, vals[i])


def scipy_oracle(F, k, starts=40, seed=1, box=None):
    """Multi-start quasi-Newton on the squared misfit; L-BFGS-B when boxed."""
    n = 2 * F.d - 1
    target = moments(F, n)
    rng = np.random.default_rng(seed)

    def obj(z):
        a, x = z[:k], z[k:]
        return float(np.sum((target - np.vander(x, n, increasing=True).T @ a) ** 2))

    bounds = None if box is None else [(-box[0], box[0])] * k + [(-box[1], box[1])] * k
    method = "BFGS" if box is None else "L-BFGS-B"
    opts = {"gtol": 1e-12} if box is None else {"ftol": 1e-15, "gtol": 1e-12, "maxiter": 5000}
    best = math.inf
    for _ in range(starts):
        z0 = np.concatenate([rng.uniform(-2, 2, k), rng.uniform(-1.5, 1.5, k)])
        r = optimize.minimize(obj, z0, method=method, bounds=bounds, options=opts)
        best = min(best, r.fun)
    return math.sqrt(best)


def test_pair_one_node_distance():
    res = min_moment_distance(PAIR, SearchConfig(1, restarts=20))
    # (2 - a)^2 + a^2 t + (2 - a t)^2 with t = x^2 is minimized at a = 4/3, t = 1
    assert res.distance == pytest.approx(math.sqrt(8 / 3), abs=1e-7)
    assert res.distance == pytest.approx(one_node_oracle(np.array([2.0, 0.0, 2.0])), abs=1e-7)
    assert abs(res.best.amplitudes[0]) == pytest.approx(4 / 3, abs=1e-5)
    assert abs(res.best.nodes[0]) == pytest.approx(1.0, abs=1e-5)
    assert res.margin > 0
    assert res.certificate_theta == pytest.approx(0.0962250448649376, rel=1e-14)


def test_zero_node_distance():
    res = min_moment_distance(PAIR, SearchConfig(0))
    assert res.distance == pytest.approx(math.sqrt(8))
    assert res.best.d == 0
    assert res.certificate_theta == 1.0


def test_target_nodes_guard():
    with pytest.raises(ShapeError):
        min_moment_distance(PAIR, SearchConfig(2))
    with pytest.raises(ShapeError):
        SearchConfig(-1)
    with pytest.raises(ValueError):
        SearchConfig(1, restarts=0)


def test_one_node_against_profile_oracle(rng):
    for _ in range(10):
        F = random_regular_signal(rng, 2, 0.5, 0.3)
        res = min_moment_distance(F, SearchConfig(1, restarts=20))
        ref = one_node_oracle(moments(F, 3))
        assert res.distance <= ref + 1e-7
        assert res.distance >= ref - 1e-7


@pytest.mark.parametrize("d", [3, 4])
def test_search_matches_boxed_scipy(d, rng):
    for _ in range(3):
        F = random_regular_signal(rng, d, 1.0 / (d - 1), 0.3)
        for k in range(1, d):
            cfg = SearchConfig(k, restarts=20)
            res = min_moment_distance(F, cfg)
            ref = scipy_oracle(F, k, box=(cfg.amp_box, cfg.node_box))
            assert res.distance <= ref * (1 + 1e-6) + 1e-9
            free = scipy_oracle(F, k)
            # an unboxed optimizer can only do better by leaving the box
            if free < res.distance * (1 - 1e-6):
                assert res.box_hit


def test_search_is_deterministic(rng):
    F = random_regular_signal(rng, 3, 0.5, 0.5)
    cfg = SearchConfig(2, restarts=8, rng_seed=5)
    r1 = min_moment_distance(F, cfg)
    r2 = min_moment_distance(F, cfg)
    assert r1.distance == r2.distance and r1.best == r2.best


def test_restricted_search_uses_minor_indices():
    F = validate_signal([0.5, -0.7, 0.9], [-0.8, 0.1, 0.6])
    res = min_moment_distance(F, SearchConfig(1, restricted=True))
    cert = theta_bound(F, 2, restricted=True)
    assert res.moment_indices == cert.minor.moment_indices
    assert res.distance == pytest.approx(moment_distance(F, res.best, res.moment_indices), abs=1e-15)
    assert res.margin >= 0


def test_moments_override_targets_noisy_data():
    nu = moments(PAIR, 3) + np.array([1e-3, 0.0, -1e-3])
    res = min_moment_distance(PAIR, SearchConfig(1), moments_override=nu)
    assert res.distance == pytest.approx(one_node_oracle(nu), abs=1e-7)
    with pytest.raises(ShapeError):
        min_moment_distance(PAIR, SearchConfig(1), moments_override=[1.0, 2.0])


def test_extra_starts_are_used():
    res = min_moment_distance(PAIR, SearchConfig(1, restarts=1), extra_starts=[(np.array([4 / 3]), np.array([1.0]))])
    assert res.distance == pytest.approx(math.sqrt(8 / 3), abs=1e-9)


def test_result_json_round_trip_fields():
    obj = min_moment_distance(PAIR, SearchConfig(1, restarts=3)).to_json()
    assert set(obj) >= {"best", "distance", "certificate_theta", "margin", "config"}
    assert obj["config"]["target_nodes"] == 1


def test_seeded_starts_order_and_count():
    cfg = SearchConfig(1, restarts=5)
    starts = seeded_starts(PAIR, cfg)
    assert len(starts) == 5
    a0, x0 = starts[0]
    assert a0.tolist() == [2.0] and x0.tolist() == [0.0]
    for a, x in starts:
        assert np.all(np.abs(a) <= cfg.amp_box) and np.all(np.abs(x) <= cfg.node_box)
    (a0, x0), = seeded_starts(PAIR, SearchConfig(0))
    assert a0.size == 0 and x0.size == 0


def test_canonical_signal_merges_and_prunes():
    G = canonical_signal([1.0, 2.0, 1e-14], [0.5, 0.5 + 1e-13, -0.2])
    assert G.d == 1
    assert G.amplitudes[0] == 3.0
