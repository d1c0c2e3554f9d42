import numpy as np
import pytest

from prony_lowrank import kernels
from prony_lowrank import _pykernels
from prony_lowrank.hankel import build_hankel

cython = pytest.importorskip("prony_lowrank._ckernels")


def _problem(rng, d, k):
    n = 2 * d - 1
    target = rng.normal(size=n)
    mask = np.ones(n, dtype=np.uint8)
    z0 = np.concatenate([rng.uniform(-1, 1, k), rng.uniform(-1, 1, k)])
    lo = np.concatenate([np.full(k, -10.0), np.full(k, -3.0)])
    return target, mask, z0, lo, -lo


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.get_backend("python") is _pykernels
    assert kernels.get_backend("cython") is cython
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_objective_agrees(rng):
    for _ in range(200):
        d = int(rng.integers(2, 6))
        k = int(rng.integers(1, d))
        target, mask, z, _, _ = _problem(rng, d, k)
        mask[rng.integers(0, mask.size)] = 0
        a = _pykernels.moment_objective(target, mask, z)
        b = cython.moment_objective(target, mask, z)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_nelder_mead_agrees(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        k = int(rng.integers(1, d))
        target, mask, z0, lo, hi = _problem(rng, d, k)
        step = 0.1 * np.maximum(np.abs(z0), 0.1)
        args = (target, mask, z0, step, lo, hi, 4000, 1e-14, 1e-10)
        zp, fp, itp, cp = _pykernels.nelder_mead(*args)
        zc, fc, itc, cc = cython.nelder_mead(*args)
        assert fp == pytest.approx(fc, rel=1e-6, abs=1e-12)
        assert np.all(zc >= lo) and np.all(zc <= hi)


def test_nelder_mead_finds_exact_fit():
    # target generated by a 1-node signal: zero misfit is attainable
    target = np.array([2.0, 1.0, 0.5])
    mask = np.ones(3, dtype=np.uint8)
    lo, hi = np.array([-10.0, -3.0]), np.array([10.0, 3.0])
    for impl in (_pykernels, cython):
        z, f, _, conv = impl.nelder_mead(target, mask, np.array([1.0, 0.0]), np.array([0.1, 0.1]), lo, hi, 4000, 1e-30, 1e-12)
        assert f < 1e-18
        np.testing.assert_allclose(z, [2.0, 0.5], atol=1e-8)


def test_max_abs_minor_agrees(rng):
    for _ in range(200):
        d = int(rng.integers(1, 7))
        H = build_hankel(rng.normal(size=2 * d - 1), d)
        for l in range(1, d + 1):
            vp, rp, cp = _pykernels.max_abs_minor(H, l)
            vc, rc, cc = cython.max_abs_minor(H, l)
            assert abs(vp) == pytest.approx(abs(vc), rel=1e-12, abs=1e-300)
            assert tuple(rp) == tuple(rc) and tuple(cp) == tuple(cc)


def test_max_abs_minor_symmetric_ties(rng):
    H = np.array([[1.0, 2.0], [2.0, 1.0]])
    for impl in (_pykernels, cython):
        v, r, c = impl.max_abs_minor(H, 1)
        assert v == 2.0 and tuple(r) == (0,) and tuple(c) == (1,)
