"""Pure-Python versions of the compiled kernels in ``_ckernels.pyx``.

Same algorithms and tie rules; floating-point results agree with the compiled
path up to summation-order rounding.
"""

from itertools import combinations

import numpy as np

RHO, CHI, PSI, SIGMA = 1.0, 2.0, 0.5, 0.5
TIE_RTOL = 64 * np.finfo(float).eps


def moment_objective(target, mask, z):
    """Squared moment misfit of the candidate ``z = (a, x)`` on masked indices."""
    z = np.asarray(z, dtype=float)
    k = z.size // 2
    if k == 0:
        r = np.asarray(target)[np.asarray(mask, dtype=bool)]
        return float(r @ r)
    powers = np.vander(z[k:], len(target), increasing=True)
    r = (np.asarray(target) - z[:k] @ powers)[np.asarray(mask, dtype=bool)]
    return float(r @ r)


def nelder_mead(target, mask, z0, step, lo, hi, max_iters, fatol, xatol):
    """Box-clamped Nelder-Mead on the moment misfit.

    Returns ``(z_best, f_best, iterations, converged)``.
    """
    target = np.asarray(target, dtype=float)
    mask = np.asarray(mask, dtype=np.uint8)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    step = np.asarray(step, dtype=float)
    n = len(z0)

    def f(z):
        return moment_objective(target, mask, z)

    sim = np.empty((n + 1, n))
    sim[0] = np.clip(z0, lo, hi)
    for i in range(n):
        sim[i + 1] = sim[0]
        sim[i + 1, i] = sim[0, i] + step[i]
        if sim[i + 1, i] > hi[i]:
            sim[i + 1, i] = sim[0, i] - step[i]
        sim[i + 1] = np.clip(sim[i + 1], lo, hi)
    fsim = np.array([f(v) for v in sim])
    order = np.argsort(fsim, kind="stable")
    sim, fsim = sim[order], fsim[order]

    it = 0
    converged = False
    while it < max_iters:
        if (
            np.max(np.abs(fsim[1:] - fsim[0])) <= fatol
            and np.max(np.abs(sim[1:] - sim[0])) <= xatol
        ):
            converged = True
            break
        xbar = sim[:-1].mean(axis=0)
        xr = np.clip(xbar + RHO * (xbar - sim[-1]), lo, hi)
        fr = f(xr)
        if fr < fsim[0]:
            xe = np.clip(xbar + RHO * CHI * (xbar - sim[-1]), lo, hi)
            fe = f(xe)
            if fe < fr:
                sim[-1], fsim[-1] = xe, fe
            else:
                sim[-1], fsim[-1] = xr, fr
        elif fr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fr
        else:
            if fr < fsim[-1]:
                xc = np.clip(xbar + PSI * RHO * (xbar - sim[-1]), lo, hi)
                fc = f(xc)
                accept = fc <= fr
            else:
                xc = np.clip(xbar - PSI * (xbar - sim[-1]), lo, hi)
                fc = f(xc)
                accept = fc < fsim[-1]
            if accept:
                sim[-1], fsim[-1] = xc, fc
            else:
                sim[1:] = sim[0] + SIGMA * (sim[1:] - sim[0])
                fsim[1:] = [f(v) for v in sim[1:]]
        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]
        it += 1
    return sim[0].copy(), float(fsim[0]), it, converged


def _dets(blocks: np.ndarray) -> np.ndarray:
    l = blocks.shape[-1]
    m = blocks
    if l == 1:
        return m[:, 0, 0]
    if l == 2:
        return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    if l == 3:
        return (
            m[:, 0, 0] * (m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1])
            - m[:, 0, 1] * (m[:, 1, 0] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 0])
            + m[:, 0, 2] * (m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0])
        )
    return np.linalg.det(m)


def max_abs_minor(H, l):
    """Scan all l-minors of square H in lexicographic (rows, cols) order.

    Returns ``(det, rows, cols)`` of the first minor of maximal |det|; later
    minors must beat the incumbent by more than a relative 64 eps.
    """
    H = np.asarray(H, dtype=float)
    d = H.shape[0]
    subsets = np.array(list(combinations(range(d), l)), dtype=np.intp)
    blocks = H[subsets[:, None, :, None], subsets[None, :, None, :]]
    vals = _dets(blocks.reshape(-1, l, l))
    best_abs, best = -1.0, 0
    for idx, v in enumerate(np.abs(vals).tolist()):
        if v > best_abs + TIE_RTOL * best_abs:
            best_abs, best = v, idx
    r, c = divmod(best, len(subsets))
    return float(vals[best]), tuple(int(i) for i in subsets[r]), tuple(int(i) for i in subsets[c])
