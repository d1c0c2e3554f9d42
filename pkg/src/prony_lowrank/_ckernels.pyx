# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: moment-misfit simplex search and maximal-minor scan.

Both functions mirror ``_pykernels`` step for step; keep them in sync.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()

cdef double RHO = 1.0
cdef double CHI = 2.0
cdef double PSI = 0.5
cdef double SIGMA = 0.5
cdef double TIE_RTOL = 1.4210854715202004e-14  # 64 * eps


cdef double _objective(const double[::1] target, const unsigned char[::1] mask,
                       const double* z, int k, double* pw) noexcept nogil:
    # z = (a_1..a_k, x_1..x_k); pw is scratch of length k
    cdef int p, j, npow = target.shape[0]
    cdef double val, r, f = 0.0
    for j in range(k):
        pw[j] = 1.0
    for p in range(npow):
        if mask[p]:
            val = 0.0
            for j in range(k):
                val += z[j] * pw[j]
            r = target[p] - val
            f += r * r
        for j in range(k):
            pw[j] *= z[k + j]
    return f


def moment_objective(double[::1] target, unsigned char[::1] mask, double[::1] z):
    """Squared moment misfit of the candidate ``z = (a, x)`` on masked indices."""
    cdef int k = z.shape[0] // 2
    cdef double[::1] pw = np.empty(max(k, 1))
    return _objective(target, mask, &z[0], k, &pw[0])


cdef inline void _clamp(double* v, const double[::1] lo, const double[::1] hi, int n) noexcept nogil:
    cdef int j
    for j in range(n):
        if v[j] < lo[j]:
            v[j] = lo[j]
        elif v[j] > hi[j]:
            v[j] = hi[j]


cdef void _sort_simplex(double[:, ::1] sim, double[::1] fsim, double[::1] tmp, int n) noexcept nogil:
    # stable insertion sort of n+1 vertices by value
    cdef int i, j, c
    cdef double fv
    for i in range(1, n + 1):
        fv = fsim[i]
        for c in range(n):
            tmp[c] = sim[i, c]
        j = i - 1
        while j >= 0 and fsim[j] > fv:
            fsim[j + 1] = fsim[j]
            for c in range(n):
                sim[j + 1, c] = sim[j, c]
            j -= 1
        fsim[j + 1] = fv
        for c in range(n):
            sim[j + 1, c] = tmp[c]


def nelder_mead(double[::1] target, unsigned char[::1] mask, double[::1] z0,
                double[::1] step, double[::1] lo, double[::1] hi,
                int max_iters, double fatol, double xatol):
    """Box-clamped Nelder-Mead on the moment misfit.

    Returns ``(z_best, f_best, iterations, converged)``.
    """
    cdef int n = z0.shape[0]
    cdef int k = n // 2
    cdef int i, j, it = 0
    cdef bint converged = False, accept
    cdef double fr, fe, fc, spread, xspread
    cdef double[:, ::1] sim = np.empty((n + 1, n))
    cdef double[::1] fsim = np.empty(n + 1)
    cdef double[::1] xbar = np.empty(n)
    cdef double[::1] xr = np.empty(n)
    cdef double[::1] xe = np.empty(n)
    cdef double[::1] xc = np.empty(n)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] pw = np.empty(max(k, 1))

    with nogil:
        for j in range(n):
            sim[0, j] = z0[j]
        _clamp(&sim[0, 0], lo, hi, n)
        for i in range(n):
            for j in range(n):
                sim[i + 1, j] = sim[0, j]
            sim[i + 1, i] = sim[0, i] + step[i]
            if sim[i + 1, i] > hi[i]:
                sim[i + 1, i] = sim[0, i] - step[i]
            _clamp(&sim[i + 1, 0], lo, hi, n)
        for i in range(n + 1):
            fsim[i] = _objective(target, mask, &sim[i, 0], k, &pw[0])
        _sort_simplex(sim, fsim, tmp, n)

        while it < max_iters:
            spread = 0.0
            xspread = 0.0
            for i in range(1, n + 1):
                if fabs(fsim[i] - fsim[0]) > spread:
                    spread = fabs(fsim[i] - fsim[0])
                for j in range(n):
                    if fabs(sim[i, j] - sim[0, j]) > xspread:
                        xspread = fabs(sim[i, j] - sim[0, j])
            if spread <= fatol and xspread <= xatol:
                converged = True
                break

            for j in range(n):
                xbar[j] = 0.0
                for i in range(n):
                    xbar[j] += sim[i, j]
                xbar[j] /= n
            for j in range(n):
                xr[j] = xbar[j] + RHO * (xbar[j] - sim[n, j])
            _clamp(&xr[0], lo, hi, n)
            fr = _objective(target, mask, &xr[0], k, &pw[0])

            if fr < fsim[0]:
                for j in range(n):
                    xe[j] = xbar[j] + RHO * CHI * (xbar[j] - sim[n, j])
                _clamp(&xe[0], lo, hi, n)
                fe = _objective(target, mask, &xe[0], k, &pw[0])
                if fe < fr:
                    for j in range(n):
                        sim[n, j] = xe[j]
                    fsim[n] = fe
                else:
                    for j in range(n):
                        sim[n, j] = xr[j]
                    fsim[n] = fr
            elif fr < fsim[n - 1]:
                for j in range(n):
                    sim[n, j] = xr[j]
                fsim[n] = fr
            else:
                if fr < fsim[n]:
                    for j in range(n):
                        xc[j] = xbar[j] + PSI * RHO * (xbar[j] - sim[n, j])
                    _clamp(&xc[0], lo, hi, n)
                    fc = _objective(target, mask, &xc[0], k, &pw[0])
                    accept = fc <= fr
                else:
                    for j in range(n):
                        xc[j] = xbar[j] - PSI * (xbar[j] - sim[n, j])
                    _clamp(&xc[0], lo, hi, n)
                    fc = _objective(target, mask, &xc[0], k, &pw[0])
                    accept = fc < fsim[n]
                if accept:
                    for j in range(n):
                        sim[n, j] = xc[j]
                    fsim[n] = fc
                else:
                    for i in range(1, n + 1):
                        for j in range(n):
                            sim[i, j] = sim[0, j] + SIGMA * (sim[i, j] - sim[0, j])
                        fsim[i] = _objective(target, mask, &sim[i, 0], k, &pw[0])
            _sort_simplex(sim, fsim, tmp, n)
            it += 1

    return np.asarray(sim[0]).copy(), fsim[0], it, bool(converged)


cdef double _det(double* m, int l) noexcept nogil:
    # m is row-major l*l scratch, destroyed by LU for l >= 4
    cdef int i, j, c, p
    cdef double det, piv, f, t
    if l == 1:
        return m[0]
    if l == 2:
        return m[0] * m[3] - m[1] * m[2]
    if l == 3:
        return (m[0] * (m[4] * m[8] - m[5] * m[7])
                - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6]))
    det = 1.0
    for c in range(l):
        p = c
        piv = fabs(m[c * l + c])
        for i in range(c + 1, l):
            if fabs(m[i * l + c]) > piv:
                piv = fabs(m[i * l + c])
                p = i
        if piv == 0.0:
            return 0.0
        if p != c:
            for j in range(l):
                t = m[c * l + j]
                m[c * l + j] = m[p * l + j]
                m[p * l + j] = t
            det = -det
        det *= m[c * l + c]
        for i in range(c + 1, l):
            f = m[i * l + c] / m[c * l + c]
            for j in range(c + 1, l):
                m[i * l + j] -= f * m[c * l + j]
    return det


cdef bint _next_comb(int* idx, int l, int d) noexcept nogil:
    cdef int i = l - 1
    while i >= 0 and idx[i] == d - l + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for i in range(i + 1, l):
        idx[i] = idx[i - 1] + 1
    return True


def max_abs_minor(double[:, ::1] H, int l):
    """Scan all l-minors of square H in lexicographic (rows, cols) order.

    Returns ``(det, rows, cols)`` of the first minor of maximal |det|; later
    minors must beat the incumbent by more than a relative 64 eps.
    """
    cdef int d = H.shape[0]
    cdef int i, j
    cdef double val, aval, best_abs = -1.0, best_val = 0.0
    cdef int[::1] rows = np.arange(l, dtype=np.intc)
    cdef int[::1] cols = np.empty(l, dtype=np.intc)
    cdef int[::1] best_r = np.empty(l, dtype=np.intc)
    cdef int[::1] best_c = np.empty(l, dtype=np.intc)
    cdef double[::1] m = np.empty(l * l)
    with nogil:
        while True:
            for i in range(l):
                cols[i] = i
            while True:
                for i in range(l):
                    for j in range(l):
                        m[i * l + j] = H[rows[i], cols[j]]
                val = _det(&m[0], l)
                aval = fabs(val)
                if aval > best_abs + TIE_RTOL * best_abs:
                    best_abs = aval
                    best_val = val
                    for i in range(l):
                        best_r[i] = rows[i]
                        best_c[i] = cols[i]
                if not _next_comb(&cols[0], l, d):
                    break
            if not _next_comb(&rows[0], l, d):
                break
    return best_val, tuple(int(v) for v in best_r), tuple(int(v) for v in best_c)
