# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the zeroth-order projected gradient method.

Mirrors ``_core_py.run_chunk`` operation for operation; keep the two in sync.
The floating-point evaluation order is part of the contract (both backends
must produce bitwise-identical traces), so no fast-math and no FMA.
"""

from libc.math cimport sqrt, isfinite

ctypedef double[:, ::1] mat
ctypedef double[::1] vec
ctypedef const double[:, ::1] cmat
ctypedef const double[::1] cvec


cdef inline double _poly(const double* x, cmat A, cvec b, cvec c, cvec s, Py_ssize_t n) noexcept nogil:
    cdef double v = 0.0, sq = 0.0, q4 = 0.0, rr = 0.0
    cdef double ax, x2, d
    cdef Py_ssize_t i, j
    for i in range(n):
        ax = 0.0
        for j in range(n):
            ax = ax + A[i, j] * x[j]
        v = v + x[i] * (0.5 * ax + b[i])
        x2 = x[i] * x[i]
        sq = sq + x2
        q4 = q4 + x2 * x2
        d = x[i] - c[i]
        rr = rr + d * d
    return v + s[0] + s[1] * q4 + s[2] * sq * sq + 0.5 * s[3] * rr


def run_chunk(vec x, vec xbar, vec state,
              cmat Ao, cvec bo, cvec co, cvec so,
              cmat Ae, cvec be, cvec ce, cvec se,
              int set_kind, cvec s1, cvec s2, double srad,
              cvec taus, cvec alphas, cvec r, cvec kr, cmat e, cmat xi,
              long long k0, const long long[::1] rec,
              vec out_avg, vec out_best, mat out_x, mat out_xbar):
    """Advance ``len(taus)`` iterations in place.

    ``state[0]`` carries the best objective value seen so far.  Returns -1 on
    success, otherwise the local index of the first non-finite evaluation.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = taus.shape[0]
    cdef Py_ssize_t nrec = rec.shape[0]
    cdef Py_ssize_t i, j, p = 0, status = -1
    cdef double tau, st, y, ym, coef, fx, kk, nr, scale, step
    cdef double best = state[0]
    cdef double xp[64]
    cdef double xm[64]
    if n > 64:
        raise ValueError("compiled loop supports n <= 64")
    with nogil:
        for i in range(m):
            tau = taus[i]
            st = tau * r[i]
            for j in range(n):
                xp[j] = x[j] + st * e[i, j]
                xm[j] = x[j] - st * e[i, j]
            y = _poly(xp, Ao, bo, co, so, n) + xi[i, 0]
            ym = _poly(xm, Ao, bo, co, so, n) + xi[i, 1]
            if not (isfinite(y) and isfinite(ym)):
                status = i
                break
            coef = (n / (2.0 * tau)) * (y - ym) * kr[i]
            fx = _poly(&x[0], Ae, be, ce, se, n)
            if not isfinite(fx):
                status = i
                break
            if fx < best:
                best = fx
            kk = <double>(k0 + i + 1)
            for j in range(n):
                xbar[j] = xbar[j] + (x[j] - xbar[j]) / kk
            if p < nrec and rec[p] == i:
                out_avg[p] = _poly(&xbar[0], Ae, be, ce, se, n)
                out_best[p] = best
                for j in range(n):
                    out_x[p, j] = x[j]
                    out_xbar[p, j] = xbar[j]
                p += 1
            step = alphas[i] * coef
            for j in range(n):
                x[j] = x[j] - step * e[i, j]
            if set_kind == 1:
                nr = 0.0
                for j in range(n):
                    nr = nr + (x[j] - s1[j]) * (x[j] - s1[j])
                nr = sqrt(nr)
                if nr > srad:
                    scale = srad / nr
                    for j in range(n):
                        x[j] = s1[j] + (x[j] - s1[j]) * scale
            elif set_kind == 2:
                for j in range(n):
                    if x[j] < s1[j]:
                        x[j] = s1[j]
                    elif x[j] > s2[j]:
                        x[j] = s2[j]
    state[0] = best
    return status
