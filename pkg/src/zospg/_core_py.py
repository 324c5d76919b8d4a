"""Pure-Python twin of the compiled loop in ``_core.pyx``.

Same signature, same floating-point evaluation order, so both backends give
bitwise-identical results.  Used when the extension is not built.
"""

import math


def _poly(x, A, b, c, s, n):
    v = 0.0
    sq = 0.0
    q4 = 0.0
    rr = 0.0
    for i in range(n):
        ax = 0.0
        row = A[i]
        for j in range(n):
            ax = ax + row[j] * x[j]
        v = v + x[i] * (0.5 * ax + b[i])
        x2 = x[i] * x[i]
        sq = sq + x2
        q4 = q4 + x2 * x2
        d = x[i] - c[i]
        rr = rr + d * d
    return v + s[0] + s[1] * q4 + s[2] * sq * sq + 0.5 * s[3] * rr


def run_chunk(x, xbar, state, Ao, bo, co, so, Ae, be, ce, se,
              set_kind, s1, s2, srad, taus, alphas, r, kr, e, xi,
              k0, rec, out_avg, out_best, out_x, out_xbar):
    n = x.shape[0]
    m = taus.shape[0]
    xl, xb = x.tolist(), xbar.tolist()
    Ao_, bo_, co_, so_ = Ao.tolist(), bo.tolist(), co.tolist(), so.tolist()
    Ae_, be_, ce_, se_ = Ae.tolist(), be.tolist(), ce.tolist(), se.tolist()
    s1_, s2_ = s1.tolist(), s2.tolist()
    taus_, alphas_, r_, kr_ = taus.tolist(), alphas.tolist(), r.tolist(), kr.tolist()
    e_, xi_ = e.tolist(), xi.tolist()
    rec_ = rec.tolist()
    nrec = len(rec_)
    best = float(state[0])
    p = 0
    status = -1
    nf = float(n)
    for i in range(m):
        tau = taus_[i]
        st = tau * r_[i]
        ei = e_[i]
        xp = [xl[j] + st * ei[j] for j in range(n)]
        xm = [xl[j] - st * ei[j] for j in range(n)]
        y = _poly(xp, Ao_, bo_, co_, so_, n) + xi_[i][0]
        ym = _poly(xm, Ao_, bo_, co_, so_, n) + xi_[i][1]
        if not (math.isfinite(y) and math.isfinite(ym)):
            status = i
            break
        coef = (nf / (2.0 * tau)) * (y - ym) * kr_[i]
        fx = _poly(xl, Ae_, be_, ce_, se_, n)
        if not math.isfinite(fx):
            status = i
            break
        if fx < best:
            best = fx
        kk = float(k0 + i + 1)
        for j in range(n):
            xb[j] = xb[j] + (xl[j] - xb[j]) / kk
        if p < nrec and rec_[p] == i:
            out_avg[p] = _poly(xb, Ae_, be_, ce_, se_, n)
            out_best[p] = best
            out_x[p, :] = xl
            out_xbar[p, :] = xb
            p += 1
        step = alphas_[i] * coef
        for j in range(n):
            xl[j] = xl[j] - step * ei[j]
        if set_kind == 1:
            nr = 0.0
            for j in range(n):
                nr = nr + (xl[j] - s1_[j]) * (xl[j] - s1_[j])
            nr = math.sqrt(nr)
            if nr > srad:
                scale = srad / nr
                for j in range(n):
                    xl[j] = s1_[j] + (xl[j] - s1_[j]) * scale
        elif set_kind == 2:
            for j in range(n):
                if xl[j] < s1_[j]:
                    xl[j] = s1_[j]
                elif xl[j] > s2_[j]:
                    xl[j] = s2_[j]
    x[:] = xl
    xbar[:] = xb
    state[0] = best
    return status
