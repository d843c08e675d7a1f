"""Vectorized numpy versions of the kernels in :mod:`lqgnest._kernels`.

Paths advance in lockstep, one event per sweep, with finished paths masked
out. The random streams differ from the compiled loops, so results agree in
distribution only. Status codes and output layouts are the same.
"""

from __future__ import annotations

import numpy as np

from ._kernels import AM, AP_L, AP_R, COMP, EPS, FLOOR, MAXEV, NU, TMAX, XCAP


def log_kbar_lookup(tab, lp, y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    ly = np.log(np.where(pos, y, 1.0))
    n = tab.shape[0]
    t = (ly - lp[0]) / lp[1]
    lo = pos & (t <= 0)
    hi = pos & (t >= n - 1)
    mid = pos & ~lo & ~hi
    out[lo] = tab[0] * np.exp(lp[2] * (ly[lo] - lp[0]))
    y1 = np.exp(lp[0] + (n - 1) * lp[1])
    out[hi] = tab[n - 1] - (y[hi] - y1) + (lp[3] - 0.5) * (ly[hi] - np.log(y1))
    i = t[mid].astype(np.int64)
    f = t[mid] - i
    out[mid] = tab[i] * (1 - f) + tab[i + 1] * f
    return out


def pow_lookup(tab, lp, y):
    y = np.asarray(y, dtype=float)
    pos = y > 0
    ly = np.log(np.where(pos, y, 1.0))
    n = tab.shape[0]
    t = (ly - lp[0]) / lp[1]
    tc = np.clip(t, 0, n - 1.000001)
    i = tc.astype(np.int64)
    f = tc - i
    v = tab[i] * (1 - f) + tab[i + 1] * f
    v = np.where(t <= 0, tab[0] + lp[2] * (ly - lp[0]), v)
    v = np.where(t >= n - 1, tab[n - 1] + lp[3] * (ly - lp[0] - (n - 1) * lp[1]), v)
    return np.where(pos, np.exp(v), 0.0)


def table2(T, tz, zq, uq):
    """All tables T[:, ., .] at the points (zq, uq); returns shape zq.shape + (J,)."""
    nz, nu_ = T.shape[1], T.shape[2]
    tu = np.clip(uq * (nu_ - 1), 0.0, nu_ - 1.000001)
    iu = tu.astype(np.int64)
    fu = (tu - iu)[..., None]
    if nz == 1:
        A = np.moveaxis(T[:, 0, :], 0, -1)
        return A[iu] * (1 - fu) + A[iu + 1] * fu
    with np.errstate(divide="ignore"):
        tzv = np.where(zq > 0, (np.log(np.where(zq > 0, zq, 1.0)) - tz[0]) / tz[1], 0.0)
    tzv = np.clip(tzv, 0.0, nz - 1.000001)
    iz = tzv.astype(np.int64)
    fz = (tzv - iz)[..., None]
    A = np.moveaxis(T, 0, -1)  # (nz, nu, J)
    a = A[iz, iu] * (1 - fu) + A[iz, iu + 1] * fu
    b = A[iz + 1, iu] * (1 - fu) + A[iz + 1, iu + 1] * fu
    return a * (1 - fz) + b * fz


def side_drift(a_p, a_m, nu, delta, comp):
    var = (a_p + a_m) * delta ** (2.0 - nu) / (2.0 - nu)
    if comp > 0.5:
        d = (a_m - a_p) * delta ** (1.0 - nu) / (nu - 1.0)
    else:
        d = (a_p - a_m) * delta ** (1.0 - nu) / (1.0 - nu)
    return d, var


def kill_rate(apl, apr, am, nu, dl, dr, ph, php, z):
    if z <= 0:
        return np.zeros_like(dl)
    return (apl + am) * dl ** (-nu) * pow_lookup(ph, php, z * dl) + (apr + am) * dr ** (-nu) * pow_lookup(ph, php, z * dr)


def _chord(l, r):
    x = l + r
    lam = l / x
    return x, lam, np.arccos(np.clip(1.0 - 2.0 * lam, -1.0, 1.0)) / np.pi


def _jump(l, r, apl, apr, am, nu, eps, rng):
    """Jump proposal for every path from its pre-move state."""
    dl, dr = eps * l, eps * r
    bl = (apl + am) * dl ** (-nu) / nu
    rate = bl + (apr + am) * dr ** (-nu) / nu
    U = rng.random(l.shape) * rate
    U2 = rng.random(l.shape)
    left = U < bl
    hs = np.where(left, dl, dr) * U2 ** (-1.0 / nu)
    neg = np.where(left, U >= apl * dl ** (-nu) / nu, U - bl >= apr * dr ** (-nu) / nu)
    return rate, left, hs, neg


def lr_palm_kernel(l0, r0, n, prm, knots, T, tz, pw, pedge, lk, lkp, ph, php, rng):
    nu, apl, apr, am, eps = prm[NU], prm[AP_L], prm[AP_R], prm[AM], prm[EPS]
    floor = prm[FLOOR] * (l0 + r0)
    comp = prm[COMP]
    maxev = int(prm[MAXEV])
    xcap = prm[XCAP] * (l0 + r0)
    tmax = prm[TMAX] if prm[TMAX] > 0 else np.inf
    K, J = knots.shape[0], T.shape[0]
    out = np.zeros((n, K, J))
    diag = np.zeros((n, 5))
    diag[:, 1] = 1.0
    l = np.full(n, float(l0))
    r = np.full(n, float(r0))
    t = np.zeros(n)
    ev = np.zeros(n)
    logpi = np.zeros((n, K))
    act = np.arange(n)
    while act.size:
        la, ra = l[act], r[act]
        x, lam, uq = _chord(la, ra)
        edge = (lam * (1.0 - lam)) ** pedge
        code = np.full(act.size, -1.0)
        code[ev[act] >= maxev] = 1.0
        code[x > xcap] = 3.0
        code[x < floor] = 0.0
        code[(code < 0) & ~(edge > 0)] = 4.0
        done = code >= 0
        diag[act[done], 1] = code[done]
        act, la, ra, x, uq, edge = act[~done], la[~done], ra[~done], x[~done], uq[~done], edge[~done]
        if not act.size:
            break
        dl, dr = eps * la, eps * ra
        rate, left, hs, neg = _jump(la, ra, apl, apr, am, nu, eps, rng)
        tau = rng.standard_exponential(act.size) / rate
        hit = t[act] + tau >= tmax
        tau = np.where(hit, tmax - t[act], tau)
        t[act] += tau
        xp = x**pw / edge
        kill = np.stack([kill_rate(apl, apr, am, nu, dl, dr, ph, php, z) for z in knots], axis=1)
        g0 = xp[:, None, None] * np.stack([table2(T, tz, z * x, uq) for z in knots], axis=1)
        d, v = side_drift(apl, am, nu, dl, comp)
        la = la + d * tau + np.sqrt(v * tau) * rng.standard_normal(act.size)
        d, v = side_drift(apr, am, nu, dr, comp)
        ra = ra + d * tau + np.sqrt(v * tau) * rng.standard_normal(act.size)
        killed = (la <= 0) | (ra <= 0)
        with np.errstate(invalid="ignore", divide="ignore"):
            x1, lam1, uq1 = _chord(np.where(killed, 0.5, la), np.where(killed, 0.5, ra))
            edge1 = (lam1 * (1.0 - lam1)) ** pedge
        trap = ~killed & (edge1 > 0)
        xp1 = np.where(trap, x1**pw / np.where(trap, edge1, 1.0), 0.0)
        g1 = xp1[:, None, None] * np.stack([table2(T, tz, z * x1, uq1) for z in knots], axis=1)
        a = kill * tau[:, None]
        small = a <= 1e-6
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            ea = np.exp(-a)
            c0 = np.where(small, 1.0 - 0.5 * a, (1.0 - ea) / a)
            c1 = np.where(small, 0.5 - a / 3.0, (1.0 - ea * (1.0 + a)) / (a * a))
        wk = tau[:, None] * np.exp(logpi[act])
        c0, c1 = c0[..., None], c1[..., None]
        inc = np.where(trap[:, None, None], (c0 - c1) * g0 + c1 * g1, c0 * g0)
        out[act] += wk[..., None] * inc
        logpi[act] -= a
        y = np.where(left, la, ra)
        kj = neg & (hs >= y)
        stop = np.where(killed, 2.0, np.where(hit, 5.0, np.where(kj, 2.0, -1.0)))
        ev[act] += (~killed & ~hit).astype(float)
        h = np.where(neg, -hs, hs)
        go = stop < 0
        la = np.where(go & left, la + h, la)
        ra = np.where(go & ~left, ra + h, ra)
        l[act], r[act] = la, ra
        lp = np.stack([log_kbar_lookup(lk, lkp, z * hs) if z > 0 else np.zeros_like(hs) for z in knots], axis=1)
        logpi[act[go]] += lp[go]
        diag[act[~go], 1] = stop[~go]
        act = act[go]
    diag[:, 0] = ev
    diag[:, 2] = l
    diag[:, 3] = r
    diag[:, 4] = t
    return out, diag


def marked_weight_kernel(l0, r0, n, prm, tgrid, z, lk, lkp, lk1, lkp1, e1, sig, ph, php, rng):
    nu, apl, apr, am, eps = prm[NU], prm[AP_L], prm[AP_R], prm[AM], prm[EPS]
    comp = prm[COMP]
    maxev = int(prm[MAXEV])
    nt = tgrid.shape[0]
    es = np.exp(sig)
    out = np.zeros((n, nt, 5))
    l = np.full(n, float(l0))
    r = np.full(n, float(r0))
    t = np.zeros(n)
    logpi = np.zeros(n)
    S = np.zeros(n)
    i = np.zeros(n, dtype=np.int64)
    ev = np.zeros(n)
    act = np.arange(n)
    while act.size:
        la, ra = l[act], r[act]
        dl, dr = eps * la, eps * ra
        rate, left, hs, neg = _jump(la, ra, apl, apr, am, nu, eps, rng)
        tau = rng.standard_exponential(act.size) / rate
        tg = tgrid[i[act]]
        hit = t[act] + tau >= tg
        tau = np.where(hit, tg - t[act], tau)
        t[act] += tau
        logpi[act] -= kill_rate(apl, apr, am, nu, dl, dr, ph, php, z) * tau
        S[act] += tau * ((apl * es + am) * dl ** (e1 - nu) + (apr * es + am) * dr ** (e1 - nu)) / (e1 - nu)
        d, v = side_drift(apl, am, nu, dl, comp)
        la = la + d * tau + np.sqrt(v * tau) * rng.standard_normal(act.size)
        d, v = side_drift(apr, am, nu, dr, comp)
        ra = ra + d * tau + np.sqrt(v * tau) * rng.standard_normal(act.size)
        dead = (la <= 0) | (ra <= 0)
        rec = hit & ~dead
        ar = act[rec]
        out[ar, i[ar], 0] = 1.0
        out[ar, i[ar], 1] = la[rec]
        out[ar, i[ar], 2] = ra[rec]
        out[ar, i[ar], 3] = logpi[ar]
        out[ar, i[ar], 4] = S[ar]
        i[ar] += 1
        jmp = ~hit & ~dead
        y = np.where(left, la, ra)
        dead |= jmp & neg & (hs >= y)
        jmp &= ~dead
        h = np.where(neg, -hs, hs)
        la = np.where(jmp & left, la + h, la)
        ra = np.where(jmp & ~left, ra + h, ra)
        lw0 = log_kbar_lookup(lk, lkp, z * hs)
        lw1 = e1 * np.log(hs) + log_kbar_lookup(lk1, lkp1, z * hs)
        aj = act[jmp]
        S[aj] += np.where(neg, 1.0, es)[jmp] * np.exp(lw1 - lw0)[jmp]
        logpi[aj] += lw0[jmp]
        ev[act] += jmp
        l[act], r[act] = la, ra
        keep = ~dead & (i[act] < nt) & (ev[act] < maxev)
        act = act[keep]
    return out


def bridge_jumps_kernel(n, mean_count, delta, nu, lg, lgp, fg, fgp, rng):
    counts = rng.poisson(mean_count, n)
    h = delta * rng.random(int(counts.sum())) ** (-1.0 / nu)
    idx = np.repeat(np.arange(n), counts)
    out = np.zeros((n, 4))
    out[:, 0] = np.bincount(idx, weights=h, minlength=n)
    out[:, 1] = np.bincount(idx, weights=pow_lookup(lg, lgp, h), minlength=n)
    out[:, 2] = np.bincount(idx, weights=pow_lookup(fg, fgp, h), minlength=n)
    out[:, 3] = counts
    return out


def first_passage_kernel(n, mean_rate, delta, nu, drift, var, tcap, lg, lgp, fg, fgp, rng):
    out = np.zeros((n, 3))
    out[:, 0] = np.inf
    x = np.zeros(n)
    t = np.zeros(n)
    act = np.arange(n)
    sd = np.sqrt(var)
    while act.size:
        m = act.size
        gap = rng.standard_exponential(m) / mean_rate
        d = x[act] + 1.0
        td = rng.wald(d / -drift, d * d / var)
        cross = td <= gap
        out[act[cross], 0] = t[act[cross]] + td[cross]
        nc = ~cross
        a, g, dd = act[nc], gap[nc], d[nc]
        xe = np.empty(a.size)
        todo = np.arange(a.size)
        while todo.size:
            cand = x[a[todo]] + drift * g[todo] + sd * np.sqrt(g[todo]) * rng.standard_normal(todo.size)
            with np.errstate(over="ignore"):
                ok = (cand > -1.0) & (rng.random(todo.size) > np.exp(-2.0 * dd[todo] * (cand + 1.0) / (var * g[todo])))
            xe[todo[ok]] = cand[ok]
            todo = todo[~ok]
        t[a] += g
        h = delta * rng.random(a.size) ** (-1.0 / nu)
        x[a] = xe + h
        out[a, 1] += pow_lookup(lg, lgp, h)
        out[a, 2] += pow_lookup(fg, fgp, h)
        act = a[t[a] < tcap]
    return out
