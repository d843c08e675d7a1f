"""Compiled inner loops shared by the Lévy and partition modules.

Everything here works on plain floats and arrays so that numba can compile
it. Parameter vectors are packed by the callers in :mod:`lqgnest.levy`; the
layout is documented next to each kernel. With ``LQGNEST_NO_NUMBA=1`` the
decorators become no-ops and these functions run as ordinary Python.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit

# layout of the dynamics vector ``prm``
NU, AP_L, AP_R, AM, EPS, FLOOR, COMP, MAXEV, XCAP, TMAX, NCOLS = 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10


@njit(cache=True)
def lin1(tab, x0, dx, xq):
    """Linear interpolation on a uniform grid, clamped at both ends."""
    n = tab.shape[0]
    t = (xq - x0) / dx
    if t <= 0.0:
        return tab[0]
    if t >= n - 1:
        return tab[n - 1]
    i = int(t)
    f = t - i
    return tab[i] * (1.0 - f) + tab[i + 1] * f


@njit(cache=True)
def log_kbar_lookup(tab, lp, y):
    """log K̄ from a table on a log grid; lp = (log y0, dlog, q, order).

    Below the grid the power law log K̄ ~ -C y^q is used, above it the
    exponential asymptote.
    """
    if y <= 0.0:
        return 0.0
    ly = math.log(y)
    n = tab.shape[0]
    t = (ly - lp[0]) / lp[1]
    if t <= 0.0:
        return tab[0] * math.exp(lp[2] * (ly - lp[0]))
    if t >= n - 1:
        y1 = math.exp(lp[0] + (n - 1) * lp[1])
        return tab[n - 1] - (y - y1) + (lp[3] - 0.5) * (ly - math.log(y1))
    i = int(t)
    f = t - i
    return tab[i] * (1.0 - f) + tab[i + 1] * f


@njit(cache=True)
def pow_lookup(tab, lp, y):
    """Table of a positive function on a log grid with power-law tails.

    lp = (log y0, dlog, q_low, q_high). The values are stored as logs.
    """
    if y <= 0.0:
        return 0.0
    ly = math.log(y)
    n = tab.shape[0]
    t = (ly - lp[0]) / lp[1]
    if t <= 0.0:
        return math.exp(tab[0] + lp[2] * (ly - lp[0]))
    if t >= n - 1:
        return math.exp(tab[n - 1] + lp[3] * (ly - lp[0] - (n - 1) * lp[1]))
    i = int(t)
    f = t - i
    return math.exp(tab[i] * (1.0 - f) + tab[i + 1] * f)


@njit(cache=True)
def table2(T, j, tz, zq, uq):
    """Bilinear lookup of T[j] over (log z, u); tz = (log z0, dlog z)."""
    nz = T.shape[1]
    nu_ = T.shape[2]
    tu = uq * (nu_ - 1)
    if tu < 0.0:
        tu = 0.0
    if tu > nu_ - 1.000001:
        tu = nu_ - 1.000001
    iu = int(tu)
    fu = tu - iu
    if nz == 1:
        return T[j, 0, iu] * (1.0 - fu) + T[j, 0, iu + 1] * fu
    if zq <= 0.0:
        tzv = 0.0
    else:
        tzv = (math.log(zq) - tz[0]) / tz[1]
    if tzv < 0.0:
        tzv = 0.0
    if tzv > nz - 1.000001:
        tzv = nz - 1.000001
    iz = int(tzv)
    fz = tzv - iz
    a = T[j, iz, iu] * (1.0 - fu) + T[j, iz, iu + 1] * fu
    b = T[j, iz + 1, iu] * (1.0 - fu) + T[j, iz + 1, iu + 1] * fu
    return a * (1.0 - fz) + b * fz


@njit(cache=True)
def pareto_trunc(a, b, nu, U):
    """Draw from the density prop. to h^{-1-nu} on [a, b]."""
    A = a ** (-nu)
    B = b ** (-nu) if b < 1e300 else 0.0
    return (A - U * (A - B)) ** (-1.0 / nu)


@njit(cache=True)
def band_mass(a, b, nu):
    if b <= a:
        return 0.0
    B = b ** (-nu) if b < 1e300 else 0.0
    return (a ** (-nu) - B) / nu


@njit(cache=True)
def side_drift(a_p, a_m, nu, delta, comp):
    """(drift, variance rate) of the Gaussian small-jump part of one side.

    The drift is the compensator of the kept jumps when comp is set
    (kappa < 4), otherwise the mean of the dropped ones.
    """
    var = (a_p + a_m) * delta ** (2.0 - nu) / (2.0 - nu)
    if comp > 0.5:
        d = (a_m - a_p) * delta ** (1.0 - nu) / (nu - 1.0)
    else:
        d = (a_p - a_m) * delta ** (1.0 - nu) / (1.0 - nu)
    return d, var


@njit(cache=True)
def kill_rate(apl, apr, am, nu, dl, dr, ph, php, z):
    """Rate of the small-jump factor: sum over sides of int_0^delta (1 - K̄(z h)) mu(dh).

    ``ph`` tabulates log int_0^1 (1 - K̄(y s)) s^{-1-nu} ds.
    """
    if z <= 0.0:
        return 0.0
    k = (apl + am) * dl ** (-nu) * pow_lookup(ph, php, z * dl)
    k += (apr + am) * dr ** (-nu) * pow_lookup(ph, php, z * dr)
    return k


@njit(cache=True)
def _chord(l, r):
    x = l + r
    lam = l / x
    return x, lam, math.acos(1.0 - 2.0 * lam) / math.pi


@njit(cache=True)
def lr_palm_kernel(l0, r0, n, prm, knots, T, tz, pw, pedge, lk, lkp, ph, php, rng):
    """Palm time integrals along the stable pair killed when a side turns negative.

    For each path and knot z_k it accumulates
        int_0^zeta Pi_k(t) X_t^pw T_j(z_k X_t, lambda_t) / (lambda_t (1-lambda_t))^pedge dt
    with lambda = L/X and Pi_k the product of K̄(z_k |jump|) over the jumps
    so far times exp(-int kill_k). The caller folds the weight
    w(X_t)/w(x_0) into ``pw``. The table axis u is the Chebyshev variable,
    lambda = (1 - cos(pi u)) / 2.

    Returns (out[n, K, J], diag[n, 5]) with diag = (events, status, l, r, t);
    status 0 = hit the floor, 1 = event cap, 2 = killed, 3 = above the cap,
    4 = one side below relative double resolution, 5 = reached tmax.
    """
    nu = prm[NU]
    apl = prm[AP_L]
    apr = prm[AP_R]
    am = prm[AM]
    eps = prm[EPS]
    floor = prm[FLOOR] * (l0 + r0)
    comp = prm[COMP]
    maxev = int(prm[MAXEV])
    xcap = prm[XCAP] * (l0 + r0)
    tmax = prm[TMAX] if prm[TMAX] > 0.0 else np.inf
    K = knots.shape[0]
    J = T.shape[0]
    out = np.zeros((n, K, J))
    diag = np.zeros((n, 5))
    logpi = np.zeros(K)
    kill = np.zeros(K)
    g0 = np.zeros((K, J))
    for p in range(n):
        l = l0
        r = r0
        for k in range(K):
            logpi[k] = 0.0
        ev = 0
        status = 1.0
        t = 0.0
        while ev < maxev:
            x = l + r
            if x < floor:
                status = 0.0
                break
            if x > xcap:
                status = 3.0
                break
            dl = eps * l
            dr = eps * r
            bl = (apl + am) * dl ** (-nu) / nu
            rate = bl + (apr + am) * dr ** (-nu) / nu
            tau = rng.standard_exponential() / rate
            hit = False
            if t + tau >= tmax:
                tau = tmax - t
                hit = True
            t += tau
            x, lam, uq = _chord(l, r)
            edge = (lam * (1.0 - lam)) ** pedge
            if not edge > 0.0:
                status = 4.0
                break
            xp = x**pw / edge
            for k in range(K):
                z = knots[k]
                kill[k] = kill_rate(apl, apr, am, nu, dl, dr, ph, php, z)
                for j in range(J):
                    g0[k, j] = xp * table2(T, j, tz, z * x, uq)
            # jump proposal from the pre-move state
            U = rng.random() * rate
            U2 = rng.random()
            if U < bl:
                side = 0
                hs = dl * U2 ** (-1.0 / nu)
                neg = U >= apl * dl ** (-nu) / nu
            else:
                side = 1
                hs = dr * U2 ** (-1.0 / nu)
                neg = U - bl >= apr * dr ** (-nu) / nu
            h = -hs if neg else hs
            d, v = side_drift(apl, am, nu, dl, comp)
            l += d * tau + math.sqrt(v * tau) * rng.standard_normal()
            d, v = side_drift(apr, am, nu, dr, comp)
            r += d * tau + math.sqrt(v * tau) * rng.standard_normal()
            killed = l <= 0.0 or r <= 0.0
            # trapezoid in time against the exponential killing; the drift
            # moves the state by O(delta) per holding time, so the left-point
            # rule would be first order in eps
            trap = not killed
            if trap:
                x1, lam1, uq1 = _chord(l, r)
                edge1 = (lam1 * (1.0 - lam1)) ** pedge
                trap = edge1 > 0.0
            if trap:
                xp1 = x1**pw / edge1
            for k in range(K):
                a = kill[k] * tau
                if a > 1e-6:
                    ea = math.exp(-a)
                    c0 = (1.0 - ea) / a
                    c1 = (1.0 - ea * (1.0 + a)) / (a * a)
                else:
                    c0 = 1.0 - 0.5 * a
                    c1 = 0.5 - a / 3.0
                wk = tau * math.exp(logpi[k])
                logpi[k] -= a
                if not wk > 0.0:
                    continue
                z = knots[k]
                for j in range(J):
                    if trap:
                        g1 = xp1 * table2(T, j, tz, z * x1, uq1)
                        out[p, k, j] += wk * ((c0 - c1) * g0[k, j] + c1 * g1)
                    else:
                        out[p, k, j] += wk * c0 * g0[k, j]
            if killed:
                status = 2.0
                break
            if hit:
                status = 5.0
                break
            ev += 1
            y = l if side == 0 else r
            if neg and hs >= y:
                status = 2.0
                break
            if side == 0:
                l += h
            else:
                r += h
            for k in range(K):
                if knots[k] > 0.0:
                    logpi[k] += log_kbar_lookup(lk, lkp, knots[k] * hs)
        diag[p, 0] = ev
        diag[p, 1] = status
        diag[p, 2] = l
        diag[p, 3] = r
        diag[p, 4] = t
    return out, diag


@njit(cache=True)
def marked_weight_kernel(l0, r0, n, prm, tgrid, z, lk, lkp, lk1, lkp1, e1, sig, ph, php, rng):
    """Raw stable pair observed at the times in ``tgrid`` with the IS ingredients.

    out[p, i] = (alive, l, r, log Pi, S) at tgrid[i]; Pi is the W^∅ product
    with its small-jump killing and S the sum over jumps of
    e^{sigma 1(h>0)} W^1(|h|) / W^∅(|h|), small jumps included through
    their mean. W^1(h) = h^e1 K̄_1(z h) is read from (lk1, lkp1).
    """
    nu = prm[NU]
    apl = prm[AP_L]
    apr = prm[AP_R]
    am = prm[AM]
    eps = prm[EPS]
    comp = prm[COMP]
    maxev = int(prm[MAXEV])
    nt = tgrid.shape[0]
    es = math.exp(sig)
    out = np.zeros((n, nt, 5))
    for p in range(n):
        l = l0
        r = r0
        logpi = 0.0
        S = 0.0
        t = 0.0
        i = 0
        ev = 0
        while i < nt and ev < maxev:
            dl = eps * l
            dr = eps * r
            bl = (apl + am) * dl ** (-nu) / nu
            rate = bl + (apr + am) * dr ** (-nu) / nu
            tau = rng.standard_exponential() / rate
            hit = False
            if t + tau >= tgrid[i]:
                tau = tgrid[i] - t
                hit = True
            t += tau
            kk = kill_rate(apl, apr, am, nu, dl, dr, ph, php, z)
            logpi -= kk * tau
            S += tau * ((apl * es + am) * dl ** (e1 - nu) + (apr * es + am) * dr ** (e1 - nu)) / (e1 - nu)
            d, v = side_drift(apl, am, nu, dl, comp)
            l += d * tau + math.sqrt(v * tau) * rng.standard_normal()
            d, v = side_drift(apr, am, nu, dr, comp)
            r += d * tau + math.sqrt(v * tau) * rng.standard_normal()
            if l <= 0.0 or r <= 0.0:
                break
            if hit:
                out[p, i, 0] = 1.0
                out[p, i, 1] = l
                out[p, i, 2] = r
                out[p, i, 3] = logpi
                out[p, i, 4] = S
                i += 1
                continue
            ev += 1
            U = rng.random() * rate
            U2 = rng.random()
            if U < bl:
                hs = dl * U2 ** (-1.0 / nu)
                neg = U >= apl * dl ** (-nu) / nu
                if neg and hs >= l:
                    break
                l += -hs if neg else hs
            else:
                hs = dr * U2 ** (-1.0 / nu)
                neg = U - bl >= apr * dr ** (-nu) / nu
                if neg and hs >= r:
                    break
                r += -hs if neg else hs
            lw0 = log_kbar_lookup(lk, lkp, z * hs)
            lw1 = e1 * math.log(hs) + log_kbar_lookup(lk1, lkp1, z * hs)
            S += (1.0 if neg else es) * math.exp(lw1 - lw0)
            logpi += lw0
    return out


@njit(cache=True)
def bridge_jumps_kernel(n, mean_count, delta, nu, lg, lgp, fg, fgp, rng):
    """Jumps above delta of a spectrally positive nu-stable path.

    The count is Poisson(mean_count) and the sizes are Pareto(nu) above delta.
    Returns per path (sum of jumps, sum of -log g, sum of f/g, count), with
    -log g and f/g read from :func:`pow_lookup` tables.
    """
    out = np.zeros((n, 4))
    for p in range(n):
        m = rng.poisson(mean_count)
        s = 0.0
        sg = 0.0
        sf = 0.0
        for _ in range(m):
            h = delta * rng.random() ** (-1.0 / nu)
            s += h
            sg += pow_lookup(lg, lgp, h)
            sf += pow_lookup(fg, fgp, h)
        out[p, 0] = s
        out[p, 1] = sg
        out[p, 2] = sf
        out[p, 3] = m
    return out


@njit(cache=True)
def inverse_gaussian(mu, lam, rng):
    """Inverse Gaussian draw by the transformation-with-rejection method."""
    y = rng.standard_normal() ** 2
    x = mu + mu * mu * y / (2.0 * lam) - mu / (2.0 * lam) * math.sqrt(4.0 * mu * lam * y + mu * mu * y * y)
    if rng.random() <= mu / (mu + x):
        return x
    return mu * mu / x


@njit(cache=True)
def first_passage_kernel(n, mean_rate, delta, nu, drift, var, tcap, lg, lgp, fg, fgp, rng):
    """First passage below -1 of big jumps plus Brownian motion with drift < 0.

    Between jumps the crossing time is exact (inverse Gaussian). Without a
    crossing the endpoint is drawn from the Gaussian conditioned on the
    bridge staying above the level. Paths still alive at ``tcap`` return
    tau = inf. Returns per path (tau, sum of -log g, sum of f/g) over the
    jumps before tau.
    """
    out = np.zeros((n, 3))
    sd = math.sqrt(var)
    for p in range(n):
        x = 0.0
        t = 0.0
        sg = 0.0
        sf = 0.0
        tau = np.inf
        while t < tcap:
            gap = rng.standard_exponential() / mean_rate
            d = x + 1.0
            td = inverse_gaussian(d / -drift, d * d / var, rng)
            if td <= gap:
                tau = t + td
                break
            while True:
                xe = x + drift * gap + sd * math.sqrt(gap) * rng.standard_normal()
                if xe > -1.0 and rng.random() > math.exp(-2.0 * d * (xe + 1.0) / (var * gap)):
                    break
            t += gap
            h = delta * rng.random() ** (-1.0 / nu)
            x = xe + h
            sg += pow_lookup(lg, lgp, h)
            sf += pow_lookup(fg, fgp, h)
        out[p, 0] = tau
        out[p, 1] = sg
        out[p, 2] = sf
    return out
