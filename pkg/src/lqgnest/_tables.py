"""Lookup tables consumed by the compiled kernels.

All tables live on uniform grids in log y with analytic power-law tails, see
:func:`lqgnest._kernels.pow_lookup` and :func:`lqgnest._kernels.log_kbar_lookup`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .specfun import kbar_minus_one, log_kbar

# Chebyshev variable for the chord fraction lambda = L / X
N_U = 129


def chord_grid(n: int = N_U):
    u = np.linspace(0.0, 1.0, n)
    return u, 0.5 * (1.0 - np.cos(np.pi * u))


def _small_power(order: float) -> float:
    return min(2.0, 2.0 * order)


def one_minus_kbar(order: float, y):
    """1 - K̄_order(y) without cancellation at small y."""
    y = np.asarray(y, dtype=float)
    out = -np.expm1(log_kbar(order, y))
    small = y < 1e-2
    if np.any(small) and abs(order - round(order)) > 1e-9:
        out = np.where(small, -kbar_minus_one(order, np.where(small, y, 0.0)), out)
    return out


@lru_cache(maxsize=64)
def log_kbar_table(order: float, y0: float = 1e-8, y1: float = 80.0, n: int = 4001):
    """(tab, lp) for log K̄_order with lp = (log y0, dlog, q, order)."""
    ly = np.linspace(math.log(y0), math.log(y1), n)
    tab = np.asarray(log_kbar(order, np.exp(ly)), dtype=float)
    lp = np.array([ly[0], ly[1] - ly[0], _small_power(order), order])
    return tab, lp


@lru_cache(maxsize=64)
def kill_table(order: float, nu: float, y0: float = 1e-8, y1: float = 1e4, n: int = 1201):
    """log of ph(y) = int_0^1 (1 - K̄_order(y s)) s^{-1-nu} ds on a log grid."""
    q = _small_power(order)
    if not q > nu:
        raise ValueError("small-jump killing integral diverges")
    v = np.geomspace(1e-14, y1, 20001)
    f = one_minus_kbar(order, v) * v ** (-nu)  # integrand times v, in d log v
    cum = integrate.cumulative_trapezoid(f, np.log(v), initial=0.0)
    # the piece below 1e-14 by the leading power law
    c = one_minus_kbar(order, v[0]) / v[0] ** q
    cum += c * v[0] ** (q - nu) / (q - nu)
    ly = np.linspace(math.log(y0), math.log(y1), n)
    y = np.exp(ly)
    Phi = np.interp(ly, np.log(v), cum)
    lp = np.array([ly[0], ly[1] - ly[0], q, nu])
    return np.log(y**nu * Phi), lp


def pow_table(fn, y0: float, y1: float, n: int, q_low: float, q_high: float):
    """Log-table of a positive function with the given tail exponents."""
    ly = np.linspace(math.log(y0), math.log(y1), n)
    vals = np.asarray(fn(np.exp(ly)), dtype=float)
    if np.any(~(vals > 0)):
        raise ValueError("pow_table needs a positive function on the grid")
    return np.log(vals), np.array([ly[0], ly[1] - ly[0], q_low, q_high])


def zero_table():
    """Table for the identically zero function (pow_lookup returns exp(-inf) = 0)."""
    return np.full(2, -np.inf), np.array([0.0, 1.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# jump integrals for the Palm representation


def palm_tables(nu, nc, am, pos, neg, wgrid, n_u: int = N_U, nh: int = 6001, nq: int = 4001):
    """Jump integrals G(w, lambda) at unit total length, times (lambda (1-lambda))^nu.

    G(w, lambda) = nc int_0^inf pos(w, h) h^{-1-nu} (1+h)^{-1-nu} dh
                   + am [N(w, lambda) + N(w, 1 - lambda)],
    N(w, y) = int_0^y neg(w, u) u^{-1-nu} (1-u)^{-1-nu} du.

    ``pos(w, h)`` and ``neg(w, u)`` broadcast over w[:, None] and the second
    argument. Returns an array (len(wgrid), n_u).
    """
    w = np.atleast_1d(np.asarray(wgrid, dtype=float))[:, None]
    h = np.geomspace(1e-13, 1e9, nh)[None, :]
    fp = pos(w, h) * h ** (-nu) * (1.0 + h) ** (-1.0 - nu)
    P = nc * integrate.trapezoid(fp, np.log(h), axis=1)

    half = np.geomspace(1e-15, 0.5, nq)
    s_lo = half[None, :]
    f_lo = neg(w, s_lo) * s_lo ** (-nu) * (1.0 - s_lo) ** (-1.0 - nu)
    c_lo = integrate.cumulative_trapezoid(f_lo, np.log(s_lo), axis=1, initial=0.0)
    tail = half[::-1][None, :]  # 1 - u from 0.5 down to 1e-15
    u_hi = 1.0 - tail
    f_hi = neg(w, u_hi) * u_hi ** (-1.0 - nu) * tail ** (-nu)
    c_hi = c_lo[:, -1:] + integrate.cumulative_trapezoid(f_hi, -np.log(tail), axis=1, initial=0.0)
    end = neg(w, np.ones((1, 1)))[:, 0]

    u, lam = chord_grid(n_u)
    out = np.empty((w.shape[0], n_u))
    for a in range(w.shape[0]):

        def N_scaled(y):
            # N(y) (1-y)^nu, smooth up to y = 1
            y = np.asarray(y, dtype=float)
            res = np.empty_like(y)
            lo = y <= 0.5
            res[lo] = np.interp(np.log(np.maximum(y[lo], 1e-300)), np.log(half), c_lo[a]) * (1.0 - y[lo]) ** nu
            t = 1.0 - y[~lo]
            lt = -np.log(np.maximum(t, 1e-300))
            res[~lo] = np.interp(lt, -np.log(tail[0]), c_hi[a] * tail[0] ** nu)
            return res

        inner = (lam > 0) & (lam < 1)
        L = lam[inner]
        val = np.empty(n_u)
        val[inner] = (L * (1 - L)) ** nu * P[a] + am * (L**nu * N_scaled(L) + (1 - L) ** nu * N_scaled(1 - L))
        val[~inner] = am * end[a] / nu
        out[a] = val
    return out


def wgrid_params(wgrid):
    wgrid = np.asarray(wgrid, dtype=float)
    if wgrid.size == 1:
        return np.zeros(2)
    lw = np.log(wgrid)
    d = np.diff(lw)
    if not np.allclose(d, d[0], rtol=1e-9):
        raise ValueError("w grid must be log-uniform")
    return np.array([lw[0], d[0]])


def kbar_or_one(order, y):
    return np.exp(log_kbar(order, np.asarray(y, dtype=float)))
