"""Asymmetric stable pairs, w-weighted expectations and the marked process.

The absorbed process (L', R') and the marked process Y^W are never simulated
directly. Every expectation is an importance-sampling average over the raw
stable pair killed when a side turns negative, weighted by
w(L_t, R_t) / w(l, r) with w(l, r) = (l + r)^{-1-4/kappa}. Sums over jumps
use the Palm representation: an expected sum of g(jump) becomes the time
integral of the jump-measure integral of g along the path.

Jumps smaller than ``eps`` times the current side length are replaced by a
Gaussian with matching drift and variance (compensator drift for kappa < 4,
mean of the dropped jumps for kappa > 4).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import integrate

from . import _tables
from ._accel import kernels
from ._kernels import AM, AP_L, AP_R, COMP, EPS, FLOOR, MAXEV, NCOLS, NU, TMAX, XCAP
from .params import ModelParams, SigmaFamily, alpha_from_sigma
from .radius import MCEstimate
from .specfun import DomainError, beta_fn, beta_inc

__all__ = [
    "JumpSkeleton",
    "MarkedState",
    "WeightFunctionSet",
    "JumpSumResult",
    "MarkedEnsemble",
    "stable_pair_simulate",
    "jump_rates",
    "dynamics_vector",
    "weighted_expectation",
    "jump_sum_moments",
    "power_theta_closed",
    "marked_process_simulate",
    "generator_apply",
    "semigroup_slopes",
]

SIDES = ("L", "R")


def jump_rates(p: ModelParams):
    """(a_+^L, a_+^R, a_-): densities a h^{-1-4/kappa} of the jump measures."""
    nc = p.neg_cos
    return nc * (1.0 - p.beta) / 2.0, nc * (1.0 + p.beta) / 2.0, 0.5


def _drift(a_p, a_m, nu, delta, comp):
    if comp:
        return (a_m - a_p) * delta ** (1.0 - nu) / (nu - 1.0)
    return (a_p - a_m) * delta ** (1.0 - nu) / (1.0 - nu)


# ---------------------------------------------------------------------------
# raw skeletons


@dataclass
class JumpSkeleton:
    """Jumps of size at least ``delta`` of the raw pair on [0, horizon].

    ``drift`` is the per-unit-time drift of each side that stands in for the
    suppressed jumps, ``var`` their variance rate. Columns of ``events`` are
    (time, side 0/1, height).
    """

    horizon: float
    delta: float
    start: tuple
    events: np.ndarray
    drift: tuple
    var: tuple = (0.0, 0.0)
    nu: float = 1.0

    def __post_init__(self):
        ev = np.asarray(self.events, dtype=float).reshape(-1, 3)
        if ev.size and np.any(np.diff(ev[:, 0]) < 0):
            raise ValueError("events must be time-sorted")
        if ev.size and np.any(np.abs(ev[:, 2]) < self.delta):
            raise ValueError("skeleton contains a jump below the cutoff")
        self.events = ev

    def jumps(self, side: int | None = None):
        ev = self.events
        return ev if side is None else ev[ev[:, 1] == side]

    def value(self, side: int, t, rng: np.random.Generator | None = None):
        """Side length at times t; with ``rng`` the small jumps enter as Brownian noise."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ev = self.jumps(side)
        cum = np.concatenate([[0.0], np.cumsum(ev[:, 2])])
        idx = np.searchsorted(ev[:, 0], t, side="right")
        out = self.start[side] + self.drift[side] * t + cum[idx]
        if rng is not None and self.var[side] > 0:
            order = np.argsort(t)
            ts = t[order]
            inc = rng.standard_normal(ts.size) * np.sqrt(np.diff(np.concatenate([[0.0], ts])) * self.var[side])
            noise = np.empty_like(ts)
            noise[order] = np.cumsum(inc)
            out = out + noise
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["time", "side", "height"])
        for t, s, h in self.events:
            wr.writerow([repr(float(t)), SIDES[int(s)], repr(float(h))])
        return buf.getvalue()

    @staticmethod
    def events_from_csv(text: str) -> np.ndarray:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["time", "side", "height"]:
            raise ValueError("missing CSV header time,side,height")
        return np.array([[float(t), SIDES.index(s), float(h)] for t, s, h in rows[1:]]).reshape(-1, 3)


def stable_pair_simulate(p: ModelParams, l: float, r: float, T: float, delta: float, rng: np.random.Generator) -> JumpSkeleton:
    """Jumps of the raw pair with |h| >= delta on [0, T], plus the drift for the rest."""
    if not (delta > 0 and T >= 0 and l > 0 and r > 0):
        raise DomainError("need delta > 0, T >= 0 and positive start")
    nu = p.nu
    apl, apr, am = jump_rates(p)
    rows = []
    drift = []
    var = []
    for side, ap in ((0, apl), (1, apr)):
        for a, sign in ((ap, 1.0), (am, -1.0)):
            m = rng.poisson(T * a * delta ** (-nu) / nu)
            times = rng.uniform(0.0, T, m)
            h = sign * delta * rng.random(m) ** (-1.0 / nu)
            rows.append(np.column_stack([times, np.full(m, side), h]))
        drift.append(_drift(ap, am, nu, delta, p.simple))
        var.append((ap + am) * delta ** (2.0 - nu) / (2.0 - nu))
    ev = np.concatenate(rows) if rows else np.zeros((0, 3))
    ev = ev[np.argsort(ev[:, 0], kind="stable")]
    return JumpSkeleton(T, delta, (float(l), float(r)), ev, tuple(drift), tuple(var), nu)


# ---------------------------------------------------------------------------
# states and weights


@dataclass(frozen=True)
class MarkedState:
    l: float
    r: float
    P: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "P", frozenset(self.P))
        interior = self.l > 0 and self.r > 0
        absorbed = self.l == 0 and self.r == 0 and not self.P
        if not (interior or absorbed):
            raise DomainError(f"invalid marked state ({self.l}, {self.r}, {sorted(self.P)})")

    @property
    def absorbed(self) -> bool:
        return self.l == 0 and self.r == 0


@dataclass
class WeightFunctionSet:
    """Callables W^B on (0, inf) for B in a label set, with W^∅ <= 1.

    When the weights have the Bessel form W^B(h) = h^e K̄_order(z h),
    ``forms`` maps B to (e, order) and ``z`` holds the common scale; the
    kernels need that form to tabulate them.
    """

    funcs: Mapping
    forms: Mapping = field(default_factory=dict)
    z: float | None = None

    def __post_init__(self):
        self.funcs = {frozenset(B): f for B, f in dict(self.funcs).items()}
        self.forms = {frozenset(B): v for B, v in dict(self.forms).items()}
        if frozenset() not in self.funcs:
            raise DomainError("W^∅ is required")

    def __call__(self, B, x):
        return self.funcs[frozenset(B)](x)

    @classmethod
    def closed_form(cls, p: ModelParams, s: SigmaFamily | None, Lam: float) -> "WeightFunctionSet":
        """Zero- and one-point weights W^∅ = K̄_{4/kappa}(z h), W^{i} = h^e K̄_mu(z h)."""
        from .partition import zero_point_scale

        z = zero_point_scale(p, Lam)
        nu = p.nu
        funcs = {frozenset(): lambda x, z=z: _tables.kbar_or_one(nu, z * np.asarray(x, dtype=float))}
        forms = {frozenset(): (0.0, nu)}
        for i in (s.A if s is not None else ()):
            a = alpha_from_sigma(p, s([i]))
            e = 2.0 * a / math.sqrt(p.kappa)
            mu = 2.0 * (p.q_gamma - a) / math.sqrt(p.kappa)
            funcs[frozenset([i])] = lambda x, e=e, mu=mu: np.asarray(x, dtype=float) ** e * _tables.kbar_or_one(mu, z * np.asarray(x, dtype=float))
            forms[frozenset([i])] = (e, mu)
        return cls(funcs, forms, z)

    def check(self, p: ModelParams, grid=None) -> list:
        """Grid checks of the W^∅ conditions; returns a list of messages."""
        grid = np.geomspace(1e-4, 1e2, 200) if grid is None else np.asarray(grid)
        msgs = []
        w0 = np.asarray(self(frozenset(), grid), dtype=float)
        if np.any(w0 > 1 + 1e-12):
            msgs.append("W^∅ exceeds 1")
        if np.any(np.diff(w0) > 1e-12):
            msgs.append("W^∅ is not non-increasing")
        q = min(2.0, 8.0 / p.kappa)
        small = grid < 1e-1
        ratio = (1 - w0[small]) / grid[small] ** q
        if small.any() and ratio.max() > 10 * max(ratio.min(), 1e-300) and ratio.max() > 1e3:
            msgs.append("1 - W^∅ does not vanish at the required rate")
        for B, f in self.funcs.items():
            if not B:
                continue
            # W^B(x) <~ W^B(y) for y <= x <= 2y
            v = np.asarray(f(grid), dtype=float)
            good = v > 1e-250
            worst = 0.0
            for m in (1.25, 1.5, 2.0):
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    rr = np.asarray(f(m * grid), dtype=float) / v
                rr = np.where(np.isnan(rr), np.inf, rr)
                if good.any():
                    worst = max(worst, float(rr[good].max()))
            if worst > 1e3:
                msgs.append(f"doubling bound fails for W^{sorted(B)}")
        return msgs


# ---------------------------------------------------------------------------
# kernel plumbing


def dynamics_vector(p: ModelParams, eps: float, floor: float = 1e-6, maxev: float = 1e7, xcap: float = 1e12, tmax: float = 0.0):
    if not (0 < eps < 0.5):
        raise DomainError(f"relative cutoff eps must lie in (0, 0.5), got {eps}")
    apl, apr, am = jump_rates(p)
    prm = np.zeros(NCOLS)
    prm[NU] = p.nu
    prm[AP_L] = apl
    prm[AP_R] = apr
    prm[AM] = am
    prm[EPS] = eps
    prm[FLOOR] = floor
    prm[COMP] = 1.0 if p.simple else 0.0
    prm[MAXEV] = maxev
    prm[XCAP] = xcap
    prm[TMAX] = tmax
    return prm


def _chunks(n: int, size: int):
    while n > 0:
        m = min(n, size)
        yield m
        n -= m


def _marked_raw(p, l, r, n, tgrid, z, e1, sigma, order1, eps, rng, backend=None, chunk=20000):
    """Raw-path ingredients at the time grid; see :func:`_kernels.marked_weight_kernel`."""
    K = kernels(backend)
    prm = dynamics_vector(p, eps)
    lk, lkp = _tables.log_kbar_table(p.nu)
    lk1, lkp1 = _tables.log_kbar_table(order1)
    ph, php = _tables.kill_table(p.nu, p.nu)
    tg = np.asarray(np.sort(np.atleast_1d(tgrid)), dtype=float)
    parts = [K.marked_weight_kernel(float(l), float(r), m, prm, tg, float(z), lk, lkp, lk1, lkp1, float(e1), float(sigma), ph, php, rng)
             for m in _chunks(n, chunk)]
    return tg, np.concatenate(parts)


def weighted_expectation(p: ModelParams, l: float, r: float, t: float, g: Callable | None = None, *, eps: float = 0.01,
                         n: int = 20000, rng: np.random.Generator, backend: str | None = None) -> MCEstimate:
    """E_(l,r)[g(L'_t, R'_t); t < zeta'] by weighting raw stable paths.

    ``g`` takes the arrays (L_t, R_t) and defaults to 1. The estimator is
    the mean of w(L_t, R_t) / w(l, r) g 1(t < tau_0).
    """
    if t == 0:
        v = 1.0 if g is None else float(np.asarray(g(np.array([l]), np.array([r]))).ravel()[0])
        return MCEstimate(v, 0.0, n)
    nu = p.nu
    _, out = _marked_raw(p, l, r, n, [t], 0.0, nu + 1.0, 0.0, nu, eps, rng, backend)
    alive, lt, rt = out[:, 0, 0], out[:, 0, 1], out[:, 0, 2]
    x0 = l + r
    with np.errstate(divide="ignore", invalid="ignore"):
        wt = np.where(alive > 0, ((lt + rt) / x0) ** (-1.0 - nu), 0.0)
    if g is not None:
        gv = np.zeros(n)
        ok = alive > 0
        gv[ok] = np.asarray(g(lt[ok], rt[ok]), dtype=float)
        wt = wt * gv
    return MCEstimate.from_samples(wt)


# ---------------------------------------------------------------------------
# jump-sum moments


def power_theta_closed(p: ModelParams, theta: float) -> float:
    """Closed form of A_+ / (1 - A_-) = cos(4 pi / kappa) / cos(4 pi / kappa - pi theta)."""
    nu = p.nu
    if not (nu + 0.5 < theta < nu + 1.5):
        raise DomainError(f"theta must lie in ({nu + 0.5:.6g}, {nu + 1.5:.6g}), got {theta}")
    a = 4.0 * math.pi / p.kappa
    return math.cos(a) / math.cos(a - math.pi * theta)


def _moment_tables(p: ModelParams, theta: float, n_u: int = 257):
    """Closed-form g_+ and g_- at unit length, times (lambda (1 - lambda))^nu."""
    nu = p.nu
    _, lam = _tables.chord_grid(n_u)
    T = np.zeros((2, 1, n_u))
    T[0, 0] = p.neg_cos * beta_fn(theta - nu, 1.0 + 2.0 * nu - theta) * (lam * (1 - lam)) ** nu
    for i, L in enumerate(lam):
        if 0 < L < 1:
            T[1, 0, i] = 0.5 * (beta_inc(L, theta - nu, -nu) + beta_inc(1 - L, theta - nu, -nu)) * (L * (1 - L)) ** nu
        else:
            T[1, 0, i] = 0.5 / nu
    return T


@dataclass
class JumpSumResult:
    a_plus: MCEstimate
    a_minus: MCEstimate
    ratio: MCEstimate
    tail_bound: float
    status_counts: dict

    def to_dict(self):
        return {"a_plus": self.a_plus.to_dict(), "a_minus": self.a_minus.to_dict(), "ratio": self.ratio.to_dict(),
                "tail_bound": self.tail_bound, "status_counts": self.status_counts}


STATUS = {0: "floor", 1: "event_cap", 2: "killed", 3: "above_cap", 4: "degenerate_chord", 5: "horizon"}


def _status_counts(diag):
    c = np.bincount(diag[:, 1].astype(int), minlength=6)
    return {STATUS[i]: int(c[i]) for i in range(6) if c[i]}


def palm_run(p, l, r, n, eps, knots, T, tz, pw, pedge, order_pi, rng, backend=None, chunk: int = 10000, tmax=0.0):
    """Run :func:`_kernels.lr_palm_kernel` in chunks; returns (out, diag)."""
    K = kernels(backend)
    prm = dynamics_vector(p, eps, tmax=tmax)
    lk, lkp = _tables.log_kbar_table(order_pi)
    ph, php = _tables.kill_table(order_pi, p.nu)
    knots = np.asarray(knots, dtype=float)
    outs, diags = [], []
    for m in _chunks(n, chunk):
        o, d = K.lr_palm_kernel(float(l), float(r), m, prm, knots, T, tz, float(pw), float(pedge), lk, lkp, ph, php, rng)
        outs.append(o)
        diags.append(d)
    return np.concatenate(outs), np.concatenate(diags)


def _ratio_estimate(a, b, seed=None):
    """a.mean / (1 - b.mean) with the delta-method standard error."""
    n = a.size
    ma, mb = a.mean(), b.mean()
    c = np.cov(a, b) / n
    g = np.array([1.0 / (1.0 - mb), ma / (1.0 - mb) ** 2])
    return MCEstimate(float(ma / (1.0 - mb)), float(math.sqrt(max(g @ c @ g, 0.0))), n, seed)


def jump_sum_moments(p: ModelParams, theta: float, l: float = 0.5, r: float = 0.5, *, eps: float = 0.01, n: int = 50000,
                     rng: np.random.Generator, backend: str | None = None) -> JumpSumResult:
    """A_+- = E sum_{t < zeta'} |Delta X'_t|^theta over positive / negative jumps.

    Palm representation: A_+- = int_0^inf E[g_+-(L'_t, R'_t); t < zeta'] dt,
    with g_+ = nc x^{theta-nu} B(theta-nu, 1+2nu-theta) and
    g_- = x^{theta-nu} [B_lambda(theta-nu, -nu) + B_{1-lambda}(theta-nu, -nu)] / 2,
    integrated to the killing time along each raw path. Paths stopped at the
    length floor contribute the bound on their remaining mass to ``tail_bound``.
    """
    nu = p.nu
    if not (nu < theta < 1.0 + 2.0 * nu):
        raise DomainError(f"A_+ is infinite for theta outside ({nu:.6g}, {1 + 2 * nu:.6g}), got {theta}")
    if abs(l + r - 1.0) > 1e-12:
        raise DomainError("jump_sum_moments is normalised to l + r = 1")
    T = _moment_tables(p, theta)
    out, diag = palm_run(p, l, r, n, eps, np.zeros(1), T, np.zeros(2), theta - nu - 1.0 - nu, nu, nu, rng, backend)
    a, b = out[:, 0, 0], out[:, 0, 1]
    floor = diag[:, 1] == 0
    x_end = diag[:, 2] + diag[:, 3]
    ratio = power_theta_closed(p, theta) if nu + 0.5 < theta < nu + 1.5 else math.nan
    # remaining mass from a stopped state scales like x^{theta-1-nu} (A_+ + A_-)
    tail = float(np.sum(x_end[floor] ** (theta - 1 - nu)) / n) if floor.any() else 0.0
    if tail and math.isfinite(ratio):
        tail *= 1.0 + abs(ratio)
    return JumpSumResult(MCEstimate.from_samples(a), MCEstimate.from_samples(b), _ratio_estimate(a, b), tail, _status_counts(diag))


# ---------------------------------------------------------------------------
# marked process with |A| <= 1


@dataclass
class MarkedEnsemble:
    """Weighted raw paths representing Y^W at the grid times.

    At time index i a path carries the state (l[:, i], r[:, i]) twice: with
    weight ``w_marked`` for P = {i} and ``w_empty`` for P = ∅. Weighted
    means over the paths give E f(Y^W_t); the missing mass is the
    probability of absorption.
    """

    times: np.ndarray
    l: np.ndarray
    r: np.ndarray
    w_marked: np.ndarray
    w_empty: np.ndarray
    label: int | None
    start: MarkedState

    def expect(self, f: Callable, i: int) -> MCEstimate:
        """E f(Y_t) at times[i]; f(l, r, P) with P a frozenset, applied per path."""
        lab = frozenset() if self.label is None else frozenset([self.label])
        alive = (self.w_marked[:, i] + self.w_empty[:, i]) > 0
        v = np.zeros(self.l.shape[0])
        li, ri = self.l[alive, i], self.r[alive, i]
        v[alive] = self.w_marked[alive, i] * _fvec(f, li, ri, lab) + self.w_empty[alive, i] * _fvec(f, li, ri, frozenset())
        return MCEstimate.from_samples(v)

    def samples(self, f: Callable, i: int) -> np.ndarray:
        lab = frozenset() if self.label is None else frozenset([self.label])
        alive = (self.w_marked[:, i] + self.w_empty[:, i]) > 0
        v = np.zeros(self.l.shape[0])
        li, ri = self.l[alive, i], self.r[alive, i]
        v[alive] = self.w_marked[alive, i] * _fvec(f, li, ri, lab) + self.w_empty[alive, i] * _fvec(f, li, ri, frozenset())
        return v

    def survival(self) -> np.ndarray:
        return (self.w_marked + self.w_empty).mean(axis=0)

    def marked_fraction(self) -> np.ndarray:
        return self.w_marked.mean(axis=0)


def _fvec(f, l, r, P):
    out = np.asarray(f(l, r, P), dtype=float)
    return np.broadcast_to(out, l.shape)


def marked_process_simulate(p: ModelParams, s: SigmaFamily | None, W: WeightFunctionSet, start: MarkedState, times, *,
                            eps: float = 0.01, n: int = 20000, rng: np.random.Generator, backend: str | None = None) -> MarkedEnsemble:
    """Weighted ensemble for Y^W at the given times, for at most one marked point.

    With Pi_t the product of W^∅(|jump|) and S_t the sum over jumps of
    e^{sigma 1(h>0)} W^{i}(|h|) / W^∅(|h|), a raw path started from (l, r)
    with P = {i} gives the weights
        w(X_t) Pi_t W^{i}(X_t) / (w(x0) W^{i}(x0))   for P_t = {i},
        w(X_t) Pi_t S_t W^∅(X_t) / (w(x0) W^{i}(x0)) for P_t = ∅,
    and from P = ∅ only the second without S.
    """
    label = None
    if s is not None and len(s.A) > 1:
        raise DomainError("marked_process_simulate handles at most one marked point")
    if s is not None and len(s.A) == 1:
        label = s.A[0]
    if start.absorbed:
        raise DomainError("start state is absorbing")
    if W.z is None or any(B not in W.forms for B in W.funcs):
        raise DomainError("the kernels need Bessel-form weights (WeightFunctionSet.closed_form)")
    nu = p.nu
    B1 = frozenset([label]) if label is not None else None
    if B1 is not None:
        e1, mu1 = W.forms[B1]
        sig = s([label])
    else:
        e1, mu1, sig = nu + 1.0, nu, 0.0
    if start.P and start.P != B1:
        raise DomainError("start set must be ∅ or the marked label")
    tg, out = _marked_raw(p, start.l, start.r, n, times, W.z, e1, sig, mu1, eps, rng, backend)
    alive = out[:, :, 0] > 0
    lt, rt, logpi, S = out[:, :, 1], out[:, :, 2], out[:, :, 3], out[:, :, 4]
    x0 = start.l + start.r
    xt = np.where(alive, lt + rt, 1.0)
    base = np.where(alive, (xt / x0) ** (-1.0 - nu) * np.exp(logpi), 0.0)
    WB0 = float(W(start.P, x0))
    w_empty = base * np.asarray(W(frozenset(), xt)) / WB0
    if start.P:
        w_marked = base * np.asarray(W(B1, xt)) / WB0
        w_empty = w_empty * S
    else:
        w_marked = np.zeros_like(base)
    return MarkedEnsemble(tg, np.where(alive, lt, 0.0), np.where(alive, rt, 0.0), w_marked, w_empty, label, start)


# ---------------------------------------------------------------------------
# generator by quadrature


def _quad(f, a, b, **kw):
    # compactly supported test functions trip the roundoff detector on pieces
    # where the integrand is flat zero; the result is still accurate
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v, _ = integrate.quad(f, a, b, limit=400, epsabs=1e-13, epsrel=1e-10, **kw)
    return v


def _geom_pieces(a, b, ratio=10.0):
    pts = [a]
    while pts[-1] * ratio < b:
        pts.append(pts[-1] * ratio)
    pts.append(b)
    return pts


def _side_generator(F, y, a_p, a_m, nu, W0, comp, h_small):
    """Jump part of L^∅ F along one side of current length y.

    F(v) is the function with that side set to v (zero for v <= 0).
    """
    eta = 1e-3 * y
    Fm2, Fm1, F0, F1, F2 = (F(y + k * eta) for k in (-2, -1, 0, 1, 2))
    d1 = (Fm2 - 8 * Fm1 + 8 * F1 - F2) / (12 * eta)
    d2 = (-Fm2 + 16 * Fm1 - 30 * F0 + 16 * F1 - F2) / (12 * eta**2)
    d3 = (-Fm2 + 2 * Fm1 - 2 * F1 + F2) / (2 * eta**3)

    def small(h, sgn):
        # W(h)(F(y + sgn h) - F(y)) - comp * sgn * h F'(y), Taylor expanded
        df = sgn * h * d1 + 0.5 * h * h * d2 + sgn * h**3 * d3 / 6.0
        return float(W0(h)) * df - comp * sgn * h * d1

    def full(h, sgn):
        return float(W0(h)) * (F(y + sgn * h) - F0) - comp * sgn * h * d1

    tot = 0.0
    for a, sgn in ((a_p, 1.0), (a_m, -1.0)):
        if a == 0:
            continue
        s1 = _quad(lambda h: small(h, sgn) * h ** (-1.0 - nu), 0.0, h_small)
        pts = _geom_pieces(h_small, 1e4 * max(y, 1.0))
        if sgn < 0:
            pts = sorted(set([q for q in pts if q < y] + [y] + [q for q in pts if q > y]))
        s2 = sum(_quad(lambda h: full(h, sgn) * h ** (-1.0 - nu), u, v) for u, v in zip(pts[:-1], pts[1:]))
        s3 = _quad(lambda h: full(h, sgn) * h ** (-1.0 - nu), pts[-1], np.inf)
        tot += a * (s1 + s2 + s3)
    return tot


def generator_apply(p: ModelParams, s: SigmaFamily | None, W: WeightFunctionSet, f: Callable, state: MarkedState) -> float:
    """G^W f at ``state`` by quadrature, for at most one marked point.

    G^W f(l, r, B) = alpha f + L^∅(w W^B f(., B)) / (w W^B)
                     + sum over C strictly inside B of the transfer integrals,
    where alpha = int (mu_L + mu_R)(W^∅ - 1), L^∅ is the stable generator
    with jumps reweighted by W^∅(|h|) and the compensator kept unweighted
    (kappa < 4 only), and the transfer for B = {i} is
        int mu_side(dh) e^{sigma 1(h>0)} W^{i}(|h|) w W^∅ f(post, ∅) / (w W^{i}).
    """
    if state.absorbed:
        return 0.0
    nu = p.nu
    apl, apr, am = jump_rates(p)
    comp = 1.0 if p.simple else 0.0
    l, r, B = state.l, state.r, state.P
    if len(B) > 1 or (s is not None and len(s.A) > 1):
        raise DomainError("generator_apply handles at most one marked point")
    W0 = lambda h: W(frozenset(), h)

    def Fgen(Bset):
        def F(lv, rv):
            if lv <= 0 or rv <= 0:
                return 0.0
            x = lv + rv
            return x ** (-1.0 - nu) * float(W(Bset, x)) * float(f(lv, rv, Bset))

        return F

    FB = Fgen(B)
    x = l + r
    norm = x ** (-1.0 - nu) * float(W(B, x))
    hs = 1e-2 * min(l, r)
    alpha = (apl + apr + 2 * am) * sum(
        _quad(lambda h: (float(W0(h)) - 1.0) * h ** (-1.0 - nu), u, v) for u, v in zip([0.0] + _geom_pieces(1e-3, 1e4)[:-1], _geom_pieces(1e-3, 1e4))
    )
    alpha += (apl + apr + 2 * am) * _quad(lambda h: (float(W0(h)) - 1.0) * h ** (-1.0 - nu), 1e4, np.inf)
    val = alpha * FB(l, r)
    val += _side_generator(lambda v: FB(v, r), l, apl, am, nu, W0, comp, hs)
    val += _side_generator(lambda v: FB(l, v), r, apr, am, nu, W0, comp, hs)
    if B:
        (i,) = tuple(B)
        sig = s([i])
        WB = lambda h: float(W(B, h))
        F0 = Fgen(frozenset())
        for y, ap, post in ((l, apl, lambda v: F0(v, r)), (r, apr, lambda v: F0(l, v))):
            pos = lambda h: math.exp(sig) * ap * WB(h) * post(y + h) * h ** (-1.0 - nu)
            neg = lambda h: am * WB(h) * post(y - h) * h ** (-1.0 - nu)
            pts = _geom_pieces(1e-6 * y, 1e4 * max(y, 1.0))
            val += sum(_quad(pos, u, v) for u, v in zip([0.0] + pts[:-1], pts))
            val += sum(_quad(neg, u, v) for u, v in zip([0.0] + [q for q in pts if q < y], [q for q in pts if q < y] + [y]))
    return val / norm


def semigroup_slopes(p: ModelParams, s: SigmaFamily | None, W: WeightFunctionSet, f: Callable, state: MarkedState, times, *,
                     eps: float = 0.01, n: int = 400000, rng: np.random.Generator, backend: str | None = None) -> list:
    """(E f(Y_t) - f(y)) / t at each t in ``times``, from one shared ensemble.

    ``f(l, r, P)`` must broadcast over arrays of side lengths. All times use
    the same paths, so the differences between slopes are far less noisy
    than the slopes themselves.
    """
    times = np.asarray(times, dtype=float)
    ens = marked_process_simulate(p, s, W, state, times, eps=eps, n=n, rng=rng, backend=backend)
    f0 = float(_fvec(f, np.array([state.l]), np.array([state.r]), frozenset(state.P))[0])
    return [MCEstimate.from_samples((ens.samples(f, i) - f0) / t) for i, t in enumerate(times)]
