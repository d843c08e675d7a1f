"""Spectrally positive stable excursions and their jump functionals.

The nu-stable process B has Laplace exponent E exp(-lam B_t) = exp(t lam^nu)
and jump measure h^{-1-nu} dh / Gamma(-nu) on (0, inf). An excursion of
duration l has the same jump multiset as the bridge of B from 0 to 0 over
[0, l] (cyclic shift at the minimum), so excursions are built from bridges.

Jumps above ``delta`` are drawn exactly. The bridge condition is imposed
through the density of the compensated sum Y of the jumps below ``delta``
at the value that closes the bridge, with a Gaussian density plus its first
Edgeworth correction. Suppressed jumps enter the functionals through their
conditional mean given Y.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from . import _tables
from ._accel import kernels
from .radius import MCEstimate
from .specfun import DomainError, _kve, gamma, kbar, log_kbar, rho_lambda

__all__ = [
    "ExcursionJumps",
    "ExcursionResult",
    "LaplaceResidual",
    "excursion_sample",
    "excursion_product_functional",
    "excursion_marked_functional",
    "excursion_functional",
    "product_closed_form",
    "marked_closed_form",
    "marked_constant",
    "laplace_identity_check",
]


def _check_nu(nu):
    if not (1.0 < nu < 2.0):
        raise DomainError(f"nu must lie in (1, 2), got {nu}")


def default_delta(nu: float, ell: float) -> float:
    return 2e-3 * ell ** (1.0 / nu)


@dataclass(frozen=True)
class _Cumulants:
    """Jump intensity above delta and cumulants of the compensated sum below it."""

    nu: float
    ell: float
    delta: float

    @property
    def g(self):
        return gamma(-self.nu)

    @property
    def mean_count(self):
        return self.ell * self.delta ** (-self.nu) / (self.nu * self.g)

    @property
    def m_big(self):
        # compensator of the jumps above delta over [0, ell]
        return self.ell * self.delta ** (1 - self.nu) / ((self.nu - 1) * self.g)

    @property
    def var(self):
        return self.ell * self.delta ** (2 - self.nu) / ((2 - self.nu) * self.g)

    @property
    def k3(self):
        return self.ell * self.delta ** (3 - self.nu) / ((3 - self.nu) * self.g)

    def density(self, y):
        """Edgeworth density of the compensated small-jump sum, clipped at 0."""
        s = math.sqrt(self.var)
        t = np.asarray(y, dtype=float) / s
        skew = self.k3 / (6.0 * s**3)
        d = np.exp(-0.5 * t * t) / (s * math.sqrt(2 * math.pi)) * (1.0 + skew * (t**3 - 3 * t))
        return np.maximum(d, 0.0)

    def density_bound(self):
        s = math.sqrt(self.var)
        skew = abs(self.k3 / (6.0 * s**3))
        # |He3(t)| exp(-t^2/2) <= 2 on the real line
        return (1.0 + 2.0 * skew) / (s * math.sqrt(2 * math.pi))

    def small_moments(self, fn):
        """(mean, covariance with Y) of sum_{h < delta} fn(h) over [0, ell]."""
        if fn is None:
            return 0.0, 0.0
        sc = self.ell / self.g
        # in log h the integrands are smooth power laws at the lower end
        a, b = math.log(self.delta) - 40.0, math.log(self.delta)
        fe = lambda t: float(np.asarray(fn(math.exp(t))).ravel()[0])
        m = integrate.quad(lambda t: fe(t) * math.exp(-self.nu * t), a, b, limit=200)[0]
        c = integrate.quad(lambda t: fe(t) * math.exp((1 - self.nu) * t), a, b, limit=200)[0]
        return sc * m, sc * c


# ---------------------------------------------------------------------------
# samples


@dataclass
class ExcursionJumps:
    """Jumps above the cutoff of one excursion, stored at unit duration.

    ``heights`` are the unit-duration heights (sorted, descending); the
    duration-``ell`` heights are ``ell**(1/nu) * heights`` and the cutoff
    ``delta`` refers to the duration-``ell`` scale.
    """

    nu: float
    ell: float
    delta: float
    heights: np.ndarray
    seed: int | None = None
    acceptance: float = math.nan

    def __post_init__(self):
        _check_nu(self.nu)
        h = np.sort(np.asarray(self.heights, dtype=float))[::-1]
        if h.size and not np.all(h > 0):
            raise ValueError("excursion jumps must be positive")
        self.heights = h

    @property
    def scale(self) -> float:
        return self.ell ** (1.0 / self.nu)

    @property
    def scaled(self) -> np.ndarray:
        return self.scale * self.heights

    @property
    def unit_delta(self) -> float:
        return self.delta / self.scale

    def count_above(self, a: float) -> int:
        return int(np.sum(self.scaled > a))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# nu={self.nu!r},ell={self.ell!r},delta={self.delta!r},seed={self.seed!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["height"])
        for h in self.scaled:
            w.writerow([repr(float(h))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExcursionJumps":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("missing excursion header")
        meta = dict(kv.split("=", 1) for kv in lines[0][1:].strip().split(","))
        nu, ell, delta = float(meta["nu"]), float(meta["ell"]), float(meta["delta"])
        seed = None if meta.get("seed", "None") == "None" else int(meta["seed"])
        rows = list(csv.reader(lines[1:]))
        if not rows or rows[0] != ["height"]:
            raise ValueError("missing height column header")
        h = np.array([float(r[0]) for r in rows[1:]], dtype=float)
        return cls(nu, ell, delta, h / ell ** (1.0 / nu), seed)


def excursion_sample(nu: float, ell: float, delta: float | None = None, rng: np.random.Generator | None = None,
                     max_tries: int = 100000) -> ExcursionJumps:
    """Jump multiset above ``delta`` of a duration-``ell`` excursion.

    Accept-reject of the Poisson jumps above delta against the small-jump
    density that closes the bridge.
    """
    _check_nu(nu)
    if not (ell > 0):
        raise DomainError("duration must be positive")
    rng = np.random.default_rng() if rng is None else rng
    delta = default_delta(nu, ell) if delta is None else float(delta)
    cm = _Cumulants(nu, ell, delta)
    bound = cm.density_bound()
    for k in range(1, max_tries + 1):
        m = rng.poisson(cm.mean_count)
        h = delta * rng.random(m) ** (-1.0 / nu)
        y = cm.m_big - np.sort(h).sum()
        if rng.random() * bound < cm.density(y):
            return ExcursionJumps(nu, ell, delta, h / ell ** (1.0 / nu), acceptance=1.0 / k)
    raise RuntimeError("excursion_sample: acceptance rate too small")


# ---------------------------------------------------------------------------
# weighted bridge functionals


@dataclass
class ExcursionResult:
    estimate: MCEstimate
    ess: float
    delta: float
    mean_count: float

    def to_dict(self):
        return {"estimate": self.estimate.to_dict(), "ess": self.ess, "delta": self.delta, "mean_count": self.mean_count}


def _table(fn, delta, hmax, q_low, q_high, n=2001):
    if fn is None:
        return np.full(2, -1e300), np.array([0.0, 1.0, 0.0, 0.0])
    return _tables.pow_table(fn, 0.5 * delta, hmax, n, q_low, q_high)


def _self_normalised(x, w, seed):
    sw = w.sum()
    if not sw > 0:
        return MCEstimate(math.nan, math.inf, x.size, seed), 0.0
    est = float(np.sum(w * x) / sw)
    se = float(math.sqrt(np.sum(w * w * (x - est) ** 2)) / sw)
    return MCEstimate(est, se, x.size, seed), float(sw * sw / np.sum(w * w))


def _bridge_raw(nu, ell, delta, n, G, Gq, F, Fq, rng, backend, chunk=50000):
    """Per-bridge (weight, sum of -log g, sum of f/g) including the small-jump means."""
    cm = _Cumulants(nu, ell, delta)
    hmax = 1e4 * max(ell ** (1.0 / nu), delta)
    lg, lgp = _table(G, delta, hmax, *Gq)
    fg, fgp = _table(F, delta, hmax, *Fq)
    K = kernels(backend)
    parts = []
    left = n
    while left > 0:
        m = min(left, chunk)
        parts.append(K.bridge_jumps_kernel(m, cm.mean_count, delta, nu, lg, lgp, fg, fgp, rng))
        left -= m
    raw = np.concatenate(parts)
    y = cm.m_big - raw[:, 0]
    w = cm.density(y)
    mG, cG = cm.small_moments(G)
    mF, cF = cm.small_moments(F)
    sG = raw[:, 1] + mG + cG * y / cm.var
    sF = raw[:, 2] + mF + cF * y / cm.var
    return w, sG, sF, cm


def excursion_functional(nu: float, ell: float, G: Callable | None, F: Callable | None, *, delta: float | None = None,
                         n: int = 100000, rng: np.random.Generator, backend: str | None = None,
                         G_tails=(2.0, 1.0), F_tails=(2.0, 1.0), seed=None) -> ExcursionResult:
    """E[(sum_t F(Delta b_t)) exp(-sum_t G(Delta b_t))] over duration-``ell`` excursions.

    With ``F=None`` the sum factor is dropped, giving E exp(-sum G). ``G`` and
    ``F`` are vectorised, positive on (0, inf), with power tails
    (small exponent, large exponent) given by ``G_tails`` and ``F_tails``.
    """
    _check_nu(nu)
    if not (ell > 0):
        raise DomainError("duration must be positive")
    delta = default_delta(nu, ell) if delta is None else float(delta)
    w, sG, sF, cm = _bridge_raw(nu, ell, delta, n, G, G_tails, F, F_tails, rng, backend)
    x = np.exp(-sG)
    if F is not None:
        x = x * sF
    est, ess = _self_normalised(x, w, seed)
    return ExcursionResult(est, ess, delta, cm.mean_count)


def _kbar_G(nu, c):
    return lambda h: -log_kbar(nu, c * np.asarray(h, dtype=float))


def product_closed_form(nu: float, c: float, ell: float) -> float:
    """K̄_{1/nu}(c' ell) with c' = c^nu 2^{1-nu}."""
    return float(kbar(1.0 / nu, c**nu * 2.0 ** (1.0 - nu) * ell))


def excursion_product_functional(nu: float, c: float, ell: float, delta: float | None = None, n: int = 100000,
                                 rng: np.random.Generator | None = None, *, backend: str | None = None,
                                 seed=None, details: bool = False):
    """MC estimate of E prod_t K̄_nu(c l^{1/nu} Delta b_t) over unit excursions b."""
    _check_nu(nu)
    if not (c > 0):
        raise DomainError("c must be positive")
    rng = np.random.default_rng(seed) if rng is None else rng
    res = excursion_functional(nu, ell, _kbar_G(nu, c), None, delta=delta, n=n, rng=rng, backend=backend, seed=seed)
    return res if details else res.estimate


def _check_theta(nu, theta):
    if not (1.0 < theta < 1.0 + 1.0 / nu):
        raise DomainError(f"theta must lie in (1, {1 + 1 / nu:.6g}), got {theta}")


def marked_constant(nu: float, theta: float) -> float:
    """|sqrt(1/nu) Gamma(-1/nu) sin(pi(1+1/nu-theta)) / (sqrt(nu) Gamma(-nu) sin(pi(1+nu-theta nu)))|.

    The expression without the absolute value is negative on the whole
    domain while the functional is positive; the Laplace identity below
    reproduces the absolute value.
    """
    _check_nu(nu)
    _check_theta(nu, theta)
    num = math.sqrt(1.0 / nu) * gamma(-1.0 / nu) * math.sin(math.pi * (1 + 1 / nu - theta))
    den = math.sqrt(nu) * gamma(-nu) * math.sin(math.pi * (1 + nu - theta * nu))
    return abs(num / den)


def marked_closed_form(nu: float, c: float, theta: float, ell: float) -> float:
    """|C| l^{1+1/nu} K_mu(c' l) (c' l / 2)^{?} form: |C| l^{1+1/nu} Gamma(mu) 2^{mu-1} (c' l)^{-mu} K̄_mu(c' l)."""
    mu = 1.0 + 1.0 / nu - theta
    cp = c**nu * 2.0 ** (1.0 - nu)
    x = cp * ell
    return float(marked_constant(nu, theta) * ell ** (1 + 1 / nu) * special.kv(mu, x))


def excursion_marked_functional(nu: float, c: float, theta: float, ell: float, delta: float | None = None,
                                n: int = 100000, rng: np.random.Generator | None = None, *,
                                backend: str | None = None, seed=None, details: bool = False):
    """MC estimate of E sum_t f(l^{1/nu} Delta b_t) prod_{s != t} g(l^{1/nu} Delta b_s).

    f(x) = x^{1+nu} K_{1+nu-theta nu}(c x), g = K̄_nu(c x).
    """
    _check_nu(nu)
    _check_theta(nu, theta)
    if not (c > 0):
        raise DomainError("c must be positive")
    rng = np.random.default_rng(seed) if rng is None else rng
    mu = 1.0 + nu - theta * nu

    def F(h):
        h = np.asarray(h, dtype=float)
        x = c * h
        # f / g with the exponentials of the scaled Bessel functions cancelled
        return h ** (1 + nu) * _kve(mu, x) * gamma(nu) / (2.0 * (x / 2.0) ** nu * _kve(nu, x))

    res = excursion_functional(nu, ell, _kbar_G(nu, c), F, delta=delta, n=n, rng=rng, backend=backend,
                               F_tails=(theta * nu, 1.0), seed=seed)
    return res if details else res.estimate


# ---------------------------------------------------------------------------
# first-passage identities


@dataclass
class LaplaceResidual:
    """MC minus exact value of the two first-passage identities."""

    lam: float
    rho: float
    product: MCEstimate
    product_exact: float
    marked: MCEstimate | None = None
    marked_exact: float | None = None

    @property
    def product_residual(self) -> MCEstimate:
        return MCEstimate(self.product.estimate - self.product_exact, self.product.stderr, self.product.n, self.product.seed)

    @property
    def marked_residual(self) -> MCEstimate | None:
        if self.marked is None:
            return None
        m = self.marked
        return MCEstimate(m.estimate - self.marked_exact, m.stderr, m.n, m.seed)

    def to_dict(self):
        d = {"lambda": self.lam, "rho": self.rho, "product": self.product.to_dict(), "product_exact": self.product_exact}
        if self.marked is not None:
            d.update(marked=self.marked.to_dict(), marked_exact=self.marked_exact)
        return d


def _levy_integral(nu, fn, lo=0.0):
    """int_0^inf fn(h) h^{-1-nu} dh / Gamma(-nu) split at a few decades."""
    pts = [0.0, 1e-6, 1e-3, 1e-1, 1.0, 10.0, 100.0]
    tot = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        tot += integrate.quad(lambda h: fn(h) * h ** (-1 - nu), a, b, limit=200)[0]
    tot += integrate.quad(lambda h: fn(h) * h ** (-1 - nu), pts[-1], np.inf, limit=200)[0]
    return tot / gamma(-nu)


def _lambda_of_rho(nu, rho, G):
    if G is None:
        return rho**nu
    return _levy_integral(nu, lambda h: math.expm1(-rho * h - G(h)) + rho * h)


def _rho_of_lambda(nu, lam, G, c=None):
    if G is None:
        return lam ** (1.0 / nu)
    if c is not None:
        return rho_lambda(nu, c, lam)
    hi = 1.0
    while _lambda_of_rho(nu, hi, G) < lam:
        hi *= 2.0
    return optimize.brentq(lambda r: _lambda_of_rho(nu, r, G) - lam, 0.0, hi, xtol=1e-13)


def laplace_identity_check(nu: float, lam: float, G: Callable | None = None, F: Callable | None = None, *,
                           c: float | None = None, delta: float = 3e-3, n: int = 20000,
                           rng: np.random.Generator | None = None, backend: str | None = None,
                           G_tails=(2.0, 1.0), F_tails=(2.0, 1.0), seed=None) -> LaplaceResidual:
    """MC of E exp(-lam tau_1 - sum G) and E[sum F exp(...)] against the rho_lambda closed chain.

    ``c`` selects G = -log K̄_nu(c h) (overriding ``G``) so that rho_lambda
    comes from its explicit inversion. G and F are scalar-or-vector callables.
    """
    _check_nu(nu)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    rng = np.random.default_rng(seed) if rng is None else rng
    if c is not None:
        G = _kbar_G(nu, c)

    def Gs(h):
        return float(np.asarray(G(np.array([h]))).ravel()[0])

    def Fs(h):
        return float(np.asarray(F(np.array([h]))).ravel()[0])

    rho = _rho_of_lambda(nu, lam, Gs if G is not None else None, c)
    gm = gamma(-nu)
    rate = delta ** (-nu) / (nu * gm)
    drift = -delta ** (1 - nu) / ((nu - 1) * gm)
    var = delta ** (2 - nu) / ((2 - nu) * gm)
    tcap = 40.0 / lam
    lg, lgp = _table(G, delta, 1e6, *G_tails)
    fg, fgp = _table(F, delta, 1e6, *F_tails)
    K = kernels(backend)
    raw = K.first_passage_kernel(n, rate, delta, nu, drift, var, tcap, lg, lgp, fg, fgp, rng)
    tau, sG, sF = raw[:, 0], raw[:, 1], raw[:, 2]
    cm = _Cumulants(nu, 1.0, delta)
    mG = cm.small_moments(G)[0]
    mF = cm.small_moments(F)[0] if F is not None else 0.0
    done = np.isfinite(tau)
    tt = np.where(done, tau, 0.0)
    prod = np.where(done, np.exp(-lam * tt - sG - mG * tt), 0.0)
    res = LaplaceResidual(lam, rho, MCEstimate.from_samples(prod, seed), math.exp(-rho))
    if F is not None:
        res.marked = MCEstimate.from_samples(prod * (sF + mF * tt), seed)
        if G is None:
            dl = nu * rho ** (nu - 1)
            IF = _levy_integral(nu, lambda h: math.exp(-rho * h) * Fs(h))
        else:
            dl = _levy_integral(nu, lambda h: h * -math.expm1(-rho * h - Gs(h)))
            IF = _levy_integral(nu, lambda h: math.exp(-rho * h - Gs(h)) * Fs(h))
        res.marked_exact = math.exp(-rho) / dl * IF
    return res
