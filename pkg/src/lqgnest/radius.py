"""Law of the CLE conformal radius seen from an interior point.

X = -log R has Laplace transform E e^{-rho X} = -cos(4pi/k) / cos(pi s(rho))
with s(rho) = sqrt((1-4/k)^2 - 8 rho / k) and an explicit theta-type density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .params import rho_from_sigma, rho_min, sigma_threshold
from .specfun import DomainError

__all__ = [
    "RadiusLaw",
    "RenewalSpec",
    "MCEstimate",
    "cr_moment",
    "cr_moment_deriv",
    "cr_log_density",
    "cr_log_density_series",
    "cr_cdf",
    "cr_sample",
    "nesting_constant",
    "nesting_renewal_estimate",
    "one_point_phi",
]


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    n: int
    seed: int | None = None

    def within(self, target: float, k: float = 3.0, extra_se: float = 0.0) -> bool:
        return abs(self.estimate - target) <= k * math.hypot(self.stderr, extra_se)

    def to_dict(self):
        return {"estimate": self.estimate, "stderr": self.stderr, "n": self.n, "seed": self.seed}

    @classmethod
    def from_samples(cls, x, seed=None) -> "MCEstimate":
        x = np.asarray(x, dtype=float)
        n = x.size
        return cls(float(x.mean()), float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf, n, seed)


def _check_kappa(kappa):
    if not (8.0 / 3.0 < kappa < 8.0):
        raise DomainError(f"kappa must lie in (8/3, 8), got {kappa}")


@dataclass(frozen=True)
class RadiusLaw:
    kappa: float

    def __post_init__(self):
        _check_kappa(self.kappa)

    @property
    def rho_min(self) -> float:
        return rho_min(self.kappa)

    def moment(self, rho):
        return cr_moment(self.kappa, rho)

    def density(self, x):
        return cr_log_density(self.kappa, x)

    def cdf(self, x):
        return cr_cdf(self.kappa, x)

    def sample(self, rng, size=None):
        return cr_sample(self.kappa, rng, size)


@dataclass(frozen=True)
class RenewalSpec:
    kappa: float
    sigma: float
    t: float
    n: int = 100_000
    seed: int = 0

    def __post_init__(self):
        _check_kappa(self.kappa)
        if not self.sigma < sigma_threshold(self.kappa):
            raise DomainError("sigma outside the admissible single-point range")
        if not self.t > 0:
            raise DomainError("horizon t must be positive")


# ---------------------------------------------------------------------------
# moments


def _radicand(kappa, rho):
    return (1.0 - 4.0 / kappa) ** 2 - 8.0 * rho / kappa


def cr_moment(kappa: float, rho: float) -> float:
    """E R^rho; +inf at and below rho_min."""
    _check_kappa(kappa)
    if rho <= rho_min(kappa):
        return math.inf
    r = _radicand(kappa, rho)
    den = math.cos(math.pi * math.sqrt(r)) if r >= 0 else math.cosh(math.pi * math.sqrt(-r))
    return -math.cos(4.0 * math.pi / kappa) / den


def _tan_over_s(r):
    """tan(pi sqrt r)/sqrt r, continued through r=0 (tanh branch for r<0)."""
    if abs(r) < 1e-6:
        p2 = math.pi**2
        return math.pi * (1.0 + p2 * r / 3.0 + 2.0 * p2 * p2 * r * r / 15.0)
    if r > 0:
        s = math.sqrt(r)
        return math.tan(math.pi * s) / s
    s = math.sqrt(-r)
    return math.tanh(math.pi * s) / s


def cr_moment_deriv(kappa: float, rho: float) -> float:
    """d/drho E R^rho."""
    _check_kappa(kappa)
    if rho <= rho_min(kappa):
        raise DomainError("derivative only defined above rho_min")
    r = _radicand(kappa, rho)
    return -(4.0 * math.pi / kappa) * cr_moment(kappa, rho) * _tan_over_s(r)


# ---------------------------------------------------------------------------
# density


def _b(kappa):
    return (kappa - 4.0) ** 2 / (8.0 * kappa)


def cr_log_density_series(kappa: float, x, which: int, tol: float = 1e-16):
    """Density of -log R from the exponential series (1) or the x^{-3/2} series (2)."""
    _check_kappa(kappa)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise DomainError("density defined for x > 0")
    negc = -math.cos(4.0 * math.pi / kappa)
    b = _b(kappa)
    out = np.zeros_like(x)
    for j, xv in enumerate(x):
        s = 0.0
        n = 0
        while True:
            m = n + 0.5
            if which == 1:
                term = m * math.exp(b * xv - kappa * m * m * xv / 8.0)
            else:
                term = m * math.exp(b * xv - 8.0 * math.pi**2 * m * m / (kappa * xv))
            s += term if n % 2 == 0 else -term
            if term < tol * max(abs(s), 1e-300) or n > 100000:
                break
            n += 1
        out[j] = s
    if which == 1:
        out *= negc * kappa / (4.0 * math.pi)
    else:
        out *= negc * 4.0 * math.sqrt(2.0 * math.pi / kappa) * x ** (-1.5)
    return out


def _switch_point(kappa):
    # equal decay of the n-th terms: kappa x / 8 = 8 pi^2 / (kappa x)
    return 8.0 * math.pi / kappa


def cr_log_density(kappa: float, x):
    """Density f of X = -log R on (0, inf), using the faster series at each x."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise DomainError("density defined for x > 0")
    xs = _switch_point(kappa)
    out = np.empty_like(xa)
    lo = xa < xs
    if lo.any():
        out[lo] = cr_log_density_series(kappa, xa[lo], 2)
    if (~lo).any():
        out[~lo] = cr_log_density_series(kappa, xa[~lo], 1)
    out = np.maximum(out, 0.0)
    return out if np.ndim(x) else float(out[0])


def _survival_series(kappa, x):
    """P(X > x) by integrating the exponential series termwise (x not small)."""
    negc = -math.cos(4.0 * math.pi / kappa)
    b = _b(kappa)
    s = 0.0
    n = 0
    while True:
        m = n + 0.5
        a = kappa * m * m / 8.0 - b
        term = m * math.exp(-a * x) / a
        s += term if n % 2 == 0 else -term
        if term < 1e-17 * abs(s) or n > 100000:
            break
        n += 1
    return negc * kappa / (4.0 * math.pi) * s


_GL24 = np.polynomial.legendre.leggauss(24)


@lru_cache(maxsize=32)
def _cdf_table(kappa: float, nknots: int = 4096):
    """Knots (x_i, F_i) of the CDF plus the tail anchor used by the sampler."""
    xs = _switch_point(kappa)
    # left end: F is below 1e-18 there (F ~ exp(-pi^2 / (2 kappa x)))
    x_lo = math.pi**2 / (2.0 * kappa * 45.0)
    # right end: higher series terms are below e^{-40} relative to the first
    x_hi = max(160.0 / kappa, 4.0 * xs)
    grid = np.concatenate([np.geomspace(x_lo, xs, nknots // 2, endpoint=False), np.linspace(xs, x_hi, nknots - nknots // 2)])
    gl_x, gl_w = np.polynomial.legendre.leggauss(24)
    F = np.zeros_like(grid)
    F[0] = 0.0
    for i in range(1, grid.size):
        a, b = grid[i - 1], grid[i]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        F[i] = F[i - 1] + half * np.dot(gl_w, cr_log_density(kappa, mid + half * gl_x))
    surv_hi = _survival_series(kappa, x_hi)
    return grid, F, surv_hi


def cr_cdf(kappa: float, x):
    """CDF of -log R from the knot table (interior) and the series (tail)."""
    grid, F, surv_hi = _cdf_table(float(kappa))
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xa)
    inside = (xa <= grid[-1]) & (xa > grid[0])
    out[xa <= grid[0]] = 0.0
    # Gauss-Legendre from the last knot below x (same rule as the table)
    xv = xa[inside]
    i = np.searchsorted(grid, xv) - 1
    a = grid[i]
    gl_x, gl_w = _GL24
    mid, half = 0.5 * (a + xv), 0.5 * (xv - a)
    pts = mid[:, None] + half[:, None] * gl_x[None, :]
    dens = np.asarray(cr_log_density(kappa, pts.ravel())).reshape(pts.shape)
    out[inside] = F[i] + half * (dens @ gl_w)
    inside = xa <= grid[-1]
    for j in np.nonzero(~inside)[0]:
        out[j] = 1.0 - _survival_series(kappa, xa[j])
    return out if np.ndim(x) else float(out[0])


@lru_cache(maxsize=32)
def _inverse_table(kappa: float):
    grid, F, surv_hi = _cdf_table(kappa)
    # the table is normalised against the analytic tail mass
    keep = np.concatenate([[True], np.diff(F) > 0])
    inv = PchipInterpolator(F[keep], grid[keep])
    return inv, F[-1], grid[-1], rho_min(kappa)


def cr_sample(kappa: float, rng: np.random.Generator, size=None):
    """Draws of X = -log R by monotone-cubic inverse CDF with an exact exponential tail."""
    _check_kappa(kappa)
    inv, f_hi, x_hi, rmin = _inverse_table(float(kappa))
    u = rng.random(size)
    ua = np.atleast_1d(u)
    out = np.empty_like(ua)
    body = ua < f_hi
    out[body] = inv(ua[body])
    # beyond x_hi the density is c e^{rho_min x} to double precision
    tail_u = (ua[~body] - f_hi) / (1.0 - f_hi)
    out[~body] = x_hi + np.log1p(-tail_u) / rmin
    return out if size is not None else float(out[0])


# ---------------------------------------------------------------------------
# nesting renewal


def nesting_constant(kappa: float, sigma: float) -> float:
    """lim_{eps -> 0} eps^{rho} E e^{sigma N_eps} from the key renewal theorem."""
    _check_kappa(kappa)
    if not sigma < sigma_threshold(kappa):
        raise DomainError("sigma outside the admissible single-point range")
    if abs(sigma) < 1e-4:
        # (1 - e^{-s})/rho -> -M'(0) as s -> 0; expand to first order in sigma
        h = 1e-3
        f = lambda s: _nesting_constant_raw(kappa, s)
        return float(0.5 * (f(h) + f(-h)) + sigma * (f(h) - f(-h)) / (2 * h))
    return _nesting_constant_raw(kappa, sigma)


def _nesting_constant_raw(kappa, sigma):
    rho = rho_from_sigma(kappa, sigma)
    es = math.exp(-sigma)
    return es * (1.0 - es) / rho / (-cr_moment_deriv(kappa, rho))


def nesting_renewal_estimate(spec: RenewalSpec, chunk: int = 1 << 16) -> MCEstimate:
    """MC of e^{-rho t} E e^{sigma N_t}, N_t = #{k : X_1 + ... + X_k <= t}."""
    rho = rho_from_sigma(spec.kappa, spec.sigma)
    rng = np.random.default_rng(spec.seed)
    vals = np.empty(spec.n)
    done = 0
    while done < spec.n:
        m = min(chunk, spec.n - done)
        s = np.zeros(m)
        count = np.zeros(m)
        active = np.ones(m, dtype=bool)
        while active.any():
            idx = np.nonzero(active)[0]
            s[idx] += cr_sample(spec.kappa, rng, idx.size)
            hit = s[idx] <= spec.t
            count[idx[hit]] += 1
            active[idx[~hit]] = False
        vals[done : done + m] = np.exp(spec.sigma * count - rho * spec.t)
        done += m
    return MCEstimate.from_samples(vals, spec.seed)


def one_point_phi(kappa: float, sigma: float, z) -> float:
    """(1 - |z|^2)^{rho}; the conformal-radius factor and e^{sigma} E R^rho = 1."""
    _check_kappa(kappa)
    if not sigma < sigma_threshold(kappa):
        raise DomainError("sigma outside the admissible single-point range")
    az = abs(complex(z))
    if not az < 1:
        raise DomainError("z must lie in the open unit disk")
    rho = rho_from_sigma(kappa, sigma)
    return (1.0 - az * az) ** rho
