"""Special functions and the Bessel/Beta integral identities.

Every identity is available in two modes: ``"closed_form"`` evaluates the
explicit right-hand side, ``"quadrature"`` integrates the left-hand side
numerically with :func:`scipy.integrate.quad`.  The quadrature paths avoid
reusing the closed-form algebra so that each mode is an oracle for the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "QuadratureSpec",
    "BesselArgs",
    "DomainError",
    "ConvergenceError",
    "bessel_k",
    "kbar",
    "log_kbar",
    "kbar_minus_one",
    "kbar_small_x_constant",
    "gamma",
    "beta_fn",
    "beta_inc",
    "cosh_ratio_integral",
    "cosh_ratio_sq_integral",
    "levy_symbol_integral",
    "bessel_laplace_integral",
    "a_theta_u",
    "a_theta_identity_rhs",
    "rho_lambda",
    "lambda_of_rho",
]


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a function."""


class ConvergenceError(RuntimeError):
    """Raised when adaptive quadrature exhausts its subdivision budget."""


@dataclass(frozen=True)
class QuadratureSpec:
    epsabs: float = 1e-11
    epsrel: float = 1e-11
    limit: int = 400
    cutoff: float = 60.0

    def __post_init__(self):
        if not (self.epsabs > 0 and self.epsrel > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.limit < 1 or self.cutoff <= 0:
            raise DomainError("limit and cutoff must be positive")

    @property
    def tol(self) -> float:
        return max(self.epsabs, self.epsrel)


@dataclass(frozen=True)
class BesselArgs:
    nu: float
    x: float

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"order must be positive, got {self.nu}")
        if not self.x >= 0:
            raise DomainError(f"argument must be non-negative, got {self.x}")


DEFAULT_Q = QuadratureSpec()


def _quad(f, a, b, q: QuadratureSpec, **kw):
    """scipy quad that raises instead of warning when it gives up."""
    with np.errstate(over="ignore", under="ignore"):
        val, err, info = integrate.quad(
            f, a, b, epsabs=q.epsabs, epsrel=q.epsrel, limit=q.limit, full_output=1, **kw
        )[:3]
    if err > 100 * max(q.epsabs, q.epsrel * abs(val)) and info.get("last", 0) >= q.limit:
        raise ConvergenceError(f"quad did not converge on [{a}, {b}]: est={val}, err={err}")
    return val


# ---------------------------------------------------------------------------
# Bessel functions


def bessel_k(nu: float, x: float, q: QuadratureSpec | None = None, method: str = "scipy") -> float:
    """Modified Bessel function of the second kind.

    ``method`` is ``"scipy"`` (library routine), ``"cosh"`` (integral of
    ``exp(-x cosh t) cosh(nu t)``) or ``"inverse_gamma"`` (the
    ``y^{-1-nu}`` representation).
    """
    if not nu > 0:
        raise DomainError(f"order must be positive, got {nu}")
    if not x > 0:
        raise DomainError(f"K_nu is defined for x > 0, got {x}")
    if method == "scipy":
        return float(special.kv(nu, x))
    q = q or DEFAULT_Q
    if method == "cosh":
        # integrand ~ exp(-x e^t / 2 + nu t); stop once the exponent is below -750
        tmax = math.acosh(max(1.0, (750.0 + nu * 50.0) / x)) + 1.0
        f = lambda t: math.exp(-x * math.cosh(t) + nu * t) * 0.5 * (1.0 + math.exp(-2 * nu * t))
        return _quad(f, 0.0, tmax, q)
    if method == "inverse_gamma":
        a = (x / 2.0) ** 2
        # integrand peaks near y* solving a y^2 + (1+nu) y - 1 = 0
        ystar = 2.0 / ((1 + nu) + math.sqrt((1 + nu) ** 2 + 4 * a))
        f = lambda y: math.exp(-a * y - 1.0 / y - (1 + nu) * math.log(y))
        head = _quad(f, 0.0, ystar, q)
        tail = _quad(f, ystar, np.inf, q)
        return (head + tail) / (2.0 * (x / 2.0) ** nu)
    raise ValueError(f"unknown method {method!r}")


def _kve(nu, x):
    """exp(x) K_nu(x); the scipy routine returns nan far out, where the
    two-term asymptotic series is exact to double precision."""
    x = np.asarray(x, dtype=float)
    far = x > 1e8
    out = special.kve(nu, np.where(far, 1.0, x))
    if np.any(far):
        xf = x[far]
        out[far] = np.sqrt(np.pi / (2.0 * xf)) * (1.0 + (4.0 * nu * nu - 1.0) / (8.0 * xf))
    return out


def log_kbar(nu, x):
    """log of K̄_nu(x) = 2 (x/2)^nu K_nu(x) / Gamma(nu); vectorised, 0 at x=0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    with np.errstate(divide="ignore"):
        small = xp < 1e-3
        val = np.empty_like(xp)
        xs = xp[small]
        val[small] = np.log1p(kbar_minus_one(nu, xs)) if xs.size else xs
        xl = xp[~small]
        val[~small] = math.log(2.0) + nu * np.log(xl / 2.0) + np.log(_kve(nu, xl)) - xl - special.gammaln(nu)
    out[pos] = val
    return out if out.ndim else float(out)


def kbar(nu: float, x):
    """Normalised Bessel function K̄_nu(x) with K̄_nu(0) = 1."""
    if not nu > 0:
        raise DomainError(f"order must be positive, got {nu}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("K̄ is defined for x >= 0")
    out = np.exp(log_kbar(nu, x))
    return out if np.ndim(out) else float(out)


def kbar_minus_one(nu: float, x, terms: int = 40):
    """K̄_nu(x) - 1 by the power series, free of cancellation for small x.

    Uses K_nu = pi/(2 sin(nu pi)) (I_{-nu} - I_nu), valid for non-integer nu.
    Accurate for x up to roughly 2.
    """
    x = np.asarray(x, dtype=float)
    if abs(nu - round(nu)) < 1e-12:
        # integer order: fall back to the direct formula
        return np.exp(log_kbar(nu + 1e-9, x)) - 1.0
    h2 = (x / 2.0) ** 2
    c = special.gamma(1.0 - nu)
    s1 = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, terms):
        term = term * h2 / k
        s1 = s1 + term / special.gamma(k + 1.0 - nu)
    s2 = np.zeros_like(x)
    term = (x / 2.0) ** (2 * nu)
    for k in range(terms):
        if k:
            term = term * h2 / k
        s2 = s2 + term / special.gamma(k + 1.0 + nu)
    out = c * (s1 - s2)
    return out if out.ndim else float(out)


def kbar_small_x_constant(nu: float, npts: int = 4000) -> float:
    """A constant C with 1 - K̄_nu(x) <= C x^{min(2, 2 nu)} on (0, 1]."""
    p = min(2.0, 2.0 * nu)
    xs = np.geomspace(1e-6, 1.0, npts)
    ratio = -kbar_minus_one(nu, xs) / xs**p if nu != 1 else (1 - kbar(nu, xs)) / xs**p
    # the ratio is smooth in log x, a 2% margin covers the grid spacing
    return float(np.max(ratio) * 1.02)


# ---------------------------------------------------------------------------
# Gamma and Beta


def gamma(a: float) -> float:
    """Gamma function; negative non-integers through the reflection formula."""
    if a > 0:
        return float(special.gamma(a))
    if abs(a - round(a)) < 1e-15:
        raise DomainError(f"Gamma has a pole at {a}")
    return float(math.pi / (math.sin(math.pi * a) * special.gamma(1.0 - a)))


def beta_fn(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"Beta needs a, b > 0, got ({a}, {b})")
    return float(special.beta(a, b))


def _beta_inc_positive(x, a, b):
    return float(special.betainc(a, b, x) * special.beta(a, b))


def beta_inc(x: float, a: float, b: float) -> float:
    """Unregularised incomplete Beta B_x(a, b) = int_0^x t^{a-1} (1-t)^{b-1} dt.

    ``b`` may be zero or negative; negative values are lifted to ``b + k > 0``
    through B_x(a,b) = ((a+b)/b) B_x(a,b+1) - x^a (1-x)^b / b.
    """
    if not a > 0:
        raise DomainError(f"beta_inc needs a > 0, got {a}")
    if not (0.0 <= x < 1.0):
        raise DomainError(f"beta_inc needs x in [0, 1), got {x}")
    if x == 0.0:
        return 0.0
    if b > 0:
        return _beta_inc_positive(x, a, b)
    if abs(b - round(b)) < 1e-9:
        # the recurrence divides by zero on the way up; use 2F1 instead
        return float(x**a / a * special.hyp2f1(a, 1.0 - b, a + 1.0, x))
    k = int(math.floor(-b)) + 1
    bs = [b + j for j in range(k + 1)]  # bs[k] > 0
    val = _beta_inc_positive(x, a, bs[k])
    for j in range(k - 1, -1, -1):
        bj = bs[j]
        val = (a + bj) / bj * val - x**a * (1.0 - x) ** bj / bj
    return float(val)


# ---------------------------------------------------------------------------
# Cosh-ratio integrals


def _theta_of_rho(rho: float):
    """(theta, branch) with rho = cos(theta) or cosh(theta)."""
    if rho <= 1.0:
        return math.acos(rho), "cos"
    return math.acosh(rho), "cosh"


def _s_of_gap(g: float) -> float:
    # arccos(1 - g)^2 as a series; negative g gives -arccosh(1 - g)^2
    return 2 * g + g * g / 3.0 + 4 * g**3 / 45.0


def _check_rho(rho):
    if not rho > -1:
        raise DomainError(f"rho must exceed -1, got {rho}")


def cosh_ratio_integral(alpha: float, rho: float, mode: str = "closed_form", q: QuadratureSpec | None = None) -> float:
    """int_0^inf cosh(alpha t) / (cosh t + rho) dt for alpha in (0,1), rho > -1."""
    if not (0 < alpha < 1):
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    _check_rho(rho)
    if mode == "quadrature":
        q = q or DEFAULT_Q
        f = lambda t: (math.exp((alpha - 1) * t) + math.exp(-(alpha + 1) * t)) / (
            1.0 + math.exp(-2 * t) + 2 * rho * math.exp(-t)
        )
        tmax = 40.0 / (1.0 - alpha) + 40.0
        return _quad(f, 0.0, tmax, q)
    if mode != "closed_form":
        raise ValueError(f"unknown mode {mode!r}")
    pre = math.pi / math.sin(math.pi * alpha)
    g = 1.0 - rho
    if abs(g) < 1e-4:
        s = _s_of_gap(g)
        a = alpha
        a3, a5, a7 = a**3, a**5, a**7
        ser = a + s * (a / 6 - a3 / 6) + s * s * (a5 / 120 - a3 / 36 + 7 * a / 360)
        ser += s**3 * (-a7 / 5040 + a5 / 720 - 7 * a3 / 2160 + 31 * a / 15120)
        return pre * ser
    theta, br = _theta_of_rho(rho)
    if br == "cos":
        return pre * math.sin(alpha * theta) / math.sin(theta)
    return pre * math.sinh(alpha * theta) / math.sinh(theta)


def cosh_ratio_sq_integral(beta: float, rho: float, mode: str = "closed_form", q: QuadratureSpec | None = None) -> float:
    """int_0^inf cosh(beta t) / (cosh t + rho)^2 dt for beta in (0,2) minus {1}."""
    if not (0 < beta < 2) or abs(beta - 1) < 1e-14:
        raise DomainError(f"beta must lie in (0,2) without 1, got {beta}")
    _check_rho(rho)
    if mode == "quadrature":
        q = q or DEFAULT_Q
        f = lambda t: (math.exp((beta - 2) * t) + math.exp(-(beta + 2) * t)) * 2.0 / (
            1.0 + math.exp(-2 * t) + 2 * rho * math.exp(-t)
        ) ** 2
        tmax = 40.0 / (2.0 - beta) + 40.0
        return _quad(f, 0.0, tmax, q)
    if mode != "closed_form":
        raise ValueError(f"unknown mode {mode!r}")
    pre = math.pi / math.sin(math.pi * beta)
    g = 1.0 - rho
    if abs(g) < 1e-4:
        s = _s_of_gap(g)
        b = beta
        b3, b5, b7, b9 = b**3, b**5, b**7, b**9
        ser = -b3 / 3 + b / 3
        ser += s * (b5 / 30 - b3 / 6 + 2 * b / 15)
        ser += s * s * (-b7 / 840 + b5 / 72 - 2 * b3 / 45 + 2 * b / 63)
        ser += s**3 * (b9 / 45360 - b7 / 2160 + b5 / 300 - 5 * b3 / 567 + 4 * b / 675)
        return pre * ser
    theta, br = _theta_of_rho(rho)
    if br == "cos":
        st = math.sin(theta)
        return pre * (beta * math.cos(beta * theta) - math.cos(theta) / st * math.sin(beta * theta)) / st**2
    sh = math.sinh(theta)
    return pre * (math.cosh(theta) / sh * math.sinh(beta * theta) - beta * math.cosh(beta * theta)) / sh**2


# ---------------------------------------------------------------------------
# Bessel integrals against the stable Lévy measure


def _expm1_tail(z, order: int):
    """exp(z) - sum_{k<order} z^k/k! for small |z|, by series."""
    z = np.asarray(z, dtype=float)
    term = z**order / math.factorial(order)
    out = term.copy()
    for k in range(order + 1, order + 40):
        term = term * z / k
        out = out + term
    return out


def levy_symbol_integral(nu: float, rho: float, compensated: bool = True, mode: str = "closed_form",
                         q: QuadratureSpec | None = None) -> float:
    """int_0^inf h^{-1-nu} (e^{-rho h} K̄_nu(h) - 1 [+ rho h]) dh.

    The ``+ rho h`` compensation is present iff ``compensated`` (then nu in
    (1,2)); otherwise nu in (0,1).
    """
    _check_rho(rho)
    if compensated and not (1 < nu < 2):
        raise DomainError(f"compensated form needs nu in (1,2), got {nu}")
    if not compensated and not (0 < nu < 1):
        raise DomainError(f"uncompensated form needs nu in (0,1), got {nu}")
    if mode == "closed_form":
        theta, br = _theta_of_rho(rho)
        trig = math.cos(nu * theta) if br == "cos" else math.cosh(nu * theta)
        if compensated:
            pre = 2.0 ** (1 - nu) * math.pi / math.sin(-math.pi * nu) / special.gamma(1 + nu)
        else:
            pre = -(2.0 ** (1 - nu)) * math.pi / math.sin(math.pi * nu) / special.gamma(1 + nu)
        return float(pre * trig)
    if mode != "quadrature":
        raise ValueError(f"unknown mode {mode!r}")
    q = q or DEFAULT_Q
    h0 = 0.5

    def small(h):
        # e^{-rho h}(K̄-1) + (e^{-rho h} - 1 [+ rho h]) without cancellation
        km1 = kbar_minus_one(nu, h)
        lead = _expm1_tail(-rho * h, 2 if compensated else 1)
        return math.exp(-rho * h) * km1 + lead

    # substitute h = h0 s^p to flatten the h^{1-nu} (or h^{-nu}) endpoint
    p = 1.0 / (2.0 - nu) if compensated else 1.0 / (1.0 - nu)

    def f_small(s):
        if s == 0.0:
            return 0.0
        h = h0 * s**p
        return small(h) * h ** (-1 - nu) * h0 * p * s ** (p - 1)

    head = _quad(f_small, 0.0, 1.0, q)

    hmax = max(60.0, 45.0 / (1.0 + rho))

    def f_mid(h):
        return math.exp(-rho * h + log_kbar(nu, h)) * h ** (-1 - nu)

    mid = _quad(f_mid, h0, hmax, q)
    # remaining polynomial part on [h0, inf): (-1 [+ rho h]) h^{-1-nu}
    poly = -(h0 ** (-nu)) / nu
    if compensated:
        poly += rho * h0 ** (1 - nu) / (nu - 1)
    tail_bessel = 0.0  # e^{-(1+rho) hmax} is below double precision
    return head + mid + poly + tail_bessel


def bessel_laplace_integral(nu: float, rho: float, mode: str = "closed_form", q: QuadratureSpec | None = None) -> float:
    """int_0^inf e^{-rho h} K_nu(h) dh for nu in (0,1); closed form is the cosh ratio."""
    if not (0 < nu < 1):
        raise DomainError(f"nu must lie in (0,1), got {nu}")
    _check_rho(rho)
    if mode == "closed_form":
        return cosh_ratio_integral(nu, rho, "closed_form")
    q = q or DEFAULT_Q
    h0 = 1.0
    # K_nu(h) ~ h^{-nu} at 0: substitute h = h0 s^{1/(1-nu)}
    p = 1.0 / (1.0 - nu)
    f0 = lambda s: 0.0 if s == 0 else math.exp(-rho * h0 * s**p) * special.kv(nu, h0 * s**p) * h0 * p * s ** (p - 1)
    head = _quad(f0, 0.0, 1.0, q)
    hmax = max(60.0, 45.0 / (1.0 + rho))
    f1 = lambda h: math.exp(-(rho + 1) * h) * special.kve(nu, h)
    return head + _quad(f1, h0, hmax, q)


# ---------------------------------------------------------------------------
# The A^theta_u functional


def _nu_from_kappa(kappa):
    if not (8.0 / 3.0 < kappa < 8.0) or kappa == 4.0:
        raise DomainError(f"kappa must lie in (8/3, 8) without 4, got {kappa}")
    return 4.0 / kappa


def _binom_series(theta, z, start=2, terms=80, scaled=False):
    """sum_{k>=start} binom(theta, k) z^k for |z| < 1 (divided by z^start if ``scaled``)."""
    z = float(z)
    c = 1.0
    for k in range(1, start):
        c *= (theta - k + 1) / k
    out = 0.0
    zk = 1.0 if scaled else z**start
    for k in range(start, terms):
        c *= (theta - k + 1) / k
        term = c * zk
        out += term
        zk *= z
        if abs(term) < 1e-20 * max(1.0, abs(out)):
            break
    return out


def _a_theta_u_quadrature(nu, theta, u, compensated, q):
    """A^theta_u by direct quadrature (no integration-by-parts algebra)."""
    start = 2 if compensated else 1
    sgn_comp = 1.0 if compensated else 0.0
    h0 = 0.5
    p = 1.0 / (2.0 - nu) if compensated else 1.0 / (1.0 - nu)

    # positive-jump integral: int h^{-1-nu} ((1+h)^theta - 1 [- theta h])
    def fpos_small(s):
        if s == 0.0:
            return 0.0
        h = h0 * s**p
        # h^{start-1-nu} s^{p-1} stays bounded as s -> 0
        return _binom_series(theta, h, start, scaled=True) * h ** (start - 1 - nu) * h0 * p * s ** (p - 1)

    ipos = _quad(fpos_small, 0.0, 1.0, q)
    fpos_mid = lambda h: ((1 + h) ** theta - 1 - sgn_comp * theta * h) * h ** (-1 - nu)
    ipos += _quad(fpos_mid, h0, 1.0, q)
    # [1, inf) via h = 1/t; the (1+t)^theta t^{nu-1-theta} part uses an algebraic weight
    ipos += _quad(lambda t: (1 + t) ** theta, 0.0, 1.0, q, weight="alg", wvar=(nu - 1 - theta, 0.0))
    ipos -= 1.0 / nu
    if compensated:
        ipos -= theta / (nu - 1)

    # negative-jump integral with cutoff v: int h^{-1-nu} ((1-h)^theta 1(h<v) - 1 [+ theta h])
    def ineg(v):
        hs = min(h0, v)
        ps = p

        def fs(s):
            if s == 0.0:
                return 0.0
            h = hs * s**ps
            return _binom_series(theta, -h, start, scaled=True) * (-1.0) ** start * h ** (start - 1 - nu) * hs * ps * s ** (ps - 1)

        val = _quad(fs, 0.0, 1.0, q)
        if v > hs:
            # (1-h)^theta may blow up near h=1 only if v is close to 1; substitute w = 1-h
            fm = lambda h: ((1 - h) ** theta - 1 + sgn_comp * theta * h) * h ** (-1 - nu)
            val += _quad(fm, hs, v, q)
        # beyond v only the polynomial part survives
        val += -(v ** (-nu)) / nu
        if compensated:
            val += theta * v ** (1 - nu) / (nu - 1)
        return val

    kfac = -math.cos(math.pi * nu)
    return kfac * ipos + 0.5 * ineg(u) + 0.5 * ineg(1 - u)


def _a_theta_u_closed(nu, theta, u, compensated):
    """A^theta_u through the integration-by-parts closed forms."""
    kfac = -math.cos(math.pi * nu)
    if compensated:
        d = nu * (nu - 1)
        ipos = theta * (theta - 1) / d * special.beta(2 - nu, nu - theta)

        def ineg(v):
            return (
                theta * (theta - 1) / d * beta_inc(v, 2 - nu, theta - 1)
                + theta * v ** (1 - nu) * (1 - v) ** (theta - 1) / d
                - v ** (-nu) * (1 - v) ** theta / nu
            )
    else:
        ipos = theta / nu * special.beta(1 - nu, nu - theta)

        def ineg(v):
            return -theta / nu * beta_inc(v, 1 - nu, theta) - v ** (-nu) * (1 - v) ** theta / nu

    return kfac * ipos + 0.5 * ineg(u) + 0.5 * ineg(1 - u)


def a_theta_identity_rhs(kappa: float, theta: float) -> float:
    """-cos(pi theta) B(theta + 1, 4/kappa - theta)."""
    nu = _nu_from_kappa(kappa)
    if not (-1 < theta < nu):
        raise DomainError(f"theta must lie in (-1, 4/kappa), got {theta}")
    return -math.cos(math.pi * theta) * beta_fn(theta + 1, nu - theta)


def a_theta_u(kappa: float, theta: float, u: float, compensated: bool | None = None, mode: str = "quadrature",
              combined: bool = False, q: QuadratureSpec | None = None) -> float:
    """The A^theta_u integral (compensation iff kappa < 4).

    With ``combined=True`` the two incomplete integrals
    int_0^u h^theta / (2 (1-h)^{1+4/kappa}) dh (and the same with 1-u) are
    added, which is the quantity with the -cos(pi theta) B(...) closed form.
    """
    nu = _nu_from_kappa(kappa)
    comp_expected = kappa < 4
    if compensated is None:
        compensated = comp_expected
    if compensated != comp_expected:
        raise DomainError("Lévy compensation is used exactly when kappa < 4")
    if not theta < nu:
        raise DomainError(f"A^theta_u is not integrable for theta >= 4/kappa (theta={theta})")
    if not (0 < u < 1):
        raise DomainError(f"u must lie in (0,1), got {u}")
    q = q or DEFAULT_Q
    if combined:
        if mode == "closed_form":
            return a_theta_identity_rhs(kappa, theta)
        if not theta > -1:
            raise DomainError("the combined identity needs theta > -1")
        extra = 0.0
        for v in (u, 1 - u):
            extra += _quad(lambda h: 0.5 * (1 - h) ** (-1 - nu), 0.0, v, q, weight="alg", wvar=(theta, 0.0))
        return _a_theta_u_quadrature(nu, theta, u, compensated, q) + extra
    if mode == "closed_form":
        return _a_theta_u_closed(nu, theta, u, compensated)
    if mode == "quadrature":
        return _a_theta_u_quadrature(nu, theta, u, compensated, q)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------


def rho_lambda(nu: float, c: float, lam: float) -> float:
    """Root rho of lam = c^nu/Gamma(-nu) * int h^{-1-nu}(e^{-rho h}K̄_nu(c h) - 1 + rho h) dh.

    The right side equals c' cos(nu theta) (or cosh) with rho = c cos(theta),
    c' = c^nu 2^{1-nu}, which inverts explicitly.
    """
    if not (1 < nu < 2):
        raise DomainError(f"nu must lie in (1,2), got {nu}")
    if not (c > 0 and lam > 0):
        raise DomainError("c and lambda must be positive")
    cp = c**nu * 2.0 ** (1 - nu)
    r = lam / cp
    if r <= 1.0:
        return c * math.cos(math.acos(r) / nu)
    return c * math.cosh(math.acosh(r) / nu)


def lambda_of_rho(nu: float, c: float, rho: float, mode: str = "closed_form") -> float:
    """Forward map of :func:`rho_lambda`."""
    val = levy_symbol_integral(nu, rho / c, True, mode)
    return c**nu * val / gamma(-nu)
