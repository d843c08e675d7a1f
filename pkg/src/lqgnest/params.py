"""Model parameters and the sigma -> alpha, sigma -> rho dictionaries.

Both maps are strictly increasing and invert in closed form, so no root
finding is needed; :func:`bisect_monotone` is kept as an independent oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping

from .specfun import DomainError

__all__ = [
    "ModelParams",
    "SigmaFamily",
    "q_of",
    "sigma_threshold",
    "alpha_from_sigma",
    "sigma_from_alpha",
    "rho_from_sigma",
    "sigma_from_rho",
    "rho_min",
    "validate_sigma_family",
    "bisect_monotone",
]


@dataclass(frozen=True)
class ModelParams:
    """kappa, the CPI asymmetry beta, and derived gamma, nu = 4/kappa."""

    kappa: float
    beta: float = 0.0
    allow_four: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        k = float(self.kappa)
        if not (8.0 / 3.0 < k < 8.0):
            raise DomainError(f"kappa must lie in (8/3, 8), got {k}")
        if k == 4.0 and not self.allow_four:
            raise DomainError("kappa = 4 is excluded outside the radius law")
        if not (-1.0 <= self.beta <= 1.0):
            raise DomainError(f"beta must lie in [-1, 1], got {self.beta}")

    @property
    def gamma(self) -> float:
        return min(math.sqrt(self.kappa), 4.0 / math.sqrt(self.kappa))

    @property
    def nu(self) -> float:
        return 4.0 / self.kappa

    @property
    def q_gamma(self) -> float:
        return q_of(self.gamma)

    @property
    def simple(self) -> bool:
        """True for kappa < 4 (compensated regime)."""
        return self.kappa < 4.0

    @property
    def neg_cos(self) -> float:
        """-cos(4 pi / kappa), the positive-jump prefactor."""
        return -math.cos(4.0 * math.pi / self.kappa)


def q_of(alpha: float) -> float:
    if not alpha > 0:
        raise DomainError(f"Q_alpha needs alpha > 0, got {alpha}")
    return alpha / 2.0 + 2.0 / alpha


def _kappa(p) -> float:
    return p.kappa if isinstance(p, ModelParams) else float(p)


def sigma_threshold(p) -> float:
    """Upper end -log(-cos(4 pi / kappa)) of the single-point sigma range."""
    k = _kappa(p)
    return -math.log(-math.cos(4.0 * math.pi / k))


def alpha_from_sigma(p, sigma: float) -> float:
    """alpha solving e^{-sigma} = -cos(4pi/k) / (-cos(4pi/k - 2 pi alpha / sqrt k))."""
    k = _kappa(p)
    if not sigma < sigma_threshold(k):
        raise DomainError(f"sigma must be below {sigma_threshold(k):.6g}, got {sigma}")
    d = -math.cos(4.0 * math.pi / k) * math.exp(sigma)  # in (0, 1)
    t = (4.0 * math.pi / k + math.acos(-d)) / math.pi
    return t * math.sqrt(k) / 2.0


def _alpha_bounds(k):
    g = min(math.sqrt(k), 4.0 / math.sqrt(k))
    qg = q_of(g)
    return qg - math.sqrt(k) / 4.0, qg


def sigma_from_alpha(p, alpha: float) -> float:
    k = _kappa(p)
    lo, hi = _alpha_bounds(k)
    if not (lo < alpha < hi):
        raise DomainError(f"alpha must lie in ({lo:.6g}, {hi:.6g}), got {alpha}")
    den = -math.cos(4.0 * math.pi / k - 2.0 * math.pi * alpha / math.sqrt(k))
    return -math.log(-math.cos(4.0 * math.pi / k) / den)


def rho_min(p) -> float:
    k = _kappa(p)
    return -1.0 + 2.0 / k + 3.0 * k / 32.0


def rho_from_sigma(p, sigma: float) -> float:
    """rho solving e^{-sigma} = -cos(4pi/k) / cos(pi sqrt((1-4/k)^2 - 8 rho / k))."""
    k = _kappa(p)
    c = -math.cos(4.0 * math.pi / k) * math.exp(sigma)  # = cos(pi s)
    if c <= 1.0:
        s2 = (math.acos(c) / math.pi) ** 2
    else:
        s2 = -((math.acosh(c) / math.pi) ** 2)
    return k * ((1.0 - 4.0 / k) ** 2 - s2) / 8.0


def sigma_from_rho(p, rho: float) -> float:
    k = _kappa(p)
    if not rho > rho_min(k):
        raise DomainError(f"rho must exceed {rho_min(k):.6g}, got {rho}")
    r = (1.0 - 4.0 / k) ** 2 - 8.0 * rho / k
    den = math.cos(math.pi * math.sqrt(r)) if r >= 0 else math.cosh(math.pi * math.sqrt(-r))
    return -math.log(-math.cos(4.0 * math.pi / k) / den)


def bisect_monotone(f: Callable[[float], float], target: float, lo: float, hi: float, width: float = 1e-12) -> float:
    """Bisection for an increasing f on (lo, hi)."""
    while hi - lo > width * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------


def _key(B: Iterable[int]) -> frozenset:
    return frozenset(int(i) for i in B)


@dataclass
class SigmaFamily:
    """Weights sigma_B for subsets B of a finite label set A.

    Missing subsets with |B| >= 2 fall back to ``min_{i in B} sigma_i -
    default_gap``; ``sigma_empty`` is stored separately so that a bad value can
    be reported rather than silently fixed.
    """

    A: tuple
    sigma: dict = field(default_factory=dict)
    default_gap: float = 0.1

    def __post_init__(self):
        self.A = tuple(sorted(int(i) for i in self.A))
        if len(set(self.A)) != len(self.A):
            raise DomainError("labels in A must be distinct")
        self.sigma = {_key(B): float(v) for B, v in dict(self.sigma).items()}
        for B in self.sigma:
            if not B <= set(self.A):
                raise DomainError(f"subset {sorted(B)} is not contained in A")

    def __call__(self, B: Iterable[int]) -> float:
        B = _key(B)
        if B in self.sigma:
            return self.sigma[B]
        if not B:
            return 0.0
        if len(B) == 1:
            raise KeyError(f"sigma for point {sorted(B)} is not set")
        return min(self(frozenset([i])) for i in B) - self.default_gap

    def subsets(self, nonempty: bool = False):
        start = 1 if nonempty else 0
        for n in range(start, len(self.A) + 1):
            for B in combinations(self.A, n):
                yield frozenset(B)

    def restrict(self, B: Iterable[int]) -> "SigmaFamily":
        B = _key(B)
        return SigmaFamily(tuple(sorted(B)), {C: v for C, v in self.sigma.items() if C <= B}, self.default_gap)

    def to_json(self) -> str:
        sig = {",".join(str(i) for i in sorted(B)): v for B, v in sorted(self.sigma.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))}
        return json.dumps({"A": list(self.A), "sigma": sig}, sort_keys=False)

    @classmethod
    def from_json(cls, text: str, default_gap: float = 0.1) -> "SigmaFamily":
        obj = json.loads(text)
        sig = {}
        for key, v in obj.get("sigma", {}).items():
            labels = [int(t) for t in key.split(",") if t.strip() != ""]
            sig[frozenset(labels)] = float(v)
        return cls(tuple(obj["A"]), sig, default_gap)

    @classmethod
    def single(cls, sigma: float, label: int = 1) -> "SigmaFamily":
        return cls((label,), {frozenset([label]): sigma})

    @classmethod
    def from_points(cls, point_sigmas: Mapping[int, float], extra: Mapping | None = None, default_gap: float = 0.1):
        sig = {frozenset([i]): float(v) for i, v in point_sigmas.items()}
        for B, v in (extra or {}).items():
            sig[_key(B)] = float(v)
        return cls(tuple(point_sigmas), sig, default_gap)


def validate_sigma_family(p, s: SigmaFamily) -> list:
    """List of (subset, reason) violations; empty when the family is valid."""
    out = []
    thr = sigma_threshold(p)
    empty = frozenset()
    if empty in s.sigma and s.sigma[empty] != 0.0:
        out.append((empty, f"sigma of the empty set must be 0, got {s.sigma[empty]}"))
    for i in s.A:
        B = frozenset([i])
        if B not in s.sigma:
            out.append((B, "sigma missing"))
        elif not s.sigma[B] < thr:
            out.append((B, f"sigma={s.sigma[B]} is not below {thr:.6g}"))
    return out
