"""Closed-form correlation-gap bounds for matroid rank functions.

All sums use exact integer binomials converted to float, powers of (e - 1)
by iterated multiplication and ``math.fsum`` accumulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import poisson

from .errors import InputError
from .extensions import ConcaveSequence, concave_ext_1d

E = math.e
ONE_MINUS_INV_E = 1.0 - 1.0 / E


@dataclass(frozen=True)
class BoundParams:
    rho: int
    gamma: int

    def __post_init__(self):
        if self.gamma < 2:
            raise InputError("girth must be >= 2 (loopless matroid)")
        if self.rho < 1 or self.rho < self.gamma - 1:
            raise InputError(f"need rank >= max(1, girth - 1); got rank={self.rho}, girth={self.gamma}")

    @property
    def ell(self) -> int:
        return self.gamma - 1


def _summands(lam: int, count: int, xi: float = 1.0) -> list[float]:
    """xi*C(lam,i)(e-1)^i - lam^i/i! for i = 0..count-1."""
    out = []
    power = 1.0
    ratio = 1.0
    for i in range(count):
        out.append(xi * math.comb(lam, i) * power - ratio)
        power *= E - 1.0
        ratio *= lam / (i + 1)
    return out


def phi_term(xi: float, lam: int, i: int) -> float:
    """xi*C(lam,i)(e-1)^i - lam^i/i!."""
    if lam < 1 or not 0 <= i <= lam:
        raise InputError("need lam >= 1 and 0 <= i <= lam")
    return _summands(lam, i + 1, xi)[i]


def zeta_sum(rho: int, gamma: int) -> float:
    """sum_{i=0}^{gamma-2} (gamma-1-i)[C(rho,i)(e-1)^i - rho^i/i!]."""
    if not 2 <= gamma <= rho + 1:
        raise InputError("need 2 <= gamma <= rho + 1")
    terms = _summands(rho, gamma - 1)
    return math.fsum((gamma - 1 - i) * t for i, t in enumerate(terms))


def g_sum(lam: int, ell: int) -> float:
    """e^{-lam} sum_{i=0}^{ell-1} (ell-i)[C(lam,i)(e-1)^i - lam^i/i!]."""
    if ell < 1 or lam < ell:
        raise InputError("need lam >= ell >= 1")
    return math.exp(-lam) * zeta_sum(lam, ell + 1)


def bound_excess(rho: int, gamma: int) -> float:
    """Amount by which the lower bound exceeds 1 - 1/e."""
    p = BoundParams(rho, gamma)
    return math.exp(-p.rho) / p.rho * zeta_sum(p.rho, p.gamma)


def bound_monster(rho: int, gamma: int) -> float:
    """Lower bound on CG(r) for a loopless matroid of rank rho and girth gamma."""
    return ONE_MINUS_INV_E + bound_excess(rho, gamma)


def uniform_closed_form(ell: int) -> float:
    """1 - e^{-ell} ell^ell / ell!, the correlation gap limit of rank-ell uniform matroids."""
    if ell < 1:
        raise InputError("ell must be >= 1")
    return 1.0 - math.exp(-ell + ell * math.log(ell) - math.lgamma(ell + 1))


def uniform_finite_gap(n: int) -> float:
    """1 - (1 - 1/n)^n, the exact gap of the rank-1 uniform matroid on n elements."""
    return 1.0 - (1.0 - 1.0 / n) ** n


def theta(k: int, x: float) -> float:
    """Pr[Poi(x) <= k]."""
    if k < 0 or x < 0:
        raise InputError("need k >= 0 and x >= 0")
    terms = []
    term = 1.0
    for i in range(k + 1):
        terms.append(term)
        term *= x / (i + 1)
    return math.exp(-x) * math.fsum(terms)


def theta_derivative(k: int, x: float) -> float:
    return -math.exp(-x + k * math.log(x) - math.lgamma(k + 1)) if x > 0 else (-1.0 if k == 0 else 0.0)


def poisson_expectation(phi: ConcaveSequence, lam: float, tail: float = 1e-12) -> float:
    """E[phi(Poi(lam))], truncating once the remaining mass is below ``tail``."""
    if lam == 0:
        return float(phi(0))
    kmax = int(poisson.isf(tail, lam)) + 2
    ks = np.arange(kmax + 1)
    return float(np.sum(poisson.pmf(ks, lam) * phi(ks)))


@lru_cache(maxsize=256)
def poisson_concavity_ratio(phi: ConcaveSequence, lambda_max: float = 50.0, grid: int = 2000) -> float:
    """min over a lambda grid of E[phi(Poi(lam))] / phi_hat(lam).

    The grid is log-spaced on (1e-3, lambda_max] and also contains every
    integer up to lambda_max: the ratio of a concave function to the
    piecewise-linear phi_hat is quasiconcave between integers, so the minimum
    sits at an integer or at the grid's lower end.
    """
    if abs(phi(0)) > 1e-12 or abs(phi(1) - 1.0) > 1e-12:
        raise InputError("phi must satisfy phi(0) = 0 and phi(1) = 1")
    lams = np.union1d(np.geomspace(1e-3, lambda_max, grid), np.arange(1, math.floor(lambda_max) + 1))
    best = math.inf
    for lam in lams:
        denom = concave_ext_1d(phi, float(lam))
        if denom > 0:
            best = min(best, poisson_expectation(phi, float(lam)) / denom)
    return best


def upper_bound_girth_uniform(rho: int, gamma: int) -> float:
    """Upper bound from padding a uniform matroid of rank gamma-1 with a free part."""
    p = BoundParams(rho, gamma)
    return uniform_closed_form(p.ell)


@dataclass(frozen=True)
class UnionUpperBound:
    """Two forms of the union-construction upper bound.

    ``ell_form`` uses (gamma-1)/(e*rho) and ``gamma_form`` uses gamma/(e*rho).
    The construction's finite-n ratio decreases toward ``ell_form``.
    """

    ell_form: float
    gamma_form: float


def upper_bound_union(rho: int, gamma: int) -> UnionUpperBound:
    p = BoundParams(rho, gamma)
    return UnionUpperBound(
        ell_form=ONE_MINUS_INV_E + p.ell / (E * p.rho),
        gamma_form=ONE_MINUS_INV_E + p.gamma / (E * p.rho),
    )


def union_construction_value(ell: int, k: int, n: int) -> float:
    """Exact F at the construction point: ell + k(1 - (1 - 1/n)^n)."""
    return ell + k * uniform_finite_gap(n)


def union_construction_ratio(ell: int, k: int, n: int) -> float:
    return union_construction_value(ell, k, n) / (ell + k)
