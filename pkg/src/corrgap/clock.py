"""Poisson-clock process, the psi functional and pipage rounding.

Each element i carries a Poisson clock of rate x_i; Q(t) is the set of
elements whose clock has rung by time t and the activation time T is the
first t with |Q(t)| >= ell. The functional

    psi(x) = sum_S (-1)^{|S|+ell-n} C(|S|-1, n-ell) rho(x(S) - 1),
    rho(t) = (1 - e^{-t}) / t,

bounds the h-part of the multilinear extension, where h = r - min(|.|, ell).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._subsets import as_point, check_budget, popcount, subset_sums
from .errors import InputError
from .extensions import SetFunction, multilinear_exact, poisson_binomial, uniform_rank_function
from .identities import binom
from .matroids import Matroid, in_polytope

PSI_MAX_N = 20
CDF_BUDGET = 1_000_000
_SERIES_CUTOFF = 1e-3


@dataclass(frozen=True)
class ClockTrace:
    arrival_time: np.ndarray  # first ring in [0, 1], nan when absent
    Q1: frozenset[int]
    T: float | None


def _first_arrivals(x: np.ndarray, size: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    with np.errstate(divide="ignore"):
        scale = np.where(x > 0, 1.0 / np.where(x > 0, x, 1.0), np.inf)
    arr = rng.exponential(1.0, size=size + (len(x),)) * scale
    return np.where(arr <= 1.0, arr, np.inf)


def simulate_clock(x, ell: int, seed: int) -> ClockTrace:
    """One trace of the clock process on [0, 1]."""
    if ell < 1:
        raise InputError("ell must be >= 1")
    x = as_point(x)
    arr = _first_arrivals(x, (), np.random.default_rng(seed))
    rang = np.isfinite(arr)
    T = float(np.sort(arr)[ell - 1]) if rang.sum() >= ell else None
    return ClockTrace(np.where(rang, arr, np.nan), frozenset(np.flatnonzero(rang).tolist()), T)


def simulate_clock_batch(x, ell: int, traces: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized traces: (mask of Q(1) per trace, activation time or inf)."""
    if ell < 1:
        raise InputError("ell must be >= 1")
    x = as_point(x)
    arr = _first_arrivals(x, (traces,), np.random.default_rng(seed))
    masks = np.isfinite(arr) @ (1 << np.arange(len(x), dtype=np.int64))
    if ell <= len(x):
        T = np.partition(arr, ell - 1, axis=1)[:, ell - 1]
    else:
        T = np.full(traces, np.inf)
    return masks, T


def activation_cdf(x, ell: int, t):
    """Pr[T <= t] = 1 - sum over |S| < ell of Pr[exactly S has rung by t]."""
    x = as_point(x)
    n = len(x)
    if sum(math.comb(n, j) for j in range(min(ell, n + 1))) > CDF_BUDGET:
        raise InputError("activation CDF enumeration over budget")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InputError("t must be nonnegative")
    stay = np.exp(-np.multiply.outer(t, x))
    total = np.zeros_like(t)
    for j in range(min(ell, n + 1)):
        for S in itertools.combinations(range(n), j):
            inS = np.zeros(n, dtype=bool)
            inS[list(S)] = True
            total = total + np.prod(np.where(inS, 1.0 - stay, stay), axis=-1)
    return 1.0 - total


def activation_cdf_alternating(x, ell: int, t):
    """Alternating form 1 - sum_S (-1)^{|S|+ell-n-1} C(|S|-1, n-ell) e^{-x(S) t}."""
    x = as_point(x)
    n = len(x)
    check_budget(n, PSI_MAX_N, "alternating activation CDF")
    sums = subset_sums(x)
    sizes = popcount(np.arange(1 << n, dtype=np.int64))
    coef = np.array([(-1) ** ((s + ell - n - 1) % 2) * binom(s - 1, n - ell) for s in range(n + 1)], dtype=float)
    t = np.asarray(t, dtype=float)
    return 1.0 - np.exp(-np.multiply.outer(t, sums)) @ coef[sizes]


def rho(t):
    """(1 - e^{-t}) / t with the removable singularity at 0 filled in."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, t)
    out = np.where(small, _rho_series(0, t), -np.expm1(-safe) / safe)
    return out if out.ndim else float(out)


def _rho_series(k: int, t, terms: int = 10):
    # rho^{(k)}(t) = sum_j (-1)^{j+k} (j+k)! / (j! (j+k+1)!) t^j
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for j in range(terms):
        c = (-1) ** (j + k) * math.factorial(j + k) / (math.factorial(j) * math.factorial(j + k + 1))
        total = total + c * t**j
    return total


def rho_deriv(k: int, t: float) -> float:
    """k-th derivative of rho: (-1)^k k! Pr[Poi(t) > k] / t^{k+1}."""
    if k < 0 or t < 0:
        raise InputError("need k >= 0 and t >= 0")
    if t < _SERIES_CUTOFF:
        return float(_rho_series(k, t))
    if t < k + 1:
        # tail of the Poisson pmf, summed directly to avoid 1 - (1 - tiny)
        term = math.exp(-t + (k + 1) * math.log(t) - math.lgamma(k + 2))
        tail, i = 0.0, k + 1
        while term > 1e-18 * max(tail, 1e-300):
            tail += term
            i += 1
            term *= t / i
    else:
        head, term = 0.0, math.exp(-t)
        for i in range(k + 1):
            head += term
            term *= t / (i + 1)
        tail = 1.0 - head
    return (-1) ** k * math.factorial(k) * tail / t ** (k + 1)


def forward_difference(phi: Callable, x, t: float) -> float:
    """sum_S (-1)^{n-|S|} phi(t + x(S))."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = len(x)
    check_budget(n, PSI_MAX_N, "forward difference")
    sums = subset_sums(x)
    sizes = popcount(np.arange(1 << n, dtype=np.int64))
    signs = np.where((n - sizes) % 2 == 0, 1.0, -1.0)
    vals = np.asarray(phi(t + sums), dtype=float)
    return float(np.sum(signs * vals))


def _psi_raw(x: np.ndarray, ell: int) -> float:
    n = len(x)
    sums = subset_sums(x)
    sizes = popcount(np.arange(1 << n, dtype=np.int64))
    coef = np.array([(-1) ** ((s + ell - n) % 2) * binom(s - 1, n - ell) for s in range(n + 1)], dtype=float)
    c = coef[sizes]
    live = c != 0
    return float(np.sum(c[live] * rho(sums[live] - 1.0)))


def psi_eval(x, ell: int) -> float:
    """psi(x) by the full subset sum; only |S| >= n + 1 - ell contributes."""
    x = as_point(x)
    check_budget(len(x), PSI_MAX_N, "psi evaluation")
    if not 1 <= ell <= len(x):
        raise InputError("need 1 <= ell <= n")
    return _psi_raw(x, ell)


def w_poly(lam: int, ell: int) -> list[int]:
    """Integer coefficients of w_{lam,ell}(z) = sum_i (-1)^{ell-1-i} C(lam,i) C(lam-2-i, ell-1-i) z^i."""
    return [(-1) ** (ell - 1 - i) * binom(lam, i) * binom(lam - 2 - i, ell - 1 - i) for i in range(ell)]


def poly_eval(coefs: list[int], z: float) -> float:
    return math.fsum(c * z**i for i, c in enumerate(coefs))


def poly_derivative(coefs: list[int]) -> list[int]:
    return [i * c for i, c in enumerate(coefs)][1:]


def psi_integral_w(lam: int, ell: int) -> float:
    """psi at a 0/1 point with lam ones, through the polynomial w evaluated at e."""
    if lam <= ell:
        raise InputError("need lam > ell")
    return (-ell + math.exp(-lam + 1) * poly_eval(w_poly(lam, ell), math.e)) / (lam - ell)


def psi_integral_closed(lam: int, ell: int) -> float:
    """[-ell + e^{1-lam} sum_{i<ell} C(lam,i)(ell-i)(e-1)^i] / (lam - ell)."""
    if lam <= ell:
        raise InputError("need lam > ell")
    s = math.fsum(math.comb(lam, i) * (ell - i) * (math.e - 1) ** i for i in range(ell))
    return (-ell + math.exp(-lam + 1) * s) / (lam - ell)


def psi_integral_grouped(lam: int, ell: int) -> float:
    """sum_{i<ell} (-1)^{ell-i} C(lam,i) C(lam-i-1, ell-i-1) rho(lam-i-1)."""
    return math.fsum(
        (-1) ** (ell - i) * binom(lam, i) * binom(lam - i - 1, ell - i - 1) * rho(lam - i - 1) for i in range(ell)
    )


def psi_directional_concavity(x, ell: int, a: int, b: int, step: float = 1e-3) -> float:
    """Central second difference of t -> psi(x + t(e_a - e_b)), divided by step^2."""
    x = as_point(x)
    d = np.zeros(len(x))
    d[a] += 1.0
    d[b] -= 1.0
    lo, mid, hi = (_psi_raw(x + s * d, ell) for s in (-step, 0.0, step))
    return (hi - 2 * mid + lo) / step**2


def pipage_round(f: Callable[[np.ndarray], float], y, tol: float = 1e-9) -> np.ndarray:
    """Round y to a 0/1 point with the same coordinate sum and f no larger.

    Valid when f is concave along every e_i - e_j: the smaller endpoint of the
    segment through y cannot exceed f(y).
    """
    y = as_point(y).copy()
    total = y.sum()
    if abs(total - round(total)) > tol:
        raise InputError("coordinate sum must be an integer")

    def snap(v):
        v[np.abs(v) < tol] = 0.0
        v[np.abs(v - 1.0) < tol] = 1.0
        return v

    y = snap(y)
    while True:
        frac = np.flatnonzero((y > 0) & (y < 1))
        if len(frac) == 0:
            return y
        if len(frac) == 1:
            y[frac[0]] = round(y[frac[0]])
            return y
        i, j = int(frac[0]), int(frac[1])
        up = min(1.0 - y[i], y[j])
        down = min(y[i], 1.0 - y[j])
        y_up, y_down = y.copy(), y.copy()
        y_up[i] += up
        y_up[j] -= up
        y_down[i] -= down
        y_down[j] += down
        # ties go to the endpoint raising the lower-indexed coordinate
        y = snap(y_down if f(y_down) < f(y_up) else y_up)


def expected_min_binomial(n: int, p: float, ell: int) -> float:
    pmf = poisson_binomial([p] * n)
    return float(np.sum(pmf * np.minimum(np.arange(n + 1), ell)))


def expected_min_poisson(lam: float, ell: int) -> float:
    """E[min(Poi(lam), ell)] = ell - sum_{k<ell} (ell-k) lam^k e^{-lam} / k!."""
    terms, term = [], math.exp(-lam)
    for k in range(ell):
        terms.append((ell - k) * term)
        term *= lam / (k + 1)
    return ell - math.fsum(terms)


@dataclass(frozen=True)
class ClockReport:
    lam: float
    ell: int
    h_estimate: float
    h_stderr: float
    h_exact: float
    h_lower_bound: float
    psi: float
    g_exact: float
    g_lower_bound: float
    mc_matches_exact: bool
    expectation_bound_holds: bool
    g_bound_holds: bool
    passed: bool


def clock_lower_bound_check(m: Matroid, x, traces: int = 1_000_000, seed: int = 42) -> ClockReport:
    """Check E[h(Q(1))] >= (lam - ell)[1 - 1/e + psi(x)/e] and the Poisson bound on G."""
    x = as_point(x, m.n)
    gamma = m.gamma
    if not math.isfinite(gamma) or gamma < 2:
        raise InputError("matroid must be loopless with finite girth")
    ell = int(gamma) - 1
    lam = float(x.sum())
    if not in_polytope(m, x, 1e-9):
        raise InputError("x must lie in P(r)")
    if lam <= ell:
        raise InputError("need x(E) > girth - 1")
    g = uniform_rank_function(m.n, ell)
    h = SetFunction.from_matroid(m) - g
    masks, _ = simulate_clock_batch(x, ell, traces, seed)
    vals = h.table[masks]
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(traces))
    exact = multilinear_exact(h, 1.0 - np.exp(-x))
    psi = _psi_raw(x, ell)
    rhs = (lam - ell) * (1 - math.exp(-1) + math.exp(-1) * psi)
    g_exact = float(np.sum(poisson_binomial(x) * np.minimum(np.arange(m.n + 1), ell)))
    g_rhs = expected_min_poisson(lam, ell)
    mc_ok = abs(est - exact) <= 3 * se + 1e-12
    bound_ok = est >= rhs - 3 * se
    g_ok = g_exact >= g_rhs - 1e-12
    return ClockReport(lam, ell, est, se, exact, rhs, psi, g_exact, g_rhs, mc_ok, bound_ok, g_ok, mc_ok and bound_ok and g_ok)
