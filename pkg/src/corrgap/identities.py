"""Exact verification of the binomial identities and sign claims behind the bound.

Binomials use Python integers, so every integer identity is checked with zero
tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


def binom(n: int, k: int) -> int:
    """C(n, k), zero when k < 0, k > n or n < 0."""
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


@dataclass(frozen=True)
class IdentityReport:
    claim: str
    swept: str
    violation: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.claim} [{self.swept}] max violation {self.violation:g}"


def _exact(claim: str, swept: str, cases) -> IdentityReport:
    worst = 0
    for lhs, rhs in cases:
        worst = max(worst, abs(lhs - rhs))
    return IdentityReport(claim, swept, worst, worst == 0)


def check_binom_single(n_max: int = 30) -> IdentityReport:
    """sum_{k<=l} (-1)^k C(n,k) = (-1)^l C(n-1,l) for 0 <= l <= n, 1 <= n <= n_max."""

    def cases():
        for n in range(1, n_max + 1):
            for ell in range(n + 1):
                yield sum((-1) ** k * binom(n, k) for k in range(ell + 1)), (-1) ** ell * binom(n - 1, ell)

    return _exact("binom-single", f"1<=n<={n_max}, 0<=l<=n", cases())


def _binomial(n_max):
    for n in range(1, n_max + 1):
        for j in range(n):
            yield sum((-1) ** ((k - 1 - j) % 2) * binom(n, k) * binom(k - 1, j) for k in range(n + 1)), 1


def _binom0(n_max):
    for n in range(1, n_max + 1):
        for j in range(1, n + 1):
            yield sum((-1) ** i * binom(n, i) * binom(n - i, j - i) for i in range(j + 1)), 0


def _binomk(n_max):
    for n in range(n_max + 1):
        for k in range(n + 1):
            for j in range(k + 1):
                yield sum((-1) ** i * binom(n - k, i) * binom(n - i, j - i) for i in range(j + 1)), binom(k, j)


def _binom1(n_max):
    for n in range(1, n_max + 1):
        for j in range(n):
            yield sum((-1) ** i * binom(n, i) * binom(n - 1 - i, j - i) for i in range(j + 1)), (-1) ** j


def _binom2(n_max):
    for n in range(2, n_max + 1):
        for j in range(n - 1):
            yield sum((-1) ** i * binom(n, i) * binom(n - 2 - i, j - i) for i in range(j + 1)), (-1) ** j * (j + 1)


def check_binom_suite(n_max: int = 30) -> list[IdentityReport]:
    return [
        _exact("binomial", f"1<=n<={n_max}, 0<=j<n", _binomial(n_max)),
        _exact("binom0", f"1<=n<={n_max}, 0<j<=n", _binom0(n_max)),
        _exact("binomk", f"0<=j<=k<=n<={n_max}", _binomk(n_max)),
        _exact("binom1", f"1<=n<={n_max}, 0<=j<=n-1", _binom1(n_max)),
        _exact("binom2", f"2<=n<={n_max}, 0<=j<=n-2", _binom2(n_max)),
    ]


def check_sign_claims(lambda_max: int = 50) -> list[IdentityReport]:
    """Numeric sweeps of the sign and monotonicity claims used in the analysis."""
    from .bounds import phi_term, theta, theta_derivative, zeta_sum

    e = math.e
    reports = []

    # positivity of the weighted sum for lam >= ell >= 2
    worst = math.inf
    for lam in range(2, lambda_max + 1):
        for ell in range(2, lam + 1):
            worst = min(worst, zeta_sum(lam, ell + 1))
    reports.append(IdentityReport("nonnegative-sum", f"2<=ell<=lam<={lambda_max}", max(0.0, -worst), worst > 1e-12))

    # part (a): positive summands for small i when xi > 1/(e-1)
    for xi_name, xi in (("1", 1.0), ("(e-1)/e", (e - 1) / e)):
        worst = math.inf
        for lam in range(1, lambda_max + 1):
            top = min(lam, math.floor((e - 2) / (e - 1) * lam + 1))
            for i in range(1, top + 1):
                worst = min(worst, phi_term(xi, lam, i))
        reports.append(
            IdentityReport(f"term-positive(xi={xi_name})", f"1<=lam<={lambda_max}, 1<=i<=(e-2)/(e-1)lam+1", max(0.0, -worst), worst > 1e-12)
        )

    # part (b): once nonpositive the summands stay negative
    bad = 0
    for xi in (1.0, (e - 1) / e):
        for lam in range(1, lambda_max + 1):
            seen = False
            for i in range(1, lam + 1):
                v = phi_term(xi, lam, i)
                if seen and not v < 0:
                    bad += 1
                if v <= 0:
                    seen = True
    reports.append(IdentityReport("term-sign-change", f"1<=lam<={lambda_max}", bad, bad == 0))

    # Poisson cdf at its mean decreases along integers
    worst = -math.inf
    for lam in range(0, lambda_max + 1):
        worst = max(worst, theta(lam + 1, lam + 1) - theta(lam, lam))
    reports.append(IdentityReport("poisson-cdf", f"0<=lam<={lambda_max}", max(worst, 0.0), worst <= 1e-12))

    # theta_k derivative formula and convexity on (k, inf)
    worst_d, worst_c = 0.0, math.inf
    h = 1e-4
    for k in range(0, 21):
        for x in [k + 0.05 + 0.25 * s for s in range(120)]:
            fd = (theta(k, x + h) - theta(k, x - h)) / (2 * h)
            worst_d = max(worst_d, abs(fd - theta_derivative(k, x)))
            hh = 1e-2
            worst_c = min(worst_c, theta(k, x + hh) - 2 * theta(k, x) + theta(k, x - hh))
    reports.append(IdentityReport("gamma-derivative", "0<=k<=20, x in (k, k+30)", worst_d, worst_d <= 1e-7))
    reports.append(IdentityReport("gamma-convex", "0<=k<=20, x in (k, k+30)", max(0.0, -worst_c), worst_c >= -1e-9))
    return reports

