"""Independent reference implementations used only by the tests.

Nothing here imports the package's algorithms; each oracle works from the
definitions by brute force.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def subsets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


def rank_from_independence(n, is_indep):
    """Rank table by scanning every subset for its largest independent subset."""
    indep = [S for S in subsets(n) if is_indep(frozenset(S))]
    table = {}
    for S in subsets(n):
        s = frozenset(S)
        table[s] = max(len(I) for I in indep if set(I) <= s)
    return table


def forest(edges):
    """is_indep for a graphic matroid by union-find cycle detection."""

    def check(S):
        parent = {}

        def find(a):
            while parent.get(a, a) != a:
                a = parent[a]
            return a

        for e in S:
            u, v = edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    return check


def weighted_rank_brute(n, is_indep, w, S):
    best = 0.0
    for k in range(len(S) + 1):
        for I in itertools.combinations(sorted(S), k):
            if is_indep(frozenset(I)):
                best = max(best, sum(w[i] for i in I))
    return best


def multilinear_brute(n, f, x):
    total = 0.0
    for S in subsets(n):
        p = 1.0
        for i in range(n):
            p *= x[i] if i in S else 1 - x[i]
        total += p * f(frozenset(S))
    return total


def concave_ext_brute(n, f, x):
    """max sum_S a_S f(S) over distributions with marginals x (dense LP over 2^n variables)."""
    sets = list(subsets(n))
    c = -np.array([f(frozenset(S)) for S in sets])
    A = np.zeros((n + 1, len(sets)))
    for j, S in enumerate(sets):
        for i in S:
            A[i, j] = 1.0
        A[n, j] = 1.0
    b = np.append(np.asarray(x, dtype=float), 1.0)
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert res.success
    return -res.fun


def girth_brute(n, is_indep):
    for k in range(1, n + 1):
        for S in itertools.combinations(range(n), k):
            if not is_indep(frozenset(S)):
                return k
    return math.inf


def poisson_cdf(k, lam):
    return sum(math.exp(-lam) * lam**i / math.factorial(i) for i in range(k + 1))


def activation_cdf_brute(x, ell, t):
    """Pr[at least ell of the independent Exp(x_i) clocks have rung by t]."""
    p = [1 - math.exp(-xi * t) for xi in x]
    return sum(
        math.prod(p[i] if i in S else 1 - p[i] for i in range(len(x)))
        for S in subsets(len(x))
        if len(S) >= ell
    )
