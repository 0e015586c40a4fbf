"""Continuous extensions of set functions.

Covers the multilinear extension F (exact and Monte Carlo), its gradient and
Hessian entries, the concave extension of weighted matroid ranks via the
capacitated greedy, the marginal extension f*, and the 1-D concave extension
of a concave sequence.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from ._subsets import (
    MAX_TABLE_N,
    all_masks,
    as_point,
    check_budget,
    mask_probabilities,
    mask_to_set,
    popcount,
    subset_sums,
    to_mask,
)
from .errors import InputError
from .matroids import Matroid, WeightedRank

F_STAR_MAX_N = 20
DENSE_LP_MAX_N = 10
VERTEX_ENUM_MAX_N = 4


@dataclass(frozen=True, eq=False)
class SetFunction:
    """A set function on {0..n-1} given by an oracle on frozensets.

    The ``monotone``/``submodular`` flags are declarations by the constructor;
    ``check_flags`` verifies them by brute force.
    """

    n: int
    oracle: Callable[[frozenset[int]], float]
    monotone: bool = False
    submodular: bool = False

    def __call__(self, S: Iterable[int] | int) -> float:
        return float(self.oracle(mask_to_set(to_mask(S, self.n))))

    @cached_property
    def table(self) -> np.ndarray:
        masks = all_masks(self.n)
        out = np.fromiter((self.oracle(mask_to_set(int(m))) for m in masks), dtype=float, count=len(masks))
        out.setflags(write=False)
        return out

    @classmethod
    def from_table(cls, table, monotone: bool = False, submodular: bool = False) -> "SetFunction":
        t = np.asarray(table, dtype=float).copy()
        n = int(round(math.log2(len(t))))
        if 1 << n != len(t):
            raise InputError("table length must be a power of two")
        t.setflags(write=False)
        fn = cls(n, lambda elems: float(t[to_mask(elems, n)]), monotone, submodular)
        fn.__dict__["table"] = t
        return fn

    @classmethod
    def from_matroid(cls, m: Matroid) -> "SetFunction":
        fn = cls(m.n, m._rank_set, True, True)
        if m.n <= MAX_TABLE_N:
            fn.__dict__["table"] = m.rank_table.astype(float)
        return fn

    @classmethod
    def from_weighted_rank(cls, wr: WeightedRank) -> "SetFunction":
        fn = cls(wr.n, wr, True, True)
        if wr.n <= MAX_TABLE_N:
            fn.__dict__["table"] = wr.table
        return fn

    def __add__(self, other: "SetFunction") -> "SetFunction":
        if other.n != self.n:
            raise InputError("ground sets differ")
        both = self.monotone and other.monotone, self.submodular and other.submodular
        return SetFunction.from_table(self.table + other.table, *both)

    def __sub__(self, other: "SetFunction") -> "SetFunction":
        if other.n != self.n:
            raise InputError("ground sets differ")
        return SetFunction.from_table(self.table - other.table)

    def marginal(self, S, i: int) -> float:
        """f_S(i) = f(S + i) - f(S)."""
        mask = to_mask(S, self.n)
        return self(mask | (1 << i)) - self(mask)

    def check_flags(self, tol: float = 1e-12) -> bool:
        t = self.table
        masks = np.arange(len(t))
        ok = True
        for i in range(self.n):
            bit = 1 << i
            base = masks[(masks & bit) == 0]
            gain = t[base | bit] - t[base]
            if self.monotone:
                ok &= bool(np.all(gain >= -tol))
            if self.submodular:
                for j in range(self.n):
                    if j == i:
                        continue
                    sub = base[(base & (1 << j)) == 0]
                    more = t[sub | bit | (1 << j)] - t[sub | (1 << j)]
                    ok &= bool(np.all(more <= t[sub | bit] - t[sub] + tol))
        return ok


def uniform_rank_function(n: int, ell: int) -> SetFunction:
    """g(S) = min(|S|, ell)."""
    t = np.minimum(popcount(all_masks(n)), ell).astype(float)
    return SetFunction.from_table(t, True, True)


def modular_function(w: Sequence[float]) -> SetFunction:
    w = np.asarray(w, dtype=float)
    return SetFunction.from_table(subset_sums(w), bool(np.all(w >= 0)), True)


def _table(f) -> np.ndarray:
    if isinstance(f, SetFunction):
        check_budget(f.n, MAX_TABLE_N, "exact multilinear extension")
        return f.table
    if isinstance(f, WeightedRank):
        check_budget(f.n, MAX_TABLE_N, "exact multilinear extension")
        return f.table
    if isinstance(f, Matroid):
        check_budget(f.n, MAX_TABLE_N, "exact multilinear extension")
        return f.rank_table.astype(float)
    raise InputError(f"unsupported set function {type(f).__name__}")


def multilinear_exact(f, x) -> float:
    """F(x) = sum_S f(S) prod_{i in S} x_i prod_{i not in S} (1 - x_i)."""
    t = _table(f)
    n = int(round(math.log2(len(t))))
    return float(t @ mask_probabilities(as_point(x, n)))


def multilinear_mc(f, x, samples: int, seed: int, batch: int = 200_000) -> tuple[float, float]:
    """Monte Carlo estimate of F(x) as (mean, standard error)."""
    if samples < 1:
        raise InputError("samples must be >= 1")
    t = _table(f)
    n = int(round(math.log2(len(t))))
    x = as_point(x, n)
    rng = np.random.default_rng(seed)
    weights = (1 << np.arange(n, dtype=np.int64))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        masks = (rng.random((b, n)) < x) @ weights
        vals = t[masks]
        total += vals.sum()
        total_sq += (vals * vals).sum()
        done += b
    mean = total / samples
    if samples == 1:
        return float(mean), 0.0
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return float(mean), float(math.sqrt(var / samples))


def multilinear_gradient(f, x, i: int) -> float:
    """dF/dx_i = E[f(Y + i)] - E[f(Y)] with Y sampled on the other coordinates."""
    t = _table(f)
    n = int(round(math.log2(len(t))))
    x = as_point(x, n)
    hi, lo = x.copy(), x.copy()
    hi[i], lo[i] = 1.0, 0.0
    return float(t @ mask_probabilities(hi) - t @ mask_probabilities(lo))


def hessian_entry(f, x, i: int, j: int) -> float:
    """d2F/dx_i dx_j; zero on the diagonal since F is multilinear."""
    if i == j:
        return 0.0
    t = _table(f)
    n = int(round(math.log2(len(t))))
    x = as_point(x, n)
    total = 0.0
    for a, b, sign in ((1, 1, 1), (1, 0, -1), (0, 1, -1), (0, 0, 1)):
        y = x.copy()
        y[i], y[j] = a, b
        total += sign * (t @ mask_probabilities(y))
    return float(total)


@dataclass(frozen=True)
class GreedyResult:
    y: np.ndarray
    value: float
    supergradient: np.ndarray


def capacitated_greedy(wr: WeightedRank, x) -> GreedyResult:
    """Maximize w.y over y in P(r) with y <= x.

    Elements are processed by descending weight (ties by index). Each y_e is
    the largest increase keeping y in P(r) and below x, computed through the
    rank function of the box-truncated polytope, r'(S) = min_T r(T) + x(S - T).
    The supergradient is the dual certificate of that greedy: with prefixes
    P_k and minimizers T_k, price_e = sum over k with e in P_k - T_k of
    (w_{e_k} - w_{e_{k+1}}).
    """
    m = wr.matroid
    check_budget(m.n, MAX_TABLE_N, "capacitated greedy")
    x = as_point(x, m.n)
    n = m.n
    slack = m.rank_table - subset_sums(x)
    masks = np.arange(len(slack), dtype=np.int64)
    order = wr.order
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    maxpos = np.full(len(masks), -1, dtype=np.int64)
    for e in range(n):
        has = (masks >> e) & 1 == 1
        maxpos[has] = np.maximum(maxpos[has], pos[e])
    # argmin of slack among masks whose elements all lie in the first k+1 of the order
    best_val = np.full(n + 1, np.inf)
    best_mask = np.zeros(n + 1, dtype=np.int64)
    groups = maxpos + 1
    sort = np.lexsort((masks, slack, groups))
    first = np.searchsorted(groups[sort], np.arange(n + 1), side="left")
    for g in range(n + 1):
        idx = first[g]
        if idx < len(sort) and groups[sort[idx]] == g:
            best_val[g] = slack[sort[idx]]
            best_mask[g] = masks[sort[idx]]
    for g in range(1, n + 1):
        if best_val[g - 1] <= best_val[g]:
            best_val[g] = best_val[g - 1]
            best_mask[g] = best_mask[g - 1]
    prefix_x = np.concatenate([[0.0], np.cumsum(x[order])])
    rprime = prefix_x + best_val
    y = np.zeros(n)
    y[order] = np.clip(np.diff(rprime), 0.0, None)
    w_sorted = wr.weights[order]
    u = w_sorted - np.concatenate([w_sorted[1:], [0.0]])
    price = np.zeros(n)
    for k in range(n):
        if u[k] == 0.0:
            continue
        tk = int(best_mask[k + 1])
        for e in order[: k + 1]:
            if not (tk >> int(e)) & 1:
                price[e] += u[k]
    value = float(np.dot(u, rprime[1:]))
    return GreedyResult(y, value, price)


def concave_ext_weighted_rank(wr: WeightedRank, x) -> float:
    """Concave extension of r_w: max w.y over y in P(r), y <= x."""
    return capacitated_greedy(wr, x).value


def f_star(f: SetFunction, x) -> float:
    """min over S of f(S) + sum_i f_S(i) x_i, by full enumeration."""
    check_budget(f.n, F_STAR_MAX_N, "marginal extension")
    x = as_point(x, f.n)
    t = f.table
    masks = np.arange(len(t), dtype=np.int64)
    acc = t.copy()
    for i in range(f.n):
        acc += x[i] * (t[masks | (1 << i)] - t)
    return float(acc.min())


@dataclass(frozen=True)
class ConcaveSequence:
    """Nondecreasing concave phi on the nonnegative integers.

    ``values`` lists phi(0..K); beyond K the last increment is repeated.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size < 2:
            raise InputError("concave sequence needs at least two values")
        d = np.diff(v)
        if np.any(d < -1e-12) or np.any(np.diff(d) > 1e-12):
            raise InputError("sequence must be nondecreasing and concave")
        object.__setattr__(self, "values", tuple(float(a) for a in v))

    @classmethod
    def truncated(cls, ell: int) -> "ConcaveSequence":
        """phi(k) = min(k, ell)."""
        return cls(tuple(range(ell + 1)) + (ell,))

    @classmethod
    def identity(cls) -> "ConcaveSequence":
        return cls((0.0, 1.0))

    @property
    def last_slope(self) -> float:
        return self.values[-1] - self.values[-2]

    def __call__(self, k):
        v = np.asarray(self.values)
        kk = np.asarray(k)
        top = len(v) - 1
        inside = v[np.clip(kk, 0, top)]
        out = np.where(kk <= top, inside, v[-1] + (kk - top) * self.last_slope)
        return out if out.ndim else float(out)

    def increment(self, k: int) -> float:
        return float(self(k + 1) - self(k))

    def hat(self, lam: float) -> float:
        return concave_ext_1d(self, lam)


def concave_ext_1d(phi: ConcaveSequence, lam: float) -> float:
    """phi(floor(lam)) + (phi(floor(lam)+1) - phi(floor(lam))) * frac(lam)."""
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    k = math.floor(lam)
    return float(phi(k) + phi.increment(k) * (lam - k))


def coverage_function(n: int, support: Iterable[int], phi: ConcaveSequence, weight: float = 1.0) -> SetFunction:
    """f(S) = weight * phi(|S & support|)."""
    if weight < 0:
        raise InputError("weight must be nonnegative")
    smask = to_mask(support, n)
    counts = popcount(all_masks(n) & smask)
    return SetFunction.from_table(weight * np.asarray(phi(counts), dtype=float), True, True)


def concave_ext_lp(f: SetFunction, x, relaxed: bool = False) -> float:
    """Concave extension by the dense LP over distributions on 2^n sets.

    With ``relaxed`` the marginal equalities become inequalities, which gives
    the same value for monotone submodular f.
    """
    from scipy.optimize import linprog

    check_budget(f.n, DENSE_LP_MAX_N, "dense LP")
    x = as_point(x, f.n)
    masks = np.arange(1 << f.n, dtype=np.int64)
    incid = np.array([(masks >> i) & 1 for i in range(f.n)], dtype=float)
    ones = np.ones((1, len(masks)))
    opts = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
    if relaxed:
        res = linprog(-f.table, A_ub=incid, b_ub=x, A_eq=ones, b_eq=[1.0], bounds=(0, None), method="highs", options=opts)
    else:
        res = linprog(-f.table, A_eq=np.vstack([incid, ones]), b_eq=np.append(x, 1.0), bounds=(0, None), method="highs", options=opts)
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    return float(-res.fun)


def concave_ext_vertices(f: SetFunction, x) -> float:
    """Concave extension by enumerating basic solutions of the distribution LP.

    Exact up to rounding; only for tiny ground sets.
    """
    check_budget(f.n, VERTEX_ENUM_MAX_N, "basic-solution enumeration")
    x = as_point(x, f.n)
    n = f.n
    masks = np.arange(1 << n)
    cols = np.array([[(m >> i) & 1 for i in range(n)] + [1] for m in masks], dtype=float)
    rhs = np.append(x, 1.0)
    best = -math.inf
    for basis in itertools.combinations(range(len(masks)), n + 1):
        A = cols[list(basis)].T
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        lam = np.linalg.solve(A, rhs)
        if np.all(lam >= -1e-12):
            best = max(best, float(lam @ f.table[list(basis)]))
    return best


def poisson_binomial(probs: Sequence[float]) -> np.ndarray:
    """Distribution of the number of successes among independent Bernoullis."""
    pmf = np.ones(1)
    for p in probs:
        pmf = np.concatenate([pmf * (1 - p), [0.0]]) + np.concatenate([[0.0], pmf * p])
    return pmf


def multilinear_by_counts(count_value: Callable, block_sizes: Sequence[int], x) -> float:
    """F(x) for a function that depends only on how many elements each block holds.

    ``count_value`` takes one integer array per block (broadcastable) and
    returns the function value. Blocks are consecutive in the coordinate order.
    """
    x = np.asarray(x, dtype=float)
    if x.size != sum(block_sizes):
        raise InputError("point length does not match block sizes")
    pmfs, start = [], 0
    for s in block_sizes:
        pmfs.append(poisson_binomial(x[start : start + s]))
        start += s
    grids = np.meshgrid(*[np.arange(len(p)) for p in pmfs], indexing="ij", sparse=True)
    prob = np.ones(())
    for axis, p in enumerate(pmfs):
        shape = [1] * len(pmfs)
        shape[axis] = len(p)
        prob = prob * p.reshape(shape)
    vals = count_value(*grids)
    return float(np.sum(prob * vals))
