"""Numerical search for the correlation gap of weighted matroid ranks.

The ratio F(x)/f_hat(x) is minimized over P(r), where f_hat(x) = w.x. Each
local search uses two move types, both with exact line minimization:

* single coordinate: F is linear in x_i, so the ratio is a linear fraction and
  its minimum over the feasible interval sits at an endpoint;
* exchange e_i - e_j: F is quadratic in the step (curvature -H_ij) and the
  denominator is linear, so the stationary points solve a quadratic.

A final pass moves the best point onto a minimizer whose support is tight,
x(E) = r(supp x), without increasing the ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ._subsets import as_point, check_budget, mask_probabilities, popcount, subset_sums
from .errors import InputError
from .extensions import (
    SetFunction,
    concave_ext_lp,
    concave_ext_vertices,
    concave_ext_weighted_rank,
    multilinear_exact,
    VERTEX_ENUM_MAX_N,
)
from .matroids import Matroid, WeightedRank, polytope_scale

SEARCH_MAX_N = 16
_EPS = 1e-12


@dataclass(frozen=True)
class GapEstimate:
    x_star: np.ndarray
    ratio: float
    restarts_used: int
    converged: bool
    support_tightness: float

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "x_star": [float(v) for v in self.x_star],
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "support_tightness": self.support_tightness,
        }


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > _EPS, num / np.where(den > _EPS, den, 1.0), 1.0)
    return out


def ratio_at(wr: WeightedRank, x) -> float:
    """F_w(x) / f_hat_w(x) with 0/0 = 1."""
    x = as_point(x, wr.n)
    num = multilinear_exact(wr, x)
    den = concave_ext_weighted_rank(wr, x)
    if den <= _EPS:
        return 1.0
    return num / den


def ratio_at_function(f: SetFunction, x) -> float:
    """F(x) / f_hat(x) for a general set function, 0/0 = 1."""
    x = as_point(x, f.n)
    num = multilinear_exact(f, x)
    den = concave_ext_vertices(f, x) if f.n <= VERTEX_ENUM_MAX_N else concave_ext_lp(f, x)
    if abs(den) <= _EPS and abs(num) <= _EPS:
        return 1.0
    return num / den


def connected_components(m: Matroid) -> list[list[int]]:
    """Elements sharing a circuit are joined; loops are singleton components."""
    rt = m.rank_table
    masks = np.arange(len(rt), dtype=np.int64)
    sizes = popcount(masks)
    dep = rt < sizes
    circuit = dep.copy()
    for i in range(m.n):
        has = (masks >> i) & 1 == 1
        circuit[has] &= ~dep[masks[has] ^ (1 << i)]
    parent = list(range(m.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for c in masks[circuit]:
        elems = [i for i in range(m.n) if (int(c) >> i) & 1]
        for e in elems[1:]:
            parent[find(e)] = find(elems[0])
    comps: dict[int, list[int]] = {}
    for i in range(m.n):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values())


@dataclass
class _Searcher:
    wr: WeightedRank
    tol: float
    max_moves: int
    table: np.ndarray = field(init=False)
    rank: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.wr.n
        self.n = n
        self.table = self.wr.table
        self.rank = self.wr.matroid.rank_table.astype(float)
        self.w = self.wr.weights
        masks = np.arange(1 << n, dtype=np.int64)
        t = self.table
        self.grad_rows = np.stack([t[masks | (1 << i)] - t[masks & ~(1 << i)] for i in range(n)]) if n else np.zeros((0, 1))
        self.has = ((masks[None, :] >> np.arange(n)[:, None]) & 1).astype(bool)
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        if self.pairs:
            self.hess_rows = np.stack(
                [
                    t[masks | (1 << i) | (1 << j)]
                    - t[(masks | (1 << i)) & ~(1 << j)]
                    - t[(masks | (1 << j)) & ~(1 << i)]
                    + t[masks & ~(1 << i) & ~(1 << j)]
                    for i, j in self.pairs
                ]
            )
        else:
            self.hess_rows = np.zeros((0, 1 << n))
        self.grad_rows = sparse.csr_matrix(self.grad_rows)
        self.hess_rows = sparse.csr_matrix(self.hess_rows)
        self.pair_i = np.array([i for i, _ in self.pairs], dtype=np.int64)
        self.pair_j = np.array([j for _, j in self.pairs], dtype=np.int64)

    def ratio(self, x) -> float:
        p = mask_probabilities(x)
        return float(_safe_ratio(self.table @ p, self.w @ x))

    def slack(self, x) -> np.ndarray:
        return self.rank - subset_sums(x)

    def caps(self, slack, single_bound, pair_bound) -> tuple[np.ndarray, np.ndarray]:
        """Exchange capacities from the sets of smallest slack.

        ``single[i]`` is the min slack over sets containing i and
        ``pair[i, j]`` the min over sets containing i but not j. Only the K
        tightest sets are scanned; entries they do not settle are computed
        exactly when the bound could actually bind.
        """
        n = self.n
        K = min(len(slack), 2048)
        idx = np.argpartition(slack, K - 1)[:K]
        idx = idx[np.argsort(slack[idx], kind="stable")]
        vals = slack[idx]
        kth = vals[-1]
        bits = ((idx[:, None] >> np.arange(n)) & 1).astype(bool)
        s_found = bits.any(axis=0)
        single = np.where(s_found, vals[bits.argmax(axis=0)], np.inf)
        hit = bits[:, :, None] & ~bits[:, None, :]
        p_found = hit.any(axis=0)
        pair = np.where(p_found, vals[hit.argmax(axis=0)], np.inf)
        for i in np.flatnonzero(~s_found & (kth < single_bound)):
            single[i] = slack[self.has[i]].min()
        need = ~p_found & (kth < pair_bound)
        np.fill_diagonal(need, False)
        for i, j in zip(*np.nonzero(need)):
            pair[i, j] = slack[self.has[i] & ~self.has[j]].min()
        return single, pair

    def local_search(self, x) -> tuple[np.ndarray, float, bool]:
        n = self.n
        x = x.copy()
        w = self.w
        for _ in range(self.max_moves):
            p = mask_probabilities(x)
            F = float(self.table @ p)
            L = float(w @ x)
            R = float(_safe_ratio(F, L))
            g = self.grad_rows @ p
            slack = np.maximum(self.slack(x), 0.0)
            best_r, best_x = R, None

            single, pair = self.caps(slack, 1.0 - x, np.minimum(x[None, :], 1.0 - x[:, None]))
            up = np.minimum(single, 1.0 - x)
            for s in (-x, up):
                cand = _safe_ratio(F + s * g, L + s * w)
                k = int(np.argmin(cand))
                if cand[k] < best_r and abs(s[k]) > _EPS:
                    best_r = float(cand[k])
                    best_x = x.copy()
                    best_x[k] += s[k]

            if self.pairs:
                H = np.zeros((n, n))
                hv = self.hess_rows @ p
                H[self.pair_i, self.pair_j] = hv
                H[self.pair_j, self.pair_i] = hv
                cap = np.minimum(pair, np.minimum(x[None, :], 1.0 - x[:, None]))
                np.fill_diagonal(cap, 0.0)
                b = g[:, None] - g[None, :]
                c = -H
                e = w[:, None] - w[None, :]
                cands = [cap]
                qa, qb, qc = c * e, 2 * c * L, b * L - F * e
                with np.errstate(divide="ignore", invalid="ignore"):
                    disc = np.sqrt(np.maximum(qb * qb - 4 * qa * qc, 0.0))
                    lin = np.where(np.abs(qb) > _EPS, -qc / np.where(np.abs(qb) > _EPS, qb, 1.0), np.nan)
                    r1 = np.where(np.abs(qa) > _EPS, (-qb + disc) / (2 * np.where(np.abs(qa) > _EPS, qa, 1.0)), lin)
                    r2 = np.where(np.abs(qa) > _EPS, (-qb - disc) / (2 * np.where(np.abs(qa) > _EPS, qa, 1.0)), lin)
                for r in (r1, r2):
                    ok = np.isfinite(r) & (r > _EPS) & (r < cap)
                    cands.append(np.where(ok, r, 0.0))
                for tt in cands:
                    vals = _safe_ratio(F + tt * b + tt * tt * c, L + tt * e)
                    vals = np.where(tt > _EPS, vals, np.inf)
                    k = int(np.argmin(vals))
                    if vals.flat[k] < best_r:
                        i, j = divmod(k, n)
                        best_r = float(vals.flat[k])
                        best_x = x.copy()
                        best_x[i] += tt[i, j]
                        best_x[j] -= tt[i, j]

            if best_x is None or R - best_r <= self.tol * max(R, _EPS):
                return x, R, True
            x = np.clip(best_x, 0.0, 1.0)
            x[np.abs(x) < 1e-13] = 0.0
        return x, self.ratio(x), False

    def tighten(self, x) -> np.ndarray:
        """Move to a point of no larger ratio with x(E) = r(supp x)."""
        n = self.n
        x = x.copy()
        for _ in range(4 * n * n + 4):
            supp = x > _EPS
            smask = int(sum(1 << i for i in range(n) if supp[i]))
            if x.sum() >= self.rank[smask] - 1e-9:
                return x
            slack = np.maximum(self.slack(x), 0.0)
            caps = np.minimum(self.caps(slack, 1.0 - x, np.zeros((n, n)))[0], 1.0 - x)
            cand = [j for j in range(n) if supp[j] and caps[j] > 1e-12]
            if not cand:
                return x
            j = cand[0]
            lo, hi = x.copy(), x.copy()
            lo[j] = 0.0
            hi[j] = x[j] + caps[j]
            x = lo if self.ratio(lo) <= self.ratio(hi) + 1e-15 else hi
        return x


def _starts(wr: WeightedRank, restarts: int, rng: np.random.Generator):
    m = wr.matroid
    n = m.n

    def project(v):
        v = np.asarray(v, dtype=float)
        alpha = polytope_scale(m, v)
        if not math.isfinite(alpha):
            return None
        return np.clip(alpha * v, 0.0, 1.0)

    for lam in range(1, m.rho + 1):
        yield project(np.full(n, lam / n))
    comps = connected_components(m)
    if len(comps) > 1:
        for comp in comps:
            rc = m.rank(comp)
            for lam in range(1, rc + 1):
                v = np.zeros(n)
                v[comp] = lam / len(comp)
                yield project(v)
    for k in range(restarts):
        if k % 2 == 0:
            v = rng.random(n) * (rng.random(n) < rng.uniform(0.3, 1.0))
        else:
            subset = rng.random(n) < rng.uniform(0.2, 1.0)
            v = subset.astype(float)
        yield project(v)


def gap_search(wr: WeightedRank, restarts: int = 64, seed: int = 42, tol: float = 1e-7, max_moves: int = 400) -> GapEstimate:
    """Multi-start minimization of F_w(x)/(w.x) over P(r)."""
    check_budget(wr.n, SEARCH_MAX_N, "gap search")
    if restarts < 0:
        raise InputError("restarts must be >= 0")
    n = wr.n
    if n == 0 or wr.matroid.rho == 0:
        return GapEstimate(np.zeros(n), 1.0, 0, True, 0.0)
    search = _Searcher(wr, tol, max_moves)
    rng = np.random.default_rng(seed)
    best_x, best_r = np.zeros(n), 1.0
    used = 0
    all_converged = True
    for start in _starts(wr, restarts, rng):
        if start is None or not start.any():
            continue
        used += 1
        x, r, conv = search.local_search(start)
        all_converged &= conv
        if r < best_r - 1e-15:
            best_x, best_r = x, r
    best_x = search.tighten(best_x)
    best_r = min(best_r, search.ratio(best_x)) if best_x.any() else best_r
    supp = int(sum(1 << i for i in range(n) if best_x[i] > _EPS))
    tight = abs(float(best_x.sum()) - float(search.rank[supp]))
    return GapEstimate(best_x, float(search.ratio(best_x)) if best_x.any() else 1.0, used, bool(all_converged and tight <= 1e-6), tight)


@dataclass(frozen=True)
class WeightedCheckReport:
    unweighted_ratio: float
    margins: tuple[float, ...]
    min_margin: float
    passed: bool


def weighted_vs_uniform_check(m: Matroid, trials: int = 20, seed: int = 42, restarts: int = 16, tol: float = 1e-6) -> WeightedCheckReport:
    """Compare the gap under random weights with the gap under uniform weights."""
    check_budget(m.n, SEARCH_MAX_N, "weighted check")
    base = gap_search(WeightedRank(m), restarts=restarts, seed=seed).ratio
    rng = np.random.default_rng(seed)
    margins = []
    for t in range(trials):
        w = rng.random(m.n)
        est = gap_search(WeightedRank(m, w), restarts=restarts, seed=seed + t + 1)
        margins.append(est.ratio - base)
    mn = min(margins) if margins else math.inf
    return WeightedCheckReport(base, tuple(margins), mn, mn >= -tol)


def unattained_fixture(epsilon: float) -> SetFunction:
    """f(empty)=0, f({1})=f({2})=eps, f({1,2})=1; its correlation gap 2*eps is not attained."""
    if not 0 < epsilon < 0.5:
        raise InputError("epsilon must lie in (0, 1/2)")
    return SetFunction.from_table([0.0, epsilon, epsilon, 1.0], monotone=True)


def unattained_fixture_rotated(epsilon: float) -> SetFunction:
    """g(empty)=eps, g({1})=0, g({2})=1, g({1,2})=eps; nonmonotone companion."""
    if not 0 < epsilon < 0.5:
        raise InputError("epsilon must lie in (0, 1/2)")
    return SetFunction.from_table([epsilon, 0.0, 1.0, epsilon])


def unattained_diagonal_ratio(epsilon: float, alpha: float) -> float:
    return 2 * epsilon + (1 - 2 * epsilon) * alpha


def cube_search(f: SetFunction, resolution: int = 25, floor: float = 1e-4) -> tuple[float, np.ndarray]:
    """Grid minimum of F/f_hat over the cube minus the origin.

    The grid mixes a uniform and a log-spaced axis so that the search can
    approach the origin, where non-attained infima live.
    """
    if f.n > 3:
        raise InputError("cube search is meant for n <= 3")
    axis = np.union1d(np.linspace(0.0, 1.0, resolution), np.geomspace(floor, 1.0, resolution))
    grids = np.meshgrid(*([axis] * f.n), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    best, arg = math.inf, None
    for x in pts:
        if not x.any():
            continue
        r = ratio_at_function(f, x)
        if r < best:
            best, arg = r, x
    return best, arg
