"""Maximizing sums of weighted matroid ranks and coverage terms under a matroid.

The relaxation maximizes f_tilde(x) = sum_j f_hat_j(x) over P(r) by
conditional gradient, rounds by pipage on the multilinear extension of
f = sum_j f_j, and compares against the brute-force optimum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ._subsets import all_masks, as_point, check_budget, mask_probabilities, popcount, subset_sums
from .bounds import bound_monster, poisson_concavity_ratio
from .errors import InputError
from .extensions import ConcaveSequence, SetFunction, capacitated_greedy, concave_ext_1d, coverage_function
from .matroids import Explicit, Matroid, Partition, Uniform, WeightedRank, from_dict, in_polytope

MAXIMIZE_MAX_N = 12
CERTIFY_MAX_N = 10


@dataclass(frozen=True)
class CoverageTerm:
    """f(S) = weight * phi(|S & support|)."""

    support: tuple[int, ...]
    phi: ConcaveSequence
    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise InputError("coverage weight must be nonnegative")
        if abs(self.phi(0)) > 1e-12:
            raise InputError("coverage phi must satisfy phi(0) = 0")

    def set_function(self, n: int) -> SetFunction:
        return coverage_function(n, self.support, self.phi, self.weight)

    def hat_and_supergradient(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        lam = float(sum(x[i] for i in self.support))
        grad = np.zeros(len(x))
        grad[list(self.support)] = self.weight * self.phi.increment(math.floor(lam))
        return self.weight * concave_ext_1d(self.phi, lam), grad


Objective = Union[WeightedRank, CoverageTerm]


def term_alpha(obj: Objective) -> float:
    """Lower bound on the correlation gap of one objective term."""
    if isinstance(obj, WeightedRank):
        m = obj.matroid
        rho = m.rho
        gamma = m.loopless_girth()
        if rho == 0 or not math.isfinite(gamma):
            return 1.0
        return bound_monster(rho, int(gamma))
    scale = obj.phi(1)
    if scale <= 0:
        return 1.0
    return poisson_concavity_ratio(ConcaveSequence(tuple(v / scale for v in obj.phi.values)))


@dataclass(frozen=True, eq=False)
class CoverageInstance:
    constraint: Matroid
    objectives: tuple[Objective, ...]
    alphas: tuple[float, ...] = field(default=())

    def __post_init__(self):
        n = self.constraint.n
        for obj in self.objectives:
            if isinstance(obj, WeightedRank):
                if obj.n != n:
                    raise InputError("objective ground set differs from the constraint's")
            elif any(not 0 <= i < n for i in obj.support):
                raise InputError("coverage support out of range")
        if not self.alphas:
            object.__setattr__(self, "alphas", tuple(term_alpha(o) for o in self.objectives))

    @property
    def n(self) -> int:
        return self.constraint.n

    @property
    def alpha(self) -> float:
        return min(self.alphas) if self.alphas else 1.0

    def function(self) -> SetFunction:
        total = np.zeros(1 << self.n)
        for obj in self.objectives:
            total = total + (obj.table if isinstance(obj, WeightedRank) else obj.set_function(self.n).table)
        return SetFunction.from_table(total, True, True)

    def tilde(self, x) -> tuple[float, np.ndarray]:
        """f_tilde(x) and a supergradient."""
        x = np.asarray(x, dtype=float)
        value, grad = 0.0, np.zeros(self.n)
        for obj in self.objectives:
            if isinstance(obj, WeightedRank):
                res = capacitated_greedy(obj, x)
                value += res.value
                grad += res.supergradient
            else:
                v, g = obj.hat_and_supergradient(x)
                value += v
                grad += g
        return value, grad


def greedy_vertex(m: Matroid, c: np.ndarray) -> np.ndarray:
    """Indicator of a max-weight independent set for weights c (positives only)."""
    s = np.zeros(m.n)
    chosen: set[int] = set()
    for e in np.lexsort((np.arange(m.n), -c)):
        e = int(e)
        if c[e] <= 0:
            break
        if m._rank_set(frozenset(chosen | {e})) == len(chosen) + 1:
            chosen.add(e)
            s[e] = 1.0
    return s


@dataclass(frozen=True)
class FrankWolfeResult:
    x: np.ndarray
    value: float
    dual_gap: float
    upper_bound: float
    iterations: int


def frank_wolfe(inst: CoverageInstance, iters: int = 2000, tol: float = 1e-6) -> FrankWolfeResult:
    """Conditional-gradient ascent on f_tilde over P(r) with step 2/(k+2).

    The duality gap g.(s - x) bounds the suboptimality of the current iterate;
    the best iterate and the smallest bound seen are reported.
    """
    check_budget(inst.n, MAXIMIZE_MAX_N, "relaxation maximization")
    m = inst.constraint
    x = np.zeros(inst.n)
    best_x, best_v, best_ub = x.copy(), inst.tilde(x)[0], math.inf
    k = 0
    gap = math.inf
    for k in range(iters):
        v, g = inst.tilde(x)
        if v > best_v:
            best_x, best_v = x.copy(), v
        s = greedy_vertex(m, g)
        gap = float(g @ (s - x))
        best_ub = min(best_ub, v + gap)
        if gap < tol:
            break
        x = x + 2.0 / (k + 2.0) * (s - x)
    v = inst.tilde(x)[0]
    if v > best_v:
        best_x, best_v = x.copy(), v
    return FrankWolfeResult(best_x, best_v, gap, best_ub, k + 1)


def maximize_tilde_f(inst: CoverageInstance, iters: int = 2000, tol: float = 1e-6) -> np.ndarray:
    return frank_wolfe(inst, iters, tol).x


def _exchange_capacity(rank: np.ndarray, x: np.ndarray, has: np.ndarray, i: int, j: int | None) -> float:
    """Largest t with x + t e_i (- t e_j) in P(r)."""
    slack = rank - subset_sums(x)
    sel = has[i] if j is None else has[i] & ~has[j]
    cap = float(slack[sel].min())
    cap = min(cap, 1.0 - x[i])
    if j is not None:
        cap = min(cap, x[j])
    return max(cap, 0.0)


def round_solution(inst: CoverageInstance, x, tol: float = 1e-9) -> frozenset[int]:
    """Pipage rounding on the multilinear extension of f within P(r).

    F is monotone, so a fractional coordinate outside every tight set is
    raised. Otherwise the coordinate lies in a tight set that holds another
    fractional coordinate j, and the segment along e_i - e_j is followed to
    the endpoint of larger F; F is convex there, so F never decreases.
    """
    m = inst.constraint
    check_budget(m.n, MAXIMIZE_MAX_N, "pipage rounding")
    x = as_point(x, m.n).copy()
    if not in_polytope(m, x, 1e-7):
        raise InputError("x must lie in P(r)")
    table = inst.function().table
    rank = m.rank_table.astype(float)
    masks = np.arange(1 << m.n, dtype=np.int64)
    has = ((masks[None, :] >> np.arange(m.n)[:, None]) & 1).astype(bool)

    def F(v):
        return float(table @ mask_probabilities(v))

    def snap(v):
        v[v < tol] = 0.0
        v[v > 1 - tol] = 1.0
        return v

    x = snap(x)
    for _ in range(4 * m.n * m.n + 8):
        frac = np.flatnonzero((x > 0) & (x < 1))
        if len(frac) == 0:
            break
        i = int(frac[0])
        up = _exchange_capacity(rank, x, has, i, None)
        if up > tol:
            x[i] += up
            x = snap(x)
            continue
        slack = rank - subset_sums(x)
        tight = has[i] & (slack <= tol)
        mask_t = int(np.bitwise_and.reduce(masks[tight]))
        partners = [int(j) for j in frac if j != i and (mask_t >> int(j)) & 1]
        if not partners:
            x[i] = 0.0 if x[i] < 0.5 else x[i]
            x = snap(x)
            continue
        j = partners[0]
        a = _exchange_capacity(rank, x, has, i, j)
        b = _exchange_capacity(rank, x, has, j, i)
        xa, xb = x.copy(), x.copy()
        xa[i] += a
        xa[j] -= a
        xb[i] -= b
        xb[j] += b
        x = snap(xa if F(xa) >= F(xb) else xb)
    support = [int(i) for i in np.flatnonzero(x > 0.5)]
    chosen: list[int] = []
    for e in support:
        if m._rank_set(frozenset(chosen + [e])) == len(chosen) + 1:
            chosen.append(e)
    return frozenset(chosen)


def brute_force_opt(inst: CoverageInstance) -> tuple[float, frozenset[int]]:
    check_budget(inst.n, CERTIFY_MAX_N, "brute-force optimum")
    t = inst.function().table
    rt = inst.constraint.rank_table
    masks = all_masks(inst.n)
    indep = rt == popcount(masks)
    vals = np.where(indep, t, -np.inf)
    k = int(np.argmax(vals))
    return float(vals[k]), frozenset(i for i in range(inst.n) if (k >> i) & 1)


@dataclass(frozen=True)
class CertifyReport:
    opt: float
    achieved: float
    relaxation: float
    fractional_F: float
    alpha: float
    chosen: frozenset[int]
    passed: bool

    @property
    def ratio(self) -> float:
        return 1.0 if self.opt <= 0 else self.achieved / self.opt

    def to_dict(self) -> dict:
        return {
            "opt": self.opt,
            "achieved": self.achieved,
            "ratio": self.ratio,
            "relaxation": self.relaxation,
            "fractional_F": self.fractional_F,
            "alpha": self.alpha,
            "chosen": sorted(self.chosen),
            "passed": self.passed,
        }


def certify_ratio(inst: CoverageInstance, iters: int = 2000, tol: float = 1e-6) -> CertifyReport:
    """Run relaxation and rounding, then compare with the brute-force optimum."""
    check_budget(inst.n, CERTIFY_MAX_N, "certification")
    opt, _ = brute_force_opt(inst)
    fw = frank_wolfe(inst, iters, tol)
    f = inst.function()
    chosen = round_solution(inst, fw.x)
    achieved = f(chosen)
    frac_F = float(f.table @ mask_probabilities(fw.x))
    alpha = inst.alpha
    return CertifyReport(opt, achieved, fw.value, frac_F, alpha, chosen, achieved >= alpha * opt - 1e-6)


def random_instance(rng: np.random.Generator, n: int, m: int, kind: str = "mixed") -> CoverageInstance:
    """Random desk-scale instance: uniform or partition constraint, rank or coverage terms."""
    if rng.random() < 0.5:
        constraint: Matroid = Uniform(n, int(rng.integers(1, max(2, n // 2) + 1)))
    else:
        cut = int(rng.integers(1, n))
        constraint = Partition((cut, n - cut), (int(rng.integers(1, cut + 1)), int(rng.integers(1, n - cut + 1))))
    objectives: list[Objective] = []
    for _ in range(m):
        support = tuple(int(i) for i in np.flatnonzero(rng.random(n) < 0.5)) or (int(rng.integers(n)),)
        if kind == "coverage" or (kind == "mixed" and rng.random() < 0.5):
            ell = 1 if kind == "coverage" else int(rng.integers(1, 4))
            objectives.append(CoverageTerm(support, ConcaveSequence.truncated(ell), float(rng.uniform(0.5, 2.0))))
        else:
            ell = int(rng.integers(1, len(support) + 1))
            # rank-ell uniform matroid on the support, loops elsewhere
            objectives.append(WeightedRank(_uniform_on(n, support, ell), rng.random(n)))
    return CoverageInstance(constraint, tuple(objectives))


def _uniform_on(n: int, support: Sequence[int], ell: int) -> Matroid:
    bases = tuple(frozenset(c) for c in itertools.combinations(sorted(support), min(ell, len(support))))
    return Explicit(n, bases)


def instance_from_dict(d: dict) -> CoverageInstance:
    try:
        constraint = from_dict(d["constraint"])
        objectives: list[Objective] = []
        for o in d["objectives"]:
            t = o.get("type")
            if t == "weighted_rank":
                mat = from_dict(o["matroid"])
                objectives.append(WeightedRank(mat, o.get("weights")))
            elif t == "coverage":
                objectives.append(CoverageTerm(tuple(int(i) for i in o["support"]), ConcaveSequence(tuple(o["phi"])), float(o.get("weight", 1.0))))
            else:
                raise InputError(f"unknown objective type {t!r}")
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"malformed instance: {exc}") from exc
    return CoverageInstance(constraint, tuple(objectives))
