"""Verification suites behind ``corrgap verify``.

Every check returns a :class:`Check`; suites are lists of checks sorted by id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds, clock, coverage, extensions, gap, identities
from .errors import InputError
from .matroids import Graphic, Matroid, Partition, Uniform, UniformPartitionUnion, WeightedRank, direct_sum, polytope_scale

DEFAULT_SEED = 42


@dataclass(frozen=True)
class Check:
    id: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.id}: {self.detail}"


def battery() -> dict[str, Matroid]:
    """The five reference matroids used across the suites."""
    k4 = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    return {
        "uniform(2,6)": Uniform(6, 2),
        "partition(3x3,cap1)": Partition((3, 3, 3), (1, 1, 1)),
        "graphic(K4)": Graphic(4, tuple(k4)),
        "union(2,2,4)": UniformPartitionUnion(2, 2, 4),
        "uniform(2,5)+free(2)": direct_sum([Uniform(5, 2), Uniform(2, 2)]),
    }


def random_polytope_point(m: Matroid, rng: np.random.Generator) -> np.ndarray:
    """Random point of P(r): a sparse random direction scaled onto the boundary, then shrunk."""
    while True:
        v = rng.random(m.n) * (rng.random(m.n) < rng.uniform(0.3, 1.0))
        if v.any():
            break
    a = min(polytope_scale(m, v), 1.0 / v.max())
    return np.clip(v * a * rng.uniform(0.05, 1.0) ** 0.25, 0.0, 1.0)


def _f_hat(m: Matroid, x: np.ndarray) -> float:
    return extensions.concave_ext_weighted_rank(WeightedRank(m), x)


def _F(m: Matroid, x: np.ndarray) -> float:
    if isinstance(m, UniformPartitionUnion):
        return extensions.multilinear_by_counts(lambda c0, *cs: m.count_rank(c0, cs), m.block_sizes, x)
    return extensions.multilinear_exact(m, x)


# identities


def suite_identities(seed: int = DEFAULT_SEED) -> list[Check]:
    reports = [identities.check_binom_single()] + identities.check_binom_suite() + identities.check_sign_claims()
    return [Check(f"identities.{r.claim}", r.passed, f"[{r.swept}] max violation {r.violation:g}") for r in reports]


# monotonicity and closed forms


def bound_grid(rho_max: int = 30, gamma_max: int | None = None) -> list[tuple[int, int, float]]:
    rows = []
    for rho in range(1, rho_max + 1):
        top = rho + 1 if gamma_max is None else min(rho + 1, gamma_max)
        for gamma in range(2, top + 1):
            rows.append((rho, gamma, bounds.bound_monster(rho, gamma)))
    return rows


def grid_shape(rows) -> tuple[float, float, float]:
    """Worst violations: rise along rho at fixed gamma, drop along gamma at fixed rho, gamma=2 drift."""
    table = {(r, g): b for r, g, b in rows}
    rise = drop = drift = 0.0
    for (r, g), b in table.items():
        if (r + 1, g) in table:
            rise = max(rise, table[(r + 1, g)] - b)
        if (r, g + 1) in table:
            drop = max(drop, b - table[(r, g + 1)])
        if g == 2:
            drift = max(drift, abs(b - bounds.ONE_MINUS_INV_E))
    return rise, drop, drift


def check_g_sum_decreasing(ell_max: int = 10, span: int = 30) -> Check:
    worst = -math.inf
    for ell in range(2, ell_max + 1):
        for lam in range(ell, ell + span):
            worst = max(worst, bounds.g_sum(lam + 1, ell) - bounds.g_sum(lam, ell))
    return Check("monotonicity.g-sum-decreasing", worst < 0, f"2<=ell<={ell_max}, max step {worst:.3g}")


def check_zeta_increasing(rho_max: int = 30) -> Check:
    worst = math.inf
    for rho in range(1, rho_max + 1):
        for gamma in range(2, rho + 1):
            worst = min(worst, bounds.zeta_sum(rho, gamma + 1) - bounds.zeta_sum(rho, gamma))
    return Check("monotonicity.zeta-increasing", worst >= -1e-12, f"rho<={rho_max}, min step {worst:.3g}")


def check_uniform_identity(ell_max: int = 20) -> Check:
    err = max(abs(bounds.bound_monster(ell, ell + 1) - bounds.uniform_closed_form(ell)) for ell in range(1, ell_max + 1))
    return Check("monotonicity.uniform-identity", err <= 1e-10, f"1<=ell<={ell_max}, max error {err:.3g}")


def check_strictness(rho_max: int = 30) -> Check:
    worst, arg = math.inf, None
    for rho in range(2, rho_max + 1):
        for gamma in range(3, rho + 2):
            v = bounds.bound_excess(rho, gamma)
            if v < worst:
                worst, arg = v, (rho, gamma)
    return Check("monotonicity.strictness", worst >= 1e-12, f"min excess {worst:.3g} at (rho,gamma)={arg}, threshold 1e-12")


def check_theta(lambda_max: int = 50) -> list[Check]:
    names = {"poisson-cdf": "theta-at-mean", "gamma-convex": "theta-convex"}
    return [
        Check(f"monotonicity.{names[r.claim]}", r.passed, f"[{r.swept}] max violation {r.violation:g}")
        for r in identities.check_sign_claims(lambda_max)
        if r.claim in names
    ]


def check_grid_shape(rho_max: int = 30) -> Check:
    rise, drop, drift = grid_shape(bound_grid(rho_max))
    ok = rise <= 0 and drop <= 0 and drift <= 1e-15
    return Check("monotonicity.grid-shape", ok, f"rho<={rho_max}: max rise {rise:.3g}, max drop {drop:.3g}, gamma=2 drift {drift:.3g}")


def suite_monotonicity(seed: int = DEFAULT_SEED) -> list[Check]:
    return [
        check_g_sum_decreasing(),
        check_zeta_increasing(),
        check_uniform_identity(),
        check_strictness(),
        check_grid_shape(),
        *check_theta(),
    ]


# gap search


def check_uniform_gaps(seed: int = DEFAULT_SEED, sizes=(2, 4, 8, 16)) -> list[Check]:
    out = []
    for n in sizes:
        est = gap.gap_search(WeightedRank(Uniform(n, 1)), seed=seed)
        target = bounds.uniform_finite_gap(n)
        err = abs(est.ratio - target)
        out.append(Check(f"gap.uniform(1,{n:02d})", err <= 1e-4, f"ratio {est.ratio:.8f} vs {target:.8f}"))
    return out


def check_universal_bound(seed: int = DEFAULT_SEED, points: int = 1000) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for name, m in battery().items():
        lb = bounds.bound_monster(m.rho, int(m.gamma))
        worst = math.inf
        for _ in range(points):
            x = random_polytope_point(m, rng)
            worst = min(worst, _F(m, x) / _f_hat(m, x))
        out.append(Check(f"gap.universal-bound.{name}", worst >= lb - 1e-9, f"min F/f_hat {worst:.6f} vs bound {lb:.6f}"))
    return out


def suite_weighted(seed: int = DEFAULT_SEED, trials: int = 20, restarts: int = 16) -> list[Check]:
    out = []
    for name, m in battery().items():
        rep = gap.weighted_vs_uniform_check(m, trials=trials, seed=seed, restarts=restarts)
        out.append(Check(f"weighted.{name}", rep.passed, f"unweighted {rep.unweighted_ratio:.6f}, min margin {rep.min_margin:.3g} over {trials} weights"))
    return out


def suite_direct_sum(seed: int = DEFAULT_SEED, pairs: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for p in range(pairs):
        parts = []
        for _ in range(2):
            n = int(rng.integers(2, 7))
            parts.append(Uniform(n, int(rng.integers(1, n))) if rng.random() < 0.5 else _random_partition(rng, n))
        cg = [gap.gap_search(WeightedRank(m), seed=seed).ratio for m in parts]
        whole = gap.gap_search(WeightedRank(direct_sum(parts)), seed=seed).ratio
        diff = abs(whole - min(cg))
        out.append(Check(f"direct-sum.pair{p}", diff <= 1e-4, f"CG(sum) {whole:.6f}, min parts {min(cg):.6f}, diff {diff:.2g}"))
    return out


def _random_partition(rng: np.random.Generator, n: int) -> Partition:
    cut = int(rng.integers(1, n)) if n > 1 else 1
    sizes = (cut, n - cut) if cut < n else (n,)
    return Partition(sizes, tuple(int(rng.integers(1, max(s, 2))) for s in sizes))


def check_unattained(epsilon: float = 0.1) -> list[Check]:
    f = gap.unattained_fixture(epsilon)
    err = 0.0
    for a in np.linspace(0.0, 1.0, 101)[1:]:
        x = np.array([a, a])
        err = max(err, abs(gap.ratio_at_function(f, x) - gap.unattained_diagonal_ratio(epsilon, a)))
    inf_est, _ = gap.cube_search(f)
    at0 = gap.ratio_at_function(f, np.zeros(2))
    return [
        Check("gap.unattained-diagonal", err <= 1e-12, f"eps={epsilon}, max diagonal error {err:.3g}"),
        Check("gap.unattained-infimum", inf_est <= 2 * epsilon + 1e-3 and at0 == 1.0, f"infimum estimate {inf_est:.6f}, ratio at origin {at0}"),
    ]


# clock


def clock_instances() -> dict[str, tuple[Matroid, np.ndarray]]:
    b = battery()
    return {
        "partition(3x3,cap1)": (b["partition(3x3,cap1)"], np.full(9, 0.3)),
        "graphic(K4)": (b["graphic(K4)"], np.full(6, 0.45)),
        "uniform(2,5)+free(2)": (b["uniform(2,5)+free(2)"], np.array([0.35, 0.35, 0.35, 0.35, 0.35, 0.9, 0.9])),
    }


def kolmogorov_distance(x, ell: int, traces: int, seed: int) -> float:
    _, T = clock.simulate_clock_batch(x, ell, traces, seed)
    T = np.sort(T[np.isfinite(T)])
    cdf = np.asarray(clock.activation_cdf(x, ell, T), dtype=float)
    k = np.arange(1, len(T) + 1) / traces
    return float(max(np.max(np.abs(cdf - k)), np.max(np.abs(cdf - (k - 1.0 / traces)))))


def suite_clock(seed: int = DEFAULT_SEED, samples: int = 1_000_000) -> list[Check]:
    out = []
    for i, (name, (m, x)) in enumerate(clock_instances().items()):
        rep = clock.clock_lower_bound_check(m, x, traces=samples, seed=seed + i)
        out.append(
            Check(
                f"clock.expectation.{name}",
                rep.passed,
                f"MC {rep.h_estimate:.5f} +- {rep.h_stderr:.1e}, exact {rep.h_exact:.5f}, bound {rep.h_lower_bound:.5f}",
            )
        )
        ell = int(m.gamma) - 1
        ks = kolmogorov_distance(x, ell, 100_000, seed + 100 + i)
        out.append(Check(f"clock.activation-cdf.{name}", ks < 0.01, f"Kolmogorov distance {ks:.4f} at 1e5 traces"))
    return out


# psi machinery and pipage


def check_psi(seed: int = DEFAULT_SEED, trials: int = 60) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_dd = -math.inf
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        ell = int(rng.integers(1, n + 1))
        x = rng.uniform(0.05, 0.95, n)
        a, b = rng.choice(n, 2, replace=False)
        worst_dd = max(worst_dd, clock.psi_directional_concavity(x, ell, int(a), int(b)))
    agree = 0.0
    for lam in range(2, 16):
        for ell in range(1, lam):
            sub = clock.psi_eval(np.ones(lam), ell)
            agree = max(agree, abs(sub - clock.psi_integral_closed(lam, ell)), abs(sub - clock.psi_integral_w(lam, ell)))
    deriv_bad = 0
    for lam in range(2, 16):
        for ell in range(2, lam + 1):
            lhs = clock.poly_derivative(clock.w_poly(lam, ell))
            rhs = [lam * c for c in clock.w_poly(lam - 1, ell - 1)]
            deriv_bad += lhs != rhs
    return [
        Check("pipage.psi-concave", worst_dd <= 1e-6, f"max directional second difference {worst_dd:.3g}"),
        Check("pipage.psi-summation", agree <= 1e-8, f"subset sum vs closed forms, max gap {agree:.3g}"),
        Check("pipage.w-derivative", deriv_bad == 0, f"lam<=15, {deriv_bad} mismatches"),
    ]


def check_pipage(seed: int = DEFAULT_SEED, pairs: int = 100) -> Check:
    rng = np.random.default_rng(seed)
    worst_rise = -math.inf
    worst_sum = 0.0
    nonbinary = 0
    for _ in range(pairs):
        n = int(rng.integers(2, 9))
        ell = int(rng.integers(1, n + 1))
        k = int(rng.integers(1, n))
        y = rng.random(n)
        y = _fix_sum(y, k)
        f: Callable = lambda v, ell=ell: clock.psi_eval(v, ell)  # noqa: E731
        z = clock.pipage_round(f, y)
        nonbinary += int(np.any((z != 0) & (z != 1)))
        worst_sum = max(worst_sum, abs(z.sum() - y.sum()))
        worst_rise = max(worst_rise, f(z) - f(y))
    ok = nonbinary == 0 and worst_sum <= 1e-9 and worst_rise <= 1e-9
    return Check("pipage.rounding", ok, f"{pairs} pairs: nonbinary {nonbinary}, sum drift {worst_sum:.2g}, max rise {worst_rise:.3g}")


def _fix_sum(y: np.ndarray, k: int) -> np.ndarray:
    """Rescale into the cube so the coordinates sum to the integer k."""
    lo, hi = 0.0, 1e6
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.minimum(y * mid, 1.0).sum() < k:
            lo = mid
        else:
            hi = mid
    z = np.minimum(y * hi, 1.0)
    z[np.argmax(z < 1)] += k - z.sum()
    return np.clip(z, 0.0, 1.0)


def union_construction_point(m: UniformPartitionUnion) -> np.ndarray:
    """Ones on ell elements of E_0, zeros on the rest of E_0, 1/block on every partition block."""
    x = np.full(m.n, 1.0 / m.block)
    x[: m.ell * m.block] = 0.0
    x[: m.ell] = 1.0
    return x


def check_union_construction(ell: int = 2, k: int = 2, n: int = 4) -> list[Check]:
    m = UniformPartitionUnion(ell, k, n)
    exact = _F(m, union_construction_point(m))
    target = bounds.union_construction_value(ell, k, n)
    return [Check("extensions.union-construction", abs(exact - target) <= 1e-12, f"F {exact:.15f} vs {target:.15f}")]


def suite_pipage(seed: int = DEFAULT_SEED) -> list[Check]:
    return [*check_psi(seed), check_pipage(seed)]


# extensions


def suite_extensions(seed: int = DEFAULT_SEED, points: int = 50) -> list[Check]:
    rng = np.random.default_rng(seed)
    lp_err = 0.0
    order_bad = 0.0
    for _ in range(points):
        n = int(rng.integers(2, 7))
        m = Uniform(n, int(rng.integers(1, n + 1))) if rng.random() < 0.5 else _random_partition(rng, n)
        wr = WeightedRank(m, rng.random(n))
        x = rng.random(n)
        f = extensions.SetFunction.from_weighted_rank(wr)
        greedy = extensions.concave_ext_weighted_rank(wr, x)
        lp_err = max(lp_err, abs(greedy - extensions.concave_ext_lp(f, x)))
        order_bad = max(order_bad, extensions.multilinear_exact(f, x) - greedy)
    return [
        Check("extensions.greedy-vs-lp", lp_err <= 1e-8, f"{points} points, max gap {lp_err:.3g}"),
        Check("extensions.F-below-f_hat", order_bad <= 1e-9, f"max F - f_hat {order_bad:.3g}"),
        *check_union_construction(),
    ]


# coverage


def suite_coverage(seed: int = DEFAULT_SEED, instances: int = 20) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(instances):
        inst = coverage.random_instance(rng, int(rng.integers(3, 9)), int(rng.integers(1, 5)))
        rep = coverage.certify_ratio(inst)
        out.append(Check(f"coverage.random{k:02d}", rep.passed, f"n={inst.n}, ratio {rep.ratio:.4f} vs alpha {rep.alpha:.4f}"))
    worst = math.inf
    for _ in range(5):
        inst = coverage.random_instance(rng, int(rng.integers(4, 9)), 4, kind="coverage")
        worst = min(worst, coverage.certify_ratio(inst).ratio)
    out.append(Check("coverage.max-coverage", worst >= bounds.ONE_MINUS_INV_E - 1e-6, f"min ratio {worst:.4f}"))
    return out


SUITES: dict[str, Callable[..., list[Check]]] = {
    "identities": suite_identities,
    "monotonicity": suite_monotonicity,
    "weighted": suite_weighted,
    "clock": suite_clock,
    "pipage": suite_pipage,
    "extensions": suite_extensions,
    "direct-sum": suite_direct_sum,
    "coverage": suite_coverage,
}


def _suite_gap(seed: int = DEFAULT_SEED) -> list[Check]:
    return [*check_uniform_gaps(seed), *check_universal_bound(seed), *check_unattained()]


def run_suite(name: str, seed: int = DEFAULT_SEED, samples: int | None = None) -> list[Check]:
    if name == "all":
        checks = [c for n in SUITES for c in run_suite(n, seed, samples)] + _suite_gap(seed)
    elif name not in SUITES:
        raise InputError(f"unknown suite {name!r}; choose from {', '.join([*SUITES, 'all'])}")
    elif name == "clock" and samples is not None:
        checks = suite_clock(seed, samples)
    else:
        checks = SUITES[name](seed)
    return sorted(checks, key=lambda c: c.id)
