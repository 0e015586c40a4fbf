import itertools
import math

import numpy as np
import pytest

from corrgap import CapacityError, Graphic, InputError, Partition, Uniform, WeightedRank, in_polytope
from corrgap._subsets import subset_sums
from corrgap.bounds import ONE_MINUS_INV_E, bound_monster, uniform_closed_form
from corrgap.coverage import (
    CoverageInstance,
    CoverageTerm,
    brute_force_opt,
    certify_ratio,
    frank_wolfe,
    greedy_vertex,
    instance_from_dict,
    maximize_tilde_f,
    random_instance,
    round_solution,
    term_alpha,
)
from corrgap.extensions import ConcaveSequence, concave_ext_lp, multilinear_exact

K4_EDGES = tuple((a, b) for a in range(4) for b in range(a + 1, 4))


def _grid_max(inst, steps=5):
    rt = inst.constraint.rank_table
    best = -math.inf
    for x in itertools.product(np.linspace(0, 1, steps), repeat=inst.n):
        x = np.array(x)
        if np.all(subset_sums(x) <= rt + 1e-12):
            best = max(best, inst.tilde(x)[0])
    return best


def test_modular_objective_reaches_max_weight_basis():
    w = np.array([3.0, 1.0, 2.0, 5.0])
    # free matroid weighted rank is modular
    inst = CoverageInstance(Uniform(4, 2), (WeightedRank(Partition((1, 1, 1, 1), (1, 1, 1, 1)), w),))
    x = maximize_tilde_f(inst)
    assert np.allclose(x, [1, 0, 0, 1])
    assert round_solution(inst, x) == frozenset({0, 3})
    rep = certify_ratio(inst)
    assert rep.achieved == rep.opt == 8.0


def test_rank_objective_on_own_matroid_reaches_rank():
    m = Graphic(4, K4_EDGES)
    inst = CoverageInstance(m, (WeightedRank(m),))
    fw = frank_wolfe(inst)
    assert fw.value == pytest.approx(3.0, abs=1e-9)
    assert m.is_independent(round_solution(inst, fw.x))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_frank_wolfe_matches_grid(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 6, 3)
    fw = frank_wolfe(inst)
    assert fw.value >= _grid_max(inst) - 1e-3
    assert fw.value <= fw.upper_bound + 1e-12
    assert in_polytope(inst.constraint, fw.x, 1e-9)


def test_tilde_sandwich():
    rng = np.random.default_rng(4)
    for _ in range(3):
        inst = random_instance(rng, 5, 3)
        f = inst.function()
        for _ in range(200):
            x = rng.random(5)
            F = multilinear_exact(f, x)
            t, _ = inst.tilde(x)
            fh = concave_ext_lp(f, x)
            assert F <= t + 1e-9
            assert t <= fh + 1e-9


def test_rounding_examples():
    # uniform(1,3) constraint with a coverage objective: any singleton beats F at the center
    term = CoverageTerm((0, 1, 2), ConcaveSequence.truncated(1))
    inst = CoverageInstance(Uniform(3, 1), (term,))
    x = np.full(3, 1 / 3)
    S = round_solution(inst, x)
    assert len(S) == 1
    F = multilinear_exact(inst.function(), x)
    for s in range(3):
        assert inst.function()({s}) >= F - 1e-9
    assert inst.function()(S) >= F - 1e-9
    assert round_solution(inst, [0.0, 1.0, 0.0]) == frozenset({1})


def test_rounding_never_decreases_F():
    rng = np.random.default_rng(5)
    for _ in range(30):
        inst = random_instance(rng, int(rng.integers(3, 8)), 3)
        x = maximize_tilde_f(inst, iters=200)
        f = inst.function()
        S = round_solution(inst, x)
        assert inst.constraint.is_independent(S)
        assert f(S) >= multilinear_exact(f, x) - 1e-9


def test_rounding_rejects_infeasible():
    inst = CoverageInstance(Uniform(3, 1), (CoverageTerm((0, 1), ConcaveSequence.truncated(1)),))
    with pytest.raises(InputError):
        round_solution(inst, [0.6, 0.6, 0.0])


def test_alphas():
    assert term_alpha(WeightedRank(Graphic(4, K4_EDGES))) == pytest.approx(bound_monster(3, 3))
    assert term_alpha(CoverageTerm((0,), ConcaveSequence.truncated(2))) == pytest.approx(uniform_closed_form(2), abs=1e-12)
    assert term_alpha(CoverageTerm((0,), ConcaveSequence((0.0, 2.0, 4.0)))) == pytest.approx(1.0)


def test_certify_random_battery():
    rng = np.random.default_rng(42)
    for _ in range(10):
        rep = certify_ratio(random_instance(rng, int(rng.integers(3, 9)), int(rng.integers(1, 5))))
        assert rep.passed, rep.to_dict()


def test_max_coverage_ratio():
    rng = np.random.default_rng(8)
    for _ in range(5):
        rep = certify_ratio(random_instance(rng, 8, 4, kind="coverage"))
        assert rep.ratio >= ONE_MINUS_INV_E


def test_multicoverage_ell2():
    rng = np.random.default_rng(9)
    for _ in range(5):
        n = 7
        terms = tuple(
            CoverageTerm(tuple(np.flatnonzero(rng.random(n) < 0.5).tolist()) or (0,), ConcaveSequence.truncated(2))
            for _ in range(3)
        )
        rep = certify_ratio(CoverageInstance(Uniform(n, 3), terms))
        assert rep.ratio >= 1 - 2 * math.exp(-2)


def test_brute_force_opt():
    inst = CoverageInstance(Partition((2, 2), (1, 1)), (CoverageTerm((0, 1, 2), ConcaveSequence.identity()),))
    opt, S = brute_force_opt(inst)
    assert opt == 2.0 and len(S & {0, 1}) == 1 and 2 in S


def test_greedy_vertex_skips_nonpositive():
    assert list(greedy_vertex(Uniform(3, 2), np.array([0.0, -1.0, 2.0]))) == [0.0, 0.0, 1.0]


def test_instance_json_roundtrip():
    d = {
        "constraint": {"type": "uniform", "n": 4, "rank": 2},
        "objectives": [
            {"type": "weighted_rank", "matroid": {"type": "uniform", "n": 4, "rank": 1}, "weights": [1, 2, 3, 4]},
            {"type": "coverage", "support": [0, 2], "phi": [0, 1, 1], "weight": 2.0},
        ],
    }
    inst = instance_from_dict(d)
    assert inst.n == 4 and len(inst.objectives) == 2
    with pytest.raises(InputError):
        instance_from_dict({"constraint": {"type": "uniform", "n": 4, "rank": 2}, "objectives": [{"type": "x"}]})
    with pytest.raises(InputError):
        instance_from_dict({"objectives": []})


def test_validation_and_capacity():
    with pytest.raises(InputError):
        CoverageInstance(Uniform(3, 1), (CoverageTerm((5,), ConcaveSequence.identity()),))
    with pytest.raises(InputError):
        CoverageTerm((0,), ConcaveSequence.identity(), weight=-1.0)
    big = CoverageInstance(Uniform(11, 2), (CoverageTerm((0,), ConcaveSequence.identity()),))
    with pytest.raises(CapacityError):
        certify_ratio(big)
