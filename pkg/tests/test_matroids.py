import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from corrgap import (
    CapacityError,
    DirectSum,
    Explicit,
    Free,
    Graphic,
    InputError,
    Partition,
    Uniform,
    UniformPartitionUnion,
    WeightedRank,
    direct_sum,
    from_dict,
    in_polytope,
)
from corrgap.matroids import girth, polytope_scale, rank

K4_EDGES = tuple((a, b) for a in range(4) for b in range(a + 1, 4))
TRIANGLE = ((0, 1), (1, 2), (2, 0))


def _check_table(m, is_indep):
    ref = oracles.rank_from_independence(m.n, is_indep)
    for S, r in ref.items():
        assert m.rank(S) == r
        mask = sum(1 << i for i in S)
        assert m.rank_table[mask] == r


def test_uniform_rank_table():
    _check_table(Uniform(5, 2), lambda S: len(S) <= 2)


def test_partition_rank_table():
    blocks = [range(0, 3), range(3, 5)]
    _check_table(Partition((3, 2), (2, 1)), lambda S: all(len(S & set(b)) <= c for b, c in zip(blocks, (2, 1))))


def test_graphic_rank_table():
    _check_table(Graphic(4, K4_EDGES), oracles.forest(K4_EDGES))


def test_union_rank_table():
    m = UniformPartitionUnion(1, 2, 2)
    # E_0 = {0,1}; blocks {2,3}, {4,5}; a set is independent if after one pick per block
    # at most ell elements remain
    def indep(S):
        spill = len(S & {0, 1})
        for blk in ({2, 3}, {4, 5}):
            spill += max(0, len(S & blk) - 1)
        return spill <= 1

    _check_table(m, indep)
    assert m.rho == 3 and m.gamma == 2


def test_spot_values():
    assert rank(Uniform(4, 2), [0, 1, 2]) == 2
    assert rank(Graphic(3, TRIANGLE), [0, 1, 2]) == 2
    assert girth(Uniform(6, 2)) == 3
    assert girth(Free(3)) == math.inf
    assert girth(Graphic(4, K4_EDGES)) == 3


def test_girth_matches_brute_force():
    for m, indep in [
        (Uniform(5, 3), lambda S: len(S) <= 3),
        (Graphic(4, K4_EDGES), oracles.forest(K4_EDGES)),
        (Partition((2, 3), (1, 2)), lambda S: len(S & {0, 1}) <= 1 and len(S & {2, 3, 4}) <= 2),
    ]:
        assert m.gamma == oracles.girth_brute(m.n, indep)


def test_loops_and_loopless_girth():
    m = Explicit(4, (frozenset({0, 1}), frozenset({0, 2}), frozenset({1, 2})))
    assert m.loops == frozenset({3})
    assert m.gamma == 1
    assert m.loopless_girth() == 3


def test_explicit_rejects_non_matroid():
    with pytest.raises(InputError):
        Explicit(4, (frozenset({0, 1}), frozenset({2, 3})))
    with pytest.raises(InputError):
        Explicit(3, (frozenset({0, 1}), frozenset({2})))


def test_weighted_rank_greedy():
    wr = WeightedRank(Graphic(3, TRIANGLE), [4.0, 5.0, 3.0])
    assert wr([0, 1, 2]) == 9.0
    wr = WeightedRank(Partition((2, 2), (1, 1)), [1.0, 2.0, 1.0, 3.0])
    assert wr.max_weight_independent(range(4)) == frozenset({1, 3})


def test_weighted_rank_ties_by_index():
    wr = WeightedRank(Uniform(3, 1), [1.0, 1.0, 1.0])
    assert wr.max_weight_independent([0, 1, 2]) == frozenset({0})


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=6, max_size=6))
def test_weighted_rank_table_matches_brute(w):
    indep = oracles.forest(K4_EDGES)
    wr = WeightedRank(Graphic(4, K4_EDGES), w)
    for S in itertools.combinations(range(6), 3):
        assert wr(S) == pytest.approx(oracles.weighted_rank_brute(6, indep, w, S), abs=1e-9)
        assert wr.table[sum(1 << i for i in S)] == pytest.approx(wr(S), abs=1e-9)


def test_negative_weights_rejected():
    with pytest.raises(InputError):
        WeightedRank(Uniform(3, 1), [1.0, -1.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.data())
def test_rank_is_submodular_monotone(n, data):
    ell = data.draw(st.integers(0, n))
    r = Uniform(n, ell).rank_table
    masks = np.arange(1 << n)
    for i in range(n):
        base = masks[(masks >> i) & 1 == 0]
        assert np.all(r[base | (1 << i)] >= r[base])
    for a, b in itertools.product(range(1 << n), repeat=2) if n <= 4 else []:
        assert r[a | b] + r[a & b] <= r[a] + r[b]


def test_direct_sum_normalization():
    assert isinstance(direct_sum([Free(2), Free(3)]), Free)
    p = direct_sum([Uniform(3, 1), Partition((2,), (1,))])
    assert isinstance(p, Partition) and p.sizes == (3, 2)
    d = direct_sum([Graphic(3, TRIANGLE), Uniform(2, 1)])
    assert isinstance(d, DirectSum)
    assert d.rank(range(5)) == 3


def test_from_dict_all_types():
    cases = [
        ({"type": "uniform", "n": 8, "rank": 3}, 3),
        ({"type": "partition", "parts": [{"size": 3, "cap": 1}]}, 1),
        ({"type": "graphic", "vertices": 4, "edges": [[0, 1], [1, 2], [2, 0], [0, 3]]}, 3),
        ({"type": "direct_sum", "parts": [{"type": "uniform", "n": 2, "rank": 1}, {"type": "free", "n": 2}]}, 3),
        ({"type": "explicit", "n": 4, "bases": [[0, 1], [0, 2]]}, 2),
        ({"type": "paper_union", "ell": 2, "k": 3, "block": 5}, 5),
    ]
    for d, rho in cases:
        m = from_dict(d)
        assert m.rho == rho
        assert from_dict(m.to_dict()).rho == rho


def test_from_dict_errors():
    with pytest.raises(InputError):
        from_dict({"type": "nope"})
    with pytest.raises(InputError):
        from_dict({"type": "uniform", "n": 3})
    with pytest.raises(InputError):
        from_dict([1, 2])


def test_polytope_membership_and_scale():
    k3 = Graphic(3, TRIANGLE)
    assert in_polytope(k3, [2 / 3] * 3)
    assert not in_polytope(k3, [0.7] * 3)
    assert polytope_scale(k3, [1.0] * 3) == pytest.approx(2 / 3)
    assert polytope_scale(k3, [0.0] * 3) == math.inf


def test_capacity_guard():
    with pytest.raises(CapacityError):
        Uniform(30, 2).rank_table


def test_union_matches_generic_union_rank():
    m = UniformPartitionUnion(2, 1, 3)
    blocks = [set(range(6, 9))]
    n = m.n
    for S in oracles.subsets(n):
        S = set(S)
        best = min(
            min(2, len(T)) + sum(1 for b in blocks if set(T) & b) + len(S - set(T))
            for k in range(len(S) + 1)
            for T in itertools.combinations(sorted(S), k)
        )
        assert m.rank(S) == best


@pytest.mark.parametrize("ell,n", [(1, 3), (2, 5), (3, 4)])
def test_uniform_girth(ell, n):
    assert Uniform(n, ell).gamma == ell + 1


@pytest.mark.parametrize("ell,k,block", [(1, 2, 2), (2, 2, 3), (3, 1, 2)])
def test_union_girth(ell, k, block):
    assert UniformPartitionUnion(ell, k, block).gamma == ell + 1


def test_greedy_matches_brute_on_random_weights():
    rng = np.random.default_rng(5)
    indep = oracles.forest(K4_EDGES)
    for _ in range(100):
        w = rng.random(6)
        wr = WeightedRank(Graphic(4, K4_EDGES), w)
        assert wr(range(6)) == pytest.approx(oracles.weighted_rank_brute(6, indep, w, range(6)), abs=1e-12)
