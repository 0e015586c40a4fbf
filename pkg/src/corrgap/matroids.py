"""Matroid representations with rank, girth and weighted-rank oracles.

Every matroid exposes a scalar rank on arbitrary subsets and a vectorized
rank table over all 2**n masks for desk-scale enumeration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._subsets import all_masks, as_point, check_budget, mask_to_set, popcount, subset_sums, to_mask
from .errors import InputError

POLYTOPE_MAX_N = 20


class Matroid:
    """Base class. Subclasses implement ``_rank_set`` and optionally ``_ranks``."""

    kind: str = "abstract"
    n: int

    def _rank_set(self, elems: frozenset[int]) -> int:
        raise NotImplementedError

    def _ranks(self, masks: np.ndarray) -> np.ndarray:
        return np.fromiter((self._rank_set(mask_to_set(int(m))) for m in masks), dtype=np.int64, count=len(masks))

    def _elements(self, S) -> frozenset[int]:
        if isinstance(S, (int, np.integer)):
            return mask_to_set(to_mask(S, self.n))
        elems = frozenset(int(i) for i in S)
        for i in elems:
            if not 0 <= i < self.n:
                raise InputError(f"element {i} out of range 0..{self.n - 1}")
        return elems

    def rank(self, S: Iterable[int] | int) -> int:
        return int(self._rank_set(self._elements(S)))

    def is_independent(self, S: Iterable[int] | int) -> bool:
        elems = self._elements(S)
        return self._rank_set(elems) == len(elems)

    @cached_property
    def rank_table(self) -> np.ndarray:
        masks = all_masks(self.n)
        table = self._ranks(masks)
        table.setflags(write=False)
        return table

    @cached_property
    def rho(self) -> int:
        return self.rank(range(self.n))

    @cached_property
    def gamma(self) -> float:
        """Girth: size of a smallest dependent set, ``math.inf`` if none."""
        if self.n <= POLYTOPE_MAX_N:
            sizes = popcount(all_masks(self.n))
            dep = self.rank_table < sizes
            return int(sizes[dep].min()) if dep.any() else math.inf
        for size in range(1, self.n + 1):
            for combo in itertools.combinations(range(self.n), size):
                if self._rank_set(frozenset(combo)) < size:
                    return size
        return math.inf

    @cached_property
    def loops(self) -> frozenset[int]:
        return frozenset(i for i in range(self.n) if self._rank_set(frozenset([i])) == 0)

    def loopless_girth(self) -> float:
        """Girth of the restriction to non-loop elements."""
        keep = [i for i in range(self.n) if i not in self.loops]
        for size in range(2, len(keep) + 1):
            for combo in itertools.combinations(keep, size):
                if self._rank_set(frozenset(combo)) < size:
                    return size
        return math.inf

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Uniform(Matroid):
    n: int
    ell: int
    kind = "uniform"

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.ell:
            raise InputError("uniform matroid needs n >= 0 and rank >= 0")

    def _rank_set(self, elems):
        return min(len(elems), self.ell)

    def _ranks(self, masks):
        return np.minimum(popcount(masks), self.ell)

    def to_dict(self):
        return {"type": "uniform", "n": self.n, "rank": self.ell}


@dataclass(frozen=True, eq=False)
class Free(Matroid):
    n: int
    kind = "free"

    def _rank_set(self, elems):
        return len(elems)

    def _ranks(self, masks):
        return popcount(masks)

    def to_dict(self):
        return {"type": "free", "n": self.n}


@dataclass(frozen=True, eq=False)
class Partition(Matroid):
    """Consecutive blocks of the given sizes, each with a cardinality cap."""

    sizes: tuple[int, ...]
    caps: tuple[int, ...]
    kind = "partition"

    def __post_init__(self):
        if len(self.sizes) != len(self.caps):
            raise InputError("partition needs one cap per part")
        if any(s < 0 for s in self.sizes) or any(c < 0 for c in self.caps):
            raise InputError("partition sizes and caps must be nonnegative")

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @cached_property
    def _blocks(self) -> list[range]:
        out, start = [], 0
        for s in self.sizes:
            out.append(range(start, start + s))
            start += s
        return out

    def _rank_set(self, elems):
        return sum(min(cap, sum(1 for i in blk if i in elems)) for blk, cap in zip(self._blocks, self.caps))

    def _ranks(self, masks):
        total = np.zeros(len(masks), dtype=np.int64)
        for blk, cap in zip(self._blocks, self.caps):
            bm = sum(1 << i for i in blk)
            total += np.minimum(popcount(masks & bm), cap)
        return total

    def to_dict(self):
        return {"type": "partition", "parts": [{"size": s, "cap": c} for s, c in zip(self.sizes, self.caps)]}


@dataclass(frozen=True, eq=False)
class Graphic(Matroid):
    """Cycle matroid of a multigraph; element i is edge ``edges[i]``."""

    vertices: int
    edges: tuple[tuple[int, int], ...]
    kind = "graphic"

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise InputError(f"edge ({u},{v}) uses a vertex outside 0..{self.vertices - 1}")

    @property
    def n(self) -> int:
        return len(self.edges)

    def _rank_set(self, elems):
        parent = list(range(self.vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        r = 0
        for i in elems:
            u, v = self.edges[i]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                r += 1
        return r

    def to_dict(self):
        return {"type": "graphic", "vertices": self.vertices, "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True, eq=False)
class Explicit(Matroid):
    """Matroid given by its list of bases; independent means contained in a basis."""

    n: int
    bases: tuple[frozenset[int], ...]
    kind = "explicit"

    def __post_init__(self):
        if not self.bases:
            raise InputError("explicit matroid needs at least one basis")
        sizes = {len(b) for b in self.bases}
        if len(sizes) != 1:
            raise InputError("all bases must have equal cardinality")
        for b in self.bases:
            if any(not 0 <= i < self.n for i in b):
                raise InputError("basis element out of range")
        base_set = set(self.bases)
        for b1 in self.bases:
            for b2 in self.bases:
                for x in b1 - b2:
                    if not any((b1 - {x}) | {y} in base_set for y in b2 - b1):
                        raise InputError("basis list violates the exchange axiom")

    def _rank_set(self, elems):
        return max(len(elems & b) for b in self.bases)

    def _ranks(self, masks):
        out = np.zeros(len(masks), dtype=np.int64)
        for b in self.bases:
            out = np.maximum(out, popcount(masks & to_mask(b, self.n)))
        return out

    def to_dict(self):
        return {"type": "explicit", "n": self.n, "bases": [sorted(b) for b in self.bases]}


@dataclass(frozen=True, eq=False)
class DirectSum(Matroid):
    """Parts occupy consecutive coordinate blocks in the given order."""

    parts: tuple[Matroid, ...]
    kind = "direct_sum"

    @property
    def n(self) -> int:
        return sum(p.n for p in self.parts)

    @cached_property
    def offsets(self) -> list[int]:
        return list(itertools.accumulate([0] + [p.n for p in self.parts[:-1]]))

    def _rank_set(self, elems):
        total = 0
        for p, off in zip(self.parts, self.offsets):
            total += p._rank_set(frozenset(i - off for i in elems if off <= i < off + p.n))
        return total

    def _ranks(self, masks):
        total = np.zeros(len(masks), dtype=np.int64)
        for p, off in zip(self.parts, self.offsets):
            total += p.rank_table[(masks >> off) & ((1 << p.n) - 1)]
        return total

    def to_dict(self):
        return {"type": "direct_sum", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class UniformPartitionUnion(Matroid):
    """Union of a rank-ell uniform matroid and a partition matroid.

    Ground set is E_0 (ell*block elements) followed by k blocks E_1..E_k of
    ``block`` elements each. The partition matroid allows one element per
    block E_i and nothing from E_0. Rank is ell + k and girth is ell + 1.
    """

    ell: int
    k: int
    block: int
    kind = "paper_union"

    def __post_init__(self):
        if self.ell < 1 or self.k < 0 or self.block < 1:
            raise InputError("union construction needs ell >= 1, k >= 0, block >= 1")

    @property
    def n(self) -> int:
        return (self.ell + self.k) * self.block

    @property
    def block_sizes(self) -> list[int]:
        return [self.ell * self.block] + [self.block] * self.k

    def count_rank(self, c0, cs: Sequence):
        """Rank from block counts; works elementwise on arrays."""
        spill = c0
        hits = 0
        for c in cs:
            hits = hits + np.minimum(1, c)
            spill = spill + np.maximum(0, np.asarray(c) - 1)
        return hits + np.minimum(self.ell, spill)

    def _block_ranges(self):
        start = 0
        for s in self.block_sizes:
            yield range(start, start + s)
            start += s

    def _rank_set(self, elems):
        counts = [sum(1 for i in blk if i in elems) for blk in self._block_ranges()]
        return int(self.count_rank(counts[0], counts[1:]))

    def _ranks(self, masks):
        counts = [popcount(masks & sum(1 << i for i in blk)) for blk in self._block_ranges()]
        return self.count_rank(counts[0], counts[1:]).astype(np.int64)

    def to_dict(self):
        return {"type": "paper_union", "ell": self.ell, "k": self.k, "block": self.block}


def direct_sum(parts: Sequence[Matroid]) -> Matroid:
    """Direct sum on consecutive blocks.

    Sums of free matroids stay free and sums of uniform/partition matroids are
    flattened into a single partition matroid.
    """
    parts = list(parts)
    if not parts:
        raise InputError("direct sum needs at least one part")
    if all(isinstance(p, Free) for p in parts):
        return Free(sum(p.n for p in parts))
    if all(isinstance(p, (Uniform, Partition)) for p in parts):
        sizes, caps = [], []
        for p in parts:
            if isinstance(p, Uniform):
                sizes.append(p.n)
                caps.append(p.ell)
            else:
                sizes.extend(p.sizes)
                caps.extend(p.caps)
        return Partition(tuple(sizes), tuple(caps))
    return DirectSum(tuple(parts))


def from_dict(d: dict) -> Matroid:
    if not isinstance(d, dict) or "type" not in d:
        raise InputError("matroid description must be an object with a 'type' field")
    t = d["type"]
    try:
        if t == "uniform":
            return Uniform(int(d["n"]), int(d["rank"]))
        if t == "free":
            return Free(int(d["n"]))
        if t == "partition":
            parts = d["parts"]
            return Partition(tuple(int(p["size"]) for p in parts), tuple(int(p["cap"]) for p in parts))
        if t == "graphic":
            return Graphic(int(d["vertices"]), tuple((int(u), int(v)) for u, v in d["edges"]))
        if t == "explicit":
            return Explicit(int(d["n"]), tuple(frozenset(int(i) for i in b) for b in d["bases"]))
        if t == "direct_sum":
            return DirectSum(tuple(from_dict(p) for p in d["parts"]))
        if t == "paper_union":
            return UniformPartitionUnion(int(d["ell"]), int(d["k"]), int(d["block"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed {t} matroid description: {exc}") from exc
    raise InputError(f"unknown matroid type {t!r}")


@dataclass(frozen=True, eq=False)
class WeightedRank:
    """r_w(S) = max weight of an independent subset of S."""

    matroid: Matroid
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        w = np.ones(self.matroid.n) if self.weights is None else np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != self.matroid.n:
            raise InputError(f"expected {self.matroid.n} weights, got {w.size}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InputError("weights must be finite and nonnegative")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.matroid.n

    @cached_property
    def order(self) -> np.ndarray:
        # descending weight, ascending index among ties
        return np.lexsort((np.arange(self.n), -self.weights))

    def max_weight_independent(self, S: Iterable[int] | int) -> frozenset[int]:
        elems = self.matroid._elements(S)
        chosen: set[int] = set()
        for e in self.order:
            e = int(e)
            if e in elems and self.matroid._rank_set(frozenset(chosen | {e})) == len(chosen) + 1:
                chosen.add(e)
        return frozenset(chosen)

    def __call__(self, S: Iterable[int] | int) -> float:
        return float(sum(self.weights[e] for e in self.max_weight_independent(S)))

    @cached_property
    def table(self) -> np.ndarray:
        """Greedy value on every mask via rank increments along the weight order."""
        rt = self.matroid.rank_table
        masks = np.arange(len(rt), dtype=np.int64)
        out = np.zeros(len(rt))
        prefix = 0
        prev = rt[masks & prefix]
        for e in self.order:
            prefix |= 1 << int(e)
            cur = rt[masks & prefix]
            out += self.weights[e] * (cur - prev)
            prev = cur
        out.setflags(write=False)
        return out


def rank(m: Matroid, S) -> int:
    return m.rank(S)


def girth(m: Matroid) -> float:
    return m.gamma


def weighted_rank(wr: WeightedRank, S) -> float:
    return wr(S)


def in_polytope(m: Matroid, x, tol: float = 1e-9) -> bool:
    """Membership in the independent-set polytope by full subset enumeration."""
    check_budget(m.n, POLYTOPE_MAX_N, "polytope membership")
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size != m.n:
        raise InputError(f"point has {arr.size} coordinates, expected {m.n}")
    if np.any(arr < -tol) or np.any(arr > 1 + tol):
        return False
    return bool(np.all(subset_sums(arr) <= m.rank_table + tol))


def polytope_scale(m: Matroid, x) -> float:
    """Largest alpha with alpha*x in P(r); ``inf`` for x = 0."""
    check_budget(m.n, POLYTOPE_MAX_N, "polytope scaling")
    s = subset_sums(as_point(x, m.n))
    pos = s > 0
    if not pos.any():
        return math.inf
    return float(np.min(m.rank_table[pos] / s[pos]))
