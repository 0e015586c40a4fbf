"""Bitmask helpers for desk-scale subset enumeration.

Subsets of {0..n-1} are encoded as integers with bit i set when element i
is present. Tables indexed by mask have length 2**n.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import CapacityError, InputError

MAX_TABLE_N = 24


def to_mask(S: Iterable[int] | int, n: int) -> int:
    if isinstance(S, (int, np.integer)):
        mask = int(S)
        if mask < 0 or mask >> n:
            raise InputError(f"mask {mask} out of range for n={n}")
        return mask
    mask = 0
    for i in S:
        i = int(i)
        if not 0 <= i < n:
            raise InputError(f"element {i} out of range 0..{n - 1}")
        mask |= 1 << i
    return mask


def mask_to_set(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def check_budget(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise CapacityError(f"{what} needs n <= {limit}, got n={n}")


def all_masks(n: int) -> np.ndarray:
    check_budget(n, MAX_TABLE_N, "subset enumeration")
    return np.arange(1 << n, dtype=np.int64)


def popcount(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks).astype(np.int64)


def subset_sums(x: np.ndarray) -> np.ndarray:
    """Table of x(S) over all masks S."""
    s = np.zeros(1)
    for xi in x:
        s = np.concatenate([s, s + xi])
    return s


def mask_probabilities(x: np.ndarray) -> np.ndarray:
    """Probability of each mask when element i is included with probability x[i]."""
    p = np.ones(1)
    for xi in x:
        p = np.concatenate([p * (1.0 - xi), p * xi])
    return p


def as_point(x, n: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and arr.size != n:
        raise InputError(f"point has {arr.size} coordinates, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point has non-finite coordinates")
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise InputError("point must lie in the unit cube")
    return np.clip(arr, 0.0, 1.0)
