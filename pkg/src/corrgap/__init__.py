"""Correlation-gap bounds for matroid rank functions, with desk-scale verifiers."""
from .errors import CapacityError, InputError
from .matroids import (
    DirectSum,
    Explicit,
    Free,
    Graphic,
    Matroid,
    Partition,
    Uniform,
    UniformPartitionUnion,
    WeightedRank,
    direct_sum,
    from_dict,
    in_polytope,
)

__all__ = [
    "CapacityError",
    "DirectSum",
    "Explicit",
    "Free",
    "Graphic",
    "InputError",
    "Matroid",
    "Partition",
    "Uniform",
    "UniformPartitionUnion",
    "WeightedRank",
    "direct_sum",
    "from_dict",
    "in_polytope",
]
