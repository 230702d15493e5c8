"""Submodular size functions, Lovász extensions and separable minimization."""

from submodular.oracles import check_submodular
from submodular.separable import pava, separable_min
from submodular.size_functions import (
    CellPartition,
    ConcaveCardinality,
    CoreMeasure,
    DominatedMeasure,
    GroundSet,
    Modular,
    SetCover,
    SizeFunction,
    blend_with_dominated,
    build_size_function,
    evaluate,
    greedy_subgradient,
    greedy_subgradients,
    lovasz,
    size_function_from_dict,
)

__all__ = [
    "CellPartition",
    "ConcaveCardinality",
    "CoreMeasure",
    "DominatedMeasure",
    "GroundSet",
    "Modular",
    "SetCover",
    "SizeFunction",
    "blend_with_dominated",
    "build_size_function",
    "check_submodular",
    "evaluate",
    "greedy_subgradient",
    "greedy_subgradients",
    "lovasz",
    "pava",
    "separable_min",
    "size_function_from_dict",
]
