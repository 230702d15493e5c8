"""Kernel functions and incomplete-Cholesky feature maps."""

from kernels.features import FeatureMap, KernelError, embed, incomplete_cholesky
from kernels.functions import KernelSpec, gram, resolve_shift, shift_for_radius

__all__ = [
    "FeatureMap",
    "KernelError",
    "KernelSpec",
    "embed",
    "gram",
    "incomplete_cholesky",
    "resolve_shift",
    "shift_for_radius",
]
