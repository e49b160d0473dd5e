"""Polyanalytic Ginibre ensembles: kernels, local limits, exterior laws and exact sampling."""

from .kernelcore import EnsembleParams, ScaledComplex, corr_kernel_matrix, corr_kernel_poly, gram_matrix
from .specfun import CapacityError

__all__ = [
    "CapacityError",
    "EnsembleParams",
    "ScaledComplex",
    "corr_kernel_matrix",
    "corr_kernel_poly",
    "gram_matrix",
]
__version__ = "0.1.0"
