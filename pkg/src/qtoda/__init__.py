"""Exact q-series toolkit for Whittaker scalar products, the difference Toda
Hamiltonian, and principal subspace characters of affine sl(n+1)."""

from .kernels import BACKEND as kernel_backend

__all__ = ["kernel_backend"]
__version__ = "0.1.0"
