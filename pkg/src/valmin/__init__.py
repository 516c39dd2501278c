"""Exact workbench for valued abelian p-groups given by finite filtrations."""
from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
