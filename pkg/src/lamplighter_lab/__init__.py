"""Exact and Monte Carlo laboratory for random walks on lamplighter graphs."""
from .errors import LamplighterError
from .graphs import FiniteGraph, WalkKernel, build_graph, lazy_kernel
from .wreath import WreathState, wreath_kernel

__version__ = "0.1.0"

__all__ = ["LamplighterError", "FiniteGraph", "WalkKernel", "build_graph", "lazy_kernel", "WreathState",
           "wreath_kernel", "__version__"]
