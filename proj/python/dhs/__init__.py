"""Weighted Hodge Laplacian spectra and universal eigenvalue bounds on discretized self-shrinkers.

Thin re-export of the compiled extension. The heavy lifting (discrete exterior
calculus assembly, eigensolvers, inequality suites, operator-identity batches)
lives in C++; this package maps Eigen vectors/matrices to numpy and sparse
matrices to scipy.
"""

try:
    from ._core import *  # noqa: F401,F403  (installed layout: dhs/_core.so)
    from . import _core as _impl
except ImportError:  # in-tree build: _core.so sits on sys.path next to the package
    from _core import *  # noqa: F401,F403
    import _core as _impl

__version__ = "0.1.0"
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
del _impl
