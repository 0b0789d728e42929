"""Weighted test-functional norms coupled to a pseudo-spectral
incompressible Navier-Stokes solver with dissipativity monitoring.

Modules:

- ``testfns``:   smooth compactly supported test functions and the cube
                 enumeration they live on
- ``sdspace``:   weighted-functional inner products, norms and related
                 integral functionals on sampled fields
- ``embeddings``: property-verification checks for norm comparisons
- ``nse``:       periodic-box pseudo-spectral solver (homogeneous and
                 density-transport variants)
- ``monitor``:   dissipativity, contraction and decay diagnostics
- ``cli``:       command-line entry point (``sdnse``)
- ``kernels``:   interpolation kernels (compiled extension with a pure
                 NumPy fallback)
"""

from .kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
