"""Numerics for the soft edge of random-matrix spectra.

Modules
-------
spectra   Airy-operator eigenvalues, classical locations, effective potential.
riccati   Riccati diffusion of the stochastic Airy operator and blow-up counts.
tridiag   Tridiagonal Gaussian beta ensembles, Sturm counts, eigenvectors.
measures  Signed edge measures and the bounded-Lipschitz distance.
ratefn    Rate functionals and log-energies.
kpz       KPZ lower-tail Laplace products and bound formulas.
harness   Monte Carlo engine and command-line interface.

Set ``AIRYEDGE_PURE_NUMPY=1`` to run every hot loop without numba.
"""

from ._accel import backend, set_backend, use_backend
from .errors import DomainError, NumericalError, TruncationError

__version__ = "0.1.0"

__all__ = ["backend", "set_backend", "use_backend", "DomainError", "NumericalError",
           "TruncationError", "__version__"]
