"""Renormalised non-relativistic Lee model on two-dimensional Riemannian manifolds.

Heat kernels on the plane, flat torus, round sphere and hyperbolic plane;
the renormalised bound-state condition; operator-norm ground-state lower
bounds; the mean-field condition and its large-n behaviour.
"""

__version__ = "0.1.0"

from .errors import AccuracyError, ConfigError, DomainError, LeeModelError, NotFoundError, UnsupportedError
from .geometry import Kind, Manifold, SpectralMode, spectrum
from .heatkernel import heat_kernel, heat_kernel_diag
from .renorm import PhysicalParams, mu_bare, principal_scalar, solve_bound_state

__all__ = [
    "AccuracyError", "ConfigError", "DomainError", "LeeModelError", "NotFoundError", "UnsupportedError",
    "Kind", "Manifold", "SpectralMode", "spectrum", "heat_kernel", "heat_kernel_diag",
    "PhysicalParams", "mu_bare", "principal_scalar", "solve_bound_state", "__version__",
]
