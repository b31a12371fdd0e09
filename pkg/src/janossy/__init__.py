"""Janossy kernels and edge eigenvalue laws for unitary random-matrix ensembles.

Modules: numcore (quadrature, linear algebra, ODE/Newton), specfun (Airy, Bessel,
Hankel, model matrices), equilibrium (one-cut equilibrium measures), orthopoly
(recurrences and Christoffel-Darboux kernels), fredholm (Nystrom operators),
edge_laws (Tracy-Widom, limit kernels, order laws), sampler (Monte Carlo), cli.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConditioningError, ConsistencyError, ConstraintInfeasibleError, ConvergenceError, DomainError,
    JanossyError, ResolutionError, StiffnessError, UnsupportedPotentialError,
)
