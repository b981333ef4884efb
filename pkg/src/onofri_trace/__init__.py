"""Numerical checks for the sharp Onofri trace inequality on the half-space,
its extremals, the Liouville equation with nonlinear Neumann data, and the
p -> n limit of the L^p Sobolev trace inequality."""

from . import (asymptotics, expr, extremals, fields, fixtures, functionals, kernels, limit_study,
               pde_checks, quadrature, sampling)

__version__ = "0.1.0"
