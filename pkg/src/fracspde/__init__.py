"""Spectral solvers for a stochastic time-space fractional diffusion
equation driven by fractional Brownian sheet noise, with a fast
contour-quadrature time integrator and a convergence/timing harness."""

__version__ = "0.1.0"

from . import basis, cli, contour, harness, mlf, noise, scheme  # noqa: F401
