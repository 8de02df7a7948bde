"""Hyperbolic contour and sinc quadrature for inverse Laplace transforms.

The contour is the left-opening hyperbola

    rho(r) = mu * (1 - sin(nu + i*r)),   r in R,

discretised by the trapezoid (sinc) rule with step hbar = sqrt(2*pi*q/L).
The quadrature error of the resulting rule decays like exp(-sqrt(2*pi*q*L))
as long as the transformed integrand is analytic in the horizontal strip
|Im| < q of the parametrisation, which requires q + nu < pi/2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ContourParams",
    "ContourRule",
    "InvalidContourError",
    "build_rule",
    "kernel_weights",
    "error_bound",
]


class InvalidContourError(ValueError):
    """Contour parameters violate the analyticity constraints."""


@dataclass(frozen=True)
class ContourParams:
    """Parameters of the hyperbolic contour and its sinc rule.

    L is the half node count (the rule uses 2L+1 nodes), mu the contour
    scale, nu the contour angle and q the half-width of the analyticity
    strip.  q + nu < pi/2 is required.
    """

    L: int
    mu: float = 7.0
    nu: float = 0.1 * np.pi
    q: float = 0.05 * np.pi

    def __post_init__(self) -> None:
        if self.L < 1:
            raise InvalidContourError(f"L must be >= 1, got {self.L}")
        if self.mu <= 0.0:
            raise InvalidContourError(f"mu must be positive, got {self.mu}")
        if not 0.0 < self.nu < 0.5 * np.pi:
            raise InvalidContourError(f"nu must lie in (0, pi/2), got {self.nu}")
        if self.q <= 0.0:
            raise InvalidContourError(f"q must be positive, got {self.q}")
        if self.q + self.nu >= 0.5 * np.pi:
            raise InvalidContourError(
                f"q + nu = {self.q + self.nu:.6f} must be < pi/2 for analyticity"
            )


@dataclass(frozen=True)
class ContourRule:
    """Nodes z_j, weights omega_j and step hbar of the sinc rule.

    Arrays are ordered j = -L..L, so index L+j addresses node j and
    nodes[L:] is the non-negative half j = 0..L.  Conjugate symmetry
    z_{-j} = conj(z_j), omega_{-j} = conj(omega_j) holds exactly because
    the negative half is constructed by mirroring.
    """

    nodes: np.ndarray
    weights: np.ndarray
    step: float
    params: ContourParams = field(repr=False)

    @property
    def L(self) -> int:
        return self.params.L

    def half_nodes(self) -> np.ndarray:
        """Nodes j = 0..L (j=0 is the real vertex mu*(1 - sin(nu)))."""
        return self.nodes[self.L :]

    def half_weights(self) -> np.ndarray:
        return self.weights[self.L :]


def build_rule(p: ContourParams) -> ContourRule:
    """Construct the sinc quadrature rule for the contour defined by ``p``.

    Nodes are rho(j*hbar) and weights -hbar/(2*pi*i) * rho'(j*hbar), which
    simplifies to (hbar*mu/(2*pi)) * cos(nu + i*j*hbar).
    """
    hbar = float(np.sqrt(2.0 * np.pi * p.q / p.L))
    j = np.arange(0, p.L + 1)
    w = p.nu + 1j * j * hbar
    half_nodes = p.mu * (1.0 - np.sin(w))
    half_weights = hbar * p.mu * np.cos(w) / (2.0 * np.pi)

    # all nodes except j=0 must sit strictly left of the vertex
    if not np.all(half_nodes[1:].real < half_nodes[0].real):
        raise InvalidContourError("contour nodes are not strictly left-ordered")

    nodes = np.concatenate([np.conj(half_nodes[:0:-1]), half_nodes])
    weights = np.concatenate([np.conj(half_weights[:0:-1]), half_weights])
    return ContourRule(nodes=nodes, weights=weights, step=hbar, params=p)


def _kernel_sum(rule: ContourRule, alpha: float, lambda_s: float, t: float) -> complex:
    """Complex quadrature sum approximating the inverse Laplace transform of
    z^(alpha-2) / (z^alpha + lambda_s) at time t (no realness projection)."""
    z = rule.nodes
    terms = rule.weights * np.exp(z * t) * z ** (alpha - 2.0) / (z**alpha + lambda_s)
    return complex(np.sum(terms))


def kernel_weights(rule: ContourRule, alpha: float, lambda_s: float, t: float) -> float:
    """Approximate t * E_{alpha,2}(-lambda_s * t^alpha) by sinc quadrature.

    The integrand is exp(z*t) * z^(alpha-2) / (z^alpha + lambda_s); its exact
    inverse Laplace transform is t * E_{alpha,2}(-lambda_s * t^alpha).  The
    quadrature error is bounded by C * exp(-sqrt(2*pi*q*L)).

    t = 0 returns 0 by convention: the target integral vanishes there while
    the quadrature sum itself does not converge at t = 0.  The time stepping
    schemes only ever evaluate differences at t >= tau > 0, so the convention
    exists purely for the test surface.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if lambda_s < 0.0:
        raise ValueError(f"lambda_s must be >= 0, got {lambda_s}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    if rule.params.mu * t > 30.0:
        warnings.warn(
            f"mu * t = {rule.params.mu * t:.1f} > 30: exp(z_0 * t) grows large and "
            "quadrature accuracy degrades; use a smaller mu",
            stacklevel=2,
        )
    return _kernel_sum(rule, alpha, lambda_s, t).real


def error_bound(p: ContourParams) -> float:
    """Reference scale exp(-sqrt(2*pi*q*L)) of the sinc quadrature error
    (the unquantified constant is taken as 1 for tolerance budgeting)."""
    return float(np.exp(-np.sqrt(2.0 * np.pi * p.q * p.L)))
