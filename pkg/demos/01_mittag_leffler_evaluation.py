#!/usr/bin/env python3
"""Evaluating the two-parameter Mittag-Leffler function.

E_{alpha,beta}(z) generalizes the exponential (alpha = beta = 1 gives e^z)
and is the fundamental kernel of fractional evolution equations.  The
evaluator switches internally between the defining power series and an
inverse-Laplace contour quadrature, so the negative real axis is covered
from 0 to -1e8 at close to machine accuracy.
"""

import math

import numpy as np
from scipy.special import erfc

from fracspde.mlf import ml, ml_kernel, ml_neg_grid

print("classical limits:")
print(f"  E_1,1(-1)  = {ml(1, 1, -1.0):.15f}   exp(-1) = {np.exp(-1):.15f}")
print(f"  E_2,1(-4)  = {ml(2, 1, -4.0):.15f}   cos(2)  = {np.cos(2.0):.15f}")

print("\nhalf order has a closed form, E_{1/2,1}(-x) = exp(x^2) erfc(x):")
for x in (0.5, 1.0, 3.0):
    print(f"  x={x}: ml={ml(0.5, 1, -x):.12e}  closed={np.exp(x**2)*erfc(x):.12e}")

print("\nalgebraic decay on the negative axis (completely monotone for alpha<1):")
x = np.array([1.0, 1e2, 1e4, 1e6, 1e8])
v = ml_neg_grid(0.7, 1.0, x)
for xi, vi in zip(x, v):
    print(f"  E_0.7,1(-{xi:8.0e}) = {vi:.6e}   x*E = {xi*vi:.4f}")
print("  (x * E approaches 1/Gamma(1-alpha) =", f"{1/math.gamma(0.3):.4f})")

print("\nkernel t^(beta-1) E_{alpha,beta}(-lam t^alpha), the building block of the solvers:")
for t in (0.0, 0.01, 0.1, 1.0):
    print(f"  t={t}: {ml_kernel(0.7, 2.0, np.pi**2, t):.10f}")
