"""Mittag-Leffler functions E_{alpha,beta}(z) and the kernels
t^(beta-1) * E_{alpha,beta}(-lambda * t^alpha).

Evaluation strategy
-------------------
* power series wherever it is cancellation-safe in extended precision
  (tracked per call, never assumed), which covers |z| <= 1 always;
* inverse-Laplace sinc quadrature on the hyperbolic contour for everything
  else, using the beta-general transform z^(alpha-beta) / (z^alpha - w)
  with pole residues added when poles of the transform lie right of the
  contour (this happens for alpha > 1 and for arguments off the negative
  real axis).

``ml``/``ml_kernel`` are the accurate scalar surface (relative error at the
1e-12 scale on the negative real axis for alpha <= 1).  ``ml_neg_grid`` and
``ml_kernel_grid`` are vectorised bulk evaluators with an absolute-error
budget, used by the time steppers where millions of kernel values are
needed; they add a truncated large-argument expansion as a third path.
"""

from __future__ import annotations

import numpy as np
from scipy.special import rgamma

from .contour import ContourParams, build_rule

__all__ = [
    "InvalidParameterError",
    "SingularEvaluationError",
    "EvaluationDomainError",
    "ml",
    "ml_kernel",
    "ml_neg_grid",
    "ml_kernel_grid",
]

_EPS_LD = float(np.finfo(np.clongdouble).eps)
# series terms are built from float64 rgamma, so their relative accuracy is
# ~5e-16 no matter how wide the accumulator is; the guard factor absorbs the
# cumulative rounding of the terms near the series peak
_TERM_EPS = 5e-16
_SERIES_GUARD = 30.0


class InvalidParameterError(ValueError):
    """alpha/beta/argument outside the supported parameter domain."""


class SingularEvaluationError(ValueError):
    """Kernel evaluated at a genuinely singular point (t = 0 with beta < 1)."""


class EvaluationDomainError(ValueError):
    """No contour placement separates the transform poles from the rule."""


# {{{ power series

def _series_scalar(alpha: float, beta: float, z: complex) -> tuple[complex, bool]:
    """Sum the defining series in extended precision.

    Returns (value, ok); ok is False when the running cancellation estimate
    shows the result cannot be trusted to ~1e-13 relative accuracy.
    """
    zl = np.clongdouble(z)
    s = np.clongdouble(rgamma(beta))
    p = np.clongdouble(1.0)
    max_term = abs(s)
    az = abs(complex(z))
    k_peak = int(az ** (1.0 / alpha) / alpha) + 1 if az > 1.0 else 1
    small = 0
    k = 0
    while k < k_peak + 4000:
        k += 1
        p = p * zl
        term = p * np.clongdouble(rgamma(alpha * k + beta))
        s = s + term
        t_abs = abs(term)
        if t_abs > max_term:
            max_term = t_abs
        if k >= k_peak:
            if t_abs <= _EPS_LD * max(abs(s), 1e-300):
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
    else:
        return complex(s), False
    ok = max_term * _TERM_EPS * _SERIES_GUARD <= abs(s) * 1e-12 or abs(s) == 0.0
    return complex(s), bool(ok)


def _series_window(alpha: float, abs_tol: float) -> float:
    """Largest |z| for which the series keeps the absolute term-rounding
    error (term_eps * max term ~ term_eps * exp(|z|^(1/alpha))) below
    abs_tol."""
    c = np.log(abs_tol / (_SERIES_GUARD * _TERM_EPS))
    return float(max(1.0, c)) ** alpha

# }}}


# {{{ contour evaluation with pole residues

_STRIP_MARGIN_FRAC = 0.35


def _half_rule_ld(L: int, mu: float, nu: float, q: float):
    """Half rule (j = 0..L) in extended precision."""
    hbar = np.sqrt(np.clongdouble(2.0) * np.pi * q / L)
    j = np.arange(0, L + 1, dtype=np.longdouble)
    w = np.clongdouble(nu) + 1j * j * hbar
    z = np.clongdouble(mu) * (1.0 - np.sin(w))
    om = hbar * mu * np.cos(w) / (2.0 * np.pi)
    return z, om


def _quad_half(alpha, beta, w, z, om) -> tuple[complex, float]:
    """Sinc sum of exp(z) z^(alpha-beta) / (z^alpha - w) over the full rule,
    assembled from the j >= 0 half by conjugate symmetry (w may be complex,
    in which case the mirrored half uses conj(w)).  Also returns the largest
    term magnitude for a posteriori roundoff estimates."""
    num = om * np.exp(z) * z ** np.clongdouble(alpha - beta)
    za = z ** np.clongdouble(alpha)
    terms = num / (za - w)
    max_abs = float(np.max(np.abs(terms)))
    s_pos = np.sum(terms)
    if np.imag(w) != 0.0:
        s_neg = np.conj(np.sum(num / (za - np.conj(w))))
        return complex(s_pos + s_neg - terms[0]), max_abs
    return complex(2.0 * s_pos.real - terms[0].real + 0j), max_abs


def _poles_of_transform(alpha: float, w: complex) -> list[complex]:
    """Roots of z^alpha = w on the principal branch arg in (-pi, pi]."""
    if w == 0:
        return []
    r = abs(w) ** (1.0 / alpha)
    phi = np.angle(w)
    poles = []
    m = int(np.floor((-np.pi * alpha - phi) / (2.0 * np.pi)))
    while True:
        ang = (phi + 2.0 * np.pi * m) / alpha
        if ang > np.pi:
            break
        if -np.pi < ang:
            poles.append(r * np.exp(1j * ang))
        m += 1
    return poles


def _pole_parameter(pole: complex, mu: float) -> float:
    """Conformal parameter Re(arcsin(1 - p/mu)) of a pole.

    The contour family rho_a(r) = mu(1 - sin(a + i r)) sweeps a in
    (nu - q, nu + q); a pole lies right of every member iff its parameter
    is below nu - q and left of every member iff above nu + q.
    """
    return float(np.real(np.arcsin(np.complex128(1.0 - pole / mu))))


def _laplace_eval(alpha: float, beta: float, w: complex) -> complex:
    """E_{alpha,beta}(w) for |w| beyond the series window, via residues plus
    contour quadrature of the Laplace transform z^(alpha-beta)/(z^alpha - w).

    A pole of the transform right of the contour (conformal parameter below
    nu) contributes its residue exp(p) p^(1-beta) / alpha; one left of the
    contour is picked up by the quadrature.  A pole inside the analyticity
    strip narrows the usable strip width, which is compensated by raising L;
    the placement (mu, and if necessary nu, q) is steered over candidates and
    the first evaluation whose a posteriori roundoff estimate meets the
    target is returned.
    """
    poles = _poles_of_transform(alpha, w)
    exponent = 31.0  # target: exp(-31) ~ 3e-14 discretisation error
    best: tuple[float, complex] | None = None
    for shrink in (1.0, 0.5, 0.25, 0.1):
        nu, q = 0.1 * np.pi * shrink, 0.05 * np.pi * shrink
        for mu in (2.5, 5.0, 1.25, 10.0, 0.6, 20.0):
            params = [_pole_parameter(p, mu) for p in poles]
            clear = min((abs(a - nu) for a in params), default=np.inf)
            if not np.isfinite(clear) and poles:
                continue
            if clear < 0.12 * q:
                continue
            w_eff = min(q, 0.8 * clear)
            L = int(np.ceil(exponent**2 * q / (2.0 * np.pi * w_eff**2)))
            if L > 20000:
                continue
            z, om = _half_rule_ld(L, mu, nu, q)
            total, max_abs = _quad_half(alpha, beta, w, z, om)
            for p, a in zip(poles, params):
                if a < nu:
                    total += np.exp(p) * p ** (1.0 - beta) / alpha
            rnd = _EPS_LD * max_abs * np.sqrt(2.0 * L) / max(abs(total), 1e-300)
            if rnd <= 3e-12:
                return complex(total)
            if best is None or rnd < best[0]:
                best = (rnd, complex(total))
    if best is not None and best[0] <= 1e-8:
        return best[1]
    raise EvaluationDomainError(
        f"no admissible contour for alpha={alpha}, beta={beta}, z={w}"
    )

# }}}


def _ml_scalar(alpha: float, beta: float, z: complex) -> complex:
    if z == 0:
        return complex(rgamma(beta))
    if abs(z) <= _series_window(alpha, 1e-14) or abs(z) <= 1.0:
        val, ok = _series_scalar(alpha, beta, z)
        if ok:
            return val
    if alpha == 1.0:
        # exact forms; the generic contour loses relative accuracy when the
        # result is purely the exponentially small e^z part
        if beta == 1.0:
            return complex(np.exp(z))
        if beta == 2.0:
            return complex(np.expm1(z) / z)
    if alpha == 2.0:
        zr = complex(z)
        if zr.imag == 0.0:
            root = np.sqrt(complex(zr))  # i*sqrt(x) for negative reals
            if zr.real <= 0.0:
                return complex(_laplace_eval(1.0, beta, root).real)
            return 0.5 * (
                _laplace_eval(1.0, beta, root) + _laplace_eval(1.0, beta, -root)
            )
        raise EvaluationDomainError(
            "alpha = 2 with large complex argument is not supported"
        )
    return _laplace_eval(alpha, beta, z)


def _validate_params(alpha: float, beta: float) -> None:
    if not np.isfinite(alpha) or not 0.0 < alpha <= 2.0:
        raise InvalidParameterError(f"alpha must lie in (0, 2], got {alpha}")
    if not np.isfinite(beta):
        raise InvalidParameterError(f"beta must be finite, got {beta}")


def ml(alpha: float, beta: float, z) -> complex | np.ndarray:
    """Evaluate the two-parameter Mittag-Leffler function E_{alpha,beta}(z).

    Accurate to the 1e-12 relative scale on the negative real axis up to
    |z| = 1e8 for alpha in (0, 1] (and wherever the series converges safely
    for other arguments).  Accepts a scalar or an array of arguments.
    """
    _validate_params(alpha, beta)
    arr = np.asarray(z)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("z must be finite")
    if arr.ndim == 0:
        val = _ml_scalar(alpha, beta, complex(arr))
        if np.isrealobj(arr) or (isinstance(z, complex) and z.imag == 0.0):
            # real arguments of a real-analytic function give real values
            if abs(val.imag) <= 1e-12 * max(abs(val.real), 1e-300):
                return val.real if np.isrealobj(arr) else val
        return val
    out = np.array([_ml_scalar(alpha, beta, complex(v)) for v in arr.ravel()])
    out = out.reshape(arr.shape)
    if np.isrealobj(arr) and np.all(np.abs(out.imag) <= 1e-12 * np.maximum(np.abs(out.real), 1e-300)):
        return out.real
    return out


def ml_kernel(alpha: float, beta: float, lambda_s: float, t: float) -> float:
    """The kernel t^(beta-1) * E_{alpha,beta}(-lambda_s * t^alpha)."""
    _validate_params(alpha, beta)
    if lambda_s < 0.0 or not np.isfinite(lambda_s):
        raise InvalidParameterError(f"lambda_s must be a finite nonneg real, got {lambda_s}")
    if t < 0.0 or not np.isfinite(t):
        raise InvalidParameterError(f"t must be a finite nonneg real, got {t}")
    if t == 0.0:
        if beta < 1.0:
            raise SingularEvaluationError("kernel is singular at t = 0 for beta < 1")
        if beta == 1.0:
            return 1.0
        return 0.0
    val = _ml_scalar(alpha, beta, complex(-lambda_s * t**alpha))
    return float(t ** (beta - 1.0) * val.real)


# {{{ bulk evaluation on the negative axis

def _asymptotic_neg(alpha: float, beta: float, x: np.ndarray, k_max: int = 80):
    """Truncated large-argument expansion of E_{alpha,beta}(-x),

        sum_{k>=1} (-1)^(k+1) x^(-k) / Gamma(beta - alpha k),

    stopped per element at the smallest term (optimal truncation).  Returns
    (values, error_estimates); the estimate combines the first omitted term
    with the exp(-x^(1/alpha)) floor of the divergent tail.
    """
    x = np.asarray(x, dtype=np.float64)
    xinv = np.zeros_like(x)
    np.divide(1.0, x, out=xinv, where=x > 0)
    p = xinv.copy()
    out = p * rgamma(beta - alpha)
    prev = np.abs(out)
    err = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    sign = -1.0
    for k in range(2, k_max + 1):
        p = p * xinv
        term = sign * p * rgamma(beta - alpha * k)
        sign = -sign
        t_abs = np.abs(term)
        grew = active & (t_abs > prev) & (prev > 0)
        err[grew] = prev[grew]
        active &= ~grew
        out = np.where(active, out + term, out)
        conv = active & (t_abs > 0) & (t_abs < prev * 1e-3) & (t_abs < 1e-300 + np.abs(out) * 1e-17)
        err[conv] = t_abs[conv]
        active &= ~conv
        prev = np.where(active & (t_abs > 0), t_abs, prev)
        if not active.any():
            break
    err[active] = prev[active]
    # the divergent tail is not bounded by its smallest term; the measured
    # optimal-truncation floor is far above exp(-x^(1/alpha)) for small alpha
    floor = np.exp(-np.power(np.maximum(x, 1e-300), 1.0 / alpha) * min(1.0, alpha))
    return out, err + floor


def _series_neg_grid(alpha: float, beta: float, x: np.ndarray, tail_tol: float = 1e-18) -> np.ndarray:
    """Series for an array of arguments -x (x >= 0) inside the cancellation
    window, where float64 term precision dominates the error anyway.
    Iteration proceeds in chunks until the whole batch has converged (for
    small alpha the gamma growth sets in slowly, so the term count cannot be
    fixed a priori)."""
    xn = np.asarray(-x, dtype=np.float64)
    s = np.full(xn.shape, rgamma(beta))
    p = np.ones_like(xn)
    xmax = float(np.max(x)) if x.size else 0.0
    k_peak = int(xmax ** (1.0 / alpha) / alpha) + 1 if xmax > 1 else 1
    k = 0
    while k < k_peak + 40000:
        for _ in range(16):
            k += 1
            p *= xn
            s += p * rgamma(alpha * k + beta)
        if k >= k_peak:
            tmax = float(np.max(np.abs(p))) * abs(rgamma(alpha * k + beta))
            if tmax <= tail_tol:
                break
    else:
        raise EvaluationDomainError("series failed to converge in the window")
    return s


def _contour_neg_grid(alpha: float, beta: float, x: np.ndarray, abs_tol: float) -> np.ndarray:
    """Sinc-quadrature values of E_{alpha,beta}(-x) for an array of x > 0
    (alpha <= 1: the transform has no poles for these arguments)."""
    q = 0.05 * np.pi
    L = int(np.ceil((np.log(10.0 / abs_tol)) ** 2 / (2.0 * np.pi * q)))
    rule = build_rule(ContourParams(L=L, mu=5.0, nu=0.1 * np.pi, q=q))
    z = rule.half_nodes()
    om = rule.half_weights()
    num = om * np.exp(z) * z ** (alpha - beta)
    za = z**alpha
    terms = num[:, None] / (za[:, None] + x[None, :])
    return 2.0 * np.sum(terms, axis=0).real - terms[0].real


def _cheb_tail(alpha: float, beta: float, x: np.ndarray, abs_tol: float) -> np.ndarray:
    """E_{alpha,beta}(-x) on a tail batch via a Chebyshev surrogate in log x.

    F(u) = E_{alpha,beta}(-exp(u)) is entire and stays of moderate size in
    the strip |Im u| < pi (1 - alpha/2) (beyond which the argument enters the
    growth sector of E), so Chebyshev interpolation on the log range of the
    batch converges geometrically; nodes are filled by contour quadrature.
    """
    lo, hi = np.log(np.min(x)), np.log(np.max(x))
    half = max(0.5 * (hi - lo), 0.1)
    b = 0.75 * np.pi * (1.0 - 0.5 * alpha) / half
    rho = b + np.sqrt(1.0 + b * b)
    n = int(np.ceil(np.log(30.0 / abs_tol) / np.log(rho))) + 8
    n = max(33, min(n, 400))
    k = np.arange(n + 1)
    nodes = np.cos(np.pi * k / n)  # Chebyshev points of the second kind
    mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo) + 1e-9
    u_nodes = mid + rad * nodes
    f_nodes = _contour_neg_grid(alpha, beta, np.exp(u_nodes), abs_tol / 3.0)
    # barycentric interpolation, weights (-1)^k (halved at the ends)
    w = np.where(k % 2 == 0, 1.0, -1.0)
    w[0] *= 0.5
    w[-1] *= 0.5
    u = (np.log(x) - mid) / rad
    vals = np.empty_like(u)
    wf = w * f_nodes
    for lo_i in range(0, u.size, 32768):
        uc = u[lo_i : lo_i + 32768]
        diff = uc[:, None] - nodes[None, :]
        hit = diff == 0.0
        np.copyto(diff, 1.0, where=hit)
        inv = 1.0 / diff
        chunk_vals = (inv @ wf) / (inv @ w)
        rows = hit.any(axis=1)
        if rows.any():
            chunk_vals[rows] = f_nodes[np.argmax(hit[rows], axis=1)]
        vals[lo_i : lo_i + 32768] = chunk_vals
    return vals


def ml_neg_grid(alpha: float, beta: float, x, abs_tol: float = 1e-11) -> np.ndarray:
    """Vectorised E_{alpha,beta}(-x) for arrays of x >= 0 with an absolute
    error budget; alpha must lie in (0, 1].  Small arguments go through the
    extended-precision series, the tail through contour quadrature (directly
    for small batches, through a Chebyshev surrogate in log x for bulk)."""
    _validate_params(alpha, beta)
    if alpha > 1.0:
        raise InvalidParameterError("bulk path requires alpha <= 1")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise InvalidParameterError("x must be finite and >= 0")
    if alpha == 1.0 and beta in (1.0, 2.0):
        # exact exponential forms keep positivity/monotonicity to the last ulp
        if beta == 1.0:
            return np.exp(-x)
        out = np.ones_like(x)
        np.divide(-np.expm1(-x), x, out=out, where=x > 0)
        return out
    out = np.empty(x.shape, dtype=np.float64)
    w_ser = _series_window(alpha, abs_tol)
    m_small = x <= min(0.8, w_ser)
    if m_small.any():
        # bulk of a kernel table sits at tiny arguments needing few terms
        out[m_small] = _series_neg_grid(alpha, beta, x[m_small], abs_tol * 1e-2)
    m_ser = (x <= w_ser) & ~m_small
    if m_ser.any():
        out[m_ser] = _series_neg_grid(alpha, beta, x[m_ser], abs_tol * 1e-2)
    tail = np.flatnonzero(x > w_ser)
    if tail.size:
        xt = x[tail]
        if tail.size <= 160:
            out[tail] = _contour_neg_grid(alpha, beta, xt, abs_tol)
        else:
            out[tail] = _cheb_tail(alpha, beta, xt, abs_tol)
    return out


def ml_kernel_grid(alpha: float, beta: float, lambda_s, t, abs_tol: float = 1e-11) -> np.ndarray:
    """Kernel table t^(beta-1) E_{alpha,beta}(-lambda_s t^alpha) of shape
    (len(t), len(lambda_s)), sharing one bulk evaluation for the whole grid."""
    lam = np.atleast_1d(np.asarray(lambda_s, dtype=np.float64))
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(tt < 0) or np.any(lam < 0):
        raise InvalidParameterError("lambda_s and t must be >= 0")
    if np.any(tt == 0) and beta < 1.0:
        raise SingularEvaluationError("kernel is singular at t = 0 for beta < 1")
    args = np.power(tt, alpha)[:, None] * lam[None, :]
    vals = ml_neg_grid(alpha, beta, args.ravel(), abs_tol).reshape(args.shape)
    if beta != 1.0:
        pref = np.zeros_like(tt) if beta > 1.0 else None
        with np.errstate(divide="ignore"):
            pref = np.power(tt, beta - 1.0, out=pref, where=tt > 0) if beta > 1.0 else np.power(tt, beta - 1.0)
        vals = pref[:, None] * vals
        if beta > 1.0:
            vals[tt == 0.0, :] = 0.0
    return vals

# }}}
