"""Sampling of the regularized fractional-Brownian-sheet noise.

The time steppers consume the jointly Gaussian coefficient matrix

    X[k][i] = int_{I_i} int_D phi_k(y) xi(y, r) dy dr,

whose covariance factorizes as E[X_{j,i} X_{k,m}] = Q_{jk} C_{im}:
C collects second differences of the temporal fBm covariance on the time
grid, Q the projections of the spatial factor onto the sine basis.  A
sample is Lq @ Z @ Lc^T with Z iid standard normal and Lq, Lc the Cholesky
factors, which is exact in distribution given Q and C.

Q for Hurst index h < 1/2 is defined through a fine-grid increment
construction (the naive kernel h(2h-1)|x-y|^(2h-2) is singular and
negative); the fine covariance is Toeplitz, so the quadratic forms are
assembled with FFT-based matvecs and never materialize the fine matrix.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigurationError",
    "CovarianceDegenerateError",
    "HurstPair",
    "TimeIncrementCov",
    "SpatialProjCov",
    "NoiseSample",
    "time_increment_cov",
    "spatial_proj_cov",
    "sample_noise",
    "coarsen_time",
    "truncate_modes",
    "save_noise",
    "load_noise",
    "path_generator",
]


class ConfigurationError(ValueError):
    """Inconsistent grid/resolution arguments."""


class CovarianceDegenerateError(RuntimeError):
    """Covariance factorization failed even with jitter escalation."""


@dataclass(frozen=True)
class HurstPair:
    """Hurst indices of the driving sheet, spatial then temporal."""

    h1: float
    h2: float

    def __post_init__(self) -> None:
        for name, h in (("h1", self.h1), ("h2", self.h2)):
            if not 0.0 < h <= 0.5:
                raise ConfigurationError(f"{name} must lie in (0, 1/2], got {h}")


def _chol_with_jitter(mat: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, retrying with escalating diagonal jitter.

    The covariances are PSD in exact arithmetic but can be numerically
    semidefinite for small Hurst indices.
    """
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        pass
    base = 1e-12 * np.trace(mat) / mat.shape[0]
    for boost in (1.0, 10.0, 100.0):
        try:
            return np.linalg.cholesky(mat + base * boost * np.eye(mat.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise CovarianceDegenerateError(
        f"Cholesky failed for {mat.shape[0]}x{mat.shape[0]} covariance even with jitter"
    )


def _increment_cov_stationary(h: float, n: int, dx: float) -> np.ndarray:
    """Autocovariance gamma(0..n-1) of consecutive fBm increments on a
    uniform grid of step dx: gamma(m) = dx^{2h}/2 (|m+1|^{2h} + |m-1|^{2h}
    - 2|m|^{2h})."""
    m = np.arange(n, dtype=np.float64)
    g = 0.5 * (np.abs(m + 1) ** (2 * h) + np.abs(m - 1) ** (2 * h) - 2 * m ** (2 * h))
    return dx ** (2 * h) * g


@dataclass(frozen=True)
class TimeIncrementCov:
    """Covariance of the M temporal fBm increments and its factor."""

    matrix: np.ndarray
    chol: np.ndarray
    h2: float
    tau: float
    T: float

    @property
    def n_steps(self) -> int:
        return self.matrix.shape[0]


def time_increment_cov(h2: float, M: int, T: float) -> TimeIncrementCov:
    """C_{im} = E[(B(t_i)-B(t_{i-1}))(B(t_m)-B(t_{m-1}))] on the uniform
    grid t_i = i T / M, by polarization of the fBm covariance."""
    if M < 1:
        raise ConfigurationError(f"M must be >= 1, got {M}")
    if T <= 0.0:
        raise ConfigurationError(f"T must be positive, got {T}")
    if not 0.0 < h2 <= 0.5:
        raise ConfigurationError(f"h2 must lie in (0, 1/2], got {h2}")
    tau = T / M
    if h2 == 0.5:
        # independent Brownian increments: exactly diagonal
        mat = tau * np.eye(M)
        chol = np.sqrt(tau) * np.eye(M)
        return TimeIncrementCov(matrix=mat, chol=chol, h2=h2, tau=tau, T=T)
    g = _increment_cov_stationary(h2, M, tau)
    idx = np.abs(np.arange(M)[:, None] - np.arange(M)[None, :])
    mat = g[idx]
    return TimeIncrementCov(matrix=mat, chol=_chol_with_jitter(mat), h2=h2, tau=tau, T=T)


@dataclass(frozen=True)
class SpatialProjCov:
    """Covariance Q of the sine-mode projections of the spatial factor."""

    matrix: np.ndarray
    chol: np.ndarray
    h1: float
    fine_grid: int

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]


def _toeplitz_matvec(first_col: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Multiply the symmetric Toeplitz matrix with given first column by the
    columns of v, through circulant embedding of size 2n."""
    n = first_col.size
    c = np.concatenate([first_col, [0.0], first_col[:0:-1]])
    fc = np.fft.rfft(c)
    vp = np.zeros((2 * n, v.shape[1]))
    vp[:n] = v
    out = np.fft.irfft(fc[:, None] * np.fft.rfft(vp, axis=0), n=2 * n, axis=0)
    return out[:n]


def spatial_proj_cov(h1: float, N: int, N_f: int | None = None) -> SpatialProjCov:
    """Q_{jk} = E[(int phi_j dW)(int phi_k dW)] for the spatial fBm factor.

    Computed as v_j^T C_f v_k where C_f is the increment covariance on a
    fine grid of N_f cells and v_j holds midpoint values of phi_j; N_f must
    be at least 64 N so the quadrature error stays below the mode scale.
    """
    if N < 1:
        raise ConfigurationError(f"N must be >= 1, got {N}")
    if not 0.0 < h1 <= 0.5:
        raise ConfigurationError(f"h1 must lie in (0, 1/2], got {h1}")
    if N_f is None:
        N_f = max(4096, 64 * N)
    if N_f < 64 * N:
        raise ConfigurationError(f"fine grid N_f={N_f} must be >= 64*N = {64 * N}")
    mids = (np.arange(N_f) + 0.5) / N_f
    V = np.sqrt(2.0) * np.sin(np.pi * mids[:, None] * np.arange(1, N + 1)[None, :])
    g = _increment_cov_stationary(h1, N_f, 1.0 / N_f)
    Q = V.T @ _toeplitz_matvec(g, V)
    Q = 0.5 * (Q + Q.T)
    return SpatialProjCov(matrix=Q, chol=_chol_with_jitter(Q), h1=h1, fine_grid=N_f)


@dataclass(frozen=True)
class NoiseSample:
    """One realization of the Wong-Zakai coefficient matrix X (N x M);
    X[k][i] integrates the noise against phi_{k+1} over I_{i+1}."""

    x: np.ndarray
    tau: float
    T: float
    h1: float
    h2: float
    seed: int = 0

    @property
    def n_modes(self) -> int:
        return self.x.shape[0]

    @property
    def n_steps(self) -> int:
        return self.x.shape[1]


def sample_noise(q: SpatialProjCov, c: TimeIncrementCov, rng: np.random.Generator, seed: int = 0) -> NoiseSample:
    """Draw one coefficient matrix X = Lq Z Lc^T with Z iid N(0,1), filled
    row-major from rng; then E[X_{j,i} X_{k,m}] = Q_{jk} C_{im} exactly."""
    z = rng.standard_normal((q.n_modes, c.n_steps))
    x = q.chol @ z @ c.chol.T
    return NoiseSample(x=x, tau=c.tau, T=c.T, h1=q.h1, h2=c.h2, seed=seed)


def coarsen_time(s: NoiseSample, factor: int) -> NoiseSample:
    """Aggregate consecutive time cells: the Wong-Zakai integrals over the
    coarse intervals are exactly the sums of the fine-cell integrals, which
    couples solver runs across time resolutions on one path."""
    if factor < 1 or s.n_steps % factor != 0:
        raise ConfigurationError(f"factor {factor} does not divide M = {s.n_steps}")
    if factor == 1:
        return s
    coarse = s.x.reshape(s.n_modes, s.n_steps // factor, factor).sum(axis=2)
    return NoiseSample(x=coarse, tau=s.tau * factor, T=s.T, h1=s.h1, h2=s.h2, seed=s.seed)


def truncate_modes(s: NoiseSample, n_small: int) -> NoiseSample:
    """Keep the first n_small mode rows, coupling solver runs across spatial
    resolutions on one path."""
    if not 1 <= n_small <= s.n_modes:
        raise ConfigurationError(f"n_small must lie in [1, {s.n_modes}], got {n_small}")
    if n_small == s.n_modes:
        return s
    return NoiseSample(x=s.x[:n_small].copy(), tau=s.tau, T=s.T, h1=s.h1, h2=s.h2, seed=s.seed)


_MAGIC = b"FSNZ"
_HEADER = struct.Struct("<4sHQQdddddQ")  # magic, version, N, M, tau, T, h1, h2, pad, seed


def save_noise(s: NoiseSample, path) -> None:
    """Binary dump: fixed little-endian header (N, M, tau, T, h1, h2, seed)
    followed by the row-major float64 payload, for replaying paths across
    scheme variants."""
    header = _HEADER.pack(_MAGIC, 1, s.n_modes, s.n_steps, s.tau, s.T, s.h1, s.h2, 0.0, s.seed)
    payload = np.ascontiguousarray(s.x, dtype="<f8").tobytes()
    if isinstance(path, (io.RawIOBase, io.BufferedIOBase)):
        path.write(header + payload)
    else:
        with open(path, "wb") as f:
            f.write(header + payload)


def load_noise(path) -> NoiseSample:
    if isinstance(path, (io.RawIOBase, io.BufferedIOBase)):
        raw = path.read()
    else:
        with open(path, "rb") as f:
            raw = f.read()
    magic, version, n, m, tau, T, h1, h2, _pad, seed = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC or version != 1:
        raise ConfigurationError("not a noise dump (bad magic/version)")
    x = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, m).astype(np.float64)
    return NoiseSample(x=x, tau=tau, T=T, h1=h1, h2=h2, seed=seed)


def path_generator(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for Monte Carlo path ``index``: independent of
    scheduling order, reproducible from (master_seed, index) alone."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))
