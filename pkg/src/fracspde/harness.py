"""Monte Carlo convergence experiments and the classical-vs-fast timing
comparison.

The self-convergence estimators difference two resolutions of the SAME
noise path: temporal ladders reuse one finest-level sample aggregated to
each coarser grid, spatial ladders one widest-mode sample truncated to each
smaller basis.  Both couplings are exact by construction (the aggregated or
truncated coefficient matrix has exactly the coarse-level distribution and
the Cholesky factor of a leading principal block is the leading block of
the factor), so level differences measure discretization error alone.
"""

from __future__ import annotations

import csv
import hashlib
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .contour import ContourParams, build_rule
from .noise import (
    ConfigurationError,
    coarsen_time,
    path_generator,
    sample_noise,
    spatial_proj_cov,
    time_increment_cov,
    truncate_modes,
)
from .scheme import ModelParams, RatePositivityWarning, solve_classical, solve_fast

__all__ = [
    "ExperimentConfig",
    "ErrorTable",
    "TimingTable",
    "TheoreticalRates",
    "theoretical_rates",
    "temporal_convergence",
    "spatial_convergence",
    "timing_compare",
]


@dataclass(frozen=True)
class TheoreticalRates:
    """Predicted convergence rates; non-positive values are returned as-is
    and flagged rather than raised."""

    spatial: float
    temporal: float

    @property
    def spatial_positive(self) -> bool:
        return self.spatial > 0.0

    @property
    def temporal_positive(self) -> bool:
        return self.temporal > 0.0

    def __iter__(self):
        yield self.spatial
        yield self.temporal


def theoretical_rates(p: ModelParams) -> TheoreticalRates:
    """Rates printed in brackets next to the observed ones:
    spatial min(2 s H2 / alpha + H1 - 1, H1 + 2 s - 1), temporal
    H2 + alpha (H1 - 1) / (2 s)."""
    h1, h2 = p.hurst.h1, p.hurst.h2
    spatial = min(2.0 * p.s * h2 / p.alpha + h1 - 1.0, h1 + 2.0 * p.s - 1.0)
    temporal = h2 + p.alpha * (h1 - 1.0) / (2.0 * p.s)
    return TheoreticalRates(spatial=spatial, temporal=temporal)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a resolution ladder, a path count and a mode.

    ``model`` is the template; in temporal mode its N is the fixed mode
    count and the ladder lists time-step counts, in spatial mode its M is
    the fixed step count and the ladder lists mode counts, in timing mode
    its N is fixed and the ladder lists step counts.
    """

    model: ModelParams
    contour: ContourParams
    samples: int
    resolutions: tuple[int, ...]
    mode: str
    master_seed: int
    variant: str = "fast"
    workers: int = 1
    spatial_fine_grid: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("temporal", "spatial", "timing", "single"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.variant not in ("fast", "classical"):
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if self.samples < 1:
            raise ConfigurationError("need at least one sample path")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        res = tuple(self.resolutions)
        if len(res) < 1 or any(r < 1 for r in res):
            raise ConfigurationError("resolutions must be positive")
        if self.mode in ("temporal", "spatial") and len(res) < 2:
            raise ConfigurationError("convergence modes need at least two ladder levels")
        for a, b in zip(res, res[1:]):
            if b != 2 * a:
                raise ConfigurationError(
                    f"ladder must double at each level (rate formula assumes factor 2), got {a} -> {b}"
                )


@dataclass
class ErrorTable:
    """Self-convergence errors per ladder level with pairwise rates."""

    mode: str
    resolutions: tuple[int, ...]
    errors: np.ndarray
    stderrs: np.ndarray
    theoretical_rate: float

    @property
    def rates(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.log(self.errors[:-1] / self.errors[1:]) / np.log(2.0)
        return r

    @property
    def mean_rate(self) -> float:
        r = self.rates
        good = np.isfinite(r)
        return float(np.mean(r[good])) if good.any() else float("nan")

    def write_errors_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["resolution", "error", "stderr", "rate"])
            rates = [""] + [repr(float(r)) for r in self.rates]
            for res, err, se, rate in zip(self.resolutions, self.errors, self.stderrs, rates):
                w.writerow([res, repr(float(err)), repr(float(se)), rate])

    def write_rates_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["observed_mean", "theoretical"])
            w.writerow([repr(self.mean_rate), repr(self.theoretical_rate)])

    def write_plot_data(self, path) -> None:
        """Plain two-column series (resolution, error) for plotting."""
        with open(path, "w") as fh:
            for res, err in zip(self.resolutions, self.errors):
                fh.write(f"{res} {float(err)!r}\n")


@dataclass
class TimingTable:
    """Wall-clock seconds per solve for both stepper variants."""

    resolutions: tuple[int, ...]
    classical_seconds: np.ndarray
    fast_seconds: np.ndarray

    def pairwise_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """log2 ratios of consecutive timings (classical, fast), the same
        convention the error tables use for their Rate columns."""
        rc = np.log2(self.classical_seconds[1:] / self.classical_seconds[:-1])
        rf = np.log2(self.fast_seconds[1:] / self.fast_seconds[:-1])
        return rc, rf

    def slopes(self, estimator: str = "tail") -> tuple[float, float]:
        """Log-log growth rates (classical, fast) over the ladder.

        "tail" (default) averages the pairwise rates of the two finest
        resolution pairs: complexity claims are asymptotic, and at the small
        end of the ladder both solvers are dominated by O(M) setup and
        per-step dispatch costs that say nothing about the history-sum
        scaling.  "fit" is the least-squares slope over the whole ladder.
        """
        if estimator == "fit":
            lm = np.log(np.asarray(self.resolutions, dtype=float))
            sc = float(np.polyfit(lm, np.log(self.classical_seconds), 1)[0])
            sf = float(np.polyfit(lm, np.log(self.fast_seconds), 1)[0])
            return sc, sf
        if estimator == "tail":
            rc, rf = self.pairwise_rates()
            return float(rc[-2:].mean()), float(rf[-2:].mean())
        raise ConfigurationError(f"unknown slope estimator {estimator!r}")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["M", "classical_seconds", "fast_seconds"])
            for m, tc, tf in zip(self.resolutions, self.classical_seconds, self.fast_seconds):
                w.writerow([m, repr(float(tc)), repr(float(tf))])

    def write_plot_data(self, classical_path, fast_path) -> None:
        """Plain two-column series (M, seconds), one file per variant."""
        for path, series in ((classical_path, self.classical_seconds), (fast_path, self.fast_seconds)):
            with open(path, "w") as fh:
                for m, sec in zip(self.resolutions, series):
                    fh.write(f"{m} {float(sec)!r}\n")


def _solve_final(params: ModelParams, sample, variant: str, rule):
    if variant == "classical":
        return solve_classical(params, sample).final
    return solve_fast(params, sample, rule).final


# worker payload shared by forked/spawned processes
_WORKER_CTX: dict = {}


def _init_worker(ctx: dict) -> None:
    _WORKER_CTX.update(ctx)


def _temporal_path(i: int) -> np.ndarray:
    c = _WORKER_CTX
    sample = sample_noise(c["q"], c["cov"], path_generator(c["seed"], i), seed=c["seed"])
    finest = c["m_fine"]
    finals = {}
    for m in tuple(c["levels"]):
        params = replace(c["model"], N=c["n_fixed"], M=int(m))
        finals[m] = _solve_final(params, coarsen_time(sample, finest // int(m)), c["variant"], c["rule"])
    ladder = tuple(c["ladder"])
    return np.array(
        [np.sum((finals[m] - finals[2 * m]) ** 2) for m in ladder]
    )


def _spatial_path(i: int) -> np.ndarray:
    c = _WORKER_CTX
    sample = sample_noise(c["q"], c["cov"], path_generator(c["seed"], i), seed=c["seed"])
    finals = {}
    for n in tuple(c["levels"]):
        params = replace(c["model"], N=int(n), M=c["m_fixed"])
        finals[n] = _solve_final(params, truncate_modes(sample, int(n)), c["variant"], c["rule"])
    out = []
    for n in tuple(c["ladder"]):
        coarse, fine = finals[n], finals[2 * n]
        # the unresolved tail of the finer solution counts fully
        out.append(np.sum((coarse - fine[:n]) ** 2) + np.sum(fine[n:] ** 2))
    return np.array(out)


def _run_paths(worker, n_paths: int, workers: int, ctx: dict) -> np.ndarray:
    """Evaluate ``worker`` for every path index; reduction over paths is by
    ascending index regardless of completion order, so results do not
    depend on scheduling."""
    if workers <= 1:
        _init_worker(ctx)
        rows = [worker(i) for i in range(n_paths)]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ctx,)) as ex:
            rows = list(ex.map(worker, range(n_paths)))
    return np.vstack(rows)


def _table_from_sq(mode, ladder, sq: np.ndarray, theo: float) -> ErrorTable:
    l = sq.shape[0]
    mean_sq = sq.mean(axis=0)
    errors = np.sqrt(mean_sq)
    if l > 1:
        se_sq = sq.std(axis=0, ddof=1) / np.sqrt(l)
    else:
        se_sq = np.zeros_like(mean_sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        stderrs = np.where(errors > 0, se_sq / (2.0 * np.maximum(errors, 1e-300)), 0.0)
    return ErrorTable(
        mode=mode,
        resolutions=tuple(int(r) for r in ladder),
        errors=errors,
        stderrs=stderrs,
        theoretical_rate=theo,
    )


def temporal_convergence(cfg: ExperimentConfig) -> ErrorTable:
    """e_tau ladder: for each path the finest-level sample is aggregated to
    every coarser grid, solved, and adjacent levels differenced at T."""
    if cfg.mode != "temporal":
        raise ConfigurationError(f"config mode is {cfg.mode!r}, expected 'temporal'")
    model = cfg.model
    ladder = cfg.resolutions
    m_fine = 2 * ladder[-1]
    q = spatial_proj_cov(model.hurst.h1, model.N, cfg.spatial_fine_grid)
    cov = time_increment_cov(model.hurst.h2, m_fine, model.T)
    ctx = dict(
        q=q,
        cov=cov,
        model=model,
        n_fixed=model.N,
        m_fine=m_fine,
        levels=ladder + (m_fine,),
        ladder=ladder,
        variant=cfg.variant,
        rule=build_rule(cfg.contour),
        seed=cfg.master_seed,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("once", RatePositivityWarning)
        sq = _run_paths(_temporal_path, cfg.samples, cfg.workers, ctx)
    return _table_from_sq("temporal", ladder, sq, theoretical_rates(model).temporal)


def spatial_convergence(cfg: ExperimentConfig) -> ErrorTable:
    """e_N ladder: each path is sampled with 2*max(ladder) modes, truncated
    to every smaller basis, solved at fixed M, and differenced in L^2 with
    the coefficient tail counted fully."""
    if cfg.mode != "spatial":
        raise ConfigurationError(f"config mode is {cfg.mode!r}, expected 'spatial'")
    model = cfg.model
    ladder = cfg.resolutions
    n_top = 2 * ladder[-1]
    q = spatial_proj_cov(model.hurst.h1, n_top, cfg.spatial_fine_grid)
    cov = time_increment_cov(model.hurst.h2, model.M, model.T)
    ctx = dict(
        q=q,
        cov=cov,
        model=model,
        m_fixed=model.M,
        levels=ladder + (n_top,),
        ladder=ladder,
        variant=cfg.variant,
        rule=build_rule(cfg.contour),
        seed=cfg.master_seed,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("once", RatePositivityWarning)
        sq = _run_paths(_spatial_path, cfg.samples, cfg.workers, ctx)
    return _table_from_sq("spatial", ladder, sq, theoretical_rates(model).spatial)


def timing_compare(cfg: ExperimentConfig) -> TimingTable:
    """Wall-clock per solve for both variants over a step-count ladder on a
    shared noise path per level (sampling excluded from the timings);
    single-worker by construction for clean measurements."""
    if cfg.mode != "timing":
        raise ConfigurationError(f"config mode is {cfg.mode!r}, expected 'timing'")
    model = cfg.model
    rule = build_rule(cfg.contour)
    q = spatial_proj_cov(model.hurst.h1, model.N, cfg.spatial_fine_grid)
    t_classical, t_fast = [], []
    warm = replace(model, M=int(cfg.resolutions[0]))
    warm_noise = sample_noise(
        q, time_increment_cov(model.hurst.h2, warm.M, model.T), path_generator(cfg.master_seed, 0)
    )
    solve_classical(warm, warm_noise)
    solve_fast(warm, warm_noise, rule)
    for idx, m in enumerate(cfg.resolutions):
        params = replace(model, M=int(m))
        cov = time_increment_cov(model.hurst.h2, int(m), model.T)
        sample = sample_noise(q, cov, path_generator(cfg.master_seed, idx))
        # best-of-n damps scheduler and frequency-scaling noise; the bigger
        # sizes get fewer repeats to bound the total run time
        reps = 3 if m <= 1024 else 2
        tc = tf = np.inf
        for _ in range(reps):
            t0 = time.perf_counter()
            solve_classical(params, sample)
            tc = min(tc, time.perf_counter() - t0)
            t0 = time.perf_counter()
            solve_fast(params, sample, rule)
            tf = min(tf, time.perf_counter() - t0)
        t_classical.append(tc)
        t_fast.append(tf)
    return TimingTable(
        resolutions=tuple(int(r) for r in cfg.resolutions),
        classical_seconds=np.array(t_classical),
        fast_seconds=np.array(t_fast),
    )


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
