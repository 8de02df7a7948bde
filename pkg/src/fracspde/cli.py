"""Configuration parsing, experiment dispatch and output management.

Config files are flat INI text with sections [model], [contour],
[experiment], [output]; every numeric value accepts plain floats or pi
multiples written like ``0.1pi``.  Seed precedence is --seed flag over the
config file over the FRACSPDE_SEED environment variable.

Exit codes: 0 success, 1 parse/validation failure, 2 I/O failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .contour import ContourParams, InvalidContourError
from .harness import (
    ExperimentConfig,
    file_sha256,
    spatial_convergence,
    temporal_convergence,
    theoretical_rates,
    timing_compare,
)
from .mlf import EvaluationDomainError, InvalidParameterError
from .noise import (
    ConfigurationError,
    CovarianceDegenerateError,
    HurstPair,
    path_generator,
    sample_noise,
    spatial_proj_cov,
    time_increment_cov,
)
from .scheme import ModelParams, solve_classical, solve_fast
from .contour import build_rule

__all__ = ["ConfigParseError", "RunConfig", "parse_config", "serialize_config", "run", "main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

_SOURCES = {
    "sin": (np.sin, 1.0),
    "zero": (lambda u: np.zeros_like(u), 1.0),
    "identity": (lambda u: u, 1.0),
}

_DEFAULT_LADDERS = {
    "temporal": (8, 16, 32, 64, 128),
    "spatial": (4, 8, 16, 32, 64),
    "timing": (512, 1024, 2048, 4096, 8192),
}


class ConfigParseError(ValueError):
    """Missing or unparseable configuration key."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description (every default filled in)."""

    alpha: float
    s: float
    h1: float
    h2: float
    T: float
    N: int
    M: int
    f_name: str
    L: int
    mu: float
    nu: float
    q: float
    mode: str
    samples: int
    resolutions: tuple[int, ...]
    seed: int
    variant: str
    workers: int
    outdir: str
    verbose: int

    def model_params(self) -> ModelParams:
        f, lip = _SOURCES[self.f_name]
        return ModelParams(
            alpha=self.alpha,
            s=self.s,
            hurst=HurstPair(self.h1, self.h2),
            T=self.T,
            N=self.N,
            M=self.M,
            f=f,
            f_lipschitz=lip,
        )

    def contour_params(self) -> ContourParams:
        return ContourParams(L=self.L, mu=self.mu, nu=self.nu, q=self.q)

    def experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig(
            model=self.model_params(),
            contour=self.contour_params(),
            samples=self.samples,
            resolutions=self.resolutions,
            mode=self.mode,
            master_seed=self.seed,
            variant=self.variant,
            workers=self.workers,
        )


def _parse_number(raw: str, key: str) -> float:
    text = raw.strip().lower().replace(" ", "")
    try:
        if text.endswith("pi"):
            head = text[:-2]
            return (float(head) if head else 1.0) * np.pi
        return float(text)
    except ValueError:
        raise ConfigParseError(f"cannot parse value {raw!r} for key {key!r}") from None


def _parse_resolutions(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in raw.replace(" ", "").split(",") if part)
    except ValueError:
        raise ConfigParseError(f"cannot parse resolutions {raw!r}") from None


def parse_config(source: str) -> RunConfig:
    """Parse flat INI config text into a fully validated RunConfig.

    Required keys: alpha, s, h1, h2 in [model] and mode in [experiment].
    Everything else defaults to the reference experiment parameters
    (mu=7, nu=0.1pi, q=0.05pi, L=200, samples=100, T=0.1, f=sin).
    """
    cp = configparser.ConfigParser()
    try:
        cp.read_string(source)
    except configparser.Error as exc:
        raise ConfigParseError(f"malformed config: {exc}") from None

    def section(name):
        return cp[name] if cp.has_section(name) else {}

    model, cont = section("model"), section("contour")
    exp, out = section("experiment"), section("output")

    for key in ("alpha", "s", "h1", "h2"):
        if key not in model:
            raise ConfigParseError(f"missing required key {key!r} in [model]")
    if "mode" not in exp:
        raise ConfigParseError("missing required key 'mode' in [experiment]")

    mode = exp["mode"].strip()
    if mode not in ("temporal", "spatial", "timing", "single"):
        raise ConfigParseError(f"mode must be temporal|spatial|timing|single, got {mode!r}")

    alpha = _parse_number(model["alpha"], "alpha")
    s = _parse_number(model["s"], "s")
    h1 = _parse_number(model["h1"], "h1")
    h2 = _parse_number(model["h2"], "h2")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0,1), got {alpha}")
    if not 0.0 < s < 1.0:
        raise ConfigurationError(f"s must lie in (0,1), got {s}")
    for name, h in (("h1", h1), ("h2", h2)):
        if not 0.0 < h <= 0.5:
            raise ConfigurationError(f"{name} must lie in (0, 1/2], got {h}")

    T = _parse_number(model.get("T", "0.1"), "T")
    f_name = model.get("f", "sin").strip()
    if f_name not in _SOURCES:
        raise ConfigurationError(f"unknown source f={f_name!r}; choose from {sorted(_SOURCES)}")

    resolutions = (
        _parse_resolutions(exp["resolutions"])
        if "resolutions" in exp
        else _DEFAULT_LADDERS.get(mode, ())
    )
    default_n = {"temporal": 256, "timing": 64, "single": 16}.get(mode, 16)
    default_m = {"spatial": 2048, "single": 64}.get(mode, 64)
    N = int(model.get("N", str(default_n)))
    M = int(model.get("M", str(default_m)))

    seed = int(exp.get("seed", os.environ.get("FRACSPDE_SEED", "0")))
    cfg = RunConfig(
        alpha=alpha,
        s=s,
        h1=h1,
        h2=h2,
        T=T,
        N=N,
        M=M,
        f_name=f_name,
        L=int(cont.get("L", "200")),
        mu=_parse_number(cont.get("mu", "7"), "mu"),
        nu=_parse_number(cont.get("nu", "0.1pi"), "nu"),
        q=_parse_number(cont.get("q", "0.05pi"), "q"),
        mode=mode,
        samples=int(exp.get("samples", "100")),
        resolutions=resolutions,
        seed=seed,
        variant=exp.get("variant", "fast").strip(),
        workers=int(exp.get("workers", "1")),
        outdir=out.get("dir", "out"),
        verbose=int(out.get("verbose", "0")),
    )
    # surface validation errors now rather than mid-run (warnings print but
    # do not fail)
    cfg.contour_params()
    if mode != "single":
        cfg.experiment_config()
    else:
        cfg.model_params()
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Render a RunConfig back to config text; parse(serialize(c)) == c."""
    lines = [
        "[model]",
        f"alpha = {cfg.alpha!r}",
        f"s = {cfg.s!r}",
        f"h1 = {cfg.h1!r}",
        f"h2 = {cfg.h2!r}",
        f"T = {cfg.T!r}",
        f"N = {cfg.N}",
        f"M = {cfg.M}",
        f"f = {cfg.f_name}",
        "",
        "[contour]",
        f"L = {cfg.L}",
        f"mu = {cfg.mu!r}",
        f"nu = {cfg.nu!r}",
        f"q = {cfg.q!r}",
        "",
        "[experiment]",
        f"mode = {cfg.mode}",
        f"samples = {cfg.samples}",
        f"resolutions = {','.join(str(r) for r in cfg.resolutions)}",
        f"seed = {cfg.seed}",
        f"variant = {cfg.variant}",
        f"workers = {cfg.workers}",
        "",
        "[output]",
        f"dir = {cfg.outdir}",
        f"verbose = {cfg.verbose}",
        "",
    ]
    return "\n".join(lines)


def _write_manifest(cfg: RunConfig, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"fracspde {__version__}\n")
        fh.write(f"seed {cfg.seed}\n\n")
        fh.write(serialize_config(cfg))


def _run_single(cfg: RunConfig, outdir: str) -> list[str]:
    params = cfg.model_params()
    q = spatial_proj_cov(cfg.h1, cfg.N)
    c = time_increment_cov(cfg.h2, cfg.M, cfg.T)
    sample = sample_noise(q, c, path_generator(cfg.seed, 0), seed=cfg.seed)
    if cfg.variant == "classical":
        traj = solve_classical(params, sample)
    else:
        traj = solve_fast(params, sample, build_rule(cfg.contour_params()))
    target = os.path.join(outdir, "trajectory.csv")
    traj.to_csv(target)
    return [target]


def run(cfg: RunConfig) -> int:
    """Dispatch one experiment and write its outputs.

    The manifest (resolved config, seed, version) is written before any
    computation starts and finalized with output checksums afterwards, so
    long runs are reconstructible post-mortem.
    """
    try:
        outdir = cfg.outdir
        try:
            os.makedirs(outdir, exist_ok=True)
            manifest = os.path.join(outdir, "manifest.txt")
            _write_manifest(cfg, manifest)
        except OSError as exc:
            print(f"error: cannot write to output dir {cfg.outdir!r}: {exc}", file=sys.stderr)
            return EXIT_IO

        outputs: list[str] = []
        if cfg.mode == "single":
            outputs = _run_single(cfg, outdir)
        elif cfg.mode in ("temporal", "spatial"):
            ecfg = cfg.experiment_config()
            table = temporal_convergence(ecfg) if cfg.mode == "temporal" else spatial_convergence(ecfg)
            err_path = os.path.join(outdir, "errors.csv")
            rates_path = os.path.join(outdir, "rates.csv")
            plot_path = os.path.join(outdir, "plot_errors.dat")
            table.write_errors_csv(err_path)
            table.write_rates_csv(rates_path)
            table.write_plot_data(plot_path)
            outputs = [err_path, rates_path, plot_path]
            if cfg.verbose:
                rates = theoretical_rates(cfg.model_params())
                print(
                    f"{cfg.mode}: observed mean rate {table.mean_rate:.4f}, "
                    f"theoretical {table.theoretical_rate:.4f} "
                    f"(spatial {rates.spatial:.4f} / temporal {rates.temporal:.4f})"
                )
        elif cfg.mode == "timing":
            table = timing_compare(cfg.experiment_config())
            timing_path = os.path.join(outdir, "timing.csv")
            plot_c = os.path.join(outdir, "plot_classical.dat")
            plot_f = os.path.join(outdir, "plot_fast.dat")
            table.write_csv(timing_path)
            table.write_plot_data(plot_c, plot_f)
            outputs = [timing_path, plot_c, plot_f]
            if cfg.verbose:
                sc, sf = table.slopes()
                print(f"timing: classical slope {sc:.3f}, fast slope {sf:.3f}")

        with open(manifest, "a") as fh:
            fh.write("\n[checksums]\n")
            for path in outputs:
                fh.write(f"{os.path.basename(path)} = {file_sha256(path)}\n")
        return EXIT_OK
    except (ConfigParseError, ConfigurationError, InvalidContourError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CovarianceDegenerateError, EvaluationDomainError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="fracspde",
        description="Convergence and timing experiments for the stochastic "
        "time-space fractional diffusion solvers",
    )
    ap.add_argument("--config", required=True, help="path to the INI config file")
    ap.add_argument("--seed", type=int, default=None, help="master seed (overrides the config file)")
    ap.add_argument("--workers", type=int, default=None, help="worker process count")
    ap.add_argument("--out", default=None, help="output directory (overrides the config file)")
    ap.add_argument(
        "--mode",
        choices=("spatial", "temporal", "timing", "single"),
        default=None,
        help="experiment mode (overrides the config file)",
    )
    args = ap.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"I/O error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    overrides = {}
    if args.mode is not None:
        overrides["mode"] = args.mode
    try:
        cfg = parse_config(text)
        if overrides or args.seed is not None or args.workers is not None or args.out is not None:
            if args.mode is not None and args.mode != cfg.mode:
                # mode changes the ladder defaults; reparse with the override
                cp = configparser.ConfigParser()
                cp.read_string(text)
                if not cp.has_section("experiment"):
                    cp.add_section("experiment")
                cp.set("experiment", "mode", args.mode)
                buf = []
                for sec in cp.sections():
                    buf.append(f"[{sec}]")
                    buf.extend(f"{k} = {v}" for k, v in cp.items(sec))
                    buf.append("")
                cfg = parse_config("\n".join(buf))
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            if args.workers is not None:
                cfg = replace(cfg, workers=args.workers)
            if args.out is not None:
                cfg = replace(cfg, outdir=args.out)
    except (ConfigParseError, ConfigurationError, InvalidContourError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
