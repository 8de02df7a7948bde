import numpy as np
import pytest

from fracspde.basis import eigenvalues
from fracspde.contour import ContourParams, build_rule, error_bound
from fracspde.noise import (
    ConfigurationError,
    HurstPair,
    NoiseSample,
    path_generator,
    sample_noise,
    spatial_proj_cov,
    time_increment_cov,
)
from fracspde.scheme import (
    CouplingWarning,
    ModelParams,
    RatePositivityWarning,
    linear_oracle,
    solve_classical,
    solve_fast,
)

HP = HurstPair(0.3, 0.4)
RULE = build_rule(ContourParams(L=200))

# frozen oracle values (60-digit series): first odd sine coefficients of the
# constant-source solution at alpha=0.7, s=0.5, t=0.1
ORACLE_COEFF_1 = 0.06274818349900843199374438
ORACLE_COEFF_3 = 0.01239598600282135004375302


def zero_noise(p: ModelParams) -> NoiseSample:
    return NoiseSample(x=np.zeros((p.N, p.M)), tau=p.tau, T=p.T, h1=p.hurst.h1, h2=p.hurst.h2)


def make_params(**kw) -> ModelParams:
    base = dict(alpha=0.3, s=0.7, hurst=HP, T=0.1, N=8, M=16)
    base.update(kw)
    return ModelParams(**base)


def sample_for(p: ModelParams, seed=0, index=0) -> NoiseSample:
    q = spatial_proj_cov(p.hurst.h1, p.N)
    c = time_increment_cov(p.hurst.h2, p.M, p.T)
    return sample_noise(q, c, path_generator(seed, index))


def test_zero_source_zero_noise_is_identically_zero():
    p = make_params(f=lambda u: np.zeros_like(u))
    assert np.all(solve_classical(p, zero_noise(p)).states == 0.0)
    assert np.all(solve_fast(p, zero_noise(p), RULE).states == 0.0)


@pytest.mark.parametrize("alpha,s", [(0.3, 0.4), (0.3, 0.9), (0.7, 0.4), (0.7, 0.9)])
def test_constant_source_matches_oracle_at_all_times(alpha, s):
    p = make_params(alpha=alpha, s=s, N=16, M=64, f=lambda u: np.ones_like(u))
    traj = solve_classical(p, zero_noise(p))
    worst = 0.0
    for n in range(p.M + 1):
        oracle = linear_oracle(p, 1.0, p.time_grid()[n])
        worst = max(worst, float(np.max(np.abs(traj.states[n] - oracle.coeffs))))
    assert worst < 1e-9


def test_constant_source_golden_coefficient():
    # first coefficient at t=0.1 equals (1,phi_1) * 0.1 * E_{0.7,2}(-pi 0.1^0.7);
    # the projected (1,phi_1) carries the 4N+1-point quadrature error, hence
    # the 1e-6 band around the analytic golden
    p = make_params(alpha=0.7, s=0.5, N=16, M=32, f=lambda u: np.ones_like(u))
    traj = solve_classical(p, zero_noise(p))
    assert traj.final[0] == pytest.approx(ORACLE_COEFF_1, rel=1e-6)
    # the Simpson error of the projected constant grows like k^3
    assert traj.final[2] == pytest.approx(ORACLE_COEFF_3, rel=1e-5)
    assert abs(traj.final[1]) < 1e-10  # even modes vanish by parity


def test_linear_oracle_zero_source():
    p = make_params()
    assert np.all(linear_oracle(p, 0.0, 0.05).coeffs == 0.0)


def test_linear_oracle_heat_limit():
    # alpha -> 1, s -> 1: coefficient k=1 tends to (1,phi_1)(1-exp(-pi^2 t))/pi^2
    p = make_params(alpha=0.999, s=0.999, N=4)
    t = 0.08
    got = linear_oracle(p, 1.0, t).coeffs[0]
    lam = np.pi ** (2 * 0.999)
    expect = (2.0 * np.sqrt(2.0) / np.pi) * (1.0 - np.exp(-lam * t)) / lam
    assert got == pytest.approx(expect, rel=5e-3)


def test_fast_matches_classical_on_noise_path():
    p = make_params(N=32, M=64)
    smp = sample_for(p, seed=42)
    tc = solve_classical(p, smp)
    tf = solve_fast(p, smp, RULE, debug=True)
    assert np.max(np.linalg.norm(tc.states - tf.states, axis=1)) < 1e-10


def test_fast_literal_form_respects_quadrature_budget():
    # the all-quadrature update carries the per-kernel sinc error; the
    # discrepancy must stay inside 10 M error_bound (1 + |X|_inf/tau)
    p = make_params(N=16, M=32)
    smp = sample_for(p, seed=3)
    tc = solve_classical(p, smp)
    tf = solve_fast(p, smp, RULE, newest_kernel="contour")
    budget = 10.0 * p.M * error_bound(RULE.params) * (1.0 + np.max(np.abs(smp.x)) / p.tau)
    assert np.linalg.norm(tc.final - tf.final) <= budget


@pytest.mark.parametrize(
    "alpha,s,h1,h2",
    [
        (0.3, 0.7, 0.3, 0.4), (0.7, 0.5, 0.5, 0.5), (0.5, 0.5, 0.4, 0.4),
        (0.2, 0.9, 0.5, 0.4), (0.6, 0.4, 0.5, 0.3), (0.9, 0.8, 0.2, 0.5),
        (0.4, 0.6, 0.25, 0.25), (0.8, 0.3, 0.5, 0.5), (0.35, 0.85, 0.45, 0.2),
        (0.55, 0.65, 0.35, 0.35), (0.25, 0.75, 0.2, 0.45), (0.65, 0.55, 0.3, 0.3),
    ],
)
def test_fast_classical_agreement_sweep(alpha, s, h1, h2):
    rule = build_rule(ContourParams(L=64))
    with np.errstate(all="ignore"):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = ModelParams(alpha=alpha, s=s, hurst=HurstPair(h1, h2), T=0.1, N=16, M=32)
            smp = sample_for(p, seed=17)
            tc = solve_classical(p, smp)
            tf = solve_fast(p, smp, rule, newest_kernel="contour")
    budget = 10.0 * p.M * error_bound(rule.params) * (1.0 + np.max(np.abs(smp.x)) / p.tau)
    assert np.linalg.norm(tc.final - tf.final) <= budget


def naive_fast_reference(p: ModelParams, smp: NoiseSample, rule):
    """Literal double-sum evaluation of the fast scheme: at every step the
    full history sums over (i, j) are recomputed from scratch.  Returns the
    trajectory and the final full-bank arrays (2L+1, N)."""
    z = rule.nodes
    om = rule.weights
    lam_s = eigenvalues(p.N) ** p.s
    R = z[:, None] ** (p.alpha - 2.0) / (z[:, None] ** p.alpha + lam_s[None, :])
    tgrid = p.time_grid()
    from fracspde.scheme import _source_ops

    S, P = _source_ops(p)
    coeffs = []  # c^{i-1} = fhat^{i-1} + X_i / tau, filled as we march
    states = [np.zeros(p.N)]
    g1 = g2 = None
    for n in range(1, p.M + 1):
        u_prev = states[-1]
        cf = P @ p.f(S @ u_prev)
        cx = smp.x[:, n - 1] / p.tau
        coeffs.append((cf, cx))
        g1 = np.zeros((len(z), p.N), dtype=complex)
        g2 = np.zeros_like(g1)
        for i in range(1, n + 1):
            efac = om * (np.exp(z * tgrid[n - i + 1]) - np.exp(z * tgrid[n - i]))
            g1 += efac[:, None] * R * coeffs[i - 1][0][None, :]
            g2 += efac[:, None] * R * coeffs[i - 1][1][None, :]
        states.append((g1 + g2).sum(axis=0).real)
    return np.array(states), g1, g2


def test_history_recurrence_equals_direct_sums():
    # the O(NL)-per-step recurrence must reproduce the literal double sums
    # at every step for small M, bank by bank
    rule = build_rule(ContourParams(L=24))
    p = make_params(N=6, M=12)
    smp = sample_for(p, seed=9)
    ref_states, ref_g1, ref_g2 = naive_fast_reference(p, smp, rule)
    for m in range(1, p.M + 1):
        # the stepping is causal, so running on the m-step prefix of the
        # path must reproduce the reference trajectory up to step m
        pm = make_params(N=6, M=m, T=m * smp.tau)
        sm = NoiseSample(x=smp.x[:, :m], tau=smp.tau, T=pm.T, h1=smp.h1, h2=smp.h2)
        traj = solve_fast(pm, sm, rule, newest_kernel="contour")
        scale = max(1.0, np.abs(ref_states[: m + 1]).max())
        assert np.max(np.abs(traj.states - ref_states[: m + 1])) < 1e-12 * scale
    # final banks match elementwise on the full [-L, L] index range
    traj = solve_fast(p, smp, rule, newest_kernel="contour")
    bank_scale = max(np.abs(ref_g1).max(), np.abs(ref_g2).max(), 1e-30)
    assert np.max(np.abs(traj.history.g1 - ref_g1)) < 1e-12 * bank_scale
    assert np.max(np.abs(traj.history.g2 - ref_g2)) < 1e-12 * bank_scale


def test_exact_newest_kernel_stays_close_to_literal_form():
    p = make_params(N=8, M=16)
    smp = sample_for(p, seed=21)
    lit = solve_fast(p, smp, RULE, newest_kernel="contour")
    exact = solve_fast(p, smp, RULE)
    budget = 10.0 * p.M * error_bound(RULE.params) * (1.0 + np.max(np.abs(smp.x)) / p.tau)
    assert np.linalg.norm(lit.final - exact.final) <= budget


def test_discrepancy_shrinks_with_node_count():
    # with the literal update the distance to the classical reference shrinks
    # consistently with the quadrature bound ratio when L grows (a modest
    # slack absorbs the L-dependence of the bound's constant)
    import warnings

    p = make_params(N=8, M=16)
    smp = sample_for(p, seed=5)
    ref = solve_classical(p, smp).final
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CouplingWarning)
        d25 = np.linalg.norm(
            solve_fast(p, smp, build_rule(ContourParams(L=25)), newest_kernel="contour").final - ref
        )
        d200 = np.linalg.norm(
            solve_fast(p, smp, build_rule(ContourParams(L=200)), newest_kernel="contour").final - ref
        )
    bound_ratio = error_bound(ContourParams(L=25)) / error_bound(ContourParams(L=200))
    assert d200 < d25
    assert d200 <= 10.0 * d25 / bound_ratio


def test_zero_stability_under_source_perturbation():
    delta = 1e-8
    p = make_params(N=8, M=32, f=np.sin)
    p2 = make_params(N=8, M=32, f=lambda u: np.sin(u) + delta)
    smp = zero_noise(p)
    d = np.linalg.norm(solve_classical(p, smp).final - solve_classical(p2, smp).final)
    assert d <= 100.0 * delta


def test_dimension_mismatch_rejected():
    p = make_params(N=8, M=16)
    bad = NoiseSample(x=np.zeros((4, 16)), tau=p.tau, T=p.T, h1=0.3, h2=0.4)
    with pytest.raises(ConfigurationError):
        solve_classical(p, bad)
    bad2 = NoiseSample(x=np.zeros((8, 16)), tau=p.tau * 2, T=p.T, h1=0.3, h2=0.4)
    with pytest.raises(ConfigurationError):
        solve_fast(p, bad2, RULE)


def test_rate_positivity_warning():
    with pytest.warns(RatePositivityWarning):
        ModelParams(alpha=0.9, s=0.3, hurst=HurstPair(0.2, 0.2), T=0.1, N=4, M=4)


def test_coupling_warning_for_coarse_rule():
    p = make_params(N=8, M=512)
    smp = zero_noise(p)
    with pytest.warns(CouplingWarning):
        solve_fast(p, smp, build_rule(ContourParams(L=8)))


def test_initial_condition_hook():
    p = make_params(N=8, M=4, u0=lambda x: np.sin(np.pi * x))
    traj = solve_classical(p, zero_noise(p))
    assert traj.states[0][0] == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-10)
    assert np.max(np.abs(traj.states[0][1:])) < 1e-10


def test_trajectory_csv_export(tmp_path):
    p = make_params(N=4, M=8)
    traj = solve_classical(p, sample_for(p))
    full = tmp_path / "traj.csv"
    traj.to_csv(full)
    lines = full.read_text().strip().splitlines()
    assert lines[0] == "n,t_n,coeff_1,coeff_2,coeff_3,coeff_4"
    assert len(lines) == p.M + 2
    # cells are plain floats that round-trip
    cells = lines[-1].split(",")
    assert cells[0] == str(p.M)
    assert float(cells[1]) == pytest.approx(p.T)
    assert all("(" not in c for c in cells)
    final = tmp_path / "final.csv"
    traj.to_csv(final, final_only=True)
    assert len(final.read_text().strip().splitlines()) == 2


def test_heat_equation_limit_against_euler_maruyama():
    # alpha ~ 1, s ~ 1, white noise: the model degenerates to the stochastic
    # heat equation; the mean-square solution size at T must match an
    # independent Euler-Maruyama spectral solver within 10%
    n_paths, N, M, T = 400, 8, 256, 0.1
    p = ModelParams(alpha=0.999, s=1.0 - 1e-9, hurst=HurstPair(0.5, 0.5), T=T, N=N, M=M)
    q = spatial_proj_cov(0.5, N)
    c = time_increment_cov(0.5, M, T)
    lam = eigenvalues(N)  # s -> 1
    tau = T / M
    from fracspde.scheme import _source_ops

    S, P = _source_ops(p)
    ms_scheme = 0.0
    ms_em = 0.0
    for i in range(n_paths):
        smp = sample_noise(q, c, path_generator(777, i))
        ms_scheme += np.sum(solve_classical(p, smp).final ** 2)
        u = np.zeros(N)
        for n in range(1, M + 1):
            fhat = P @ np.sin(S @ u)
            u = u + tau * (-lam * u + fhat) + smp.x[:, n - 1]
        ms_em += np.sum(u**2)
    assert ms_scheme / n_paths == pytest.approx(ms_em / n_paths, rel=0.10)
