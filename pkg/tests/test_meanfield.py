import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, optimize, special

from lee2d.errors import DomainError, UnsupportedError
from lee2d.geometry import Manifold
from lee2d.meanfield import (TrialState, appendix_bound, asymptotic_compact, asymptotic_noncompact, chi_equation_lhs,
                             constant_ansatz, cumulant_diagnostic, energy_identity_residual, few_mode_trial,
                             fixed_profile_slope, interaction_functional, log_fit, noncompact_growth,
                             sequence_schedule, solve_chi, upper_bound_chain)
from lee2d.renorm import PhysicalParams, principal_scalar

SPHERE = Manifold.sphere(1.0)
PLANE = Manifold.plane()


def plane_gaussian_U(lam, m, w, chi):
    # g(s) = N w^2 / (w^2 + s/m), N^2 = 1/(pi w^2);  int_0^inf e^{-bs}/(c+s)^2 ds = 1/c - b e^{bc} E1(bc)
    b, c = chi + 2 * m, m * w * w
    tail = 1 / c - b * special.exp1(b * c) * math.exp(b * c)
    return lam**2 * w**2 * m**2 / math.pi * tail


def test_trial_normalisation_enforced():
    with pytest.raises(DomainError):
        TrialState.spectral(SPHERE, {0: 0.6, 1: [0.5, 0.5, 0.5]})
    with pytest.raises(DomainError):
        TrialState.spectral(SPHERE, {1: [1.0, 0.0]})
    with pytest.raises(UnsupportedError):
        TrialState.constant(PLANE)
    with pytest.raises(UnsupportedError):
        TrialState.gaussian(SPHERE, 1.0)


@given(st.floats(0.2, 5.0), st.floats(0.1, 3.0))
def test_plane_gaussian_kinetic(w, m):
    assert_allclose(TrialState.gaussian(PLANE, w).kinetic_u(m), 1 / (2 * m * w * w), rtol=1e-10)


@pytest.mark.parametrize("w", [0.3, 1.0, 4.0])
def test_plane_gaussian_heat_profile(w):
    prof = TrialState.gaussian(PLANE, w)._profile
    m = 0.7
    s = np.logspace(-6, 4, 41)
    want = prof.N * w * w / (w * w + s / m)
    assert_allclose(prof.heat_at_source(s, m), want, rtol=1e-11)
    assert_allclose(prof.heat_interpolated(s, m), want, rtol=1e-11)


@pytest.mark.parametrize("w,chi", [(0.5, 0.0), (1.0, 3.0), (2.0, -0.4), (1.0, 500.0)])
def test_plane_gaussian_interaction(w, chi):
    p = PhysicalParams(1.0, 0.5, 1.3)
    got = interaction_functional(TrialState.gaussian(PLANE, w), chi, p, PLANE)
    assert_allclose(got.value, plane_gaussian_U(1.3, 1.0, w, chi), rtol=1e-9)


def test_hyperbolic_gaussian_normalisation_and_flat_limit():
    # a width far below R sees an almost flat metric
    man = Manifold.hyperbolic(50.0)
    t = TrialState.gaussian(man, 0.5)
    assert abs(t._profile.norm_check - 1) < 1e-10
    assert_allclose(t.kinetic_u(1.0), 1 / (2 * 0.25), rtol=1e-3)


def _random_trial(rng, man, classes=4):
    weights = {}
    for idx in range(classes):
        mult = [1, 3, 5, 7, 9][idx] if man.kind.value == "sphere" else None
        weights[idx] = rng.normal(size=mult)
    total = math.sqrt(sum(float(np.sum(v**2)) for v in weights.values()))
    return TrialState.spectral(man, {k: v / total for k, v in weights.items()})


@pytest.mark.parametrize("seed", range(5))
def test_spectral_double_sum_matches_quadpack(seed):
    rng = np.random.default_rng(seed)
    trial = _random_trial(rng, SPHERE)
    p = PhysicalParams(0.8, 0.2, 1.1, a=(0.9, 2.0))
    chi = float(rng.uniform(-0.5, 20.0))
    z, sig = trial.source_values(p.a), trial.sigmas
    g = lambda s: np.dot(z, np.exp(-s * sig / (2 * p.m)))
    want, _ = integrate.quad(lambda s: g(s) ** 2 * math.exp(-s * (chi + 2 * p.m)), 0, np.inf, epsabs=0, epsrel=1e-12)
    got = interaction_functional(trial, chi, p, SPHERE, method="spectral").value
    direct = interaction_functional(trial, chi, p, SPHERE, method="direct").value
    assert_allclose(got, p.lam**2 * want, rtol=1e-10)
    assert_allclose(direct, got, rtol=1e-12)


def test_chi_lhs_domain():
    p = PhysicalParams(1.0, 0.1, 1.0)
    assert_allclose(chi_equation_lhs(-0.1, p, SPHERE), 0.0, atol=1e-15)
    assert_allclose(chi_equation_lhs(2.0, p, SPHERE), principal_scalar(-2.0, p, SPHERE).value)
    with pytest.raises(DomainError):
        chi_equation_lhs(-1.0, p, SPHERE)


@pytest.mark.parametrize("n", [1, 10, 1000, 10**6])
def test_constant_trial_root_against_brentq(n):
    # U = lam^2 / (V (2m + chi)) for the constant profile
    p = PhysicalParams(1.0, 0.1, 0.9, n=n)
    V = SPHERE.volume
    f = lambda chi: chi_equation_lhs(chi, p, SPHERE) - n * p.lam**2 / (V * (2 * p.m + chi))
    want = optimize.brentq(f, -p.mu, 10 * math.sqrt(n) + 10, xtol=1e-14, rtol=1e-14)
    sol = solve_chi(TrialState.constant(SPHERE), p, SPHERE)
    assert_allclose(sol.chi, want, rtol=1e-8)
    assert_allclose(sol.E, n * p.m - sol.chi)


def test_zero_coupling_gives_free_energy():
    p = PhysicalParams(1.0, 0.3, 0.0, n=7)
    sol = solve_chi(TrialState.constant(SPHERE), p, SPHERE)
    assert_allclose(sol.E, 7 + 0.3, rtol=1e-12)


@pytest.mark.parametrize("man,trial", [
    (SPHERE, TrialState.constant(SPHERE)),
    (Manifold.torus(2.0, 3.0), TrialState.spectral(Manifold.torus(2.0, 3.0), {0: 0.8, 1: [0.6 / math.sqrt(2), -0.6 / math.sqrt(2)]})),
    (PLANE, TrialState.gaussian(PLANE, 1.0)),
    (Manifold.hyperbolic(1.0), TrialState.gaussian(Manifold.hyperbolic(1.0), 1.0)),
])
def test_energy_identity(man, trial):
    p = PhysicalParams(0.9, 0.2, 1.2, n=50)
    sol = solve_chi(trial, p, man)
    assert energy_identity_residual(sol, p) < 1e-10 * p.n * p.m
    assert sol.residual < 1e-8 * max(1.0, abs(sol.chi))
    if trial.kind != "constant":  # K[u] = 0 leaves the ratio undefined
        assert math.isfinite(cumulant_diagnostic(sol, p))


def test_constant_ansatz_printed_ratio_tends_to_one():
    p = PhysicalParams(1.0, 0.1, 1.0)
    ratios = [constant_ansatz(p.with_(n=n), SPHERE).ratio for n in (10**4, 10**5, 10**6)]
    assert all(0.9 <= r <= 1.1 for r in ratios)
    assert abs(ratios[0] - 1) > abs(ratios[1] - 1) > abs(ratios[2] - 1)


def test_constant_ansatz_printed_equation_residual():
    p = PhysicalParams(0.7, 0.2, 1.4, n=5000)
    res = constant_ansatz(p, SPHERE)
    d, V = res.delta, SPHERE.volume
    lhs = d + p.mu + p.m * p.lam**2 / (2 * math.pi) * math.log(d / (p.m - p.mu))
    assert_allclose(lhs, p.n * p.lam**2 / (V * d), rtol=1e-12)


def test_constant_ansatz_exact_matches_solver():
    p = PhysicalParams(1.0, 0.1, 1.0, n=10**4)
    exact = constant_ansatz(p, SPHERE, variant="exact")
    assert_allclose(exact.E, solve_chi(TrialState.constant(SPHERE), p, SPHERE).E, rtol=1e-12)


def test_asymptotic_formulas():
    p = PhysicalParams(1.0, 0.1, 2.0, n=400)
    assert_allclose(asymptotic_compact(p, SPHERE), 400.1 - 2 * math.sqrt(400 / (4 * math.pi)))
    assert_allclose(asymptotic_noncompact(p, 0.5), 400.1 - math.e * 4 * math.log(400))
    with pytest.raises(DomainError):
        asymptotic_noncompact(p.with_(n=1), 0.5)


@given(st.floats(10.0, 1e12))
def test_schedule_product_is_one(n):
    sched = sequence_schedule(n)
    assert sched.exact
    assert_allclose(sched.product, 1.0, rtol=1e-14)
    assert 0 < sched.eps < 0.5


def test_schedule_needs_large_n():
    with pytest.raises(DomainError):
        sequence_schedule(5.0)


@given(st.floats(0.01, 0.49), st.floats(1e-6, 1.0), st.floats(0.0, 100.0))
def test_appendix_bound_majorises_power(eps, delta, x):
    assert x ** (1 - eps) <= appendix_bound(eps, delta, x) * (1 + 1e-12)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("man", [SPHERE, Manifold.torus(2.0, 2.5)])
def test_upper_bound_chain_holds(seed, man):
    rng = np.random.default_rng(seed)
    p = PhysicalParams(1.0, 0.1, 1.0, n=int(10 ** rng.uniform(2, 5)))
    trial = few_mode_trial(man, p, rng, modes=3)
    sched = sequence_schedule(p.n)
    sol = solve_chi(trial, p, man)
    rep = upper_bound_chain(trial, sol.chi, p, man, sched.eps, sched.delta)
    assert rep.regime and rep.nK_v < 1
    assert rep.all_hold
    assert rep.cs_lhs <= rep.cs_rhs
    assert all(k <= c for k, c in zip(rep.kernel_sums, rep.kernel_caps))


def test_kernel_sums_cutoff_insensitive():
    p = PhysicalParams(1.0, 0.1, 1.0, n=1000)
    trial = TrialState.constant(SPHERE)
    a = upper_bound_chain(trial, 5.0, p, SPHERE, 0.2, 1e-3)
    b = upper_bound_chain(trial, 5.0, p, SPHERE, 0.2, 1e-3, spectral_cutoff=2000.0)
    assert_allclose(a.kernel_sums, b.kernel_sums, rtol=1e-3)


def test_log_fit_exact_line():
    n = np.array([1e2, 1e3, 1e4])
    c1, c2, rn = log_fit(n, 3.0 + 2.0 * np.log(n))
    assert_allclose([c1, c2], [3.0, 2.0])
    assert rn < 1e-12


def test_fixed_profile_sqrt_growth():
    # at large n a fixed profile gives chi ~ lam |u(a)| sqrt(n)
    man = Manifold.hyperbolic(1.0)
    p = PhysicalParams(1.0, 0.1, 1.0)
    fit = noncompact_growth(p, man, [10**5, 10**6], [1.0])[0]
    slope = fixed_profile_slope(TrialState.gaussian(man, 1.0), p)
    assert_allclose(fit.chi[-1] / (slope * math.sqrt(10**6)), 1.0, rtol=0.02)
