import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy import optimize

from lee2d.analysis import (InequalityParams, appendix_f, appendix_min_closed_form, appendix_minimizer,
                            appendix_minimum_suite, appendix_positivity_suite, beta_identity_check,
                            domain_divergence_diagnostic, exp_integral_identity_check, feynman_param_check,
                            identity_suite, power_inequality_suite)
from lee2d.errors import DomainError
from lee2d.geometry import Manifold
from lee2d.renorm import PhysicalParams

from conftest import GEOMETRIES

eps_st = st.floats(0.01, 0.49)
delta_st = st.floats(1e-6, 10.0)


def test_appendix_f_worked_value():
    # direct evaluation: 0.1 + 2.5**(1/3) - 1
    want = 0.1 + 2.5 ** (1.0 / 3.0) - 1.0
    assert_allclose(appendix_f(1.0, 0.25, 0.1), want, rtol=1e-15)
    assert_allclose(appendix_f(InequalityParams(1.0, 0.25, 0.1)), want, rtol=1e-15)


@pytest.mark.parametrize("bad", [(1.0, 0.5, 0.1), (1.0, 0.0, 0.1), (1.0, 0.2, 0.0), (-1.0, 0.2, 0.1)])
def test_appendix_domain(bad):
    with pytest.raises(DomainError):
        appendix_f(*bad)
    with pytest.raises(DomainError):
        InequalityParams(*bad)


@given(st.floats(1e-4, 1e4), eps_st, delta_st)
def test_appendix_f_positive(x, eps, delta):
    assert appendix_f(x, eps, delta) > 0


@given(eps_st, st.floats(1e-3, 10.0))
def test_minimiser_is_stationary_and_matches_closed_form(eps, delta):
    xs = float(appendix_minimizer(eps, delta))
    res = optimize.minimize_scalar(lambda lx: appendix_f(math.exp(lx), eps, delta),
                                   bracket=(math.log(xs) - 1, math.log(xs) + 1), tol=1e-12)
    assert appendix_f(xs, eps, delta) <= res.fun * (1 + 1e-9)
    assert_allclose(appendix_f(xs, eps, delta), appendix_min_closed_form(eps, delta), rtol=1e-9)
    assert appendix_f(xs, eps, delta) > delta * eps


def test_property_suites_pass():
    for rep in (appendix_positivity_suite(20_000), appendix_minimum_suite(5_000), power_inequality_suite(5_000)):
        assert rep.passed, rep
        assert rep.min_margin > 0


@given(st.floats(1e-3, 1e3), st.floats(0.01, 0.49))
def test_feynman_parametrisations(sigma, eps):
    for chk in feynman_param_check(sigma, eps):
        assert chk.passed, chk
        if sigma >= 0.05:  # a fixed Jacobi rule cannot resolve (u + sigma)**-3 for tiny sigma
            assert chk.cross_route < 1e-6


@given(st.floats(0.01, 0.5))
def test_beta_identities(eps):
    for chk in beta_identity_check(eps):
        assert chk.passed, chk
    assert_allclose(beta_identity_check(eps)[0].exact, math.pi / math.sin(math.pi * eps))


@given(st.floats(0.1, 10.0), st.floats(-0.9, 3.0))
def test_exp_integral_identity(a, k):
    chk = exp_integral_identity_check(a, k)
    assert chk.passed, chk
    assert chk.cross_route < 1e-9


def test_identity_suite_report_shape():
    rep = identity_suite(seed=3, draws=5000, min_draws=1000, param_draws=4)
    assert rep["passed"]
    assert set(rep["identities"]) == {"feynman_1", "feynman_2", "beta_reflection", "beta_half_half",
                                      "sin_lower_bound", "exp_integral"}


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
def test_divergence_diagnostic(name):
    p = PhysicalParams(0.8, 0.1, 1.0)
    rep = domain_divergence_diagnostic(p, GEOMETRIES[name], delta=2.0)
    assert rep.passed, rep
    assert_allclose(rep.expected_slope, 0.8 / (2 * math.pi))


def test_divergence_plane_exact():
    # on the plane the cut-off integral is (m/2 pi) E1(eps Delta)
    from scipy.special import exp1
    p = PhysicalParams(1.0, 0.1, 1.0)
    rep = domain_divergence_diagnostic(p, Manifold.plane(), delta=3.0)
    assert_allclose(rep.cutoff_integrals, [exp1(3.0 * e) / (2 * math.pi) for e in rep.eps], rtol=1e-10)
    assert_allclose(rep.companion_full, 1 / (2 * math.pi), rtol=1e-10)


def test_divergence_grid_too_narrow():
    with pytest.raises(DomainError):
        domain_divergence_diagnostic(PhysicalParams(1.0, 0.1, 1.0), Manifold.plane(), 1.0, eps_grid=[1e-3, 1e-2])
