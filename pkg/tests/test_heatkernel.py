import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, special

from lee2d.bounds import default_s_grid
from lee2d.errors import DomainError
from lee2d.geometry import Manifold
from lee2d.heatkernel import (HeatKernelQuery, diagonal_bound_check, heat_equation_check, heat_kernel,
                              heat_kernel_diag, scaling_check, semigroup_check, stochastic_completeness_check)

from conftest import GEOMETRIES, plane_kernel

POINTS = {
    "plane": ((0.3, -0.2), (1.0, 0.4)),
    "torus": ((0.3, 0.2), (1.5, 2.4)),
    "sphere": ((0.7, 0.5), (1.9, 3.1)),
    "hyperbolic": ((0.4, 0.3), (1.1, 2.0)),
}

NEAR = {
    "plane": ((0.3, -0.2), (0.5, 0.0)),
    "torus": ((0.3, 0.2), (0.6, 0.4)),
    "sphere": ((0.7, 0.5), (1.0, 0.9)),
    "hyperbolic": ((0.4, 0.3), (0.6, 0.9)),
}


def torus_images(dx, dy, t, L1, L2, k=80):
    # direct lattice sum of plane kernels
    j = np.arange(-k, k + 1)
    gx = np.exp(-(dx + j * L1) ** 2 / (4 * t)).sum()
    gy = np.exp(-(dy + j * L2) ** 2 / (4 * t)).sum()
    return gx * gy / (4 * math.pi * t)


def sphere_series(z, t, R, lmax=400):
    ls = np.arange(lmax + 1)
    return np.sum((2 * ls + 1) * np.exp(-ls * (ls + 1) * t / R**2) * special.eval_legendre(ls, z)) / (4 * math.pi * R**2)


def mckean(rho, t):
    # unit-curvature kernel, integral representation, integrated with QUADPACK
    pref = math.sqrt(2.0) * math.exp(-t / 4) / (4 * math.pi * t) ** 1.5

    def core(u):
        # (rho+u) exp(-(rho+u)^2/4t) sqrt(u / (cosh(rho+u) - cosh(rho)))
        half = 0.5 * u
        ratio = 1.0 if half == 0 else half / math.sinh(half)
        return (rho + u) * math.exp(-(rho + u) ** 2 / (4 * t)) * math.sqrt(ratio / math.sinh(rho + half))

    if rho == 0.0:
        f = lambda u: u * math.exp(-u * u / (4 * t)) / (math.sqrt(2.0) * math.sinh(0.5 * u)) if u else math.sqrt(2.0)
        val, _ = integrate.quad(f, 0, 40 * math.sqrt(t) + 10, epsabs=0, epsrel=1e-13, limit=200)
        return pref * val
    head, _ = integrate.quad(core, 0, 1.0, weight="alg", wvar=(-0.5, 0.0), epsabs=0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(lambda u: core(u) / math.sqrt(u), 1.0, 40 * math.sqrt(t) + 10, epsabs=0, epsrel=1e-13, limit=200)
    return pref * (head + tail)


@given(st.floats(0.0, 5.0), st.floats(1e-3, 10.0), st.floats(0.1, 4.0))
def test_plane_closed_form(d, s, m):
    man = Manifold.plane()
    assert_allclose(heat_kernel(man, (0.0, 0.0), (d, 0.0), s, m), plane_kernel(d, s, m), rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("s", [0.01, 0.3, 2.0, 20.0])
def test_torus_against_image_sum(s):
    man = Manifold.torus(2.0, 3.0)
    x, y = POINTS["torus"]
    m = 0.7
    t = s / (2 * m)
    want = torus_images(x[0] - y[0], x[1] - y[1], t, 2.0, 3.0)
    assert_allclose(heat_kernel(man, x, y, s, m), want, rtol=1e-12)


@pytest.mark.parametrize("s", [0.02, 0.2, 2.0, 10.0])
def test_sphere_against_legendre_series(s):
    R, m = 1.3, 0.5
    man = Manifold.sphere(R)
    x, y = POINTS["sphere"]
    z = (np.cos(x[0]) * np.cos(y[0]) + np.sin(x[0]) * np.sin(y[0]) * np.cos(x[1] - y[1]))
    want = sphere_series(z, s / (2 * m), R)
    assert_allclose(heat_kernel(man, x, y, s, m), want, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("rho,t", [(0.0, 0.05), (0.5, 0.2), (1.0, 1.0), (3.0, 2.5), (0.2, 8.0)])
def test_hyperbolic_against_mckean_quadpack(rho, t):
    man = Manifold.hyperbolic(1.0)
    got = heat_kernel(man, (0.0, 0.0), (rho, 0.0), 2 * t, 1.0)
    assert_allclose(got, mckean(rho, t), rtol=1e-8)


def test_query_object_and_domain_errors():
    q = HeatKernelQuery(Manifold.plane(), (0.0, 0.0), (0.0, 0.0), 1.0, 0.5)
    assert_allclose(q.evaluate(), 1 / (4 * math.pi))
    with pytest.raises(DomainError):
        heat_kernel(Manifold.plane(), (0, 0), (0, 0), 0.0, 1.0)
    with pytest.raises(DomainError):
        heat_kernel(Manifold.plane(), (0, 0), (0, 0), 1.0, -1.0)


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
def test_symmetry_and_positivity(name):
    man = GEOMETRIES[name]
    x, y = POINTS[name]
    for s in np.logspace(-3, 2, 11):
        kxy = heat_kernel(man, x, y, s, 0.8)
        kyx = heat_kernel(man, y, x, s, 0.8)
        assert kxy >= 0
        assert abs(kxy - kyx) <= 1e-12 * max(kxy, 1e-300)


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
def test_stochastic_completeness(name):
    man = GEOMETRIES[name]
    for s in (0.01, 0.5, 5.0):
        assert stochastic_completeness_check(man, POINTS[name][1], s, 0.6) < 1e-8


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
@pytest.mark.parametrize("s1,s2", [(0.02, 0.03), (0.4, 0.7), (3.0, 1.0)])
def test_semigroup(name, s1, s2):
    man = GEOMETRIES[name]
    x, z = NEAR[name]
    k = heat_kernel(man, x, z, s1 + s2, 0.5)
    assert semigroup_check(man, x, z, s1, s2, 0.5) < 1e-6 * k


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
@given(alpha=st.floats(0.3, 4.0), s=st.floats(0.01, 5.0))
def test_scaling_law(name, alpha, s):
    man = GEOMETRIES[name]
    x, y = POINTS[name]
    k = heat_kernel(man, x, y, s, 0.5)
    assert scaling_check(man, x, y, s, 0.5, alpha) <= 1e-10 * max(k, 1e-300) + 1e-300


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
@pytest.mark.parametrize("s", [0.05, 1.0, 10.0])
def test_heat_equation_residual(name, s):
    # a relative residual is only meaningful where K is not far below K(x,x)
    x, y = NEAR[name]
    assert heat_equation_check(GEOMETRIES[name], x, y, s, 0.5) < 1e-6


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
def test_diagonal_bounds_hold(name):
    man = GEOMETRIES[name]
    rep = diagonal_bound_check(man, default_s_grid(man, 1.0), 1.0)
    assert rep.holds
    assert rep.decades >= 6
    assert rep.constant >= 1 / (4 * math.pi)
    if name == "plane":
        assert_allclose(rep.constant, 1 / (4 * math.pi), rtol=1e-12)


def test_diagonal_bound_needs_six_decades():
    with pytest.raises(DomainError):
        diagonal_bound_check(Manifold.plane(), np.logspace(-2, 2, 10), 1.0)


@pytest.mark.parametrize("name", sorted(GEOMETRIES))
def test_short_time_diagonal_is_universal(name):
    man = GEOMETRIES[name]
    s, m = 1e-6, 1.0
    t = s / (2 * m)
    assert_allclose(heat_kernel_diag(man, POINTS[name][0], s, m) * 4 * math.pi * t, 1.0, rtol=1e-5)
