import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from lee2d.errors import DomainError, UnsupportedError
from lee2d.geometry import Kind, Manifold, check_point, geodesic_distance, scale_point, spectrum


def test_kind_aliases_and_describe():
    assert Manifold("hyperbolic_plane", radius=2.0).kind is Kind.HYPERBOLIC
    assert Manifold.torus(1, 2).describe() == {"kind": "torus", "periods": [1.0, 2.0]}
    assert Manifold.sphere(3.0).describe() == {"kind": "sphere", "radius": 3.0}
    assert Manifold.plane().describe() == {"kind": "plane"}


@pytest.mark.parametrize("bad", [
    lambda: Manifold("cylinder"),
    lambda: Manifold.sphere(0.0),
    lambda: Manifold.hyperbolic(-1.0),
    lambda: Manifold.torus(1.0, math.inf),
    lambda: Manifold(Kind.PLANE, radius=1.0),
    lambda: Manifold(Kind.SPHERE, radius=1.0, torus_periods=(1.0, 1.0)),
])
def test_invalid_manifolds_rejected(bad):
    with pytest.raises(DomainError):
        bad()


def test_volumes_and_classes():
    assert_allclose(Manifold.sphere(2.0).volume, 16 * math.pi)
    assert Manifold.torus(2.0, 3.0).volume == 6.0
    assert Manifold.plane().volume == math.inf
    assert Manifold.sphere().compact and not Manifold.sphere().cartan_hadamard
    assert Manifold.hyperbolic().cartan_hadamard and not Manifold.hyperbolic().compact


def test_points_outside_chart_rejected():
    with pytest.raises(DomainError):
        check_point(Manifold.sphere(), (4.0, 0.0))
    with pytest.raises(DomainError):
        check_point(Manifold.hyperbolic(), (-1.0, 0.0))


def test_sphere_distance_quarter_circle():
    man = Manifold.sphere(2.0)
    assert_allclose(geodesic_distance(man, (0.0, 0.0), (math.pi / 2, 0.0)), math.pi, rtol=1e-14)


def test_torus_distance_wraps():
    man = Manifold.torus(2.0, 3.0)
    assert_allclose(geodesic_distance(man, (0.1, 0.0), (1.9, 0.0)), 0.2, rtol=1e-12)


def test_hyperbolic_distance_from_origin_is_radial():
    man = Manifold.hyperbolic(1.5)
    assert_allclose(geodesic_distance(man, (0.0, 0.0), (0.7, 1.1)), 0.7, rtol=1e-13)


@given(st.floats(0.1, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 2 * math.pi, exclude_max=True),
       st.floats(0.0, 3.0), st.floats(0.0, 2 * math.pi, exclude_max=True))
def test_hyperbolic_distance_symmetric(R, r1, t1, r2, t2):
    man = Manifold.hyperbolic(R)
    a, b = (r1, t1), (r2, t2)
    assert_allclose(geodesic_distance(man, a, b), geodesic_distance(man, b, a), rtol=1e-12, atol=1e-12)


@given(st.floats(0.2, 5.0))
def test_scale_point_preserves_scaled_distance(alpha):
    man = Manifold.sphere(1.3)
    x, y = (0.4, 0.2), (1.7, 2.5)
    d = geodesic_distance(man, x, y)
    big = man.scaled(alpha)
    d_big = geodesic_distance(big, scale_point(man, x, alpha), scale_point(man, y, alpha))
    assert_allclose(d_big, alpha * d, rtol=1e-12)


def test_sphere_spectrum_classes():
    modes = spectrum(Manifold.sphere(2.0), 12.0 / 4.0)
    assert [m.multiplicity for m in modes] == [1, 3, 5, 7]
    assert_allclose([m.eigenvalue for m in modes], [0.0, 0.5, 1.5, 3.0])


def test_torus_spectrum_degeneracy():
    L = 2 * math.pi
    modes = spectrum(Manifold.torus(L, L), 2.0)
    assert [(m.eigenvalue, m.multiplicity) for m in modes] == [(0.0, 1), (1.0, 4), (2.0, 4)]


def test_noncompact_spectrum_unsupported():
    with pytest.raises(UnsupportedError):
        spectrum(Manifold.plane(), 1.0)


@pytest.mark.parametrize("man", [Manifold.sphere(1.7), Manifold.torus(2.0, 3.0)])
def test_eigenfunction_addition_theorem(man):
    x = (0.8, 1.3)
    for mode in spectrum(man, 30.0):
        vals = np.asarray(mode.eigenfunction_at(x))
        assert vals.shape[0] == mode.multiplicity
        assert_allclose(np.sum(vals**2), mode.density_at(x), rtol=1e-12)
