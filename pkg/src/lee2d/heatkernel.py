"""Heat kernels ``K_s(x, y; g)`` of ``exp((s/2m) Laplacian)`` on the four geometries.

The time argument ``s`` carries a mass: the physical diffusion time is
``t = s / (2m)``.  All evaluators broadcast over point arrays of shape
``(..., 2)`` and over ``s``.

Truncation rules
----------------
* torus: one-dimensional theta sums, image form for ``t/L**2 < 0.16`` and
  Fourier form otherwise, cut when the next term is below ``exp(-TAIL)``
  of the leading one.
* sphere: Legendre series cut at ``tau l(l+1) >= TAIL`` (``tau = t/R**2``);
  the tail of ``sum (2l+1) exp(-tau l(l+1))`` past ``L`` is at most
  ``exp(-tau L(L+1))/tau``.  On the diagonal, ``tau < 1e-4`` switches to the
  small-time expansion ``(1/tau)(1 + tau/3 + tau**2/15 + 4 tau**3/315 + tau**4/315)``
  whose first dropped term is ~1e-3 tau**5.
* hyperbolic plane: McKean's integral, with ``cosh r - cosh rho = w**2``
  removing the inverse square-root endpoint singularity, on an exp-sinh rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, UnsupportedError
from .geometry import Kind, Manifold, check_point, geodesic_distance, scale_point
from .quadrature import TAIL, exp_sinh_rule, gauss_legendre, laplace_grid

_EPS = np.finfo(float).eps
SPHERE_SERIES_TAU = 1e-4
MAX_LEGENDRE_TERMS = 200_000
_DE_W, _DE_WT = exp_sinh_rule(h=1.0 / 16.0)


@dataclass(frozen=True)
class HeatKernelQuery:
    man: Manifold
    x: tuple[float, float]
    y: tuple[float, float]
    s: float
    m: float

    def __post_init__(self):
        _check_sm(self.s, self.m)
        check_point(self.man, self.x)
        check_point(self.man, self.y)

    def evaluate(self) -> float:
        return float(heat_kernel(self.man, self.x, self.y, self.s, self.m))


def _check_sm(s, m):
    if not m > 0:
        raise DomainError(f"mass must be positive, got {m}")
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)) or np.any(~np.isfinite(s)):
        raise DomainError("heat-kernel time s must be positive and finite")
    return s


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


# -- plane ---------------------------------------------------------------------


def _plane(d, t):
    return np.exp(-(d * d) / (4.0 * t)) / (4.0 * math.pi * t)


# -- torus ---------------------------------------------------------------------


def _periodic_1d(x, t, L):
    """Heat kernel of d^2/dx^2 on a circle of length L (theta function)."""
    x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
    out = np.empty(x.shape)
    image = t / L**2 < 0.16
    if image.any():
        xi, ti = x[image], t[image]
        xi = np.mod(xi + 0.5 * L, L) - 0.5 * L
        kmax = int(math.ceil(math.sqrt(4.0 * TAIL * ti.max()) / L)) + 1
        k = np.arange(-kmax, kmax + 1) * L
        arg = (xi[:, None] + k) ** 2 / (4.0 * ti[:, None])
        out[image] = np.exp(-arg).sum(axis=1) / np.sqrt(4.0 * math.pi * ti)
    fourier = ~image
    if fourier.any():
        xf, tf = x[fourier], t[fourier]
        kmax = int(math.ceil(L * math.sqrt(TAIL / (4.0 * math.pi**2 * tf.min())))) + 1
        k = np.arange(1, kmax + 1)
        decay = np.exp(-4.0 * math.pi**2 * k**2 * tf[:, None] / L**2)
        wave = np.cos(2.0 * math.pi * k * xf[:, None] / L)
        out[fourier] = (1.0 + 2.0 * (decay * wave).sum(axis=1)) / L
    return out


def _periodic_1d_dt(x, t, L):
    """Time derivative of the circle kernel from its Fourier series."""
    x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
    kmax = int(math.ceil(L * math.sqrt(TAIL / (4.0 * math.pi**2 * t.min())))) + 2
    k = np.arange(1, kmax + 1)
    lam = 4.0 * math.pi**2 * k**2 / L**2
    terms = -lam * np.exp(-lam * t[..., None]) * np.cos(2.0 * math.pi * k * x[..., None] / L)
    return 2.0 * terms.sum(axis=-1) / L


def _torus(dx, dy, t, periods):
    L1, L2 = periods
    return _periodic_1d(dx, t, L1) * _periodic_1d(dy, t, L2)


# -- sphere --------------------------------------------------------------------


def _legendre_terms(tau):
    lmax = int(math.ceil(math.sqrt(TAIL / float(np.min(tau))))) + 1
    if lmax > MAX_LEGENDRE_TERMS:
        raise AccuracyError(
            f"sphere spectral sum needs {lmax} terms at tau={np.min(tau):.3e}",
            achieved=math.exp(-MAX_LEGENDRE_TERMS**2 * float(np.min(tau))) / float(np.min(tau)),
        )
    return lmax


def _sphere_diag_unit(tau):
    """``sum (2l+1) exp(-tau l(l+1))`` for an array of tau > 0."""
    tau = np.asarray(tau, float)
    out = np.empty(tau.shape)
    small = tau < SPHERE_SERIES_TAU
    if small.any():
        ts = tau[small]
        out[small] = (1.0 + ts / 3.0 + ts**2 / 15.0 + 4.0 * ts**3 / 315.0 + ts**4 / 315.0) / ts
    big = ~small
    if big.any():
        tb = tau[big]
        l = np.arange(_legendre_terms(tb) + 1)
        out[big] = ((2 * l + 1) * np.exp(-tb[:, None] * (l * (l + 1)))).sum(axis=1)
    return out


def _sphere_zonal(z, tau, weight=None):
    """``sum (2l+1) w_l P_l(z) exp(-tau l(l+1))`` by the three-term recurrence.

    Returns the sum and the sum of absolute values of the terms, which bounds
    the rounding error of the result.
    """
    z, tau = np.broadcast_arrays(np.asarray(z, float), np.asarray(tau, float))
    lmax = _legendre_terms(tau)
    p_prev = np.ones(z.shape)
    p = z.copy()
    w0 = 1.0 if weight is None else weight(0)
    total = w0 * np.ones(z.shape)
    absum = abs(w0) * np.ones(z.shape)
    for l in range(1, lmax + 1):
        wl = 1.0 if weight is None else weight(l)
        term = (2 * l + 1) * wl * p * np.exp(-tau * (l * (l + 1)))
        total += term
        absum += np.abs(term)
        p_prev, p = p, ((2 * l + 1) * z * p - l * p_prev) / (l + 1)
    return total, absum


def _sphere(cos_gamma, t, R, diagonal=False):
    tau = np.asarray(t, float) / R**2
    norm = 4.0 * math.pi * R**2
    if diagonal:
        return _sphere_diag_unit(tau) / norm
    val, absum = _sphere_zonal(cos_gamma, tau)
    return _clamp_nonnegative(val, absum) / norm


def _clamp_nonnegative(val, absum):
    # The kernel is positive; a negative sum within rounding of zero is zero.
    bound = 64.0 * _EPS * absum
    bad = val < -bound
    if np.any(bad):
        raise AccuracyError("spectral sum lost positivity beyond rounding", achieved=float(np.max(-val[bad])))
    return np.where(val < 0, 0.0, val)


# -- hyperbolic plane ----------------------------------------------------------


def _hyperbolic_unit(rho, t):
    """McKean kernel for curvature -1 and generator Laplacian (time t)."""
    rho, t = np.broadcast_arrays(np.asarray(rho, float), np.asarray(t, float))
    out = np.zeros(rho.shape)
    live = rho < 600.0
    if not live.any():
        return out
    r0, tt = rho[live], t[live]
    # r-shift over which the Gaussian factor drops by e, capped by the
    # unit decay of r/sinh r; w-scale is sqrt(cosh(rho + d) - cosh(rho))
    d = 4.0 * tt / (np.sqrt(r0 * r0 + 4.0 * tt) + r0)
    d = d / (1.0 + d)
    scale = np.sqrt(2.0 * np.sinh(r0 + 0.5 * d) * np.sinh(0.5 * d))
    w = scale[:, None] * _DE_W
    q = 2.0 * np.sinh(0.5 * r0)[:, None] ** 2 + w * w  # cosh r - 1
    r = np.log1p(q + np.sqrt(q * (q + 2.0)))
    with np.errstate(over="ignore", under="ignore"):
        f = 2.0 * (r / np.sinh(r)) * np.exp(-(r * r) / (4.0 * tt[:, None]))
    f = np.nan_to_num(f, nan=0.0, posinf=0.0)
    integral = (f * _DE_WT).sum(axis=1) * scale
    pref = math.sqrt(2.0) * np.exp(-0.25 * tt) / (4.0 * math.pi * tt) ** 1.5
    out[live] = pref * integral
    return out


def _hyperbolic(rho, t, R):
    return _hyperbolic_unit(np.asarray(rho) / R, np.asarray(t) / R**2) / R**2


# -- public evaluators -----------------------------------------------------------


def kernel_of_distance(man: Manifold, d, s, m: float):
    """Kernel as a function of geodesic distance (isotropic geometries only)."""
    s = _check_sm(s, m)
    t = s / (2.0 * m)
    if man.kind is Kind.PLANE:
        return _out(_plane(np.asarray(d, float), t))
    if man.kind is Kind.HYPERBOLIC:
        return _out(_hyperbolic(d, t, man.radius))
    if man.kind is Kind.SPHERE:
        return _out(_sphere(np.cos(np.asarray(d, float) / man.radius), t, man.radius))
    raise UnsupportedError("the torus kernel is not a function of distance alone")


def heat_kernel(man: Manifold, x, y, s, m: float):
    """``K_s(x, y; g)``, density with respect to the Riemannian area of ``y``."""
    s = _check_sm(s, m)
    x = check_point(man, x)
    y = check_point(man, y)
    t = s / (2.0 * m)
    if man.kind is Kind.TORUS:
        dx = x[..., 0] - y[..., 0]
        dy = x[..., 1] - y[..., 1]
        return _out(_torus(dx, dy, t, man.torus_periods))
    d = geodesic_distance(man, x, y)
    if man.kind is Kind.PLANE:
        return _out(_plane(d, t))
    if man.kind is Kind.SPHERE:
        cosg = np.cos(d / man.radius)
        return _out(_sphere(cosg, t, man.radius))
    return _out(_hyperbolic(d, t, man.radius))


def heat_kernel_diag(man: Manifold, x, s, m: float):
    """``K_s(x, x; g)``; all four geometries are homogeneous so x only gets validated."""
    s = _check_sm(s, m)
    check_point(man, x)
    return _out(_diag(man, s / (2.0 * m)))


def _diag(man, t):
    t = np.asarray(t, float)
    if man.kind is Kind.PLANE:
        return 1.0 / (4.0 * math.pi * t)
    if man.kind is Kind.TORUS:
        L1, L2 = man.torus_periods
        z = np.zeros(t.shape)
        return _periodic_1d(z, t, L1) * _periodic_1d(z, t, L2)
    if man.kind is Kind.SPHERE:
        return _sphere(None, t, man.radius, diagonal=True)
    return _hyperbolic(np.zeros(t.shape), t, man.radius)


def diag_leading_ratio(man: Manifold, x, s, m: float):
    """``K_s(x,x) * 4 pi s / 2m``: tends to the universal ``u_0 = 1`` as s -> 0."""
    s = np.asarray(s, float)
    return _out(np.asarray(heat_kernel_diag(man, x, s, m)) * 4.0 * math.pi * s / (2.0 * m))


class DiagonalKernel:
    """``s -> K_s(a, a; g)`` for fixed geometry, source point and mass."""

    def __init__(self, man: Manifold, a, m: float):
        if not m > 0:
            raise DomainError(f"mass must be positive, got {m}")
        check_point(man, a)
        self.man, self.a, self.m = man, a, m

    def __call__(self, s):
        return _diag(self.man, np.asarray(s, float) / (2.0 * self.m))


class DiagonalIntegrator:
    """Tabulates ``K_s(a,a)`` on a Laplace grid so s-integrals become dot products.

    Every improper s-integral of the diagonal kernel in the package goes
    through this class.  Two Gauss orders are kept on the same panels; their
    difference is reported as the quadrature residual.

    Parameters
    ----------
    rates : iterable of float
        Exponential decay rates appearing in the integrands.
    s_lo : float
        Lower integration limit (0 for the full half line).
    """

    def __init__(self, man: Manifold, a, m: float, rates, s_lo: float = 0.0, order: int = 12):
        self.kernel = DiagonalKernel(man, a, m)
        self.s, self.w = laplace_grid(rates, s_lo=s_lo, order=order)
        self.s2, self.w2 = laplace_grid(rates, s_lo=s_lo, order=order - 4)
        self.k = self.kernel(self.s)
        self.k2 = self.kernel(self.s2)
        self.rates = tuple(rates)

    def integrate(self, g):
        """``int K_s(a,a) g(s) ds`` and a residual bound; ``g`` is vectorised."""
        v1 = float(np.dot(self.w * self.k, g(self.s)))
        v2 = float(np.dot(self.w2 * self.k2, g(self.s2)))
        return v1, abs(v1 - v2)


# -- structural checks -------------------------------------------------------------


def _sphere_grid(R, degree):
    nt = degree // 2 + 2
    nphi = degree + 2
    z, wz = gauss_legendre(-1.0, 1.0, nt)
    phi = 2.0 * math.pi * np.arange(nphi) / nphi
    theta = np.arccos(z)
    pts = np.stack(np.broadcast_arrays(theta[:, None], phi[None, :]), axis=-1).reshape(-1, 2)
    w = (wz[:, None] * np.full(nphi, 2.0 * math.pi / nphi)[None, :]).ravel() * R**2
    return pts, w


def _sphere_degree(t, R):
    return 2 * (int(math.ceil(math.sqrt(TAIL / (t / R**2)))) + 1)


def _torus_grid(periods, t):
    L1, L2 = periods
    n = []
    for L in (L1, L2):
        kmax = L * math.sqrt(TAIL / (4.0 * math.pi**2 * t))
        n.append(max(32, int(2 * math.ceil(kmax)) + 4))
    g1 = (np.arange(n[0]) + 0.5) * L1 / n[0]
    g2 = (np.arange(n[1]) + 0.5) * L2 / n[1]
    pts = np.stack(np.meshgrid(g1, g2, indexing="ij"), axis=-1).reshape(-1, 2)
    w = np.full(len(pts), L1 * L2 / (n[0] * n[1]))
    return pts, w


def _radial_rule(R, t):
    """GL panels in geodesic radius covering the hyperbolic kernel's mass (drift t/R)."""
    tr = t / R**2
    rho_max = tr + 14.0 * math.sqrt(tr) + 1e-3
    panels = max(4, int(math.ceil(rho_max / min(0.5, math.sqrt(tr)))))
    x, wx = gauss_legendre(0.0, 1.0, 16)
    edges = np.linspace(0.0, rho_max, panels + 1)
    h = np.diff(edges)[:, None]
    return R * (edges[:-1, None] + h * x).ravel(), R * (h * wx).ravel()


def _hyperbolic_polar_points(R, centre, rho, phi):
    """Chart coordinates of the points at distance ``rho``, angle ``phi`` from ``centre``.

    Uses the hyperboloid isometry that moves the origin to ``centre``.
    """
    RHO, PHI = np.meshgrid(rho / R, phi, indexing="ij")
    p0, p1, p2 = np.cosh(RHO), np.sinh(RHO) * np.cos(PHI), np.sinh(RHO) * np.sin(PHI)
    rc, tc = centre[0] / R, centre[1]
    q0 = math.cosh(rc) * p0 + math.sinh(rc) * p1
    q1 = math.sinh(rc) * p0 + math.cosh(rc) * p1
    X1 = math.cos(tc) * q1 - math.sin(tc) * p2
    X2 = math.sin(tc) * q1 + math.cos(tc) * p2
    theta = np.mod(np.arctan2(X2, X1), 2.0 * math.pi)
    theta = np.where(theta >= 2.0 * math.pi, 0.0, theta)
    return np.stack([R * np.arccosh(np.maximum(q0, 1.0)), theta], axis=-1)


def _hyperbolic_semigroup(man, x, z, s1, s2, m):
    R = man.radius
    t1, t2 = s1 / (2.0 * m), s2 / (2.0 * m)
    rho, wr = _radial_rule(R, t1)
    d = float(geodesic_distance(man, x, z)) / R
    # K_s2(y, z) varies in phi on the scale sqrt(t2)/d
    nphi = int(min(2048, max(64, math.ceil(12.0 * math.pi * (d + 1.0) / math.sqrt(min(t1, t2) / R**2)))))
    phi = 2.0 * math.pi * np.arange(nphi) / nphi
    k1 = kernel_of_distance(man, rho, s1, m) * wr * R * np.sinh(rho / R) * (2.0 * math.pi / nphi)
    total = 0.0
    step = max(1, 20_000 // nphi)
    for i in range(0, rho.size, step):
        pts = _hyperbolic_polar_points(R, x, rho[i:i + step], phi)
        k2 = heat_kernel(man, pts, z, s2, m)
        total += float(np.dot(k1[i:i + step], np.asarray(k2).sum(axis=1)))
    return total


def _area_rule(man, t_min, centre=None, width=None):
    if man.kind is Kind.SPHERE:
        return _sphere_grid(man.radius, _sphere_degree(t_min, man.radius))
    if man.kind is Kind.TORUS:
        return _torus_grid(man.torus_periods, t_min)
    if man.kind is Kind.PLANE:
        u, wu = np.polynomial.hermite.hermgauss(60)
        x = centre[0] + math.sqrt(2.0) * width * u
        y = centre[1] + math.sqrt(2.0) * width * u
        pts = np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1).reshape(-1, 2)
        gauss = np.exp(-(u[:, None] ** 2 + u[None, :] ** 2)).ravel()
        w = (wu[:, None] * wu[None, :]).ravel() * 2.0 * width**2 / gauss
        return pts, w
    raise UnsupportedError(f"no area quadrature for {man.kind.value}")


def stochastic_completeness_check(man: Manifold, y, s: float, m: float, tol: float = 1e-8) -> float:
    """Bound on ``|int K_s(x, y) dx - 1|`` from a product quadrature over x."""
    _check_sm(s, m)
    y = check_point(man, y)
    t = s / (2.0 * m)
    if man.kind is Kind.HYPERBOLIC:
        # homogeneous and isotropic: the integral about y is radial
        rho, wr = _radial_rule(man.radius, t)
        jac = 2.0 * math.pi * man.radius * np.sinh(rho / man.radius)
        total = float(np.dot(wr * jac, kernel_of_distance(man, rho, s, m)))
    else:
        pts, w = _area_rule(man, t, centre=y, width=math.sqrt(2.0 * t))
        total = float(np.dot(w, heat_kernel(man, pts, y, s, m)))
    residual = abs(total - 1.0)
    if not math.isfinite(residual):
        raise AccuracyError("stochastic completeness quadrature failed")
    return residual


def semigroup_check(man: Manifold, x, z, s1: float, s2: float, m: float) -> float:
    """``|int K_s1(x,y) K_s2(y,z) dy - K_{s1+s2}(x,z)|``."""
    _check_sm([s1, s2], m)
    x = check_point(man, x)
    z = check_point(man, z)
    t1, t2 = s1 / (2.0 * m), s2 / (2.0 * m)
    if man.kind is Kind.HYPERBOLIC:
        # polar rule about x: K_s1(x, .) confines y near x whatever K_s2 does
        conv = _hyperbolic_semigroup(man, x, z, s1, s2, m)
    else:
        centre = (t2 * x + t1 * z) / (t1 + t2)
        width = math.sqrt(2.0 * t1 * t2 / (t1 + t2))
        pts, w = _area_rule(man, min(t1, t2), centre=centre, width=width)
        conv = float(np.dot(w, heat_kernel(man, x, pts, s1, m) * heat_kernel(man, pts, z, s2, m)))
    return abs(conv - float(heat_kernel(man, x, z, s1 + s2, m)))


def scaling_check(man: Manifold, x, y, s: float, m: float, alpha: float) -> float:
    """``|K_s(x,y;g) - alpha**2 K_{alpha**2 s}(x,y;alpha**2 g)|``."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    lhs = heat_kernel(man, x, y, s, m)
    big = man.scaled(alpha)
    rhs = alpha**2 * heat_kernel(big, scale_point(man, x, alpha), scale_point(man, y, alpha), alpha**2 * s, m)
    return float(np.max(np.abs(np.asarray(lhs) - np.asarray(rhs))))


def heat_equation_check(man: Manifold, x, y, s: float, m: float, rel_step: float = 1e-4) -> float:
    """Relative mismatch between a centred s-difference of K and ``(1/2m) Laplacian K``.

    The Laplacian side is independent of the difference quotient: spectral
    for sphere and torus, analytic for the plane, and a radial finite
    difference of the McKean kernel for the hyperbolic plane.
    """
    _check_sm(s, m)
    h = rel_step * s
    k_plus = heat_kernel(man, x, y, s + h, m)
    k_minus = heat_kernel(man, x, y, s - h, m)
    fd = (k_plus - k_minus) / (2.0 * h)
    t = s / (2.0 * m)
    x, y = check_point(man, x), check_point(man, y)
    if man.kind is Kind.PLANE:
        d = geodesic_distance(man, x, y)
        lap = _plane(d, t) * (d * d / (4.0 * t * t) - 1.0 / t)
    elif man.kind is Kind.SPHERE:
        R = man.radius
        z = np.cos(geodesic_distance(man, x, y) / R)
        tau = t / R**2
        val, _ = _sphere_zonal(z, tau, weight=lambda l: -l * (l + 1))
        lap = val / (4.0 * math.pi * R**4)
    elif man.kind is Kind.TORUS:
        L1, L2 = man.torus_periods
        dx, dy = x[..., 0] - y[..., 0], x[..., 1] - y[..., 1]
        lap = (_periodic_1d_dt(dx, t, L1) * _periodic_1d(dy, t, L2)
               + _periodic_1d(dx, t, L1) * _periodic_1d_dt(dy, t, L2))
    else:
        R = man.radius
        rho = float(geodesic_distance(man, x, y)) / R
        tau = t / R**2
        dr = 1e-3 * max(math.sqrt(tau), 1e-3)
        if rho < 2 * dr:
            # at the origin the radial Laplacian is 2 K''(0)
            k0, k1, k2 = _hyperbolic_unit(np.array([0.0, dr, 2 * dr]), tau)
            lap = 2.0 * (-k2 + 16 * k1 - 15 * k0) / (6.0 * dr * dr) / R**4
        else:
            rr = rho + dr * np.arange(-2, 3)
            k = _hyperbolic_unit(rr, tau)
            d2 = (-k[4] + 16 * k[3] - 30 * k[2] + 16 * k[1] - k[0]) / (12 * dr * dr)
            d1 = (-k[4] + 8 * k[3] - 8 * k[1] + k[0]) / (12 * dr)
            lap = (d2 + d1 / math.tanh(rho)) / R**4
    lap = np.asarray(lap) / (2.0 * m)
    scale = np.maximum(np.abs(lap), np.asarray(heat_kernel(man, x, y, s, m)) / s)
    return float(np.max(np.abs(fd - lap) / scale))


@dataclass(frozen=True)
class DiagonalBoundReport:
    geometry_class: str  # "cartan_hadamard" or "compact"
    constant: float  # C or A
    holds: bool
    grid_max: float
    worst_s: float
    decades: float


def diagonal_bound_check(man: Manifold, s_grid, m: float) -> DiagonalBoundReport:
    """Smallest constant making the diagonal upper bound hold on the grid.

    Cartan-Hadamard: ``K_s(x,x) <= C / (s/2m)``.  Compact:
    ``K_s(x,x) <= 1/V + A / (s/2m)``.  The s -> 0 limit of both scaled
    diagonals is the universal ``1/(4 pi)``, so that value is included as a
    grid point at ``s = 0+``; a constant below it cannot be valid for all s.
    """
    s = _check_sm(s_grid, m).ravel()
    decades = math.log10(s.max() / s.min()) if s.size > 1 else 0.0
    if decades < 6.0 - 1e-9:
        raise DomainError(f"s-grid spans {decades:.2f} decades; at least 6 are required")
    t = s / (2.0 * m)
    k = _diag(man, t)
    if man.compact:
        scaled = (k - 1.0 / man.volume) * t
        cls = "compact"
    else:
        scaled = k * t
        cls = "cartan_hadamard"
    i = int(np.argmax(scaled))
    const = max(float(scaled[i]), 1.0 / (4.0 * math.pi))
    bound = (1.0 / man.volume if man.compact else 0.0) + const / t
    holds = bool(np.all(k <= bound * (1.0 + 1e-12)))
    return DiagonalBoundReport(cls, const, holds, float(scaled[i]), float(s[i]), decades)
