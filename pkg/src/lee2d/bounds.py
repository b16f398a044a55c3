"""Ground-state lower bounds from the operator-norm estimate.

The norm functional is

    N(E) = n lam**2 / pi  int_0^inf ds s exp(-s Delta)
           int_{u1+u2<=1} du1 du2 (u1 u2)**-1/2 sqrt(K_{2s(1-u2)} K_{2s(1-u1)}),

with ``Delta = n m + mu - E`` and the third simplex variable eliminated.
Substituting ``u = sin(theta)**2`` absorbs the inverse square roots and maps
the simplex onto the triangle ``theta1 + theta2 <= pi/2``; writing the
diagonal as ``K_tau = (2m / 4 pi tau) h(tau)`` cancels the ``1/s`` as well,
leaving the smooth integrand

    N(E) = n lam**2 m / pi**2  int ds exp(-s Delta)
           int_T dtheta1 dtheta2 sqrt(h(2s cos^2 theta1) h(2s cos^2 theta2)).

On the plane ``h = 1`` and ``N = n lam**2 m / (8 Delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import Kind, Manifold, check_point
from .heatkernel import DiagonalKernel, diagonal_bound_check
from .quadrature import chebyshev_in_log, laplace_grid, triangle_rule
from .renorm import PhysicalParams

OVERFLOW_GAP = 1e-12


@dataclass(frozen=True)
class NormBound:
    value: float
    residual: float
    overflow: bool = False


@dataclass(frozen=True)
class BoundReport:
    geometry_class: str
    C: float | None
    C_tilde: float | None
    A: float | None
    F: float | None
    lower_bound: float
    norm_bound_at_E: float
    E: float
    chain_bound_at_E: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _scaled_diag(man, a, m):
    kern = DiagonalKernel(man, a, m)

    def h(tau):
        return kern(tau) * 4.0 * math.pi * tau / (2.0 * m)

    if man.kind not in (Kind.SPHERE, Kind.HYPERBOLIC):
        return h
    # series and McKean values are expensive; interpolate ln h instead
    return lambda tau: chebyshev_in_log(h, np.ravel(tau), log_values=True).reshape(np.shape(tau))


def _norm_integral(h, delta, n_theta, order):
    th1, th2, wt = triangle_rule(0.5 * math.pi, n_theta)
    c1, c2 = np.cos(th1) ** 2, np.cos(th2) ** 2
    s, ws = laplace_grid([delta], order=order)
    # h on the distinct arguments only; th1 repeats across the collapsed rule
    u1, inv1 = np.unique(c1, return_inverse=True)
    h1 = h(2.0 * s[:, None] * u1[None, :])[:, inv1]
    h2 = h(2.0 * s[:, None] * c2[None, :])
    inner = (np.sqrt(h1 * h2) * wt).sum(axis=1)
    return float(np.dot(ws * np.exp(-s * delta), inner))


def norm_bound_U(E: float, p: PhysicalParams, man: Manifold, n_theta: int = 16) -> NormBound:
    """Quadrature value of the norm bound at energy ``E``.

    Returns a tagged infinite result when ``n m + mu - E`` is below
    ``1e-12 m``; raises for ``E`` above ``n m + mu``.
    """
    check_point(man, p.a)
    delta = p.n * p.m + p.mu - E
    if not math.isfinite(delta) or delta < 0:
        raise DomainError(f"E={E} must lie below n m + mu = {p.n * p.m + p.mu}")
    if delta < OVERFLOW_GAP * p.m:
        return NormBound(math.inf, 0.0, overflow=True)
    if p.lam == 0.0 or p.n == 0:
        return NormBound(0.0, 0.0)
    h = _scaled_diag(man, p.a, p.m)
    pref = p.n * p.lam**2 * p.m / math.pi**2
    fine = _norm_integral(h, delta, n_theta, 12)
    coarse = _norm_integral(h, delta, max(4, n_theta - 6), 8)
    return NormBound(pref * fine, pref * abs(fine - coarse))


def cartan_chain_bound(E: float, p: PhysicalParams, C: float) -> float:
    """Closed-form loosening ``n C m pi lam**2 / (n m + mu - E)`` of the norm bound."""
    delta = p.n * p.m + p.mu - E
    if delta <= 0:
        return math.inf
    return p.n * C * p.m * math.pi * p.lam**2 / delta


def compact_chain_bound(E: float, p: PhysicalParams, man: Manifold, A: float) -> float:
    """Closed-form loosening of the norm bound from the compact diagonal estimate."""
    delta = p.n * p.m + p.mu - E
    if delta <= 0:
        return math.inf
    V = man.volume
    bracket = (4.0 / (V * delta**2)
               + 2.0 * math.pi**1.5 * math.sqrt(A * p.m) / (math.sqrt(V) * delta**1.5)
               + math.pi**2 * A * p.m / delta)
    return p.n * p.lam**2 / math.pi * bracket


def lower_bound_cartan(p: PhysicalParams, C: float) -> float:
    """``n m + mu - n C_tilde lam**2 m`` with ``C_tilde = C pi Gamma(2) = C pi``."""
    if not C >= 0:
        raise DomainError(f"kernel constant C must be nonnegative, got {C}")
    return p.n * p.m + p.mu - p.n * (C * math.pi) * p.lam**2 * p.m


def compact_F(p: PhysicalParams, man: Manifold, A: float) -> float:
    """``F = (1/pi) [4/(V mu) + 2 pi^{3/2} sqrt(A m)/sqrt(mu V) + pi^2 A m]``.

    This is the printed constant with ``Gamma(2) = 1``, ``Gamma(1/2) = sqrt(pi)``
    and ``Gamma(3/2) = sqrt(pi)/2`` substituted.
    """
    if not man.compact:
        raise DomainError("compact_F needs a compact manifold")
    if not p.mu > 0:
        raise DomainError(f"compact bound needs mu > 0, got {p.mu}")
    if not A >= 0:
        raise DomainError(f"kernel constant A must be nonnegative, got {A}")
    V, m, mu = man.volume, p.m, p.mu
    return (4.0 / (V * mu)
            + 2.0 * math.pi**1.5 * math.sqrt(A * m) / math.sqrt(mu * V)
            + math.pi**2 * A * m) / math.pi


def lower_bound_compact(p: PhysicalParams, man: Manifold, A: float) -> float:
    """``n m + mu - n lam**2 F``."""
    return p.n * p.m + p.mu - p.n * p.lam**2 * compact_F(p, man, A)


def default_s_grid(man: Manifold, m: float, points: int = 91) -> np.ndarray:
    """Nine decades of s centred on the intrinsic diffusion scale ``2 m L**2``."""
    s0 = 2.0 * m * man.length_scale**2
    return np.logspace(math.log10(s0) - 6.0, math.log10(s0) + 3.0, points)


def bound_report(p: PhysicalParams, man: Manifold, C: float | None = None, A: float | None = None,
                 E: float | None = None, s_grid=None) -> BoundReport:
    """Fit the kernel constant (unless given), evaluate the lower bound and the norm there."""
    check_point(man, p.a)
    if man.cartan_hadamard:
        if C is None:
            C = diagonal_bound_check(man, default_s_grid(man, p.m) if s_grid is None else s_grid, p.m).constant
        lb = lower_bound_cartan(p, C)
        E = lb if E is None else E
        chain = cartan_chain_bound(E, p, C)
        norm = norm_bound_U(E, p, man).value if E < p.n * p.m + p.mu else math.inf
        return BoundReport("cartan_hadamard", C, C * math.pi, None, None, lb, norm, E, chain)
    if A is None:
        A = diagonal_bound_check(man, default_s_grid(man, p.m) if s_grid is None else s_grid, p.m).constant
    F = compact_F(p, man, A)
    lb = p.n * p.m + p.mu - p.n * p.lam**2 * F
    E = lb if E is None else E
    chain = compact_chain_bound(E, p, man, A)
    norm = norm_bound_U(E, p, man).value if E < p.n * p.m + p.mu else math.inf
    return BoundReport("compact", None, None, A, F, lb, norm, E, chain)
