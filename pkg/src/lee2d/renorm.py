"""Cutoff renormalisation and the scalar bound-state condition.

Natural units: ``m`` sets the energy scale, ``lam`` is treated as a
positive real coupling.  The principal function here is the sector with no
spectator bosons,

    Phi(E) = mu - E + lam**2 int_0^inf ds K_s(a,a) [exp(-s(m-mu)) - exp(-s(m-E))],

whose root is pinned at ``E = mu`` by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AccuracyError, DomainError
from .geometry import Manifold, check_point
from .heatkernel import DiagonalIntegrator
from .roots import RootResult, solve_bracketed

PHI_RTOL = 1e-10
ROOT_RTOL = 1e-9


@dataclass(frozen=True)
class PhysicalParams:
    """Mass ``m``, physical binding energy ``mu``, coupling ``lam``, boson count ``n``, source ``a``."""

    m: float
    mu: float
    lam: float
    n: int = 0
    a: tuple[float, float] = field(default=(0.0, 0.0))

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise DomainError(f"m must be positive, got {self.m}")
        if not (math.isfinite(self.mu) and self.mu < self.m):
            raise DomainError(f"mu must be finite and below m={self.m}, got {self.mu}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be nonnegative, got {self.lam}")
        n = self.n
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 0:
            raise DomainError(f"n must be a nonnegative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "a", tuple(float(c) for c in self.a))

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class PrincipalValue:
    value: float
    integral_residual: float


@dataclass(frozen=True)
class BoundState:
    E: float
    residual: float
    iterations: int
    bracket: tuple[float, float]


class RateTable:
    """Shared diagonal-kernel table for integrands ``exp(-r s)`` with r in a range.

    A Laplace grid built for the rates ``[r_lo, r_hi]`` is valid for every
    rate in between: panel widths are set by the fastest live rate and the
    tail by the slowest.  The table is rebuilt with a wider range when a
    rate falls outside it.
    """

    def __init__(self, man: Manifold, a, m: float, s_lo: float = 0.0, margin: float = 16.0):
        self.man, self.a, self.m, self.s_lo, self.margin = man, a, m, s_lo, margin
        self.lo = self.hi = None
        self.integ = None

    def covering(self, *rates) -> DiagonalIntegrator:
        r_lo, r_hi = min(rates), max(rates)
        if self.integ is None or r_lo < self.lo or r_hi > self.hi:
            lo = r_lo / self.margin if self.lo is None else min(self.lo, r_lo / self.margin)
            hi = r_hi * self.margin if self.hi is None else max(self.hi, r_hi * self.margin)
            self.lo, self.hi = lo, hi
            self.integ = DiagonalIntegrator(self.man, self.a, self.m, [lo, hi], s_lo=self.s_lo)
        return self.integ


def _check(p: PhysicalParams, man: Manifold):
    check_point(man, p.a)


def _pos_diff(s, rate_lo, rate_hi):
    """``exp(-s rate_lo) - exp(-s rate_hi)`` without cancellation."""
    lo, hi, sign = (rate_lo, rate_hi, 1.0) if rate_lo <= rate_hi else (rate_hi, rate_lo, -1.0)
    return sign * np.exp(-s * lo) * -np.expm1(-s * (hi - lo))


def mu_bare(p: PhysicalParams, man: Manifold, eps: float, with_residual: bool = False):
    """Bare mass ``mu(eps) = mu + lam**2 int_eps^inf ds K_s(a,a) exp(-s(m-mu))``."""
    _check(p, man)
    if not eps > 0:
        raise DomainError(f"cutoff eps must be positive, got {eps}")
    if p.lam == 0.0:
        return (p.mu, 0.0) if with_residual else p.mu
    rate = p.m - p.mu
    integ = DiagonalIntegrator(man, p.a, p.m, [rate], s_lo=eps)
    val, res = integ.integrate(lambda s: np.exp(-s * rate))
    out = p.mu + p.lam**2 * val
    return (out, p.lam**2 * res) if with_residual else out


def _require_below_threshold(E, p):
    if not (math.isfinite(E) and E < p.m):
        raise DomainError(f"E={E} must lie below the continuum threshold m={p.m}")


def principal_scalar(E: float, p: PhysicalParams, man: Manifold,
                     rtol: float = PHI_RTOL, table: "RateTable | None" = None) -> PrincipalValue:
    """Renormalised principal function ``Phi(E)`` of the scalar sector.

    ``table`` lets repeated calls (root searches) share one kernel table.
    """
    _check(p, man)
    _require_below_threshold(E, p)
    base = p.mu - E
    if p.lam == 0.0 or E == p.mu:
        return PrincipalValue(base, 0.0)
    ra, rb = p.m - p.mu, p.m - E
    integ = (table or RateTable(man, p.a, p.m)).covering(ra, rb)
    val, res = integ.integrate(lambda s: _pos_diff(s, ra, rb))
    value = base + p.lam**2 * val
    residual = p.lam**2 * res
    scale = max(abs(value), abs(base), p.m)
    if residual > 1e3 * rtol * scale:
        raise AccuracyError(f"principal function quadrature at E={E}", achieved=residual)
    return PrincipalValue(value, residual)


def principal_scalar_cutoff(E: float, p: PhysicalParams, man: Manifold, eps: float) -> PrincipalValue:
    """``Phi_eps(E) = mu(eps) - E - lam**2 int_eps^inf K_s(a,a) exp(-s(m-E)) ds``.

    Evaluated from the bare mass and the cut-off integral separately, so the
    logarithmic divergences cancel numerically rather than by construction.
    """
    _require_below_threshold(E, p)
    mb, r1 = mu_bare(p, man, eps, with_residual=True)
    if p.lam == 0.0:
        return PrincipalValue(mb - E, r1)
    rate = p.m - E
    integ = DiagonalIntegrator(man, p.a, p.m, [rate], s_lo=eps)
    val, r2 = integ.integrate(lambda s: np.exp(-s * rate))
    return PrincipalValue(mb - E - p.lam**2 * val, r1 + p.lam**2 * r2)


def principal_derivative(E: float, p: PhysicalParams, man: Manifold) -> float:
    """``dPhi/dE = -1 - lam**2 int_0^inf ds s K_s(a,a) exp(-s(m-E))``; always below -1 for lam > 0."""
    _check(p, man)
    _require_below_threshold(E, p)
    if p.lam == 0.0:
        return -1.0
    rate = p.m - E
    integ = DiagonalIntegrator(man, p.a, p.m, [rate])
    val, _ = integ.integrate(lambda s: s * np.exp(-s * rate))
    return -1.0 - p.lam**2 * val


def solve_bound_state(p: PhysicalParams, man: Manifold, bracket: tuple[float, float] | None = None,
                      rtol: float = ROOT_RTOL, shift: float = 0.0) -> BoundState:
    """Root of ``Phi(E) + shift`` below threshold.

    ``Phi`` decreases strictly from ``+inf`` (E -> -inf) to ``-inf`` (E -> m),
    so the root is unique.  Without a ``bracket`` one is grown outwards from
    the threshold in units of ``m``.
    ``shift`` perturbs the condition (the renormalised root is ``mu`` only
    for ``shift = 0``).
    """
    _check(p, man)
    scale = max(abs(p.mu), p.m)

    table = RateTable(man, p.a, p.m)

    def f(E):
        return principal_scalar(E, p, man, table=table).value + shift

    if bracket is None:
        return _auto_bracket(f, p, scale, rtol)
    lo, hi = (float(b) for b in bracket)
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got {bracket}")
    _require_below_threshold(hi, p)
    r = solve_bracketed(f, lo, hi, xtol=1e-6 * rtol * scale)
    return BoundState(r.x, abs(r.fx), r.iterations, r.bracket)


def _auto_bracket(f, p, scale, rtol) -> BoundState:
    # Grown from the threshold in units of m only, so the bracket carries no
    # knowledge of where the root should be.
    for k in range(80):
        lo = p.m - p.m * 2.0**k
        f_lo = f(lo)
        if f_lo > 0:
            break
    else:
        raise AccuracyError("Phi stayed nonpositive while expanding the bracket downwards")
    hi, f_hi = lo, f_lo
    for k in range(1, 60):
        hi = p.m - p.m * 4.0**-k
        if hi >= p.m:
            raise AccuracyError("Phi stayed nonnegative up to the threshold")
        f_hi = f(hi)
        if f_hi < 0:
            break
    else:
        raise AccuracyError("Phi stayed nonnegative approaching the threshold")
    if f_hi == 0.0 or f_lo == 0.0:
        x = hi if f_hi == 0.0 else lo
        return BoundState(x, 0.0, 0, (lo, hi))
    r: RootResult = solve_bracketed(f, lo, hi, xtol=1e-6 * rtol * scale, f_lo=f_lo, f_hi=f_hi)
    return BoundState(r.x, abs(r.fx), r.iterations, r.bracket)
