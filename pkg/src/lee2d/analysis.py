"""Integral identities, the linear majorant of ``x**(1-eps)``, and the
short-time divergence of the free-boson norm.

Every quadrature check compares two independent routes: Gauss-Jacobi rules
with the exact endpoint exponents, and QUADPACK's algebraic-weight rule.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma, gammaln

from .errors import AccuracyError, DomainError
from .geometry import Manifold, check_point
from .heatkernel import DiagonalIntegrator
from .quadrature import gauss_jacobi01, gauss_legendre
from .renorm import PhysicalParams


# -- the linear majorant --------------------------------------------------------


@dataclass(frozen=True)
class InequalityParams:
    """``x > 0``, ``0 < eps < 1/2``, ``delta > 0``."""

    x: float
    epsilon: float
    delta: float

    def __post_init__(self):
        _check_eps_delta(self.epsilon, self.delta)
        if not (self.x > 0 and math.isfinite(self.x)):
            raise DomainError(f"x must be positive, got {self.x}")


def _check_eps_delta(eps, delta):
    e, d = np.asarray(eps), np.asarray(delta)
    if not (np.all(e > 0) and np.all(e < 0.5)):
        raise DomainError("epsilon must lie in (0, 1/2)")
    if not (np.all(d > 0) and np.all(np.isfinite(d))):
        raise DomainError("delta must be positive")


def majorant_slope(eps, delta):
    """``(eps/delta)**(eps/(1-eps))``."""
    eps = np.asarray(eps, dtype=float)
    return np.exp(eps / (1.0 - eps) * (np.log(eps) - np.log(delta)))


def appendix_f(x, eps=None, delta=None):
    """``f(x) = delta + (eps/delta)**(eps/(1-eps)) x - x**(1-eps)``; vectorised.

    Accepts an :class:`InequalityParams` as the only argument too.
    """
    if isinstance(x, InequalityParams):
        x, eps, delta = x.x, x.epsilon, x.delta
    _check_eps_delta(eps, delta)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("x must be positive")
    eps = np.asarray(eps, dtype=float)
    c = majorant_slope(eps, delta)
    # x**(1-eps) (c x**eps - 1) keeps the cancellation inside one factor
    out = delta + x ** (1.0 - eps) * (c * x**eps - 1.0)
    return float(out) if out.ndim == 0 else out


def appendix_minimizer(eps, delta):
    """``x*`` with ``x***eps = (1-eps) (delta/eps)**(eps/(1-eps))``."""
    _check_eps_delta(eps, delta)
    eps = np.asarray(eps, dtype=float)
    log_xe = np.log1p(-eps) + eps / (1.0 - eps) * (np.log(delta) - np.log(eps))
    return np.exp(log_xe / eps)


def appendix_min_closed_form(eps, delta):
    """``f(x*) = delta (1 - (1-eps)**((1-eps)/eps))``."""
    eps = np.asarray(eps, dtype=float)
    return delta * -np.expm1((1.0 - eps) / eps * np.log1p(-eps))


@dataclass(frozen=True)
class PropertyReport:
    name: str
    draws: int
    failures: int
    min_margin: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def appendix_positivity_suite(draws: int = 100_000, seed: int = 0) -> PropertyReport:
    """``f > 0`` with ``x`` log-uniform on ``(1e-6, 1e6)``, delta log-uniform on ``(1e-8, 1e2)``."""
    rng = np.random.default_rng(seed)
    x = 10.0 ** rng.uniform(-6.0, 6.0, draws)
    eps = rng.uniform(1e-3, 0.5 - 1e-3, draws)
    delta = 10.0 ** rng.uniform(-8.0, 2.0, draws)
    f = appendix_f(x, eps, delta)
    margin = f / delta
    return PropertyReport("appendix_f > 0", draws, int(np.sum(~(f > 0))), float(margin.min()))


def appendix_minimum_suite(draws: int = 10_000, seed: int = 1) -> PropertyReport:
    """``f(x*) > delta eps`` at the numerically evaluated minimiser."""
    rng = np.random.default_rng(seed)
    eps = rng.uniform(1e-3, 0.5 - 1e-3, draws)
    delta = 10.0 ** rng.uniform(-8.0, 2.0, draws)
    xs = appendix_minimizer(eps, delta)
    f = appendix_f(xs, eps, delta)
    margin = f / (delta * eps) - 1.0
    return PropertyReport("f(x*) > delta eps", draws, int(np.sum(~(margin > 0))), float(margin.min()))


def power_inequality_suite(draws: int = 10_000, seed: int = 2) -> PropertyReport:
    """``(1-eps)**((1-eps)/eps) < 1 - eps`` on ``(0, 1/2)``."""
    rng = np.random.default_rng(seed)
    eps = rng.uniform(1e-6, 0.5, draws)
    lhs = np.exp((1.0 - eps) / eps * np.log1p(-eps))
    gap = (1.0 - eps) - lhs
    return PropertyReport("(1-eps)^((1-eps)/eps) < 1-eps", draws, int(np.sum(~(gap > 0))), float(gap.min()))


# -- Feynman parametrisations and Beta integrals -----------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    params: dict
    exact: float
    quadrature: float
    residual: float
    cross_route: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _qaws(f, alpha, beta):
    """``int_0^1 f(u) u**beta (1-u)**alpha du`` by QUADPACK's algebraic-weight rule."""
    val, err = quad(f, 0.0, 1.0, weight="alg", wvar=(beta, alpha), epsabs=0.0, epsrel=1e-13, limit=200)
    return val, err


def _gj(f, alpha, beta, n=80):
    u, w = gauss_jacobi01(n, alpha, beta)
    return float(np.dot(w, f(u)))


def feynman_param_check(sigma: float, eps: float, tol: float = 1e-8) -> list[IdentityCheck]:
    """Both Feynman parametrisations of the mode-sum denominators.

    ``1/((1+s)**2 s**(1-eps)) = Gamma(3-eps)/Gamma(1-eps) int u (1-u)**-eps (u+s)**-(3-eps)``
    ``1/((1+s) s**(1-eps))    = Gamma(2-eps)/Gamma(1-eps) int (1-u)**-eps (u+s)**-(2-eps)``
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not (0 < eps < 0.5):
        raise DomainError(f"epsilon must lie in (0, 1/2), got {eps}")
    out = []
    specs = (
        ("feynman_1", 2, lambda u: (u + sigma) ** -(3.0 - eps), 1.0,
         math.exp(gammaln(3.0 - eps) - gammaln(1.0 - eps)), 1.0 / ((1 + sigma) ** 2 * sigma ** (1 - eps))),
        ("feynman_2", 1, lambda u: (u + sigma) ** -(2.0 - eps), 0.0,
         math.exp(gammaln(2.0 - eps) - gammaln(1.0 - eps)), 1.0 / ((1 + sigma) * sigma ** (1 - eps))),
    )
    for name, _, f, beta_exp, pref, exact in specs:
        q, qerr = _qaws(f, -eps, beta_exp)
        q *= pref
        g = pref * _gj(f, -eps, beta_exp)
        res = abs(q - exact) / exact + pref * qerr / exact
        out.append(IdentityCheck(name, {"sigma": sigma, "eps": eps}, exact, q, res, abs(g - exact) / exact, tol))
    return out


def beta_identity_check(eps: float, tol: float = 1e-8) -> list[IdentityCheck]:
    """``int u**(eps-1) (1-u)**-eps = pi / sin(pi eps)``, ``B(1/2,1/2) = pi``, ``sin(pi eps) >= 2 eps``."""
    if not (0 < eps <= 0.5):
        raise DomainError(f"epsilon must lie in (0, 1/2], got {eps}")
    one = lambda u: np.ones_like(np.asarray(u, dtype=float))  # noqa: E731
    exact = math.pi / math.sin(math.pi * eps)
    q, qerr = _qaws(one, -eps, eps - 1.0)
    g = _gj(one, -eps, eps - 1.0, n=8)
    checks = [IdentityCheck("beta_reflection", {"eps": eps}, exact, q, abs(q - exact) / exact + qerr / exact,
                            abs(g - exact) / exact, tol)]
    q2, qerr2 = _qaws(one, -0.5, -0.5)
    # third route: u = sin(theta)**2 turns the arcsine weight into 2 d theta
    th, wt = gauss_legendre(0.0, 0.5 * math.pi, 8)
    g2 = float(np.sum(2.0 * wt))
    checks.append(IdentityCheck("beta_half_half", {}, math.pi, q2, abs(q2 - math.pi) / math.pi + qerr2 / math.pi,
                                abs(g2 - math.pi) / math.pi, 1e-10))
    gap = math.sin(math.pi * eps) - 2.0 * eps
    checks.append(IdentityCheck("sin_lower_bound", {"eps": eps}, 2.0 * eps, math.sin(math.pi * eps),
                                0.0 if gap >= 0 else -gap, 0.0, 0.0))
    return checks


def exp_integral_identity_check(a: float, k: float, tol: float = 1e-9) -> IdentityCheck:
    """``a**-(k+1) = Gamma(k+1)**-1 int_0^inf s**k exp(-a s) ds`` for real ``a > 0``, ``k > -1``."""
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"a must be positive, got {a}")
    if not (k > -1 and math.isfinite(k)):
        raise DomainError(f"k must exceed -1, got {k}")
    exact = a ** -(k + 1.0)
    # unit scale s = t/a, split at t = 1: algebraic weight on [0,1], plain rule on the tail
    head, e1 = quad(lambda t: math.exp(-t), 0.0, 1.0, weight="alg", wvar=(k, 0.0), epsabs=0.0, epsrel=1e-13)
    tail, e2 = quad(lambda t: t**k * math.exp(-t), 1.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    g = gamma(k + 1.0)
    val = (head + tail) / g * exact
    # second route: generalised Gauss-Laguerre would sum its own weights to Gamma(k+1), so use
    # graded Gauss-Legendre in log t instead
    # in log t, cut where the neglected head int_0^t0 t**k dt falls below 1e-16
    y_lo = math.log(1e-16 * (k + 1.0)) / (k + 1.0)
    y, wy = gauss_legendre(y_lo, math.log(800.0), 400)
    t = np.exp(y)
    alt = float(np.dot(wy, t ** (k + 1.0) * np.exp(-t))) / g * exact
    res = abs(val - exact) / exact + (e1 + e2) / g
    return IdentityCheck("exp_integral", {"a": a, "k": k}, exact, val, res, abs(alt - exact) / exact, tol)


# -- short-time divergence ------------------------------------------------------


@dataclass(frozen=True)
class DivergenceReport:
    eps: tuple
    cutoff_integrals: tuple
    slope: float
    expected_slope: float
    slope_rel_err: float
    companion: tuple
    companion_full: float
    companion_spread: float
    decades: float

    @property
    def passed(self) -> bool:
        return self.slope_rel_err <= 0.02 and self.companion_spread <= 1e-6

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def domain_divergence_diagnostic(p: PhysicalParams, man: Manifold, delta: float, eps_grid=None) -> DivergenceReport:
    """Cut-off norm integral ``int_eps^inf exp(-s Delta) K_s(a,a) ds`` and its finite companion.

    The first grows like ``(m/2 pi) ln(1/eps)``; the companion
    ``Delta int_eps^inf s exp(-s Delta) K_s(a,a) ds`` converges as ``eps -> 0``.
    ``companion_spread`` is the largest relative distance of the companion
    over the grid from its ``eps = 0`` value.
    """
    check_point(man, p.a)
    if not (delta > 0 and math.isfinite(delta)):
        raise DomainError(f"Delta = n m - E must be positive, got {delta}")
    eps = np.geomspace(1e-10, 1e-7, 7) / delta if eps_grid is None else np.asarray(eps_grid, dtype=float)
    if np.any(eps <= 0):
        raise DomainError("cutoffs must be positive")
    decades = float(np.log10(eps.max() / eps.min()))
    if decades < 3.0 - 1e-9:
        raise DomainError(f"cutoff grid spans {decades:.2f} decades; need at least 3")
    cut, comp = [], []
    for e in eps:
        integ = DiagonalIntegrator(man, p.a, p.m, [delta], s_lo=float(e))
        cut.append(integ.integrate(lambda s: np.exp(-s * delta))[0])
        comp.append(delta * integ.integrate(lambda s: s * np.exp(-s * delta))[0])
    full = delta * DiagonalIntegrator(man, p.a, p.m, [delta]).integrate(lambda s: s * np.exp(-s * delta))[0]
    x = np.log(1.0 / eps)
    slope = float(np.polyfit(x, np.asarray(cut), 1)[0])
    expected = p.m / (2.0 * math.pi)
    spread = float(np.max(np.abs(np.asarray(comp) - full)) / abs(full))
    return DivergenceReport(tuple(map(float, eps)), tuple(cut), slope, expected, abs(slope / expected - 1.0),
                            tuple(comp), full, spread, decades)


# -- suite ------------------------------------------------------------------------


def identity_suite(seed: int = 0, draws: int = 100_000, min_draws: int = 10_000,
                   param_draws: int = 20) -> dict:
    """Run every identity and inequality check; returns a JSON-ready report."""
    rng = np.random.default_rng(seed + 3)
    props = [appendix_positivity_suite(draws, seed), appendix_minimum_suite(min_draws, seed + 1),
             power_inequality_suite(min_draws, seed + 2)]
    checks: list[IdentityCheck] = []
    for sig, e in zip(10.0 ** rng.uniform(-3, 3, param_draws), rng.uniform(1e-3, 0.49, param_draws)):
        checks += feynman_param_check(float(sig), float(e))
    for e in rng.uniform(1e-3, 0.5, param_draws):
        checks += beta_identity_check(float(e))
    for a, k in zip(10.0 ** rng.uniform(-1, 1, param_draws), rng.uniform(-0.9, 3.0, param_draws)):
        checks.append(exp_integral_identity_check(float(a), float(k)))
    worst: dict[str, float] = {}
    for c in checks:
        worst[c.name] = max(worst.get(c.name, 0.0), c.residual)
    ok = all(pr.passed for pr in props) and all(c.passed for c in checks)
    return {
        "passed": ok,
        "seed": seed,
        "properties": [dict(asdict(pr), passed=pr.passed) for pr in props],
        "identities": {name: {"max_residual": worst[name],
                              "count": sum(c.name == name for c in checks),
                              "passed": all(c.passed for c in checks if c.name == name)} for name in worst},
    }
