"""Mean-field condition for the n-boson ground state.

With ``chi = n h0[u] - E`` the condition reads ``lhs(chi) = n U(chi)`` where

    lhs(chi) = chi + mu + lam**2 int ds K_s(a,a) [exp(-s(m-mu)) - exp(-s(chi+m))]
    U(chi)   = lam**2 int ds |g(s)|**2 exp(-s(chi+2m)),   g(s) = (exp(s Lap/2m) u)(a).

``lhs`` is the scalar principal function at ``E = -chi``.  For a trial
``u = sum_i c_i f_i`` on a compact manifold, ``g(s) = sum_i z_i exp(-s sigma_i/2m)``
with ``z_i = c_i f_i(a)`` and the s-integral is done in closed form:

    U = lam**2/(2m+chi) Re sum_ij conj(z_i) z_j / (1 + sbar_i + sbar_j),
    sbar = sigma / (2m(2m+chi)).

Noncompact geometries use geodesic-Gaussian trials centred at the source,
with ``g(s)`` from radial quadrature of the heat kernel.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.special import erf, gammaln

from .errors import AccuracyError, DomainError, UnsupportedError
from .geometry import Kind, Manifold, SpectralMode, check_point, scaled_eigenvalue, spectrum
from .heatkernel import kernel_of_distance
from .quadrature import chebyshev_in_log, gauss_legendre, laplace_grid
from .renorm import PhysicalParams, RateTable, principal_scalar
from .roots import solve_bracketed

NORM_TOL = 1e-10


# -- trial states ----------------------------------------------------------------


@dataclass(frozen=True)
class TrialState:
    """A normalised one-boson profile ``u``.

    Use the ``constant``, ``spectral`` and ``gaussian`` constructors.  Spectral
    coefficients are stored per eigenvalue class: ``coeffs[i]`` has one entry
    per basis function returned by ``modes[i].eigenfunction_at``.  Because the
    rescaled profile ``v = u / sqrt(2m(2m+chi))`` has the same coefficients in
    the rescaled orthonormal basis, ``coeffs`` are also the ``v(l)``.
    """

    kind: str
    man: Manifold
    modes: tuple = ()
    coeffs: tuple = ()
    width: float | None = None

    @classmethod
    def constant(cls, man: Manifold) -> "TrialState":
        if not man.compact:
            raise UnsupportedError("the constant trial needs a compact manifold")
        mode0 = spectrum(man, 1e-300 + 1e-12)[0]
        return cls("constant", man, (mode0,), (np.array([1.0]),))

    @classmethod
    def spectral(cls, man: Manifold, weights: dict) -> "TrialState":
        """``weights`` maps class index to a coefficient vector (or a scalar for simple classes)."""
        if not man.compact:
            raise UnsupportedError("spectral trials need a compact manifold")
        top = max(weights)
        # enough classes to reach index `top`
        cut = 1.0
        modes = spectrum(man, cut)
        while len(modes) <= top:
            cut *= 2.0
            modes = spectrum(man, cut)
        sel, cs = [], []
        for idx in sorted(weights):
            mode = modes[idx]
            c = np.atleast_1d(np.asarray(weights[idx], dtype=complex if np.iscomplexobj(weights[idx]) else float))
            if c.size != mode.multiplicity:
                raise DomainError(f"class {idx} has multiplicity {mode.multiplicity}, got {c.size} coefficients")
            sel.append(mode)
            cs.append(c)
        total = sum(float(np.sum(np.abs(c) ** 2)) for c in cs)
        if abs(total - 1.0) > NORM_TOL:
            raise DomainError(f"trial state is not normalised: sum |c|^2 = {total!r}")
        return cls("spectral", man, tuple(sel), tuple(cs))

    @classmethod
    def gaussian(cls, man: Manifold, width: float) -> "TrialState":
        """``u(x) = N exp(-d(x,a)**2 / (2 width**2))`` on the plane or hyperbolic plane."""
        if man.kind not in (Kind.PLANE, Kind.HYPERBOLIC):
            raise UnsupportedError("Gaussian trials are provided for the noncompact geometries")
        if not (width > 0 and math.isfinite(width)):
            raise DomainError(f"Gaussian width must be positive, got {width}")
        if man.kind is Kind.HYPERBOLIC and width > 40.0 * man.radius:
            raise DomainError("Gaussian width above 40 R overflows the normalisation")
        return cls("gaussian", man, width=float(width))

    # spectral data
    @property
    def sigmas(self) -> np.ndarray:
        return np.array([md.eigenvalue for md in self.modes])

    def weights(self) -> np.ndarray:
        return np.array([float(np.sum(np.abs(c) ** 2)) for c in self.coeffs])

    def source_values(self, a) -> np.ndarray:
        """``z_i = sum_j c_ij f_ij(a)`` per eigenvalue class."""
        return np.array([np.dot(c, md.eigenfunction_at(a)) for md, c in zip(self.modes, self.coeffs)])

    def kinetic_u(self, m: float) -> float:
        """``K[u] = int |grad u|**2 / 2m``."""
        if self.kind == "gaussian":
            return self._profile.kinetic / (2.0 * m)
        return float(np.dot(self.weights(), self.sigmas)) / (2.0 * m)

    @cached_property
    def _profile(self) -> "_RadialProfile":
        return _RadialProfile(self.man, self.width)


class _RadialProfile:
    """Geodesic Gaussian centred at the source, with radial quadratures."""

    def __init__(self, man: Manifold, width: float):
        self.man, self.w = man, width
        self.R = man.radius if man.kind is Kind.HYPERBOLIC else None
        w = width
        if self.R is None:
            mass = math.pi * w * w
        else:
            R = self.R
            mass = 2.0 * math.pi * R * (w * math.sqrt(math.pi) / 2.0) * math.exp(w * w / (4 * R * R)) * erf(w / (2 * R))
        self.N = 1.0 / math.sqrt(mass)
        # u**2 sinh(r/R) peaks at r = w**2/(2R)
        self.r_extent = 9.0 * w + (0.0 if self.R is None else w * w / (2.0 * self.R))
        r, wr = self._radial_rule(self.r_extent, w)
        self.norm_check = float(np.dot(wr, self.u(r) ** 2 * self.jac(r))) * 2.0 * math.pi
        grad2 = (r / w**2) ** 2 * self.u(r) ** 2
        self.kinetic = 2.0 * math.pi * float(np.dot(wr, grad2 * self.jac(r)))
        if abs(self.norm_check - 1.0) > 1e-10:
            raise AccuracyError("Gaussian trial normalisation", achieved=abs(self.norm_check - 1.0))

    def jac(self, r):
        return r if self.R is None else self.R * np.sinh(r / self.R)

    def u(self, r):
        return self.N * np.exp(-0.5 * (np.asarray(r) / self.w) ** 2)

    @staticmethod
    def _radial_rule(r_max, scale, nodes=12, max_panels=64):
        panels = int(min(max_panels, max(1, math.ceil(r_max / scale))))
        x, wx = _LEGGAUSS[nodes]
        edges = np.linspace(0.0, r_max, panels + 1)
        half = 0.5 * np.diff(edges)[:, None]
        r = (edges[:-1, None] + half * (x + 1.0)).ravel()
        return r, (half * wx).ravel()

    def heat_at_source(self, s, m: float) -> np.ndarray:
        """``g(s) = int K_s(x,a) u(x) dx`` by radial quadrature, for an array of s."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty(s.shape)
        for i, si in enumerate(s):
            t = si / (2.0 * m)
            drift = 0.0 if self.R is None else t / self.R
            r_max = min(self.r_extent, drift + 13.5 * math.sqrt(t))
            r, wr = self._radial_rule(r_max, min(2.0 * math.sqrt(t), self.w))
            k = kernel_of_distance(self.man, r, si, m)
            out[i] = 2.0 * math.pi * float(np.dot(wr, k * self.u(r) * self.jac(r)))
        return out

    def heat_interpolated(self, s, m: float, panel: float = 2.0, nodes: int = 24) -> np.ndarray:
        """``g(s)`` from piecewise Chebyshev interpolation in ``ln s``.

        ``g`` is analytic in ``ln s`` within a strip of half-width about pi,
        so 24 nodes per panel of width 2 reach roughly 1e-13 of ``g(0)``.
        """
        return chebyshev_in_log(lambda x: self.heat_at_source(x, m), s, panel, nodes)


_LEGGAUSS = {k: np.polynomial.legendre.leggauss(k) for k in (8, 10, 12, 16)}


# -- functionals -------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    value: float
    residual: float


@dataclass(frozen=True)
class MeanFieldFunctionals:
    h0: float
    K_u: float
    K_v: float
    U_v: float
    y_v: float


@dataclass(frozen=True)
class ChiSolution:
    chi: float
    E: float
    residual: float
    bracket: tuple[float, float]
    iterations: int
    functionals: MeanFieldFunctionals | None = None


def chi_equation_lhs(chi: float, p: PhysicalParams, man: Manifold, table: RateTable | None = None) -> float:
    """Left side of the chi-equation; the scalar principal function at ``E = -chi``."""
    if not (math.isfinite(chi) and chi > -p.m):
        raise DomainError(f"chi={chi} must exceed -m={-p.m} for the s-integral to converge")
    return principal_scalar(-chi, p, man, table=table).value


class _GaussianTable:
    """``g(s)`` tabulated on a Laplace grid covering decay rates ``[lo, hi]``."""

    def __init__(self, trial: TrialState, m: float, lo: float, hi: float):
        self.lo, self.hi = lo, hi
        prof = trial._profile
        self.g0 = prof.N
        # the grid starts at s_f; [0, s_f] is added analytically with g = g(0)
        self.s_f = 1e-9 / hi
        self.s, self.w = laplace_grid([lo, hi], s_lo=self.s_f, order=12)
        self.s2, self.w2 = laplace_grid([lo, hi], s_lo=self.s_f, order=8)
        both = prof.heat_interpolated(np.concatenate([self.s, self.s2]), m)
        self.g, self.g2 = both[: self.s.size], both[self.s.size:]

    def integrate(self, rate: float) -> Estimate:
        head = self.g0**2 * -math.expm1(-rate * self.s_f) / rate
        v1 = head + float(np.dot(self.w, self.g**2 * np.exp(-rate * self.s)))
        v2 = head + float(np.dot(self.w2, self.g2**2 * np.exp(-rate * self.s2)))
        return Estimate(v1, abs(v1 - v2) + self.g0**2 * (rate * self.s_f) ** 2 / rate)


_TABLES: dict = {}
_TABLES_LOCK = threading.Lock()


def _gaussian_table(trial: TrialState, m: float, rate: float) -> _GaussianTable:
    # the covered range is a function of the rate alone (a power-of-16 bucket),
    # so results never depend on call order or on other threads
    k = max(0, math.ceil(math.log(64.0 * rate / (1e4 * m), 16.0)))
    key = (trial.man, trial.width, m, k)
    with _TABLES_LOCK:
        tab = _TABLES.get(key)
    if tab is None:
        tab = _GaussianTable(trial, m, m, 1e4 * m * 16.0**k)
        with _TABLES_LOCK:
            if len(_TABLES) > 256:
                _TABLES.clear()
            _TABLES[key] = tab
    return tab


def interaction_functional(trial: TrialState, chi: float, p: PhysicalParams, man: Manifold,
                           method: str = "auto") -> Estimate:
    """``U[v]``: the right side of the chi-equation divided by n.

    ``method='spectral'`` uses the closed-form double sum (compact trials);
    ``'direct'`` integrates ``|g(s)|**2 exp(-s(chi+2m))`` over s.
    """
    check_point(man, p.a)
    if not (2.0 * p.m + chi > 0):
        raise DomainError(f"need 2m + chi > 0, got chi={chi}")
    if trial.man != man:
        raise DomainError("trial state belongs to a different manifold")
    if p.lam == 0.0:
        return Estimate(0.0, 0.0)
    rate = chi + 2.0 * p.m
    if trial.kind == "gaussian":
        est = _gaussian_table(trial, p.m, rate).integrate(rate)
        return Estimate(p.lam**2 * est.value, p.lam**2 * est.residual)
    if method == "auto":
        method = "spectral"
    z = trial.source_values(p.a)
    sig = trial.sigmas
    if method == "spectral":
        sbar = scaled_eigenvalue(sig, p.m, chi)
        mat = np.real(np.conj(z)[:, None] * z[None, :]) / (1.0 + sbar[:, None] + sbar[None, :])
        total = float(mat.sum())
        return Estimate(p.lam**2 * total / rate, 64 * np.finfo(float).eps * p.lam**2 * float(np.abs(mat).sum()) / rate)
    if method == "direct":
        rates = np.unique(np.concatenate([[rate], rate + sig / p.m]))
        vals = []
        for order in (12, 8):
            s, ws = laplace_grid(rates, order=order)
            g = np.exp(-s[:, None] * sig[None, :] / (2.0 * p.m)) @ z
            vals.append(float(np.dot(ws, np.abs(g) ** 2 * np.exp(-s * rate))))
        return Estimate(p.lam**2 * vals[0], p.lam**2 * abs(vals[0] - vals[1]))
    raise DomainError(f"unknown method {method!r}")


def functionals(trial: TrialState, chi: float, p: PhysicalParams, man: Manifold) -> MeanFieldFunctionals:
    K_u = trial.kinetic_u(p.m)
    K_v = K_u / (2.0 * p.m + chi)
    U_v = interaction_functional(trial, chi, p, man).value
    return MeanFieldFunctionals(K_u + p.m, K_u, K_v, U_v, p.n * K_v)


def solve_chi(trial: TrialState, p: PhysicalParams, man: Manifold, rtol: float = 1e-9,
              chi_limit: float = 1e12) -> ChiSolution:
    """Unique root of ``lhs(chi) = n U(chi)`` and the energy ``E = n h0 - chi``.

    ``lhs`` increases and ``U`` decreases in chi; at ``chi = -mu`` the left side
    vanishes, so the root lies in ``[-mu, inf)``.
    """
    check_point(man, p.a)
    table = RateTable(man, p.a, p.m)
    scale = max(p.m, abs(p.mu))
    h0 = p.m + trial.kinetic_u(p.m)

    def f(chi):
        return chi_equation_lhs(chi, p, man, table) - p.n * interaction_functional(trial, chi, p, man).value

    lo = -p.mu
    f_lo = f(lo)
    if f_lo == 0.0:
        chi, it, hi, res = lo, 0, lo, 0.0
    else:
        step = max(p.m, math.sqrt(max(-f_lo, 0.0) * p.m))
        hi, f_hi = lo + step, f(lo + step)
        while f_hi <= 0:
            step *= 4.0
            hi = lo + step
            if hi > chi_limit * scale:
                raise AccuracyError(f"chi bracket expansion passed {chi_limit:g} m")
            f_hi = f(hi)
        r = solve_bracketed(f, lo, hi, xtol=1e-3 * rtol * scale, f_lo=f_lo, f_hi=f_hi)
        chi, it, res = r.x, r.iterations, abs(r.fx)
    fun = functionals(trial, chi, p, man)
    return ChiSolution(chi, p.n * h0 - chi, res, (lo, hi), it, fun)


def energy_identity_residual(sol: ChiSolution, p: PhysicalParams) -> float:
    """``|E - (n m + 2 m n K[v] + (n K[v] - 1) chi)|``."""
    Kv = sol.functionals.K_v
    rhs = p.n * p.m + 2.0 * p.m * p.n * Kv + (p.n * Kv - 1.0) * sol.chi
    return abs(sol.E - rhs)


def cumulant_diagnostic(sol: ChiSolution, p: PhysicalParams) -> float:
    """``K[u] / (chi K[v])``; the closing consistency argument expects O(1)."""
    fn = sol.functionals
    denom = sol.chi * fn.K_v
    return math.nan if denom == 0 else fn.K_u / denom


# -- constant ansatz and asymptotics ------------------------------------------------


@dataclass(frozen=True)
class AnsatzResult:
    E: float
    delta: float  # n m - E
    deficit: float  # n m + mu - E
    ratio: float  # deficit / (lam sqrt(n/V))
    variant: str
    iterations: int


def _printed_equation(p: PhysicalParams, V: float):
    c = p.m * p.lam**2 / (2.0 * math.pi)
    rhs_coef = p.n * p.lam**2 / V

    def g(delta):
        return delta + p.mu + c * math.log(delta / (p.m - p.mu)) - rhs_coef / delta

    return g


def constant_ansatz(p: PhysicalParams, man: Manifold, variant: str = "printed") -> AnsatzResult:
    """Energy from the constant trial ``u = 1/sqrt(V)``.

    ``variant='printed'`` solves, for ``Delta = n m - E > 0``,

        Delta + mu + (m lam**2/2 pi) ln(Delta/(m - mu)) = n lam**2 / (V Delta),

    i.e. the flat small-s diagonal with the shifts ``chi + m -> Delta`` and
    ``chi + 2m -> Delta`` of the large-Delta regime.  ``variant='exact'``
    solves the full chi-equation with the true kernel.
    """
    if not man.compact:
        raise UnsupportedError("the constant ansatz needs a compact manifold")
    V = man.volume
    sqrt_nv = math.sqrt(p.n / V)
    if variant == "exact":
        sol = solve_chi(TrialState.constant(man), p, man)
        delta = p.n * p.m - sol.E
        deficit = delta + p.mu
        return AnsatzResult(sol.E, delta, deficit, _ratio(deficit, p, sqrt_nv), "exact", sol.iterations)
    if variant != "printed":
        raise DomainError(f"unknown ansatz variant {variant!r}")
    if p.lam == 0.0:
        E = p.n * p.m + p.mu
        return AnsatzResult(E, -p.mu, 0.0, _ratio(0.0, p, sqrt_nv), "printed", 0)
    g = _printed_equation(p, V)
    x0 = max(p.m, p.lam * sqrt_nv)
    lo = x0
    while g(lo) >= 0:
        lo *= 0.5
        if lo < 1e-300:
            raise AccuracyError("constant-ansatz bracket collapsed to zero")
    hi = x0
    while g(hi) <= 0:
        hi *= 2.0
        if hi > 1e300:
            raise AccuracyError("constant-ansatz bracket expansion overflowed")
    r = solve_bracketed(g, lo, hi, xtol=1e-15 * x0)
    delta = r.x
    deficit = delta + p.mu
    return AnsatzResult(p.n * p.m - delta, delta, deficit, _ratio(deficit, p, sqrt_nv), "printed", r.iterations)


def _ratio(deficit, p, sqrt_nv):
    denom = p.lam * sqrt_nv
    return deficit / denom if denom > 0 else math.nan


def constant_ansatz_energy(p: PhysicalParams, man: Manifold, variant: str = "printed") -> float:
    return constant_ansatz(p, man, variant).E


def asymptotic_compact(p: PhysicalParams, man: Manifold) -> float:
    """``n m + mu - lam sqrt(n / V)``."""
    if not man.compact:
        raise UnsupportedError("asymptotic_compact needs a compact manifold")
    if p.n < 1:
        raise DomainError("asymptotic_compact needs n >= 1")
    return p.n * p.m + p.mu - p.lam * math.sqrt(p.n / man.volume)


def asymptotic_noncompact(p: PhysicalParams, C: float) -> float:
    """``n m + mu - 2 m C e lam**2 ln n``."""
    if p.n < 2:
        raise DomainError("asymptotic_noncompact needs n >= 2")
    return p.n * p.m + p.mu - 2.0 * p.m * C * math.e * p.lam**2 * math.log(p.n)


# -- n-dependent regulators and the compact upper-bound chain ------------------------


@dataclass(frozen=True)
class Schedule:
    eps: float
    delta: float
    product: float  # n delta / eps**2 in floating point
    exact: bool  # the same product in exact rational arithmetic equals 1


def sequence_schedule(n: float) -> Schedule:
    """``eps = 1/ln n`` and ``delta = 1/(n ln**2 n)`` so that ``n delta / eps**2 = 1``."""
    if not (n > math.e**2):
        raise DomainError(f"need n > e^2 so that eps = 1/ln n < 1/2, got n={n}")
    L = math.log(n)
    eps = 1.0 / L
    delta = 1.0 / (n * L * L)
    Lq, nq = Fraction(L), Fraction(n)
    exact = (nq * (1 / (nq * Lq * Lq))) / (1 / Lq) ** 2 == 1
    return Schedule(eps, delta, n * delta / eps**2, bool(exact))


@dataclass(frozen=True)
class ChainReport:
    terms: tuple[float, float, float]
    caps: tuple[float, float, float]
    finite_n_caps: tuple[float, float, float]
    holds: tuple[bool, bool, bool]
    cs_lhs: float
    cs_rhs: float
    kernel_sums: tuple[float, float]
    kernel_caps: tuple[float, float]
    nK_v: float
    regime: bool  # n K[v] < 1

    @property
    def all_hold(self) -> bool:
        return all(self.holds)


def appendix_bound(eps: float, delta: float, x):
    """``delta + (eps/delta)**(eps/(1-eps)) x``, the linear majorant of ``x**(1-eps)``."""
    return delta + (eps / delta) ** (eps / (1.0 - eps)) * np.asarray(x)


def few_mode_trial(man: Manifold, p: PhysicalParams, rng: np.random.Generator, modes: int = 3) -> TrialState:
    """Zero mode plus ``modes`` random nonzero classes with small weights.

    The nonzero weights are scaled so that ``n K[u] <= m``, which gives
    ``n K[v] < 1`` at every admissible root ``chi > -m``, and so that the zero
    mode keeps at least half the norm.
    """
    if not man.compact:
        raise UnsupportedError("few-mode trials need a compact manifold")
    if modes < 1:
        raise DomainError(f"need at least one nonzero class, got {modes}")
    cut = 1.0
    classes = spectrum(man, cut)
    while len(classes) < modes + 1:
        cut *= 2.0
        classes = spectrum(man, cut)
    picked = classes[1:modes + 1]
    sig = np.array([c.eigenvalue for c in picked])
    raw = [rng.normal(size=c.multiplicity) for c in picked]
    w = np.array([float(np.sum(r**2)) for r in raw])
    # K[u] = scale sum(w sigma) / 2m <= m / n
    scale = min(0.5 / w.sum(), 2.0 * p.m * p.m / (max(p.n, 1) * float(np.dot(w, sig))))
    weights = {0: np.array([math.sqrt(1.0 - scale * w.sum())])}
    for i, r in enumerate(raw, start=1):
        weights[i] = math.sqrt(scale) * r
    return TrialState.spectral(man, weights)


def upper_bound_chain(trial: TrialState, chi: float, p: PhysicalParams, man: Manifold,
                      eps: float, delta: float, A: float = 1.0 / (4.0 * math.pi),
                      spectral_cutoff: float | None = None) -> ChainReport:
    """Evaluate the three zero-mode-split terms of the spectral interaction and their caps.

    The terms, with ``alpha**2 = 2m(2m+chi)`` and ``f(a; g~) = f(a; g)/alpha``:

    * zero mode ``n(2m) lam**2 |f_0(a;g~)|**2 |v(0)|**2``, cap ``n(2m) lam**2 / V(g~)``;
    * cross term ``2 n(2m) lam**2 / sqrt(V(g~)) |sum_{l!=0} f_l(a;g~) v(l)/(1+sbar_l)|``,
      cap ``lam**2 sqrt(4 m A pi e) sqrt(n ln n) / sqrt((2m+chi) V)``;
    * double sum over nonzero modes, cap ``2 m A lam**2 pi e ln n``.

    ``finite_n_caps`` are the intermediate bounds before ``n -> inf`` is taken.
    ``kernel_sums`` are the two mode sums the Feynman parametrisation bounds by
    ``A pi (1-eps)/sin(pi eps)`` and ``A pi / sin(pi eps)``; they are summed up
    to ``spectral_cutoff``.
    """
    if not man.compact:
        raise UnsupportedError("the upper-bound chain is for compact manifolds")
    if trial.kind == "gaussian":
        raise UnsupportedError("the chain needs a spectral trial")
    if not (0 < eps < 0.5 and delta > 0):
        raise DomainError(f"need 0 < eps < 1/2 and delta > 0, got eps={eps}, delta={delta}")
    if not (2 * p.m + chi > 0):
        raise DomainError("need 2m + chi > 0")
    n, m, lam, V = p.n, p.m, p.lam, man.volume
    alpha2 = 2.0 * m * (2.0 * m + chi)
    Vt = alpha2 * V
    z = trial.source_values(p.a) / math.sqrt(alpha2)  # f(a; g~) v(l), summed within a class
    sig = trial.sigmas
    sbar = sig / alpha2
    zero = sig == 0.0
    nz = ~zero
    v0sq = float(np.sum(trial.weights()[zero]))
    term0 = n * 2 * m * lam**2 * v0sq / Vt
    term1 = 2 * n * 2 * m * lam**2 / math.sqrt(Vt) * abs(np.sum(z[nz] / (1.0 + sbar[nz])))
    zz = z[nz]
    sb = sbar[nz]
    term2 = n * 2 * m * lam**2 * abs(np.sum(np.conj(zz)[:, None] * zz[None, :] / (1.0 + sb[:, None] + sb[None, :])))
    lnn = math.log(n) if n > 1 else 0.0
    cap0 = n * 2 * m * lam**2 / Vt
    cap1 = lam**2 * math.sqrt(4 * m * A * math.pi * math.e) * math.sqrt(n * lnn) / math.sqrt((2 * m + chi) * V)
    cap2 = 2 * m * A * lam**2 * math.pi * math.e * lnn
    K_v = trial.kinetic_u(m) / (2.0 * m + chi)
    w = trial.weights()
    cs_lhs = float(np.sum(w[nz] * sbar[nz] ** (1.0 - eps)))
    cs_rhs = float(appendix_bound(eps, delta, K_v))
    sin_pe = math.sin(math.pi * eps)
    ratio_g = math.exp(gammaln(2.0 - eps) - gammaln(1.0 - eps))
    kcap1 = A * math.pi * ratio_g / sin_pe
    kcap2 = A * math.pi / sin_pe
    fin1 = 2 * n * 2 * m * lam**2 / math.sqrt(Vt) * math.sqrt(cs_rhs * kcap1)
    fin2 = n * 2 * m * lam**2 * cs_rhs * kcap2
    ks1, ks2 = _kernel_sums(man, p.a, alpha2, eps, spectral_cutoff)
    terms = (term0, term1, float(term2))
    caps = (cap0, cap1, cap2)
    holds = tuple(bool(t <= c * (1 + 1e-12)) for t, c in zip(terms, caps))
    return ChainReport(terms, caps, (cap0, fin1, fin2), holds, cs_lhs, cs_rhs,
                       (ks1, ks2), (kcap1, kcap2), p.n * K_v, bool(p.n * K_v < 1.0))


def _kernel_sums(man, a, alpha2, eps, cutoff=None):
    """``sum_{l!=0} |f_l(a; g~)|**2 / ((1+sbar)**k sbar**(1-eps))`` for k = 2, 1.

    Classes up to ``cutoff`` (default ``50 alpha**2``) are summed exactly; the
    rest uses the Weyl density ``dsigma / 4 pi`` of ``sum |f_l|**2``.
    """
    cutoff = 50.0 * alpha2 if cutoff is None else cutoff
    modes = [md for md in spectrum(man, cutoff) if md.eigenvalue > 0]
    sb = np.array([md.eigenvalue for md in modes]) / alpha2
    dens = np.array([float(md.density_at(a)) for md in modes]) / alpha2
    x0 = cutoff / alpha2
    out = []
    for k in (2, 1):
        head = float(np.sum(dens / ((1 + sb) ** k * sb ** (1 - eps))))
        tail, _ = quad(lambda x: 1.0 / ((1 + x) ** k * x ** (1 - eps)), x0, np.inf, epsabs=0, epsrel=1e-10)
        out.append(head + tail / (4.0 * math.pi))
    return out[0], out[1]


# -- noncompact growth --------------------------------------------------------------


@dataclass(frozen=True)
class GrowthFit:
    """chi(n) for one fixed trial profile and its fit to ``c1 + c2 ln n``."""

    width: float
    n: tuple
    chi: tuple
    c1: float
    c2: float
    residual_norm: float
    value_range: float
    sqrt_n_coefficient: float  # lam |u(a)|, the large-n slope of chi against sqrt(n)

    @property
    def relative_residual(self) -> float:
        return self.residual_norm / self.value_range if self.value_range > 0 else math.inf


def log_fit(n_values, chi_values):
    """Least-squares ``chi = c1 + c2 ln n``; returns ``(c1, c2, residual 2-norm)``."""
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.asarray(chi_values, dtype=float)
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.linalg.norm(resid))


def fixed_profile_slope(trial: TrialState, p: PhysicalParams) -> float:
    """``lam |u(a)|``: for a fixed profile ``U ~ lam**2 |u(a)|**2 / chi`` at large chi, so ``chi ~ lam |u(a)| sqrt(n)``."""
    if trial.kind == "gaussian":
        ua = trial._profile.N
    else:
        ua = abs(complex(np.sum(trial.source_values(p.a))))
    return p.lam * ua


def noncompact_growth(p: PhysicalParams, man: Manifold, n_values, widths) -> list[GrowthFit]:
    """chi(n) for each fixed-width Gaussian trial, fitted against ``c1 + c2 ln n``."""
    fits = []
    for w in np.atleast_1d(widths):
        trial = TrialState.gaussian(man, float(w))
        chis = [solve_chi(trial, p.with_(n=int(n)), man).chi for n in n_values]
        c1, c2, rn = log_fit(n_values, chis)
        fits.append(GrowthFit(float(w), tuple(int(n) for n in n_values), tuple(chis), c1, c2, rn,
                              float(max(chis) - min(chis)), fixed_profile_slope(trial, p)))
    return fits
