"""Fixed quadrature rules used throughout the package.

Everything here returns plain node/weight arrays so callers can evaluate
vectorised integrands once and reuse the samples (kernel tables are the
expensive part, not the sums).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

# exp(-TAIL) ~ 3e-20: exponential tails beyond this point are dropped.
TAIL = 45.0


@lru_cache(maxsize=32)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def gauss_jacobi01(n: int, alpha: float, beta: float):
    """Nodes/weights on [0, 1] for the weight ``(1-u)**alpha * u**beta``."""
    # scipy's recurrence hits 0/0 at alpha + beta = -1 and then patches the entry
    with np.errstate(invalid="ignore", divide="ignore"):
        x, w = roots_jacobi(n, alpha, beta)
    u = 0.5 * (x + 1.0)
    return u, w * 0.5 ** (alpha + beta + 1.0)


def laplace_grid(rates, s_lo: float = 0.0, order: int = 12, tail: float = TAIL,
                 floor: float = 1e-18):
    """Nodes for integrals of the form ``int_{s_lo}^inf f(s) exp(-r s) ds``.

    The integral is mapped to ``y = ln s`` and covered with Gauss-Legendre
    panels.  Panel width is capped at 0.5 in ``y`` and shrinks so that every
    exponential still alive (``r s < tail``) changes by at most a factor e
    across a panel.  The grid stops once the slowest rate is dead.

    Parameters
    ----------
    rates : iterable of float
        Decay rates present in the integrand; all must be positive.
    s_lo : float
        Lower limit; 0 means the grid starts at ``floor / max(rates)``.
    """
    rates = np.asarray(sorted(float(r) for r in rates), dtype=float)
    if rates.size == 0 or rates[0] <= 0.0 or not np.all(np.isfinite(rates)):
        raise ValueError(f"decay rates must be positive and finite, got {rates}")
    r_min, r_max = rates[0], rates[-1]
    y = math.log(s_lo) if s_lo > 0.0 else math.log(floor / r_max)
    y_end = math.log(tail / r_min)
    if y >= y_end:
        return np.empty(0), np.empty(0)
    edges = [y]
    while y < y_end:
        s = math.exp(y)
        alive = rates[rates * s < tail]
        h = 0.5
        if alive.size:
            h = min(h, 1.0 / (alive[-1] * s))
        y = min(y + h, y_end)
        edges.append(y)
    edges = np.asarray(edges)
    x, w = _leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    yy = (lo + half * (x + 1.0)).ravel()
    wy = (half * w).ravel()
    s = np.exp(yy)
    return s, wy * s


def exp_sinh_rule(h: float = 1.0 / 8.0, t_lo: float = -4.5, t_hi: float = 4.0):
    """Double-exponential rule for ``int_0^inf f(w) dw`` at unit scale.

    Nodes ``w = exp(pi/2 sinh t)`` for ``t`` on a uniform grid.  Scale the
    nodes and weights by the same factor to move the bulk of the rule.
    """
    t = np.arange(math.ceil(t_lo / h), math.floor(t_hi / h) + 1) * h
    u = 0.5 * math.pi * np.sinh(t)
    w = np.exp(u)
    return w, h * 0.5 * math.pi * np.cosh(t) * w


def tanh_sinh_rule(a: float, b: float, h: float = 1.0 / 16.0, t_max: float = 3.2):
    """Tanh-sinh rule on ``[a, b]``; tolerant of integrable endpoint singularities.

    Returns the nodes, the weights and the distances of each node to the
    nearer endpoint (computed without cancellation so that singular factors
    like ``u**(eps-1)`` can be evaluated accurately near ``a``).
    """
    t = np.arange(-math.floor(t_max / h), math.floor(t_max / h) + 1) * h
    u = 0.5 * math.pi * np.sinh(t)
    # distance from the nearer endpoint on [-1, 1]: 1 - tanh|u| = 2 / (exp(2|u|) + 1)
    gap = 2.0 / (np.exp(2.0 * np.abs(u)) + 1.0)
    x = np.tanh(u)
    w = h * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    half = 0.5 * (b - a)
    keep = gap > 0.0
    x, w, gap, t = x[keep], w[keep], gap[keep], t[keep]
    nodes = np.where(t < 0, a + half * gap, b - half * gap)
    return nodes, half * w, half * gap


def triangle_rule(side: float, n: int):
    """Gauss rule on the right triangle ``x, y >= 0, x + y <= side``.

    Collapsed coordinates ``y = (side - x) t``; exact for polynomials of
    degree ``2n - 2`` in each variable.
    """
    xg, wg = gauss_legendre(0.0, side, n)
    tg, wt = gauss_legendre(0.0, 1.0, n)
    x = np.repeat(xg, n)
    span = side - x
    y = span * np.tile(tg, n)
    w = np.repeat(wg, n) * np.tile(wt, n) * span
    return x, y, w


def chebyshev_in_log(f, x, panel: float = 2.0, nodes: int = 24, log_values: bool = False):
    """Evaluate ``f`` at positive ``x`` by piecewise Chebyshev interpolation in ``ln x``.

    Panels are ``[j panel, (j+1) panel]`` in ``ln x``, so the sample nodes
    depend only on which panels are hit, never on the query points.  With
    ``log_values`` the interpolant is built for ``ln f``, which keeps relative
    accuracy in exponential tails; panels where ``f`` is not positive fall
    back to direct evaluation, and panels where every sample is zero return 0.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.log(x)
    k = np.floor(y / panel).astype(int)
    out = np.empty(x.shape)
    cheb = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    for j in np.unique(k):
        sel = k == j
        a = j * panel
        vals = np.asarray(f(np.exp(a + 0.5 * panel * (cheb + 1.0))), dtype=float)
        if log_values:
            if not np.any(vals):
                out[sel] = 0.0  # underflowed tail
                continue
            if not np.all(vals > 0):
                out[sel] = f(x[sel])
                continue
            vals = np.log(vals)
        coef = np.polynomial.chebyshev.chebfit(cheb, vals, nodes - 1)
        fit = np.polynomial.chebyshev.chebval((y[sel] - a) / (0.5 * panel) - 1.0, coef)
        out[sel] = np.exp(fit) if log_values else fit
    return out
