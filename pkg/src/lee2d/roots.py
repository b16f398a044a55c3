"""Bracketed scalar root finding for the monotone equations of the model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NotFoundError


@dataclass(frozen=True)
class RootResult:
    x: float
    fx: float
    bracket: tuple[float, float]
    iterations: int


def solve_bracketed(f: Callable[[float], float], lo: float, hi: float, xtol: float,
                    f_lo: float | None = None, f_hi: float | None = None,
                    maxiter: int = 200) -> RootResult:
    """Root of ``f`` in ``[lo, hi]``; the endpoints must straddle a sign change."""
    f_lo = f(lo) if f_lo is None else f_lo
    f_hi = f(hi) if f_hi is None else f_hi
    if f_lo == 0.0:
        return RootResult(lo, 0.0, (lo, hi), 0)
    if f_hi == 0.0:
        return RootResult(hi, 0.0, (lo, hi), 0)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise DomainError(f"function not finite at bracket ends ({f_lo}, {f_hi})")
    if (f_lo > 0) == (f_hi > 0):
        raise NotFoundError(f"no sign change on [{lo:.6g}, {hi:.6g}] (f = {f_lo:.3e}, {f_hi:.3e})")
    x, info = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=maxiter, full_output=True)
    return RootResult(float(x), float(f(x)), (lo, hi), int(info.iterations))


def expand_up(f: Callable[[float], float], start: float, step: float, limit: float,
              sign: int = 1, grow: float = 2.0) -> tuple[float, float]:
    """Walk ``start + step, start + grow*step, ...`` until ``sign*f > 0``.

    Returns the first point reached and its function value.
    """
    x = start + step
    while x <= limit:
        fx = f(x)
        if sign * fx > 0:
            return x, fx
        step *= grow
        x = start + step
    raise NotFoundError(f"bracket expansion passed {limit:.3g} without a sign change")
