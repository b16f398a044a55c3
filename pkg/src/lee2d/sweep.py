"""Parameter sweeps, the bound/mean-field consistency matrix, and result persistence."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from . import __version__
from .bounds import bound_report, compact_F, default_s_grid, lower_bound_cartan, lower_bound_compact
from .errors import ConfigError, LeeModelError
from .geometry import Kind, Manifold
from .heatkernel import diagonal_bound_check, heat_kernel_diag
from .meanfield import TrialState, asymptotic_compact, constant_ansatz, solve_chi
from .renorm import PhysicalParams, mu_bare, solve_bound_state

SCHEMA_VERSION = 1


# -- quantity catalogue ------------------------------------------------------------


@dataclass
class EvalContext:
    """Everything one row needs: parameters, manifold and the axis extras."""

    p: PhysicalParams
    man: Manifold
    eps: float | None = None
    s: float | None = None
    width: float = 1.0


@dataclass(frozen=True)
class Quantity:
    name: str
    fn: Callable[[EvalContext], tuple]
    has_residual: bool
    doc: str


def _need(ctx, attr):
    val = getattr(ctx, attr)
    if val is None:
        raise ConfigError([f"quantity needs axis or fixed value '{attr}'"])
    return val


def _trial(ctx):
    if ctx.man.compact:
        return TrialState.constant(ctx.man)
    return TrialState.gaussian(ctx.man, ctx.width)


def _q_bound_state(ctx):
    r = solve_bound_state(ctx.p, ctx.man)
    return r.E, r.residual


def _q_mu_bare(ctx):
    return mu_bare(ctx.p, ctx.man, _need(ctx, "eps"), with_residual=True)


def _q_heat_diag(ctx):
    return heat_kernel_diag(ctx.man, ctx.p.a, _need(ctx, "s"), ctx.p.m), None


def _q_meanfield_E(ctx):
    sol = solve_chi(_trial(ctx), ctx.p, ctx.man)
    return sol.E, sol.residual


def _q_meanfield_chi(ctx):
    sol = solve_chi(_trial(ctx), ctx.p, ctx.man)
    return sol.chi, sol.residual


def _q_ratio(ctx):
    return constant_ansatz(ctx.p, ctx.man).ratio, None


def _q_ansatz_E(ctx):
    return constant_ansatz(ctx.p, ctx.man).E, None


def _q_asym(ctx):
    return asymptotic_compact(ctx.p, ctx.man), None


def _q_lower_bound(ctx):
    return bound_report(ctx.p, ctx.man, **_constants(ctx.man)).lower_bound, None


QUANTITIES: dict[str, Quantity] = {q.name: q for q in (
    Quantity("bound_state_E", _q_bound_state, True, "root of the renormalised scalar principal function"),
    Quantity("mu_bare", _q_mu_bare, True, "cutoff bare mass at eps"),
    Quantity("heat_diag", _q_heat_diag, False, "diagonal heat kernel K_s(a,a) at s"),
    Quantity("meanfield_E", _q_meanfield_E, True, "mean-field energy n h0 - chi"),
    Quantity("meanfield_chi", _q_meanfield_chi, True, "root chi of the mean-field condition"),
    Quantity("compact_deficit_ratio", _q_ratio, False, "(n m + mu - E)/(lam sqrt(n/V)) for the constant ansatz"),
    Quantity("constant_ansatz_E", _q_ansatz_E, False, "constant-ansatz energy"),
    Quantity("asymptotic_compact_E", _q_asym, False, "n m + mu - lam sqrt(n/V)"),
    Quantity("lower_bound", _q_lower_bound, False, "analytic ground-state lower bound"),
)}

REQUIRES = {"mu_bare": "eps", "heat_diag": "s"}

PARAM_AXES = ("n", "m", "mu", "lam")
CONTEXT_AXES = ("eps", "s", "width")
MANIFOLD_AXES = ("radius",)
AXES = PARAM_AXES + CONTEXT_AXES + MANIFOLD_AXES


_CONSTANTS: dict = {}


def _constants(man: Manifold) -> dict:
    """Fitted diagonal-bound constant for the geometry class, cached per manifold."""
    if man not in _CONSTANTS:
        const = diagonal_bound_check(man, default_s_grid(man, 1.0), 1.0).constant
        _CONSTANTS[man] = {"C": const} if man.cartan_hadamard else {"A": const}
    return _CONSTANTS[man]


# -- sweeps ----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    params: PhysicalParams
    man: Manifold
    outputs: tuple
    seed: int = 0
    eps: float | None = None
    s: float | None = None
    width: float = 1.0
    workers: int = 4

    def __post_init__(self):
        errors = []
        if self.axis not in AXES:
            errors.append(f"sweep.axis: unknown axis {self.axis!r}; expected one of {', '.join(AXES)}")
        for q in self.outputs:
            if q not in QUANTITIES:
                errors.append(f"sweep.outputs: unknown quantity {q!r}")
        for q in self.outputs:
            need = REQUIRES.get(q)
            if need and self.axis != need and getattr(self, need) is None:
                errors.append(f"sweep.{need}: quantity {q!r} needs '{need}' as the axis or a fixed value")
        vals = []
        for v in self.values:
            try:
                fv = float(v)
            except (TypeError, ValueError):
                errors.append(f"sweep.values: not a number: {v!r}")
                continue
            if not math.isfinite(fv):
                errors.append(f"sweep.values: not finite: {v!r}")
            vals.append(fv)
        if errors:
            raise ConfigError(errors)
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def describe(self) -> dict:
        return {
            "axis": self.axis, "values": list(self.values), "outputs": list(self.outputs),
            "params": {"m": self.params.m, "mu": self.params.mu, "lam": self.params.lam,
                       "n": self.params.n, "a": list(self.params.a)},
            "geometry": self.man.describe(), "seed": self.seed,
            "eps": self.eps, "s": self.s, "width": self.width,
        }


def axis_values(start: float, stop: float, num: int, scale: str = "log") -> tuple:
    """``num`` points from ``start`` to ``stop`` inclusive, log- or linearly spaced."""
    if num < 0:
        raise ConfigError([f"sweep.values.num must be nonnegative, got {num}"])
    if scale == "log":
        if not (start > 0 and stop > 0):
            raise ConfigError(["sweep.values: log spacing needs positive endpoints"])
        return tuple(float(x) for x in np.geomspace(start, stop, num))
    if scale == "linear":
        return tuple(float(x) for x in np.linspace(start, stop, num))
    raise ConfigError([f"sweep.values.scale must be 'log' or 'linear', got {scale!r}"])


@dataclass
class SweepResult:
    axis: str
    outputs: tuple
    rows: list
    metadata: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols = ["axis", "axis_value"]
        for q in self.outputs:
            cols.append(q)
            if QUANTITIES[q].has_residual:
                cols.append(f"{q}_residual")
        cols.append("error_category")
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = self.columns()
        w.writerow(cols)
        for row in self.rows:
            w.writerow([_fmt(row.get(c)) for c in cols])
        return buf.getvalue()

    def sidecar(self) -> dict:
        return dict(self.metadata)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_hash(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _context_for(spec: SweepSpec, value: float) -> EvalContext:
    p, man = spec.params, spec.man
    ctx = EvalContext(p, man, spec.eps, spec.s, spec.width)
    if spec.axis in PARAM_AXES:
        ctx.p = p.with_(**{spec.axis: int(round(value)) if spec.axis == "n" else value})
    elif spec.axis in CONTEXT_AXES:
        setattr(ctx, spec.axis, value)
    elif spec.axis == "radius":
        ctx.man = replace(man, radius=value)
    return ctx


def _eval_row(spec: SweepSpec, value: float) -> dict:
    row = {"axis": spec.axis, "axis_value": value}
    cats = []
    try:
        ctx = _context_for(spec, value)
    except LeeModelError as exc:
        ctx, cats = None, [exc.category]
    for q in spec.outputs:
        quantity = QUANTITIES[q]
        if ctx is None:
            continue
        try:
            val, res = quantity.fn(ctx)
            row[q] = float(val)
            if quantity.has_residual:
                row[f"{q}_residual"] = None if res is None else float(res)
        except LeeModelError as exc:
            cats.append(exc.category)
        except Exception:  # a row must never take the sweep down
            cats.append("internal")
    row["error_category"] = ";".join(dict.fromkeys(cats)) if cats else "ok"
    return row


def run_sweep(spec: SweepSpec, timestamp: str | None = None) -> SweepResult:
    """Evaluate every requested quantity at every axis value.

    Rows run on a thread pool; ``map`` keeps them in axis order.  Row
    failures are recorded in ``error_category`` and never affect other rows.
    """
    workers = max(1, spec.workers)
    if workers == 1 or len(spec.values) < 2:
        rows = [_eval_row(spec, v) for v in spec.values]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda v: _eval_row(spec, v), spec.values))
    desc = spec.describe()
    meta = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "config_hash": config_hash(desc),
        "config": desc,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(),
        "max_residuals": {
            q: max((r.get(f"{q}_residual") or 0.0 for r in rows), default=0.0)
            for q in spec.outputs if QUANTITIES[q].has_residual
        },
        "rows": len(rows),
        "failed_rows": sum(r["error_category"] != "ok" for r in rows),
    }
    return SweepResult(spec.axis, spec.outputs, rows, meta)


# -- consistency matrix ----------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyRow:
    geometry: str
    m: float
    mu: float
    lam: float
    n: int
    E_meanfield: float
    lower_bound: float
    margin: float
    bound_kind: str
    bound_applicable: bool
    passed: bool
    error_category: str = "ok"


CONSISTENCY_COLUMNS = ("geometry", "m", "mu", "lam", "n", "E_meanfield", "lower_bound", "margin",
                       "bound_kind", "bound_applicable", "passed", "error_category")


def consistency_grid(man: Manifold, points: int, seed: int, n_max: int = 10_000) -> list[PhysicalParams]:
    """Random ``(m, mu, lam, n)`` with ``0 < mu < m`` and log-uniform n in ``[1, n_max]``.

    The first row has ``lam = 0``, where both sides equal ``n m + mu`` for
    the constant trial.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(points):
        m = float(rng.uniform(0.3, 2.0))
        mu = float(rng.uniform(0.05, 0.9) * m)
        lam = 0.0 if i == 0 else float(rng.uniform(0.1, 2.0))
        n = int(round(10 ** rng.uniform(0.0, math.log10(n_max))))
        out.append(PhysicalParams(m, mu, lam, n=max(n, 1)))
    return out


def _consistency_row(man: Manifold, p: PhysicalParams, width: float) -> ConsistencyRow:
    kind = "compact" if man.compact else "cartan_hadamard"
    try:
        consts = _constants(man)
        if man.compact:
            lb = lower_bound_compact(p, man, consts["A"])
            # the closed-form compact bound assumes Delta > mu, i.e. n lam^2 F >= mu
            applicable = p.n * p.lam**2 * compact_F(p, man, consts["A"]) >= p.mu or p.lam == 0.0
        else:
            lb = lower_bound_cartan(p, consts["C"])
            applicable = True
        E = solve_chi(TrialState.constant(man) if man.compact else TrialState.gaussian(man, width), p, man).E
        margin = E - lb
        # equality rows (lam = 0) may differ by rounding in n m + mu
        ok = margin >= -1e-12 * max(1.0, abs(lb))
        return ConsistencyRow(man.kind.value, p.m, p.mu, p.lam, p.n, E, lb, margin, kind, bool(applicable), bool(ok))
    except LeeModelError as exc:
        return ConsistencyRow(man.kind.value, p.m, p.mu, p.lam, p.n, math.nan, math.nan, math.nan, kind, False,
                              False, exc.category)


def consistency_matrix(manifolds, points: int = 50, seed: int = 0, width: float = 1.0,
                       workers: int = 4) -> list[ConsistencyRow]:
    """Mean-field energy against the analytic lower bound on randomised grids, one per manifold."""
    jobs = [(man, p) for man in manifolds for p in consistency_grid(man, points, seed)]
    for man in manifolds:
        _constants(man)  # fit once, before the threads start
    if workers <= 1:
        return [_consistency_row(man, p, width) for man, p in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda j: _consistency_row(j[0], j[1], width), jobs))


def consistency_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONSISTENCY_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CONSISTENCY_COLUMNS])
    return buf.getvalue()
