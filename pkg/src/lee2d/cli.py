"""Command-line interface: ``lee2d <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 domain error, 4 accuracy
(tolerance unmet or a check failed), 5 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import traceback
from dataclasses import asdict

import numpy as np

from . import __version__
from .analysis import domain_divergence_diagnostic, identity_suite
from .bounds import bound_report
from .config import Config, load_config, parse_config
from .errors import ConfigError, DomainError, LeeModelError
from .geometry import Manifold
from .heatkernel import heat_equation_check, heat_kernel
from .meanfield import (TrialState, asymptotic_compact, asymptotic_noncompact, constant_ansatz, few_mode_trial,
                        sequence_schedule, solve_chi, upper_bound_chain)
from .renorm import solve_bound_state
from .sweep import (SweepSpec, axis_values, consistency_csv, consistency_matrix, run_sweep,
                    _constants)

EXIT_OK, EXIT_CHECK_FAILED = 0, 4


# -- output ---------------------------------------------------------------------


def _num(v):
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    if isinstance(v, bool):
        return "true" if v else "false"
    return "" if v is None else str(v)


def rows_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_num(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def emit(cfg: Config, text: str):
    path = cfg.output.path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _format(cfg: Config, default: str) -> str:
    return cfg.output.format or default


def emit_table(cfg: Config, columns, rows):
    if _format(cfg, "csv") == "json":
        emit(cfg, to_json({"columns": list(columns), "rows": [{c: r.get(c) for c in columns} for r in rows]}))
    else:
        emit(cfg, rows_to_csv(columns, rows))


def emit_report(cfg: Config, report: dict):
    if _format(cfg, "json") == "csv":
        flat = {k: v for k, v in report.items() if not isinstance(v, (dict, list, tuple))}
        emit(cfg, rows_to_csv(list(flat), [flat]))
    else:
        emit(cfg, to_json(report))


def _point(text: str):
    parts = [p for p in text.replace(",", " ").split()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two coordinates 'x1,x2', got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"coordinates must be numbers, got {text!r}") from None


def _count(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a count, got {text!r}") from None
    if not v.is_integer() or v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return int(v)


# -- subcommands ---------------------------------------------------------------------


def cmd_heat(cfg: Config, args) -> int:
    man, p = cfg.manifold(), cfg.params()
    x = args.x if args.x is not None else p.a
    y = args.y if args.y is not None else p.a
    rows = []
    for s in args.s:
        val = float(heat_kernel(man, x, y, s, p.m))
        if args.residual == "symmetry":
            res = abs(val - float(heat_kernel(man, y, x, s, p.m)))
        else:
            res = float(heat_equation_check(man, x, y, s, p.m))
        rows.append({"kind": man.kind.value, "params": json.dumps(man.describe(), sort_keys=True),
                     "s": float(s), "x": f"{x[0]!r},{x[1]!r}", "y": f"{y[0]!r},{y[1]!r}",
                     "value": val, "residual_kind": args.residual, "residual": res})
    emit_table(cfg, ["kind", "params", "s", "x", "y", "value", "residual_kind", "residual"], rows)
    return EXIT_OK


def cmd_bound_state(cfg: Config, args) -> int:
    p, man = cfg.params(), cfg.manifold()
    r = solve_bound_state(p, man, rtol=cfg.numerics.root_tol)
    emit_report(cfg, {"geometry": man.describe(), "mu": p.mu, "E": r.E, "residual": r.residual,
                      "iterations": r.iterations, "bracket": list(r.bracket)})
    return EXIT_OK


def cmd_bounds(cfg: Config, args) -> int:
    p, man = cfg.params(), cfg.manifold()
    rep = bound_report(p, man, C=args.C, A=args.A, E=args.E)
    out = rep.as_dict()
    out["geometry"] = man.describe()
    out["n"] = p.n
    emit_report(cfg, out)
    return EXIT_OK


MEANFIELD_COLUMNS = ["n", "method", "chi", "E", "deficit", "predicted_deficit", "ratio", "residual"]


def _predicted(p, man):
    if man.compact:
        return p.n * p.m + p.mu - asymptotic_compact(p, man)
    if p.n < 2:
        return math.nan
    return p.n * p.m + p.mu - asymptotic_noncompact(p, _constants(man)["C"])


def _mf_row(p, man, method, chi, E, residual):
    deficit = p.n * p.m + p.mu - E
    pred = _predicted(p, man) if p.n >= 1 else math.nan
    ratio = deficit / pred if pred and math.isfinite(pred) and pred != 0 else math.nan
    return {"n": p.n, "method": method, "chi": chi, "E": E, "deficit": deficit,
            "predicted_deficit": pred, "ratio": ratio, "residual": residual}


def _n_values(cfg, args, default):
    if args.n:
        return args.n
    return [cfg.physics.n] if cfg.physics.n else default


def cmd_meanfield(cfg: Config, args) -> int:
    p0, man = cfg.params(), cfg.manifold()
    rows = []
    if args.mf_command == "chain-check":
        return _chain_check(cfg, args, p0, man)
    for n in _n_values(cfg, args, [10**4, 10**5, 10**6] if args.mf_command == "asymptotics" else [100]):
        p = p0.with_(n=n)
        if args.mf_command == "solve":
            if man.compact:
                trial, label = TrialState.constant(man), "constant_trial"
            else:
                trial, label = TrialState.gaussian(man, cfg.numerics.width), f"gaussian_w={cfg.numerics.width!r}"
            sol = solve_chi(trial, p, man, rtol=cfg.numerics.root_tol)
            rows.append(_mf_row(p, man, label, sol.chi, sol.E, sol.residual))
        elif args.mf_command == "ansatz":
            for variant in args.variant:
                a = constant_ansatz(p, man, variant)
                rows.append(_mf_row(p, man, f"ansatz_{variant}", a.delta, a.E, None))
        else:  # asymptotics
            if man.compact:
                a = constant_ansatz(p, man, "printed")
                rows.append(_mf_row(p, man, "ansatz_printed", a.delta, a.E, None))
            else:
                sol = solve_chi(TrialState.gaussian(man, cfg.numerics.width), p, man)
                rows.append(_mf_row(p, man, f"gaussian_w={cfg.numerics.width!r}", sol.chi, sol.E, sol.residual))
    emit_table(cfg, MEANFIELD_COLUMNS, rows)
    return EXIT_OK


def _chain_check(cfg, args, p0, man) -> int:
    n = (args.n or [cfg.physics.n or 1000])[0]
    p = p0.with_(n=n)
    sched = sequence_schedule(n)
    rng = np.random.default_rng(cfg.numerics.seed)
    # a few low modes with small weights so that n K[v] stays below 1
    trial = few_mode_trial(man, p, rng, args.modes)
    sol = solve_chi(trial, p, man)
    rep = upper_bound_chain(trial, sol.chi, p, man, sched.eps, sched.delta, A=_constants(man)["A"])
    report = {"n": n, "eps": sched.eps, "delta": sched.delta, "n_delta_over_eps2_exact": sched.exact,
              "chi": sol.chi, "nK_v": rep.nK_v, "regime_nKv_below_1": rep.regime,
              "terms": list(rep.terms), "caps": list(rep.caps), "finite_n_caps": list(rep.finite_n_caps),
              "holds": list(rep.holds), "cs_lhs": rep.cs_lhs, "cs_rhs": rep.cs_rhs,
              "kernel_sums": list(rep.kernel_sums), "kernel_caps": list(rep.kernel_caps),
              "passed": rep.all_hold and sched.exact}
    if _format(cfg, "json") == "csv":
        names = ("zero_mode", "cross", "double_sum")
        rows = [{"term": nm, "value": t, "cap": c, "finite_n_cap": f, "holds": h}
                for nm, t, c, f, h in zip(names, rep.terms, rep.caps, rep.finite_n_caps, rep.holds)]
        emit(cfg, rows_to_csv(["term", "value", "cap", "finite_n_cap", "holds"], rows))
    else:
        emit(cfg, to_json(report))
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_identities(cfg: Config, args) -> int:
    rep = identity_suite(seed=cfg.numerics.seed)
    if args.divergence:
        man, p = cfg.manifold(), cfg.params()
        rep["divergence"] = domain_divergence_diagnostic(p, man, args.delta).as_dict()
        rep["passed"] = rep["passed"] and rep["divergence"]["passed"]
    emit(cfg, to_json(rep))
    return EXIT_OK if rep["passed"] else EXIT_CHECK_FAILED


def cmd_sweep(cfg: Config, args) -> int:
    sw = cfg.sweep
    axis = args.axis or (sw.axis if sw else None)
    outputs = args.outputs or (sw.outputs if sw else None)
    if args.values:
        values = args.values
    elif sw is not None:
        v = sw.values
        values = list(v) if isinstance(v, list) else axis_values(v.start, v.stop, v.num, v.scale)
    else:
        values = None
    missing = [name for name, val in (("sweep.axis", axis), ("sweep.values", values), ("sweep.outputs", outputs))
               if val is None]
    if missing:
        raise ConfigError([f"{m}: required (config sweep block or flag)" for m in missing])
    spec = SweepSpec(axis, tuple(values), cfg.params(), cfg.manifold(), tuple(outputs), seed=cfg.numerics.seed,
                     eps=args.eps if args.eps is not None else (sw.eps if sw else None),
                     s=args.s_fixed if args.s_fixed is not None else (sw.s if sw else None),
                     width=cfg.numerics.width, workers=cfg.numerics.workers)
    res = run_sweep(spec)
    if _format(cfg, "csv") == "json":
        emit(cfg, to_json({"columns": res.columns(), "rows": res.rows}))
    else:
        emit(cfg, res.to_csv())
    sidecar = args.sidecar or (cfg.output.path + ".meta.json" if cfg.output.path else None)
    if sidecar:
        with open(sidecar, "w", encoding="utf-8") as fh:
            fh.write(to_json(res.sidecar()))
    return EXIT_OK


def cmd_consistency(cfg: Config, args) -> int:
    mans = [Manifold(g, radius=1.0) if g in ("sphere", "hyperbolic") else Manifold.plane() for g in args.geometries]
    rows = consistency_matrix(mans, points=args.points, seed=cfg.numerics.seed, width=cfg.numerics.width,
                              workers=cfg.numerics.workers)
    if _format(cfg, "csv") == "json":
        emit(cfg, to_json({"rows": [asdict(r) for r in rows]}))
    else:
        emit(cfg, consistency_csv(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK_FAILED


# -- parser --------------------------------------------------------------------------


def _common(sp):
    g = sp.add_argument_group("configuration (flags override the config file)")
    g.add_argument("--config", help="YAML configuration file")
    g.add_argument("--geometry", choices=["plane", "torus", "sphere", "hyperbolic"])
    g.add_argument("--radius", type=float, help="sphere or hyperbolic-plane radius R")
    g.add_argument("--periods", type=_point, help="torus periods 'L1,L2'")
    g.add_argument("--m", type=float, help="boson mass (energy unit)")
    g.add_argument("--mu", type=float, help="physical binding energy, below m")
    g.add_argument("--lambda", "--lam", dest="lam", type=float, help="coupling constant")
    g.add_argument("--source", type=_point, help="source point a in chart coordinates")
    g.add_argument("--seed", type=int)
    g.add_argument("--width", type=float, help="Gaussian trial width on noncompact geometries")
    g.add_argument("--workers", type=int)
    g.add_argument("--format", choices=["csv", "json"])
    g.add_argument("--output", "-o", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lee2d", description=__doc__.splitlines()[0],
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 epilog="exit codes: 0 ok, 2 configuration, 3 domain, 4 accuracy/check failed, 5 internal")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("heat", help="heat kernel values K_s(x,y)",
                        description="Heat kernel K_s(x,y) of the diffusion generated by (1/2m) Laplacian, at time "
                                    "t = s/2m.  The residual column is |K(x,y) - K(y,x)| or the relative "
                                    "finite-difference residual of the heat equation.")
    _common(sp)
    sp.add_argument("--s", type=float, nargs="+", required=True, help="proper times s")
    sp.add_argument("--x", type=_point)
    sp.add_argument("--y", type=_point)
    sp.add_argument("--residual", choices=["symmetry", "heat_equation"], default="symmetry")
    sp.set_defaults(func=cmd_heat)

    sp = sub.add_parser("bound-state", help="root of the renormalised scalar principal function",
                        description="Solves mu - E + lam^2 int_0^inf ds K_s(a,a) [exp(-s(m-mu)) - exp(-s(m-E))] = 0 "
                                    "for E < m.  The renormalised root is E = mu.")
    _common(sp)
    sp.set_defaults(func=cmd_bound_state)

    sp = sub.add_parser("bounds", help="ground-state lower bound and the norm estimate",
                        description="Lower bound n m + mu - n C pi lam^2 m (plane, hyperbolic plane) or "
                                    "n m + mu - n lam^2 F (torus, sphere), with the kernel constant fitted on a "
                                    "nine-decade s-grid, plus the norm estimate evaluated at the bound.")
    _common(sp)
    sp.add_argument("--n", type=_count)
    sp.add_argument("--E", type=float, help="evaluate the norm estimate at this energy instead")
    sp.add_argument("--C", type=float, help="Cartan-Hadamard kernel constant (skip the fit)")
    sp.add_argument("--A", type=float, help="compact kernel constant (skip the fit)")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("meanfield", help="mean-field condition chi + ... = n U(chi)",
                        description="Mean-field condition with chi = n h0[u] - E: "
                                    "chi + mu + lam^2 int ds K_s(a,a)[exp(-s(m-mu)) - exp(-s(chi+m))] = n U[v](chi).")
    mf = sp.add_subparsers(dest="mf_command", required=True)
    for name, hlp in (("solve", "solve for chi with the constant (compact) or Gaussian (noncompact) trial"),
                      ("ansatz", "constant-ansatz transcendental equation on compact manifolds"),
                      ("asymptotics", "deficit n m + mu - E against the large-n law over several n"),
                      ("chain-check", "three-term upper-bound chain for a random few-mode trial")):
        p = mf.add_parser(name, help=hlp, description=hlp)
        _common(p)
        p.add_argument("--n", type=_count, nargs="+")
        if name == "ansatz":
            p.add_argument("--variant", choices=["printed", "exact"], nargs="+", default=["printed", "exact"])
        if name == "chain-check":
            p.add_argument("--modes", type=int, default=3)
        p.set_defaults(func=cmd_meanfield)

    sp = sub.add_parser("identities", help="integral identities and inequalities (JSON pass/fail)",
                        description="Feynman parametrisations, Beta integrals, the exponential-integral identity "
                                    "and the linear majorant delta + (eps/delta)^(eps/(1-eps)) x >= x^(1-eps).")
    _common(sp)
    sp.add_argument("--divergence", action="store_true", help="also run the short-time divergence diagnostic")
    sp.add_argument("--delta", type=float, default=1.0, help="Delta = n m - E for the divergence diagnostic")
    sp.set_defaults(func=cmd_identities)

    sp = sub.add_parser("sweep", help="parameter sweep to CSV plus JSON sidecar")
    _common(sp)
    sp.add_argument("--axis")
    sp.add_argument("--values", type=float, nargs="+")
    sp.add_argument("--outputs", nargs="+")
    sp.add_argument("--eps", type=float, help="fixed cutoff for mu_bare")
    sp.add_argument("--s", dest="s_fixed", type=float, help="fixed proper time for heat_diag")
    sp.add_argument("--n", type=_count)
    sp.add_argument("--sidecar", help="metadata JSON path (default <output>.meta.json)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("consistency", help="mean-field energy against the analytic lower bound")
    _common(sp)
    sp.add_argument("--geometries", nargs="+", choices=["sphere", "hyperbolic"], default=["sphere", "hyperbolic"])
    sp.add_argument("--points", type=int, default=50)
    sp.set_defaults(func=cmd_consistency)
    return ap


def _overrides(args) -> dict:
    g = lambda name: getattr(args, name, None)  # noqa: E731
    n = g("n")
    return {
        "geometry.kind": g("geometry"), "geometry.radius": g("radius"),
        "geometry.periods": list(g("periods")) if g("periods") else None,
        "physics.m": g("m"), "physics.mu": g("mu"), "physics.lambda": g("lam"),
        "physics.n": n if isinstance(n, int) else None,
        "physics.source": list(g("source")) if g("source") else None,
        "numerics.seed": g("seed"), "numerics.width": g("width"), "numerics.workers": g("workers"),
        "output.format": g("format"), "output.path": g("output"),
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = _overrides(args)
        cfg = load_config(args.config, overrides) if args.config else parse_config(None, overrides)
        return args.func(cfg, args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"configuration error: {e}", file=sys.stderr)
        return exc.exit_code
    except LeeModelError as exc:
        print(f"{exc.category} error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception:  # pragma: no cover - reported as internal
        traceback.print_exc()
        return 5


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
