"""Configuration schema for the command line.

A config is YAML with the blocks ``geometry``, ``physics``, ``numerics``,
``output`` and an optional ``sweep``.  Every block has defaults, so an empty
document is valid (unit sphere, ``m = 1/2``, ``mu = 0.1``, ``lambda = 1``).
All problems are collected before reporting.

Example::

    geometry: {kind: sphere, radius: 1.0}
    physics: {m: 0.5, mu: 0.1, lambda: 1.0, n: 100, source: [0.0, 0.0]}
    numerics: {tol: 1.0e-10, root_tol: 1.0e-9, seed: 0, width: 1.0, workers: 4}
    output: {format: csv, path: results.csv}
"""

from __future__ import annotations

import difflib
import math
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError, DomainError
from .geometry import Manifold, check_point
from .renorm import PhysicalParams


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GeometryBlock(_Block):
    kind: Literal["plane", "torus", "sphere", "hyperbolic"] = "sphere"
    radius: Optional[float] = None
    periods: Optional[tuple[float, float]] = None


class PhysicsBlock(_Block):
    m: float = 0.5
    mu: float = 0.1
    lam: float = Field(1.0, alias="lambda")
    n: int = 0
    source: tuple[float, float] = (0.0, 0.0)

    @field_validator("n", mode="before")
    @classmethod
    def _integral_float(cls, v):
        # YAML 1.1 reads "1e6" as a string; accept any integral numeral
        if isinstance(v, str):
            try:
                v = float(v)
            except ValueError:
                return v
        if isinstance(v, float) and v.is_integer():
            return int(v)
        return v


class NumericsBlock(_Block):
    tol: float = 1e-10
    root_tol: float = 1e-9
    seed: int = 0
    width: float = 1.0
    workers: int = 4


class OutputBlock(_Block):
    format: Optional[Literal["csv", "json"]] = None
    path: Optional[str] = None


class RangeValues(_Block):
    start: float
    stop: float
    num: int
    scale: Literal["log", "linear"] = "log"


class SweepBlock(_Block):
    axis: str
    values: Union[list[float], RangeValues]
    outputs: list[str]
    eps: Optional[float] = None
    s: Optional[float] = None


class Config(_Block):
    geometry: GeometryBlock = GeometryBlock()
    physics: PhysicsBlock = PhysicsBlock()
    numerics: NumericsBlock = NumericsBlock()
    output: OutputBlock = OutputBlock()
    sweep: Optional[SweepBlock] = None

    def manifold(self) -> Manifold:
        g = self.geometry
        if g.kind == "torus":
            return Manifold.torus(*(g.periods or (1.0, 1.0)))
        if g.kind in ("sphere", "hyperbolic"):
            return Manifold(g.kind, radius=1.0 if g.radius is None else g.radius)
        return Manifold.plane()

    def params(self) -> PhysicalParams:
        ph = self.physics
        return PhysicalParams(ph.m, ph.mu, ph.lam, n=ph.n, a=ph.source)


_BLOCKS = {
    (): Config, ("geometry",): GeometryBlock, ("physics",): PhysicsBlock, ("numerics",): NumericsBlock,
    ("output",): OutputBlock, ("sweep",): SweepBlock, ("sweep", "values"): RangeValues,
}


def _field_names(model) -> list[str]:
    names = []
    for name, info in model.model_fields.items():
        names.append(info.alias or name)
    return names


_UNION_TAGS = {"list[float]", "RangeValues"}


def _format_error(err: dict) -> str:
    loc = tuple(str(p) for p in err["loc"] if str(p) not in _UNION_TAGS)
    path = ".".join(loc)
    if err["type"] == "extra_forbidden":
        parent = _BLOCKS.get(loc[:-1])
        hint = ""
        if parent is not None:
            close = difflib.get_close_matches(loc[-1], _field_names(parent), n=1, cutoff=0.6)
            if close:
                hint = f"; did you mean '{'.'.join(loc[:-1] + (close[0],))}'?"
        return f"{path}: unknown key{hint}"
    return f"{path}: {err['msg']}"


def _semantic(cfg: Config) -> list[str]:
    """Invariants of the manifold and the physical parameters, with field paths."""
    errs = []
    g, ph, nu = cfg.geometry, cfg.physics, cfg.numerics
    if g.kind == "torus":
        if g.radius is not None:
            errs.append("geometry.radius: does not apply to a torus")
        if g.periods is not None and not all(L > 0 and math.isfinite(L) for L in g.periods):
            errs.append("geometry.periods: both periods must be positive")
    elif g.kind in ("sphere", "hyperbolic"):
        if g.periods is not None:
            errs.append(f"geometry.periods: only applies to a torus, not a {g.kind}")
        if g.radius is not None and not (g.radius > 0 and math.isfinite(g.radius)):
            errs.append("geometry.radius: must be positive")
    else:
        if g.radius is not None:
            errs.append("geometry.radius: does not apply to the plane")
        if g.periods is not None:
            errs.append("geometry.periods: only applies to a torus")
    if not (ph.m > 0 and math.isfinite(ph.m)):
        errs.append("physics.m: must be positive")
    if not math.isfinite(ph.mu) or (ph.m > 0 and ph.mu >= ph.m):
        errs.append(f"physics.mu: must be finite and below m = {ph.m}")
    if not (ph.lam >= 0 and math.isfinite(ph.lam)):
        errs.append("physics.lambda: must be nonnegative")
    if ph.n < 0:
        errs.append("physics.n: must be nonnegative")
    for name in ("tol", "root_tol", "width"):
        val = getattr(nu, name)
        if not (val > 0 and math.isfinite(val)):
            errs.append(f"numerics.{name}: must be positive")
    if nu.workers < 1:
        errs.append("numerics.workers: must be at least 1")
    if not any(e.startswith("geometry.") for e in errs):
        try:
            check_point(cfg.manifold(), ph.source)
        except DomainError as exc:
            errs.append(f"physics.source: {exc}")
    return errs


def load_yaml(text: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError([f"YAML syntax error{where}: {problem}"]) from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError([f"top level must be a mapping, got {type(data).__name__}"])
    return data


def merge_overrides(data: dict, overrides: dict) -> dict:
    """Apply dotted-path overrides (``{"physics.mu": 0.2}``); flags win over the file."""
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()}
    for path, value in overrides.items():
        if value is None:
            continue
        head, _, tail = path.partition(".")
        block = out.setdefault(head, {})
        if not isinstance(block, dict):
            block = out[head] = {}
        block[tail] = value
    return out


def _without(data: dict, locs) -> dict:
    """Copy of ``data`` with the value at every error location removed."""
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()}
    for loc in locs:
        loc = [str(p) for p in loc if str(p) not in _UNION_TAGS]
        node = out
        for key in loc[:-1]:
            node = node.get(key) if isinstance(node, dict) else None
        if isinstance(node, dict) and loc:
            node.pop(loc[-1], None)
    return out


def parse_config(source: Union[str, dict, None] = None, overrides: Optional[dict] = None) -> Config:
    """Validate a YAML string (or an already-parsed mapping) into a :class:`Config`.

    Raises :class:`ConfigError` listing every problem, each prefixed with its
    field path.
    """
    data = load_yaml(source) if isinstance(source, str) else dict(source or {})
    data = merge_overrides(data, overrides or {})
    try:
        cfg = Config.model_validate(data)
    except ValidationError as exc:
        errs = list(dict.fromkeys(_format_error(e) for e in exc.errors()))
        # drop the offending keys and still report semantic problems in the rest
        reported = {e.split(":")[0] for e in errs}
        partial = _without(data, [e["loc"] for e in exc.errors()])
        try:
            extra = _semantic(Config.model_validate(partial))
            errs += [e for e in extra if e.split(":")[0] not in reported]
        except ValidationError:
            pass
        raise ConfigError(errs) from None
    errs = _semantic(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg


def load_config(path: str, overrides: Optional[dict] = None) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path!r}: {exc.strerror}"]) from None
    return parse_config(text, overrides)
