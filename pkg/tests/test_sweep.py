import csv
import io
import json
import math

import pytest
from numpy.testing import assert_allclose

from lee2d.errors import ConfigError
from lee2d.geometry import Manifold
from lee2d.renorm import PhysicalParams
from lee2d.sweep import (CONSISTENCY_COLUMNS, QUANTITIES, SweepSpec, axis_values, config_hash, consistency_csv,
                         consistency_grid, consistency_matrix, run_sweep)

P = PhysicalParams(1.0, 0.1, 1.0, n=100)


def spec(**kw):
    base = dict(axis="n", values=(100, 1000), params=P, man=Manifold.sphere(), outputs=("compact_deficit_ratio",))
    base.update(kw)
    return SweepSpec(**base)


def test_axis_values():
    assert_allclose(axis_values(1, 100, 3), (1, 10, 100))
    assert_allclose(axis_values(0, 1, 3, "linear"), (0, 0.5, 1))
    with pytest.raises(ConfigError):
        axis_values(0, 1, 3)


def test_spec_collects_errors():
    with pytest.raises(ConfigError) as info:
        spec(axis="bogus", outputs=("nope", "mu_bare"), values=(1, "x"))
    errs = info.value.errors
    assert any("unknown axis" in e for e in errs)
    assert any("unknown quantity 'nope'" in e for e in errs)
    assert any("needs 'eps'" in e for e in errs)
    assert any("not a number" in e for e in errs)


def test_sweep_csv_and_sidecar():
    res = run_sweep(spec(outputs=("compact_deficit_ratio", "meanfield_E")), timestamp="T")
    rows = list(csv.DictReader(io.StringIO(res.to_csv())))
    assert [r["axis_value"] for r in rows] == ["100.0", "1000.0"]
    assert all(r["error_category"] == "ok" for r in rows)
    assert "meanfield_E_residual" in rows[0]
    meta = res.sidecar()
    assert meta["timestamp"] == "T" and meta["rows"] == 2 and meta["failed_rows"] == 0
    assert meta["config_hash"] == config_hash(meta["config"])
    json.dumps(meta)


def test_sweep_rows_fail_independently():
    res = run_sweep(spec(axis="mu", values=(0.1, 5.0), outputs=("bound_state_E",)), timestamp="T")
    assert res.rows[0]["error_category"] == "ok"
    assert_allclose(res.rows[0]["bound_state_E"], 0.1, rtol=1e-9)
    assert res.rows[1]["error_category"] == "domain"
    assert res.metadata["failed_rows"] == 1


def test_sweep_is_deterministic_across_worker_counts():
    a = run_sweep(spec(axis="eps", values=(1e-6, 1e-4, 1e-2), outputs=("mu_bare",), workers=1), timestamp="T")
    b = run_sweep(spec(axis="eps", values=(1e-6, 1e-4, 1e-2), outputs=("mu_bare",), workers=3), timestamp="T")
    assert a.to_csv() == b.to_csv()


def test_plane_bare_mass_sweep():
    from scipy.special import exp1
    res = run_sweep(spec(axis="eps", values=(1e-5, 1e-3), outputs=("mu_bare",), man=Manifold.plane()), timestamp="T")
    for row in res.rows:
        want = 0.1 + exp1(row["axis_value"] * 0.9) / (2 * math.pi)
        assert_allclose(row["mu_bare"], want, rtol=1e-10)


def test_every_quantity_is_documented():
    assert all(q.doc for q in QUANTITIES.values())


def test_consistency_grid_first_row_free():
    grid = consistency_grid(Manifold.sphere(), 5, seed=2)
    assert grid[0].lam == 0.0
    assert all(0 < p.mu < p.m for p in grid)
    assert grid == consistency_grid(Manifold.sphere(), 5, seed=2)


def test_consistency_matrix_small():
    rows = consistency_matrix([Manifold.sphere(), Manifold.hyperbolic()], points=4, seed=1)
    assert len(rows) == 8
    assert all(r.passed and r.margin >= 0 for r in rows)
    assert consistency_csv(rows).splitlines()[0] == ",".join(CONSISTENCY_COLUMNS)
