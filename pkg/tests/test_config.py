import pytest

from lee2d.config import load_config, merge_overrides, parse_config
from lee2d.errors import ConfigError
from lee2d.geometry import Kind


def errors_of(src, overrides=None):
    with pytest.raises(ConfigError) as info:
        parse_config(src, overrides)
    return info.value.errors


def test_empty_document_uses_defaults():
    cfg = parse_config("")
    assert cfg.manifold().kind is Kind.SPHERE
    p = cfg.params()
    assert (p.m, p.mu, p.lam, p.n) == (0.5, 0.1, 1.0, 0)


def test_lambda_alias_and_exponent_strings():
    cfg = parse_config("physics: {lambda: 2.5, n: 1e6}\ngeometry: {kind: torus, periods: [1, 2]}")
    assert cfg.physics.lam == 2.5
    assert cfg.physics.n == 1_000_000
    assert cfg.manifold().torus_periods == (1.0, 2.0)


def test_typo_gets_suggestion():
    errs = errors_of("physics: {lamda: 1.0}")
    assert errs == ["physics.lamda: unknown key; did you mean 'physics.lambda'?"]


def test_all_errors_collected():
    errs = errors_of("geometry: {kind: sphere, radius: -1}\nphysics: {m: 1.0, mu: 2.0}\nnumerics: {workers: 0}")
    assert "geometry.radius: must be positive" in errs
    assert any(e.startswith("physics.mu:") for e in errs)
    assert "numerics.workers: must be at least 1" in errs


def test_schema_and_semantic_errors_together():
    errs = errors_of("geometry: {kind: cone}\nphysics: {m: -1}")
    assert any(e.startswith("geometry.kind:") for e in errs)
    assert "physics.m: must be positive" in errs


def test_misplaced_geometry_parameters():
    assert errors_of("geometry: {kind: plane, radius: 2}") == ["geometry.radius: does not apply to the plane"]
    assert errors_of("geometry: {kind: torus, radius: 2}") == ["geometry.radius: does not apply to a torus"]


def test_source_outside_chart():
    errs = errors_of("physics: {source: [5.0, 0.0]}")
    assert len(errs) == 1 and errs[0].startswith("physics.source:")


def test_yaml_syntax_error_has_location():
    errs = errors_of("physics: {m: 1.0\n")
    assert errs[0].startswith("YAML syntax error at line")


def test_top_level_must_be_mapping():
    assert errors_of("- 1\n- 2")[0].startswith("top level must be a mapping")


def test_overrides_win(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("physics: {mu: 0.2}\n")
    cfg = load_config(str(path), {"physics.mu": 0.3, "physics.m": None})
    assert cfg.physics.mu == 0.3
    assert merge_overrides({"a": {"x": 1}}, {"a.y": 2}) == {"a": {"x": 1, "y": 2}}


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.yaml")


def test_sweep_block_range():
    cfg = parse_config("sweep: {axis: n, values: {start: 10, stop: 1000, num: 3}, outputs: [meanfield_E]}")
    assert cfg.sweep.values.num == 3
    errs = errors_of("sweep: {axis: n, values: {start: 10, stop: 1000, nmu: 3}, outputs: []}")
    assert any("did you mean 'sweep.values.num'" in e for e in errs)
