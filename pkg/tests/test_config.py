import pytest
import yaml

from vresidue.config import (
    FORMAT,
    ConfigError,
    bundled_scenarios,
    load_scenario,
    parse_scenario,
    scene_hash,
)


def doc(**kw):
    base = {"format": FORMAT, "kind": "affine", "section": ["z1"], "weight": 1}
    base.update(kw)
    return base


def test_minimal_affine():
    cfg = parse_scenario(doc())
    assert cfg.scene.n == 1
    assert cfg.components == ("origin",)
    assert cfg.tolerance == 1e-6


def test_header_is_required():
    d = doc()
    del d["format"]
    with pytest.raises(ConfigError, match="format"):
        parse_scenario(d)


def test_wrong_version_rejected():
    with pytest.raises(ConfigError):
        parse_scenario(doc(format="vresidue-scenario/2"))


def test_unknown_field_rejected():
    with pytest.raises(ConfigError):
        parse_scenario(doc(bogus=1))


def test_unknown_method_rejected():
    with pytest.raises(ConfigError):
        parse_scenario(doc(methods=["contour", "magic"]))


def test_bad_expression_rejected():
    with pytest.raises(ConfigError, match="scene"):
        parse_scenario(doc(section=["z1 +"]))


def test_non_holomorphic_section_rejected():
    with pytest.raises(ConfigError):
        parse_scenario(doc(section=["zb1"]))


def test_unknown_component_rejected():
    with pytest.raises(ConfigError, match="unknown components"):
        parse_scenario(doc(components=["nowhere"]))


def test_kind_field_requirements():
    with pytest.raises(ConfigError, match="W"):
        parse_scenario({"format": FORMAT, "kind": "lg"})


def test_scenario_must_be_mapping():
    with pytest.raises(ConfigError):
        parse_scenario(["not", "a", "mapping"])


def test_all_bundled_scenarios_load():
    names = bundled_scenarios()
    assert {"cauchy", "p2-t0.3", "p2-t0", "lg-cubic-z1", "monomial-2-3", "growth-violation"} <= set(names)
    for name in names:
        load_scenario(name)


def test_load_from_file(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(yaml.safe_dump({"format": FORMAT, "kind": "monomial", "exponents": [2, 3], "weight": "z1*z2^2"}))
    cfg = load_scenario(p)
    assert cfg.scene.n == 2
    assert cfg.path == str(p)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_scenario("/nonexistent/scenario.yaml")


def test_invalid_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("format: [unterminated\n")
    with pytest.raises(ConfigError):
        load_scenario(p)


def test_atlas_scene():
    cfg = load_scenario("p1-atlas")
    assert len(cfg.scene.charts) == 2


def test_hash_tracks_weight():
    a = scene_hash(parse_scenario(doc()).scene)
    b = scene_hash(parse_scenario(doc()).scene)
    c = scene_hash(parse_scenario(doc(weight="2")).scene)
    assert a == b != c
