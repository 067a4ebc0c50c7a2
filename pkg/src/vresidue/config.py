"""Scenario files: YAML documents with a versioned header.

A scenario names a scene (``kind`` is ``affine``, ``monomial``, ``lg``,
``projective-plane`` or ``atlas``) and the run settings: methods,
quadrature and Monte Carlo overrides, tolerance and seed.  Documents are
validated against the bundled JSON schema before any scene is built.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import expr as E
from .algebra import AlgebraError, HermitianMetric
from .scene import (
    Chart,
    Scene,
    SceneError,
    Transition,
    ZeroComponent,
    affine_scene,
    lg_scene,
    monomial_scene,
    p2_scene,
)

__all__ = [
    "FORMAT",
    "METHODS",
    "ConfigError",
    "RunConfig",
    "load_schema",
    "load_scenario",
    "parse_scenario",
    "build_scene",
    "scene_hash",
    "bundled_scenarios",
]

FORMAT = "vresidue-scenario/1"
METHODS = ("contour", "boundary", "mq", "oracle")


class ConfigError(ValueError):
    """Scenario document failed validation."""


def load_schema(name: str) -> dict:
    """Bundled JSON schema ``scenario`` or ``report``."""
    text = resources.files("vresidue").joinpath("data", f"{name}.schema.json").read_text()
    return json.loads(text)


def bundled_scenarios() -> dict:
    """Map of bundled scenario names to their paths."""
    root = resources.files("vresidue").joinpath("data", "scenarios")
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml")}


@dataclass
class RunConfig:
    """Everything a run needs: the scene plus method settings."""

    scene: Scene
    methods: tuple = METHODS
    components: tuple = ()
    quadrature: dict = field(default_factory=dict)
    contour_radius: float = None
    boundary_radius: float = None
    mq: dict = field(default_factory=dict)
    tolerance: float = 1e-6
    seed: int = 0
    path: str = None
    doc: dict = field(default_factory=dict)

    def settings(self) -> dict:
        """Plain-data echo of the run settings (no scene data)."""
        return {
            "methods": list(self.methods),
            "components": list(self.components),
            "quadrature": dict(self.quadrature),
            "contour_radius": self.contour_radius,
            "boundary_radius": self.boundary_radius,
            "mq": dict(self.mq),
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


def _number(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    e = E.parse(str(x), 1)
    if not e.is_constant():
        raise ConfigError(f"expected a number, got {x!r}")
    return complex(E.evaluate(e, np.zeros(1)))


def _expr(x, n: int, names=None) -> E.Expr:
    if isinstance(x, (int, float)):
        return E.const(x)
    return E.parse(str(x), n, names)


def _metric(rows, n: int, names=None) -> HermitianMetric:
    return HermitianMetric([[_expr(x, n, names) for x in row] for row in rows])


def _zeros(items, n: int, default_chart: str, names_by_chart: dict):
    out = []
    for k, z in enumerate(items or []):
        if isinstance(z, list):
            out.append(ZeroComponent(f"p{k}", "point", default_chart, tuple(_number(c) for c in z)))
            continue
        chart = z.get("chart", default_chart)
        if z["kind"] == "point":
            out.append(ZeroComponent(z["label"], "point", chart, tuple(_number(c) for c in z["point"])))
        else:
            param = {c: tuple(E.parse(str(x), 1) for x in v) for c, v in (z.get("param") or {}).items()}
            out.append(ZeroComponent(z["label"], "curve", chart, param=param, line=z.get("line")))
    return out


def _require(doc: dict, *keys):
    for k in keys:
        if k not in doc:
            raise ConfigError(f"kind {doc['kind']!r} needs the field {k!r}")


def build_scene(doc: dict) -> Scene:
    """Scene described by a validated scenario document."""
    kind = doc["kind"]
    name = doc.get("name")
    if kind == "monomial":
        _require(doc, "exponents")
        sc = monomial_scene(doc["exponents"], _expr(doc.get("weight", 1), len(doc["exponents"])), name=name)
    elif kind == "affine":
        _require(doc, "section")
        n = doc.get("n", len(doc["section"]))
        metric = _metric(doc["metric"], n) if "metric" in doc else None
        zeros = _zeros(doc.get("zeros"), n, "C", {}) if "zeros" in doc else None
        sc = affine_scene([_expr(x, n) for x in doc["section"]], _expr(doc.get("weight", 1), n), n=n,
                          metric=metric, zeros=zeros, name=name or "affine", C0=doc.get("C0"),
                          compact_radius=doc.get("compact_radius"))
    elif kind == "lg":
        _require(doc, "W")
        n = doc.get("n", 1)
        zeros = _zeros(doc.get("zeros"), n, "C", {}) if "zeros" in doc else None
        sc = lg_scene(_expr(doc["W"], n), n, observable=_expr(doc.get("observable", 1), n), zeros=zeros,
                      name=name or "lg")
    elif kind == "projective-plane":
        _require(doc, "t")
        sc = p2_scene(doc["t"], tuple(doc.get("ell", (1, 0, 0))), name=name)
    elif kind == "atlas":
        _require(doc, "n", "charts")
        sc = _atlas(doc)
    else:  # pragma: no cover - the schema rejects other kinds
        raise ConfigError(f"unknown kind {kind!r}")
    return sc


def _atlas(doc: dict) -> Scene:
    n = doc["n"]
    charts, section, weight, metrics, names = [], {}, {}, {}, {}
    for c in doc["charts"]:
        ch = Chart(c["id"], n, tuple(c.get("names", ())))
        nm = list(ch.names) if c.get("names") else None
        names[ch.id] = nm
        charts.append(ch)
        section[ch.id] = tuple(_expr(x, n, nm) for x in c["section"])
        weight[ch.id] = _expr(c["weight"], n, nm)
        if "metric" in c:
            metrics[ch.id] = _metric(c["metric"], n, nm)
    transitions = {}
    for t in doc.get("transitions", []):
        nm = names.get(t["source"])
        coords = tuple(_expr(x, n, nm) for x in t["coords"])
        bundle = tuple(tuple(_expr(x, n, nm) for x in row) for row in t["bundle"])
        transitions[(t["source"], t["target"])] = Transition(t["source"], t["target"], coords, bundle)
    zeros = _zeros(doc.get("zeros"), n, charts[0].id, names)
    return Scene(name=doc.get("name", "atlas"), n=n, charts=tuple(charts), section=section, weight=weight,
                 metrics=metrics, transitions=transitions, zeros=tuple(zeros), kind="atlas",
                 C0=doc.get("C0"), compact_radius=doc.get("compact_radius")).validate()


def parse_scenario(doc, path: str = None) -> RunConfig:
    """Validate a scenario document and build its :class:`RunConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a mapping")
    try:
        jsonschema.validate(doc, load_schema("scenario"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc
    try:
        sc = build_scene(doc)
    except (SceneError, AlgebraError, E.ExprSyntaxError, ValueError) as exc:
        raise ConfigError(f"scene: {exc}") from exc
    labels = [z.label for z in sc.zeros]
    comps = tuple(doc.get("components", labels))
    missing = [c for c in comps if c not in labels]
    if missing:
        raise ConfigError(f"unknown components {missing}; declared: {labels}")
    contour = doc.get("contour", {})
    boundary = doc.get("boundary", {})
    return RunConfig(
        scene=sc,
        methods=tuple(doc.get("methods", METHODS)),
        components=comps,
        quadrature=dict(doc.get("quadrature", {})),
        contour_radius=contour.get("radius"),
        boundary_radius=boundary.get("radius"),
        mq=dict(doc.get("mq", {})),
        tolerance=float(doc.get("tolerance", 1e-6)),
        seed=int(doc.get("seed", 0)),
        path=path,
        doc=doc,
    )


def load_scenario(path) -> RunConfig:
    """Read, validate and build a scenario file (or a bundled scenario name)."""
    p = Path(path)
    if not p.exists():
        bundled = bundled_scenarios()
        if str(path) in bundled:
            p = bundled[str(path)]
        else:
            raise ConfigError(f"no scenario file {path}")
    try:
        doc = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    return parse_scenario(doc, str(path))


def scene_hash(sc: Scene) -> str:
    """Content hash of a scene's data."""
    blob = json.dumps(sc.fingerprint(), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()
