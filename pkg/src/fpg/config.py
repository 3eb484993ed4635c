"""Problem configuration: a YAML document validated against a JSON schema.

Example::

    n: 3
    metric:
      family: riemannian
      g: [["4/(1+x1^2+x2^2+x3^2)^2", "0", "0"],
          ["0", "4/(1+x1^2+x2^2+x3^2)^2", "0"],
          ["0", "0", "4/(1+x1^2+x2^2+x3^2)^2"]]
    lambda: "0.05*(y1 + x1*y2)"
    domain: {x_low: [-0.5, -0.5, -0.5], x_high: [0.5, 0.5, 0.5]}
    points: 20
    seed: 42
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import yaml

from . import fixtures
from .derivatives import EvalPoint
from .errors import ConfigError, DimensionError, ExprSyntaxError, UnknownIdentifier
from .expr import Expr, parse
from .metrics import (
    ExplicitSpray,
    FinslerMetric,
    ProjectiveFactor,
    Spray,
    canonical_spray,
    custom,
    euclidean,
    minkowski,
    randers,
    register_metric,
    register_spray,
    zero_factor,
)
from .sampling import WorkingDomain

_EXPR = {"type": "string", "minLength": 1}
_VEC = {"type": "array", "items": {"type": "number"}}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["n"],
    "properties": {
        "n": {"type": "integer", "minimum": 1, "maximum": 8},
        "metric": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": ["fixture", "euclidean", "riemannian", "randers", "minkowski", "custom"]},
                "name": {"type": "string"},
                "L": _EXPR,
                "g": {"type": "array", "items": {"type": "array", "items": _EXPR}},
                "a": {"type": "array", "items": {"type": "array", "items": _EXPR}},
                "b": {"type": "array", "items": _EXPR},
            },
        },
        "spray": {"type": "array", "items": _EXPR, "minItems": 1},
        "lambda": _EXPR,
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "x_low": _VEC,
                "x_high": _VEC,
                "y_min": {"type": "number", "exclusiveMinimum": 0},
                "y_max": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "points": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "point": {
            "type": "object",
            "additionalProperties": False,
            "required": ["x", "y"],
            "properties": {"x": _VEC, "y": _VEC},
        },
        "tolerance": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "default": {"type": "number", "exclusiveMinimum": 0},
                "identities": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
        "output": {"type": "string"},
    },
    "oneOf": [{"required": ["metric"]}, {"required": ["spray"]}],
}

#: Named factors accepted in place of an expression for ``lambda``.
NAMED_FACTORS = ("zero", "lin", "norm")


@dataclass
class ProblemConfig:
    n: int
    spray: Spray
    metric: FinslerMetric | None
    factor: ProjectiveFactor | None
    domain: WorkingDomain
    points: int = 20
    seed: int = 42
    point: EvalPoint | None = None
    tol: float | None = None
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    label: str = ""


def load_config(path: str | Path) -> ProblemConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return build_config(doc, str(path))


def build_config(doc, source: str = "<config>") -> ProblemConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{source}: at {where}: {exc.message}") from None
    n = doc["n"]
    domain = _domain(doc.get("domain", {}), n, source)
    try:
        if "metric" in doc:
            metric = _metric(doc["metric"], n, domain)
            spray: Spray = canonical_spray(metric)
            label = metric.params.get("name", metric.family)
        else:
            metric = None
            spray = register_spray(ExplicitSpray(n, [_expr(s, n, "spray") for s in doc["spray"]]), domain)
            label = "explicit spray"
        factor = _factor(doc.get("lambda"), n, metric, domain)
    except (ExprSyntaxError, UnknownIdentifier, DimensionError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    point = None
    if "point" in doc:
        try:
            point = EvalPoint(tuple(doc["point"]["x"]), tuple(doc["point"]["y"]))
        except ValueError as exc:
            raise ConfigError(f"{source}: point: {exc}") from exc
        if point.n != n:
            raise ConfigError(f"{source}: point has dimension {point.n}, expected {n}")
    tol = doc.get("tolerance", {})
    return ProblemConfig(
        n=n,
        spray=spray,
        metric=metric,
        factor=factor,
        domain=domain,
        points=doc.get("points", 20),
        seed=doc.get("seed", 42),
        point=point,
        tol=tol.get("default"),
        tolerances=dict(tol.get("identities", {})),
        output=doc.get("output"),
        label=label,
    )


def _domain(section: dict, n: int, source: str) -> WorkingDomain:
    low = tuple(section.get("x_low", (-0.5,) * n))
    high = tuple(section.get("x_high", (0.5,) * n))
    if len(low) != n or len(high) != n:
        raise ConfigError(f"{source}: domain corners must have {n} entries")
    if any(a > b for a, b in zip(low, high)):
        raise ConfigError(f"{source}: domain needs x_low <= x_high")
    try:
        return WorkingDomain(low, high, section.get("y_min", 0.1), section.get("y_max", 10.0))
    except ValueError as exc:
        raise ConfigError(f"{source}: domain: {exc}") from exc


def _expr(src: str, n: int, where: str) -> Expr:
    try:
        return parse(src, n)
    except ExprSyntaxError as exc:
        raise ExprSyntaxError(f"{where}: {exc.message}", exc.line, exc.column, exc.expected) from None
    except (UnknownIdentifier, DimensionError) as exc:
        raise type(exc)(f"{where}: {exc}") from None


def _matrix(rows, n: int, where: str) -> list:
    if rows is None or len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"{where} must be an {n}x{n} matrix of expressions")
    return [[_expr(e, n, f"{where}[{i}][{j}]") for j, e in enumerate(r)] for i, r in enumerate(rows)]


def _metric(section: dict, n: int, domain: WorkingDomain) -> FinslerMetric:
    family = section["family"]
    if family == "fixture":
        name = section.get("name")
        if name not in fixtures.METRICS:
            raise ConfigError(f"unknown fixture {name!r}; choose one of {sorted(fixtures.METRICS)}")
        if n != fixtures.N:
            raise ConfigError(f"fixtures live in dimension {fixtures.N}")
        metric = fixtures.METRICS[name]
    elif family == "euclidean":
        metric = euclidean(n)
    elif family == "riemannian":
        from .metrics import riemannian

        metric = riemannian(n, _matrix(section.get("g"), n, "metric.g"), name=section.get("name", "riemannian"))
    elif family == "randers":
        b = section.get("b")
        if b is None or len(b) != n:
            raise ConfigError(f"metric.b must list {n} expressions")
        metric = randers(
            n, _matrix(section.get("a"), n, "metric.a"), [_expr(e, n, f"metric.b[{i}]") for i, e in enumerate(b)],
            domain, name=section.get("name", "randers"),
        )
    else:
        if "L" not in section:
            raise ConfigError(f"metric family {family!r} needs an expression L")
        L = _expr(section["L"], n, "metric.L")
        if family == "minkowski":
            if any(v.startswith("x") for v in L.variables()):
                raise ConfigError("a minkowski metric may not depend on x")
            metric = minkowski(n, L, name=section.get("name", "minkowski"))
        else:
            metric = custom(n, L, name=section.get("name", "custom"))
    return register_metric(metric, domain)


def _factor(section, n: int, metric: FinslerMetric | None, domain: WorkingDomain) -> ProjectiveFactor | None:
    from .metrics import projective_factor

    if section is None:
        return None
    if section == "zero":
        return zero_factor(n)
    if section == "lin":
        if n != fixtures.N:
            raise ConfigError("the named factor 'lin' is defined in dimension 3")
        return fixtures.lambda_lin()
    if section == "norm":
        if metric is None:
            raise ConfigError("the named factor 'norm' needs a metric")
        return projective_factor(n, fixtures.lambda_norm(metric).fn, "lambda_norm", domain)
    e = _expr(section, n, "lambda")
    return projective_factor(n, e, e.pretty(), domain)
