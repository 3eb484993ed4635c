"""Command-line front end.

Exit codes: 0 every verdict holds, 1 some verdict fails, 2 usage or
configuration error, 3 numerical domain error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .berwald import apparatus
from .classify import flatness_report, is_berwald, is_douglas
from .config import ProblemConfig, load_config
from .errors import ConfigError, DomainError, FPGError, SingularMetric, StepUnderflow, UsageError
from .metrics import fundamental_tensor
from .sampling import sample_points
from .suite import (
    Case,
    SuiteReport,
    homogeneity_suite,
    invariance_suite,
    oracle_suite,
    structural_suite,
)
from . import berwald as bw
from . import projective as pj

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3

# canonical name -> (aliases, getter(spray, point) -> TensorValue)
TENSORS = {
    "g": (("g",), None),
    "G": (("G",), None),
    "N": (("N",), bw.nonlinear_connection),
    "Gijk": (("Gijk", "Berwald"), bw.berwald_coefficients),
    "P": (("P", "P°", "Pc"), bw.hv_curvature),
    "Rhat": (("Rhat", "R̂"), bw.vh_torsion),
    "H": (("H",), bw.deviation_tensor),
    "Rc": (("Rc", "R°"), bw.h_curvature),
    "theta": (("theta", "θ"), lambda s, p: bw.traces(s, p)[0]),
    "R2": (("R2", "R₂"), lambda s, p: bw.traces(s, p)[1]),
    "R1": (("R1", "R₁"), lambda s, p: bw.traces(s, p)[2]),
    "k": (("k",), lambda s, p: bw.traces(s, p)[3]),
    "omega": (("omega", "ω"), lambda s, p: bw.omega_and_p(s, p)[0]),
    "p": (("p",), lambda s, p: bw.omega_and_p(s, p)[1]),
    "Pi": (("Pi", "Π"), pj.projective_connection),
    "W": (("W",), pj.weyl_curvature),
    "W1": (("W1", "W₁"), lambda s, p: pj.weyl_deviation_and_torsion(s, p)[0]),
    "W2": (("W2", "W₂"), lambda s, p: pj.weyl_deviation_and_torsion(s, p)[1]),
    "Douglas": (("Douglas", "ℙ"), pj.douglas_tensor),
}
_ALIASES = {alias: name for name, (aliases, _) in TENSORS.items() for alias in aliases}


def resolve_tensor(name: str) -> str:
    if name not in _ALIASES:
        raise UsageError(f"unknown tensor {name!r}; valid names: {', '.join(TENSORS)}")
    return _ALIASES[name]


def _tensor_value(cfg: ProblemConfig, name: str, p):
    from .tensor import TensorValue

    if name == "g":
        if cfg.metric is None:
            raise UsageError("tensor 'g' needs a metric, the config defines a spray")
        return fundamental_tensor(cfg.metric, p).g
    if name == "G":
        return TensorValue("G", np.asarray(apparatus(cfg.spray, p).G.value), ("contra",), "G[i]", p)
    return TENSORS[name][1](cfg.spray, p)


def _points(cfg: ProblemConfig, args) -> list:
    count = args.points if args.points is not None else cfg.points
    seed = args.seed if args.seed is not None else cfg.seed
    return sample_points(cfg.domain, count, seed)


def _emit(payload: dict, args, cfg: ProblemConfig | None) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    out = args.out or (cfg.output if cfg else None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed(cfg, args) -> int:
    return args.seed if args.seed is not None else cfg.seed


# commands -------------------------------------------------------------------


def cmd_tensors(cfg: ProblemConfig, args) -> int:
    names = [resolve_tensor(t) for t in (args.tensor or ["G"])]
    p = cfg.point or _points(cfg, args)[0]
    values = [_tensor_value(cfg, name, p).to_dict() for name in names]
    _emit({"command": "tensors", "problem": cfg.label, "point": {"x": list(p.x), "y": list(p.y)},
           "tensors": values, "environment": {"version": __version__}}, args, cfg)
    return EXIT_OK


def _finish(report: SuiteReport, args, cfg) -> int:
    _emit(report.to_dict(), args, cfg)
    return EXIT_OK if report.all_hold else EXIT_FAIL


def cmd_invariance(cfg: ProblemConfig, args) -> int:
    if cfg.factor is None:
        raise ConfigError("the invariance suite needs a 'lambda' entry in the config")
    pts = _points(cfg, args)
    case = Case(f"{cfg.label} / {cfg.factor.name}", cfg.spray, cfg.factor)
    tol = args.tol if args.tol is not None else cfg.tol
    report = invariance_suite([case], pts, _seed(cfg, args), tol)
    structural = structural_suite([case], pts, _seed(cfg, args), tol)
    report.records.extend(structural.records)
    report.errors.extend(structural.errors)
    report.elapsed += structural.elapsed
    _apply_overrides(report, cfg)
    return _finish(report, args, cfg)


def _apply_overrides(report: SuiteReport, cfg: ProblemConfig) -> None:
    for r in report.records:
        if r.id in cfg.tolerances:
            r.threshold = cfg.tolerances[r.id]
            r.verdict = "holds" if r.max_residual <= r.threshold else "fails"


def cmd_homogeneity(cfg: ProblemConfig, args) -> int:
    tol = args.tol if args.tol is not None else cfg.tol
    report = homogeneity_suite([Case(cfg.label, cfg.spray)], _points(cfg, args), _seed(cfg, args), tol)
    _apply_overrides(report, cfg)
    return _finish(report, args, cfg)


def cmd_classify(cfg: ProblemConfig, args) -> int:
    """Predicate verdicts are reported as data; the exit code reflects the implication checks."""
    pts = _points(cfg, args)
    tau = args.tol if args.tol is not None else (cfg.tol or 1e-8)
    verdicts = [is_berwald(cfg.spray, pts, tau), is_douglas(cfg.spray, pts, tau)]
    if cfg.factor is not None:
        flat = flatness_report(cfg.spray, cfg.factor, pts, tau)
        verdicts += [v for k, v in flat.items() if k != "douglas"]
    berwald_implies_douglas = not (verdicts[0].holds and not verdicts[1].holds)
    checks = [v for v in verdicts if "implies" in v.predicate]
    ok = berwald_implies_douglas and all(v.holds for v in checks)
    ok = ok and not any(v.verdict == "inconclusive" for v in verdicts)
    _emit({
        "command": "classify",
        "problem": cfg.label,
        "verdicts": [v.to_dict() for v in verdicts],
        "implications": {
            "berwald_implies_douglas": berwald_implies_douglas,
            **{v.predicate: v.holds for v in checks},
        },
        "environment": {"version": __version__, "seed": _seed(cfg, args), "points": len(pts)},
    }, args, cfg)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle_check(cfg: ProblemConfig, args) -> int:
    pts = _points(cfg, args)
    fields = []
    if cfg.metric is not None:
        fields += [("L", cfg.metric.L), ("E", cfg.metric.energy)]
    else:
        fields += [(f"G{i + 1}", c) for i, c in enumerate(cfg.spray.components)]
    if cfg.factor is not None and not cfg.factor.is_zero:
        fields.append(("lambda", cfg.factor.fn))
    samples = args.samples
    tol = args.tol if args.tol is not None else cfg.tol
    cases = [Case(cfg.label, cfg.spray)] if args.douglas else []
    report = oracle_suite(fields, cfg.n, pts, samples, _seed(cfg, args), cases, tol)
    _apply_overrides(report, cfg)
    return _finish(report, args, cfg)


COMMANDS = {
    "tensors": cmd_tensors,
    "invariance": cmd_invariance,
    "classify": cmd_classify,
    "homogeneity": cmd_homogeneity,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML problem description")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--points", type=int, help="override the number of sample points")
    common.add_argument("--tol", type=float, help="override every threshold")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="fpg", description="Projective Finsler geometry checks.")
    parser.add_argument("--version", action="version", version=f"fpg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("tensors", parents=[common], help="evaluate tensors at a point")
    t.add_argument("tensor", nargs="*", help=f"tensor names ({', '.join(TENSORS)})")
    sub.add_parser("invariance", parents=[common], help="projective change laws and invariants")
    sub.add_parser("classify", parents=[common], help="Berwald / Douglas / flatness verdicts")
    sub.add_parser("homogeneity", parents=[common], help="Euler homogeneity degrees")
    o = sub.add_parser("oracle-check", parents=[common], help="jet derivatives against finite differences")
    o.add_argument("--samples", type=int, default=200, help="random derivative draws (default 200)")
    o.add_argument("--douglas", action="store_true", help="also compare with the classical Douglas formula")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.points is not None and args.points < 1:
            raise UsageError("--points must be positive")
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ConfigError) as exc:
        print(f"fpg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SingularMetric, StepUnderflow) as exc:
        print(f"fpg: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except FPGError as exc:
        print(f"fpg: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
