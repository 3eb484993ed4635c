"""Sample-based classification of sprays.

"Vanishes identically" cannot be decided numerically; every verdict here is
relative to the sample set it was computed on, and says so.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .berwald import apparatus
from .derivatives import EvalPoint
from .errors import FPGError, UsageError
from .metrics import ProjectiveFactor, Spray
from .projective import _douglas, _weyl_W2, apply_projective_change

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"
MIN_SAMPLES = 10
TAU = 1e-8


@dataclass(frozen=True)
class Verdict:
    predicate: str
    samples: int
    max_residual: float
    threshold: float
    verdict: str
    errors: tuple = field(default_factory=tuple)
    note: str = "verdict is relative to the sampled points"

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {
            "predicate": self.predicate,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "errors": list(self.errors),
            "note": self.note,
        }


def _vanishing(
    name: str, samples: Sequence[EvalPoint], norm_at: Callable[[EvalPoint], tuple], tau: float = TAU
) -> Verdict:
    """Fold ``|T| <= tau (1 + scale)`` over samples; ``norm_at`` returns ``(|T|, scale)``."""
    if len(samples) < MIN_SAMPLES:
        raise UsageError(f"{name}: need at least {MIN_SAMPLES} samples, got {len(samples)}")
    worst, threshold, errors, ok = 0.0, tau, [], True
    for p in samples:
        try:
            norm, scale = norm_at(p)
        except FPGError as exc:
            errors.append(f"{type(exc).__name__} at {p}: {exc}")
            continue
        # residual normalised by the tensor scale, compared with tau
        r = norm / (1.0 + scale)
        worst = max(worst, r)
        ok = ok and r <= tau
    verdict = INCONCLUSIVE if errors else (HOLDS if ok else FAILS)
    return Verdict(name, len(samples), worst, threshold, verdict, tuple(errors))


def _scale(*arrays) -> float:
    return float(max(np.max(np.abs(a)) if np.size(a) else 0.0 for a in arrays))


def is_berwald(s: Spray, samples: Sequence[EvalPoint], tau: float = TAU) -> Verdict:
    """Berwald iff the hv-curvature vanishes, i.e. ``Gijk`` does not depend on ``y``."""

    def at(p):
        ap = apparatus(s, p)
        return float(np.max(np.abs(ap.P.value))), _scale(ap.Gijk.value)

    return _vanishing("berwald", samples, at, tau)


def is_douglas(s: Spray, samples: Sequence[EvalPoint], tau: float = TAU) -> Verdict:
    def at(p):
        ap = apparatus(s, p)
        return float(np.max(np.abs(_douglas(ap).value))), _scale(ap.P.value)

    return _vanishing("douglas", samples, at, tau)


def weyl_torsion_vanishes(s: Spray, samples: Sequence[EvalPoint], tau: float = TAU) -> Verdict:
    def at(p):
        ap = apparatus(s, p)
        return float(np.max(np.abs(_weyl_W2(ap).value))), _scale(ap.Rhat.value)

    return _vanishing("weyl_torsion_zero", samples, at, tau)


def flatness_report(
    s: Spray, lam: ProjectiveFactor, samples: Sequence[EvalPoint], tau: float = TAU
) -> dict:
    """Verdicts on the changed spray's hv- and h-curvature, and the implications they license.

    * ``hv_flat``: the changed hv-curvature vanishes;
    * ``h_flat``: the changed h-curvature vanishes;
    * ``projectively_flat``: both;
    * ``hv_flat_implies_douglas``: holds unless ``hv_flat`` holds while the
      Douglas verdict on ``s`` does not;
    * ``h_flat_implies_weyl_torsion_small``: holds unless ``h_flat`` holds
      while ``max |W2| > 10 tau`` on the same samples.
    """
    changed = apply_projective_change(s, lam)

    def hv(p):
        ap = apparatus(changed, p)
        return float(np.max(np.abs(ap.P.value))), _scale(ap.Gijk.value)

    def h(p):
        ap = apparatus(changed, p)
        return float(np.max(np.abs(ap.Rc.value))), _scale(ap.N.value) ** 2

    out = {"hv_flat": _vanishing("hv_flat", samples, hv, tau), "h_flat": _vanishing("h_flat", samples, h, tau)}
    both = [out["hv_flat"], out["h_flat"]]
    if any(v.verdict == INCONCLUSIVE for v in both):
        flat = INCONCLUSIVE
    else:
        flat = HOLDS if all(v.holds for v in both) else FAILS
    out["projectively_flat"] = Verdict(
        "projectively_flat", len(samples), max(v.max_residual for v in both), tau, flat
    )
    douglas = is_douglas(s, samples, tau)
    out["douglas"] = douglas
    violated = out["hv_flat"].holds and not douglas.holds
    out["hv_flat_implies_douglas"] = Verdict(
        "hv_flat_implies_douglas", len(samples), float(violated), 0.0, FAILS if violated else HOLDS
    )
    if s.n > 2:
        w2 = weyl_torsion_vanishes(s, samples, 10 * tau)
        bad = out["h_flat"].holds and not w2.holds
        out["h_flat_implies_weyl_torsion_small"] = Verdict(
            "h_flat_implies_weyl_torsion_small", len(samples), w2.max_residual, 10 * tau,
            FAILS if bad else HOLDS,
        )
    return out
