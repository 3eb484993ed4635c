import pytest

from fpg.classify import FAILS, HOLDS, flatness_report, is_berwald, is_douglas, weyl_torsion_vanishes
from fpg.errors import UsageError
from fpg.fixtures import M_EUC, M_SPH, lambda_lin, lambda_norm, lambda_zero
from fpg.metrics import canonical_spray
from fpg.projective import apply_projective_change


@pytest.mark.parametrize("name,berwald,douglas", [
    ("euclidean", HOLDS, HOLDS),
    ("sphere", HOLDS, HOLDS),
    ("minkowski", HOLDS, HOLDS),
    ("randers", FAILS, FAILS),
])
def test_fixture_verdicts(sprays, points20, name, berwald, douglas):
    s = sprays[name]
    assert is_berwald(s, points20).verdict == berwald
    assert is_douglas(s, points20).verdict == douglas


def test_projective_change_keeps_douglas_breaks_berwald(sprays, points20):
    # a factor linear in y keeps the Berwald property; the norm factor does not
    assert is_berwald(apply_projective_change(sprays["sphere"], lambda_lin()), points20).verdict == HOLDS
    t = apply_projective_change(sprays["sphere"], lambda_norm(M_SPH))
    assert is_douglas(t, points20).verdict == HOLDS
    assert is_berwald(t, points20).verdict == FAILS


def test_flatness_euclidean_zero(points20):
    rep = flatness_report(canonical_spray(M_EUC), lambda_zero(), points20)
    assert all(v.verdict == HOLDS for v in rep.values())


def test_flatness_sphere_zero(points20):
    rep = flatness_report(canonical_spray(M_SPH), lambda_zero(), points20)
    assert rep["hv_flat"].verdict == HOLDS
    assert rep["h_flat"].verdict == FAILS
    assert rep["projectively_flat"].verdict == FAILS
    assert rep["hv_flat_implies_douglas"].holds


def test_implications_across_grid(sprays, points20):
    for s in sprays.values():
        for lam in (lambda_zero(), lambda_lin()):
            rep = flatness_report(s, lam, points20[:10])
            assert rep["hv_flat_implies_douglas"].holds
            assert rep["h_flat_implies_weyl_torsion_small"].holds


def test_sphere_weyl_torsion(sprays, points20):
    assert weyl_torsion_vanishes(sprays["sphere"], points20).verdict == HOLDS


def test_monotone_in_tau(sprays, points20):
    s = sprays["randers"]
    v = is_douglas(s, points20, 1e-8)
    looser = is_douglas(s, points20, 10 * v.max_residual)
    assert looser.verdict == HOLDS
    assert is_douglas(s, points20, 1e-12).verdict == FAILS


def test_too_few_samples(sprays, points20):
    with pytest.raises(UsageError):
        is_berwald(sprays["sphere"], points20[:9])


def test_verdict_dict(sprays, points20):
    d = is_berwald(sprays["sphere"], points20).to_dict()
    assert d["samples"] == 20 and d["verdict"] == HOLDS and "sampled" in d["note"]
