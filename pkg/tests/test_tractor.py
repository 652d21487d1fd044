import pytest

from crcalc.calculus.operators import expand_definition, parse_ph
from crcalc.calculus.ph import REGISTRY, PHCalculus
from crcalc.coeffs import RationalInN
from crcalc.tensor.canon import conjugate
from crcalc.tensor.expr import TensorExpr
from crcalc.tractor import (PANEITZ_WEIGHT, PUSHFORWARD, REGROUPING_IDS, TRACTOR_CHECKS,
                            SideConditionFailed, TractorSection, _assembled_paneitz,
                            extract_paneitz, paneitz_tractor, regrouping_check,
                            tractor_D, tractor_derivative, tractor_reports, verify_tractor)

n = RationalInN.n()
ZERO = TensorExpr.zero(REGISTRY)
calc = PHCalculus()


def same(a, b):
    return calc.nf(a - b).is_empty()


def section(s="f", t="D[a](u)", r="P*f"):
    return TractorSection(parse_ph(s), parse_ph(t), parse_ph(r))


def test_holomorphic_derivative_top_slot():
    out = tractor_derivative(section(), "h", label="b")
    assert same(out.sigma, parse_ph("D[b](f) - D[b](u)"))


def test_antiholomorphic_derivative_of_bottom_only():
    s = TractorSection(ZERO, ZERO, parse_ph("f"))
    out = tractor_derivative(s, "a", label="b")
    assert same(out.tau, parse_ph("f*h[a,b']"))
    assert out.sigma.is_empty()


def test_reeb_derivative_of_zero():
    assert tractor_derivative(TractorSection(ZERO, ZERO, ZERO), "0").normal_form().is_zero()


def test_D_top_slot_vanishes_on_null_weight():
    # w(n + w + w') = 0 with w = 0
    d = tractor_D(parse_ph("f"), 0)
    assert d.sigma.is_empty()


def test_D_at_paneitz_weight():
    f = parse_ph("f")
    d = tractor_D(f, PANEITZ_WEIGHT)
    assert same(d.tau, parse_ph("D[a](f)"))
    assert same(d.sigma, f.scale(PANEITZ_WEIGHT))


def test_D_of_constant():
    d = tractor_D(parse_ph("1"), 0)
    assert calc.nf(d.tau).is_empty()
    assert calc.nf(d.rho).is_empty()  # w = 0 kills the P term as well


def test_upper_slots_vanish_and_bottom_is_paneitz():
    p4 = extract_paneitz()
    assert same(p4, expand_definition("P4", TensorExpr.factor("f", registry=REGISTRY)))


def test_upper_slots_do_not_vanish_at_other_weights():
    t = paneitz_tractor(w=0).normal_form(calc)
    assert not (t.sigma.is_empty() and t.tau.is_empty())


def test_side_condition_raised(monkeypatch):
    import crcalc.tractor as tr
    monkeypatch.setattr(tr, "PANEITZ_WEIGHT", RationalInN(0))
    with pytest.raises(SideConditionFailed):
        tr.extract_paneitz()


def test_extracted_operator_is_real():
    p4 = extract_paneitz()
    assert same(conjugate(p4), p4)


@pytest.mark.parametrize("id", REGROUPING_IDS)
def test_regroupings(id):
    assert regrouping_check(id).verified


def test_reports_as_expected():
    reps = tractor_reports()
    assert [r.id for r in reps] == list(TRACTOR_CHECKS)
    assert all(r.as_expected for r in reps), [r.line() for r in reps if not r.as_expected]


def test_assembly_residual_reported_verbatim():
    rep = verify_tractor("fefferman_assembly")
    assert rep.status == "failed" and rep.expected == "failed"
    assert "D[^k0](P)*D[k0](u)" in rep.residual
    assert verify_tractor("fefferman_assembly_corrected").verified


def test_laplacian_pushforward_is_leading_term():
    lead = parse_ph(PUSHFORWARD["laplacian_squared"])
    assert same(lead, parse_ph("Delta_b(Delta_b(u))"))


def test_flat_specialisation():
    # with A = 0 every term left over beyond Delta_b^2 u + D_0^2 u carries curvature,
    # so on a Schouten-flat torsion-free structure the assembly is Delta_b^2 + D_0^2
    flat = PHCalculus(("torsion-free",))
    diff = flat.nf(_assembled_paneitz(corrected=True) - parse_ph("Delta_b(Delta_b(u)) + D[0,0](u)"))
    curvature = {"P", "P2", "T", "Tb", "S", "R", "Rm"}
    assert not diff.is_empty()
    assert all(any(f.name in curvature for f in fs) for fs in diff.terms)


def test_unknown_tractor_check():
    with pytest.raises(KeyError):
        verify_tractor("nope")
