import pytest
from hypothesis import given, settings

from crcalc import catalog
from crcalc.calculus.frame import FrameCalculus
from crcalc.calculus.limit import divisibility, limit_n, to_frame
from crcalc.calculus.operators import UnknownOperator, expand_definition, parse_ph
from crcalc.calculus.ph import REGISTRY, PHCalculus, apply_bianchi, assume, normal_order
from crcalc.coeffs import PoleAtLimit, RationalInN
from crcalc.tensor.canon import normalize
from crcalc.tensor.expr import TensorExpr, WeightMismatch

from strategies import expressions

n = RationalInN.n()


def closes(text, constraints=("general",)):
    return PHCalculus(constraints).nf(parse_ph(text)).is_empty()


# normal_order -----------------------------------------------------------------------------

def test_mixed_commutator_gives_reeb_derivative():
    lhs = normal_order(parse_ph("D[b',a](f) - D[a,b'](f)"))
    assert lhs == normal_order(parse_ph("i*h[a,b']*D[0](f)"))


def test_holomorphic_derivatives_commute():
    assert normal_order(parse_ph("D[a,b](f) - D[b,a](f)")).is_empty()


def test_third_order_commutator_in_dimension_three():
    rep = catalog.verify_identity("lee_third_commutator")
    assert rep.verified


def test_normal_order_leaves_bianchi_alone():
    e = parse_ph("D[^a](P2[a,b'])")
    assert not normal_order(e).is_empty()
    assert apply_bianchi(e - parse_ph("D[b'](P) + (n-1)*Tb[b']")).is_empty()


def test_reeb_derivative_of_scalar_curvature():
    assert closes("D[0](R) - D[^a,^b](A[a,b]) - D[a,b](Ab[^a,^b])")
    assert not closes("D[0](R) - D[^a,^b](A[a,b])")


# expand_definition ---------------------------------------------------------------------------

def test_two_forms_of_C_agree():
    assert catalog.verify_identity("subplacian_squared").verified


def test_divergence_of_B():
    assert catalog.verify_identity("grahamlee").verified


def test_paneitz_is_C_in_dimension_three():
    f = TensorExpr.factor("f", registry=REGISTRY)
    diff = PHCalculus().nf(expand_definition("P4", f) - expand_definition("C", f))
    assert FrameCalculus().nf(to_frame(limit_n(diff, 1))).is_zero()


def test_unknown_operator():
    with pytest.raises(UnknownOperator):
        expand_definition("P6", TensorExpr.factor("f", registry=REGISTRY))


def test_strict_weight():
    with pytest.raises(WeightMismatch):
        expand_definition("P4", TensorExpr.factor("f", registry=REGISTRY), strict=True)
    w = -(n - 1) / 2
    reg = REGISTRY.with_weights(f=(w, w))
    expand_definition("P4", TensorExpr.factor("f", registry=reg), strict=True, registry=reg)


# assume and limits -----------------------------------------------------------------------------

def test_pluriharmonic_paneitz_divisible_once():
    e = assume(parse_ph("P4(f)"), "pluriharmonic(f)")
    assert divisibility(e) >= 1
    assert divisibility(PHCalculus().nf(parse_ph("P4(f)"))) == 0


def test_pseudo_einstein_paneitz_of_one_divisible_twice():
    assert divisibility(assume(parse_ph("P4(1)"), "pseudo-einstein")) >= 2


def test_general_constraint_is_identity():
    e = parse_ph("D[^a,a](f) + P*f")
    assert assume(e, "general") == apply_bianchi(e)


def test_limit_of_vanishing_coefficient():
    assert limit_n(parse_ph("(n-1)/2*S"), 1).is_empty()


def test_limit_pole():
    with pytest.raises(PoleAtLimit):
        limit_n(parse_ph("1/(n-1)*S"), 1)


def test_general_display_specialises_to_critical_display():
    calc = PHCalculus(("pluriharmonic(f)",))
    general = limit_n(calc.nf(parse_ph("P4prime(f)")), 1)
    crit = parse_ph("P4prime_crit(f)")
    assert FrameCalculus(("pluriharmonic(f)",)).nf(to_frame(general) - to_frame(crit)).is_zero()


# the catalog ------------------------------------------------------------------------------------

IDENTITIES = list(catalog.load("identities"))


@pytest.mark.parametrize("id", IDENTITIES)
def test_identity_catalog(id):
    rep = catalog.verify_identity(id, suite="identities")
    assert rep.as_expected, rep.line()
    if rep.expected == "failed":
        assert rep.residual


def test_limit_entries_report_divisibility():
    rep = catalog.verify_identity("q4prime_crit")
    assert rep.details["divisibility"] >= 2


def test_unknown_identity():
    with pytest.raises(KeyError, match="unknown identity"):
        catalog.verify_identity("no_such_id")


# properties --------------------------------------------------------------------------------------

@settings(max_examples=1000)
@given(expressions())
def test_confluence_against_frame_engine(e):
    # two independent rule systems: symbolic-n closure followed by the frame rules,
    # and the frame rules alone
    via_n = FrameCalculus().nf(to_frame(limit_n(PHCalculus().nf(e), 1)))
    direct = FrameCalculus().nf(to_frame(limit_n(e, 1)))
    assert (via_n - direct).is_zero()


@given(expressions())
def test_closure_order_independent(e):
    calc = PHCalculus()
    whole = calc.nf(e)
    termwise = TensorExpr.zero(REGISTRY)
    for fs, c in reversed(list(e.terms.items())):
        termwise = termwise + PHCalculus().nf(TensorExpr({fs: c}, REGISTRY))
    assert normalize(termwise) == whole
    assert calc.nf(whole) == whole
