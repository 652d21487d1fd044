import pytest
from hypothesis import given, strategies as st

from crcalc import catalog
from crcalc.calculus.frame import FExpr, FrameCalculus
from crcalc.calculus.hat import transform as frame_transform
from crcalc.calculus.limit import to_frame
from crcalc.calculus.operators import parse_ph
from crcalc.calculus.ph import PHCalculus, UnsupportedRank
from crcalc.conformal import (ConformalFactor, bochner_check, check_transformation, hatted_frame,
                              substitute, transform, verify_covariance)
from crcalc.tensor.expr import TensorError, TensorExpr

from strategies import PIECES

ZERO = TensorExpr.zero()
TRANSFORMATIONS = [k for k, e in catalog.load("covariance").items() if e["kind"] == "transformation"]
HATTABLE = [p for p in PIECES if "D[^a,0" not in p and "D[0,^a" not in p]


def closes(e):
    return PHCalculus().nf(e).is_empty()


def frame_closes(e, constraints=()):
    return FrameCalculus(constraints).nf(e).is_zero()


def test_torsion_rule():
    got = transform(parse_ph("A[a,b]"))
    assert closes(got - parse_ph("A[a,b] + i*D[b,a](sigma) - i*D[a](sigma)*D[b](sigma)"))


def test_W_rule_in_dimension_three():
    assert frame_closes(check_transformation("W[a]()", "W[a]() - 3*P_alpha[a](sigma)"))
    assert not frame_closes(check_transformation("W[a]()", "W[a]()"))


def test_conformal_factor_wraps_transform():
    e = parse_ph("P")
    assert ConformalFactor("u")(e) == transform(e, "u")
    with pytest.raises(TensorError):
        ConformalFactor("A")


def test_reeb_derivative_of_tensor_is_outside_fragment():
    with pytest.raises(UnsupportedRank):
        transform(parse_ph("D[0,^a,a](sigma)"))


# sigma = 0 -----------------------------------------------------------------------------------

def _catalog_expressions():
    out = []
    for suite in catalog.SUITES:
        for e in catalog.load(suite).values():
            for key in ("lhs", "rhs", "expr"):
                if key in e and "sigma" not in e[key] and "tau" not in e[key]:
                    out.append(e[key])
    return sorted(set(out))


@pytest.mark.parametrize("text", _catalog_expressions())
def test_zero_factor_is_identity(text):
    e = parse_ph(text)
    try:
        hat = transform(e)
    except UnsupportedRank:
        # outside the symbolic-n fragment: check at n = 1 through the frame route
        hat = frame_transform(to_frame(e)).substitute({"sigma": FExpr()})
        assert frame_closes(hat - to_frame(e))
        return
    assert closes(substitute(hat, "sigma", ZERO) - e)


# cocycle --------------------------------------------------------------------------------------

@given(st.sampled_from(["A[a,b]", "P", "W[a]()", "D[a](f)", "D[^a,a](f)", "P2[a,b']"]))
def test_cocycle(text):
    e = parse_ph(text)
    twice = transform(transform(e, "u"), "v")
    once = substitute(transform(e, "sigma"), "sigma", parse_ph("u + v"))
    assert closes(twice - once)


# the two routes ---------------------------------------------------------------------------------

@given(st.lists(st.sampled_from(HATTABLE), min_size=1, max_size=2))
def test_routes_agree_on_products(pieces):
    e = parse_ph(pieces[0])
    for p in pieces[1:]:
        e = e * parse_ph(p)
    lemma = to_frame(transform(e))
    frame = frame_transform(to_frame(e))
    assert frame_closes(lemma - frame)


@pytest.mark.parametrize("id", TRANSFORMATIONS)
def test_covariance_catalog_both_routes(id):
    a = verify_covariance(id, route="lemma")
    b = verify_covariance(id, route="frame")
    assert a.as_expected, a.line()
    assert b.status == a.status
    assert a.residual == b.residual


def test_pluriharmonic_collapse_of_general_law():
    # with f pluriharmonic the general law loses its P_alpha f terms
    rhs = "P4prime_crit(f) + P4(f*sigma)"
    assert frame_closes(check_transformation("P4prime_crit(f)", rhs, ("pluriharmonic(f)",)))
    assert not frame_closes(check_transformation("P4prime_crit(f)", rhs))


def test_general_q4prime_pluriharmonic_U():
    assert verify_covariance("general_q4prime").verified
    assert verify_covariance("general_q4prime_pluriharmonic").verified


def test_hatted_frame_rejects_unknown_route():
    with pytest.raises(ValueError):
        hatted_frame("P", route="other")


# Bochner ------------------------------------------------------------------------------------------

def test_bochner():
    assert bochner_check().verified


def test_bochner_with_pluriharmonic_factor():
    assert bochner_check(("pluriharmonic(sigma)",)).verified


def test_bochner_constant_factor():
    e = catalog.load("covariance")["bochner"]
    for side in ("lhs", "rhs"):
        assert closes(substitute(parse_ph(e[side]), "sigma", ZERO))
