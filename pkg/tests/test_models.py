import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from crcalc.calculus import n1ops
from crcalc.calculus.frame import FExpr
from crcalc.coeffs import Gauss
from crcalc.models import (MODEL_IDENTITIES, ModelError, NotReal, PiSquared, Poly, UnknownOperator,
                           apply_operator, integrate, moment, moment_gate, parse_function,
                           pluriharmonic_basis, standard, structure, verify_model_identity,
                           volume)
from crcalc.models.identities import energy_terms, gram_matrix, psd_kernel, random_function
from crcalc.models.integrate import volume_factor_numeric
from crcalc.models.ring import HEISENBERG, SPHERE
from crcalc.report import UnknownIdentity

SPH = standard("sphere")
HEIS = standard("heisenberg")


# ring ----------------------------------------------------------------------------------------

def test_sphere_relation_reduces():
    p = parse_function("z1*z1b + z2*z2b")
    assert p == 1


def test_re_and_im():
    assert parse_function("Re(z1) - 1/2*z1 - 1/2*z1b").is_zero()
    assert parse_function("Im(z1*z2)").conjugate() == parse_function("Im(z1*z2)")


@pytest.mark.parametrize("text", ["z1 +", "w1", "z1^(1/2)", "z1/z2", "f(z1)"])
def test_bad_functions(text):
    with pytest.raises(ModelError):
        parse_function(text)


# structures ---------------------------------------------------------------------------------

def test_standard_structures():
    assert SPH.A11.is_zero() and SPH.R == 1
    assert HEIS.A11.is_zero() and HEIS.R.is_zero()
    assert SPH.residuals_zero() and HEIS.residuals_zero()


@pytest.mark.parametrize("sigma", ["Re(z1)", "Re(z1*z2)", "z1*z1b", "Im(z2) + Re(z1*z1*z2b)"])
def test_conformal_residuals_vanish(sigma):
    assert structure("sphere", sigma).residuals_zero()


def test_zero_factor_is_standard():
    assert structure("sphere", "0") is SPH
    assert structure("sphere", "") is SPH


def test_complex_factor_rejected():
    with pytest.raises(NotReal):
        structure("sphere", "z1")


def test_unknown_model():
    with pytest.raises(ModelError):
        structure("torus")


# operators ---------------------------------------------------------------------------------

@pytest.mark.parametrize("op, model, f, expected", [
    ("Q4prime", "sphere", None, "1"),
    ("P4", "sphere", "Re(z1*z2)", "0"),
    ("Delta_b", "heisenberg", "t", "0"),
    ("Q_hirachi", "sphere", None, "0"),
])
def test_operator_values(op, model, f, expected):
    assert str(apply_operator(op, f, standard(model))) == expected


def test_unknown_operator():
    with pytest.raises(UnknownOperator):
        apply_operator("P6", "z1", SPH)


@pytest.mark.parametrize("p, q", [(1, 0), (0, 1), (1, 1), (2, 3), (3, 1)])
def test_sublaplacian_eigenvalue(p, q):
    f = parse_function(f"z1^{p}*z2b^{q}")
    lam = Fraction(p * q) + Fraction(p + q, 2)
    assert apply_operator("Delta_b", f, SPH).as_poly() == f.scale(lam)


# Independent oracle: the Heisenberg frame in real coordinates z = x + iy, built with sympy,
# with Delta_b = -(Z Zb + Zb Z).
_x, _y, _t = sp.symbols("x y t", real=True)
_z, _zb = _x + sp.I * _y, _x - sp.I * _y


def _Z(g):
    return (sp.diff(g, _x) - sp.I * sp.diff(g, _y)) / 2 + sp.I * _zb * sp.diff(g, _t)


def _Zb(g):
    return (sp.diff(g, _x) + sp.I * sp.diff(g, _y)) / 2 - sp.I * _z * sp.diff(g, _t)


def _sym(p):
    text = str(p).replace("^", "**")
    return sp.sympify(text, locals={"z": _z, "zb": _zb, "t": _t, "i": sp.I})


@pytest.mark.parametrize("text", ["t", "z*zb", "t^2 + z^2*zb", "Re(z^3) + t*z*zb", "i*t*z - zb^2"])
def test_heisenberg_sublaplacian_against_sympy(text):
    f = parse_function(text, "heisenberg")
    got = apply_operator("Delta_b", f, HEIS).as_poly()
    g = _sym(f)
    want = -(_Z(_Zb(g)) + _Zb(_Z(g)))
    assert sp.expand(_sym(got) - want) == 0


def test_pluriharmonic_basis_sizes():
    assert [str(b) for b in pluriharmonic_basis("sphere", 0)] == ["1"]
    assert len(pluriharmonic_basis("sphere", 1)) == 5
    with pytest.raises(ValueError):
        pluriharmonic_basis("sphere", -1)


@pytest.mark.parametrize("u", pluriharmonic_basis("sphere", 2))
def test_pluriharmonic_in_kernel_of_P4(u):
    assert apply_operator("P4", u, SPH).is_zero()
    assert apply_operator("P_alpha", u, SPH).is_zero()


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_paneitz_of_real_function_is_real(seed):
    f = random_function("sphere", 3, random.Random(seed))
    p = apply_operator("P4", f, SPH).as_poly()
    assert p.conjugate() == p


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1))
def test_paneitz_of_pluriharmonic_times_factor_is_orthogonal(seed):
    # P4(f sigma) pairs to zero with pluriharmonic functions
    rng = random.Random(seed)
    f = random_function("sphere", 2, rng)
    sigma = random_function("sphere", 2, rng)
    p = apply_operator("P4", f * sigma, SPH).as_poly()
    for u in pluriharmonic_basis("sphere", 1):
        assert integrate(u * p).is_zero()


# integration -------------------------------------------------------------------------------

def test_volume():
    assert volume() == PiSquared(Gauss(16))
    assert float(volume()) == pytest.approx(16 * 3.141592653589793 ** 2)


@pytest.mark.parametrize("abcd, value", [
    ((0, 0, 0, 0), Fraction(1)),
    ((1, 1, 0, 0), Fraction(1, 2)),
    ((2, 2, 0, 0), Fraction(1, 3)),
    ((1, 1, 1, 1), Fraction(1, 6)),
    ((2, 2, 1, 1), Fraction(1, 12)),
    ((3, 3, 2, 2), Fraction(1, 60)),
    ((1, 0, 0, 0), Fraction(0)),
    ((2, 1, 1, 2), Fraction(0)),
])
def test_moments(abcd, value):
    # frozen from the Dirichlet law of (|z1|^2, |z2|^2) on S^3
    assert moment(*abcd) == value


def test_odd_monomial_integrates_to_zero():
    assert integrate(parse_function("z1^2*z2b")).is_zero()
    assert integrate(parse_function("z1*z1b")) == PiSquared(Gauss(8))


def test_integrand_with_factor_marker():
    s = structure("sphere", "Re(z1)")
    with pytest.raises(ModelError, match="marker"):
        integrate(apply_operator("Delta_b", "z1*z1b", s))


def test_integration_only_on_sphere():
    with pytest.raises(ModelError):
        integrate(parse_function("z*zb", "heisenberg"))


def test_volume_constant_numerically():
    assert volume_factor_numeric() == pytest.approx([8.0] * 5)


def test_moment_gate_small():
    ok, worst, bad = moment_gate(max_degree=4, samples=200_000, seed=3, tol=0.02)
    assert ok, bad


# quadratic forms ----------------------------------------------------------------------------

@pytest.mark.parametrize("u", ["Re(z1*z2)", "Im(z1^3) + Re(z2)", "Re(z1^2*z2^2) - Im(z1*z2^3)", "1"])
def test_energy_identity(u):
    # pluriharmonic u only
    lhs, hess, grad = energy_terms(parse_function(u))
    assert lhs == hess.scale(8) + grad.scale(4)


def test_psd_kernel():
    assert psd_kernel([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(2)]]) == (True, 0)
    assert psd_kernel([[Fraction(0), Fraction(0)], [Fraction(0), Fraction(1)]]) == (True, 1)
    assert psd_kernel([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(1)]])[0] is False


def test_gram_small():
    basis, M = gram_matrix(1)
    assert len(basis) == 5
    assert psd_kernel(M) == (True, 1)


# the registry -------------------------------------------------------------------------------

@pytest.mark.parametrize("id", list(MODEL_IDENTITIES))
def test_model_identity(id):
    rep = verify_model_identity(id)
    assert rep.as_expected, rep.line()
    assert rep.anchor


def test_unknown_model_identity():
    with pytest.raises(UnknownIdentity):
        verify_model_identity("nope")


def test_evaluate_needs_bindings():
    with pytest.raises(ModelError, match="no value bound"):
        SPH.evaluate(FExpr.jet("f").d("1"))
    assert SPH.evaluate(n1ops.lap(FExpr.jet("f")), {"f": Poly.var(SPHERE, "z1")}).as_poly() \
        == Poly.var(SPHERE, "z1").scale(Fraction(1, 2))
    assert HEISENBERG is HEIS.model
