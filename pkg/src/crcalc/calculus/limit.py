"""Specialising symbolic-n expressions: evaluation at n0 and the n = 1 frame."""

from __future__ import annotations

from fractions import Fraction

from ..coeffs import Coeff, PoleAtLimit
from ..tensor.expr import A_, H, Z0, TensorExpr
from ..tensor.printer import term_text
from .frame import FExpr

LETTER = {H: "1", A_: "b", Z0: "0"}


def limit_n(e, n0):
    """Evaluate every coefficient at n = n0 (exactly)."""
    out = []
    for fs, c in e.terms.items():
        try:
            g = c.evaluate(n0)
        except PoleAtLimit as exc:
            sign, body = term_text(fs, c)
            raise PoleAtLimit(f"{exc} in term {'-' if sign == '-' else ''}{body}",
                              term=(fs, c), order=exc.order) from None
        out.append((fs, Coeff(g.re, g.im)))
    return TensorExpr.from_terms(out, e.registry)


def pole_order(e, n0):
    """Largest pole order at n0 among the coefficients (0 if none)."""
    return max((max(0, -c.valuation(n0)) for c in e.terms.values()), default=0)


def divisibility(e, n0=1):
    """Least order of vanishing at n0 over all coefficients (>= k means divisible by (n-n0)^k)."""
    return min((c.valuation(n0) for c in e.terms.values()), default=10**9)


_FRAME_NAME = {"A": ("A", 1), "Ab": ("Ab", 1), "P": ("R", Fraction(1, 4)),
               "P2": ("R", Fraction(1, 4)), "Ric": ("R", 1), "Rm": ("R", 1), "R": ("R", 1)}


def to_frame(e, calculus=None):
    """n = 1 value of an abstract expression as a unitary-frame expression.

    With a single index value every label is 1, h = 1, and the curvature
    quantities reduce to R.  T, W, S are expanded first.
    """
    from .ph import PHCalculus
    calc = calculus or PHCalculus()
    out = FExpr()
    for fs, c in e.terms.items():
        g = c.evaluate(1)
        acc = FExpr.const(g)
        for f in fs:
            acc = acc * _factor_to_frame(f, calc)
            if acc.is_zero():
                break
        out = out + acc
    return out


def _factor_to_frame(f, calc):
    if f.name == "h":
        return FExpr.const(0) if f.der else FExpr.const(1)
    if f.name in ("T", "Tb", "W", "Wb", "S"):
        rep = calc._expand(f, lambda: _fresh_label(rep_state))
        return to_frame(TensorExpr.from_terms(rep), calc)
    word = "".join(LETTER[k] for k, _ in f.der)
    name, scale = _FRAME_NAME.get(f.name, (f.name, 1))
    return FExpr.jet(name, word) * scale


rep_state = [10**6]


def _fresh_label(state):
    state[0] += 1
    return state[0]
