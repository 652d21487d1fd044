"""Functions and operators on the model structures."""

from __future__ import annotations

import ast
from fractions import Fraction
from functools import lru_cache

from ..calculus import n1ops
from ..calculus.frame import FExpr
from ..coeffs import Gauss
from .ring import MF, MODELS, ModelError, Poly
from .structure import conformal_structure, standard_structure


class UnknownOperator(ModelError):
    pass


def _model(model):
    if isinstance(model, str):
        if model not in MODELS:
            raise ModelError(f"unknown model {model!r}")
        return MODELS[model]
    return model


def parse_function(text, model="sphere"):
    """Parse a polynomial such as ``Re(z1*z2) + 1/2*z1*z1b`` on a model.

    Names are the model's variables, ``i``, and the functions ``Re``, ``Im``
    and ``conj``.  ``^`` and ``**`` both denote powers.
    """
    m = _model(model)
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ModelError(f"cannot parse {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Poly.const(m, node.value)
        if isinstance(node, ast.Name):
            if node.id == "i":
                return Poly.const(m, Gauss(0, 1))
            if node.id in m.variables:
                return Poly.var(m, node.id)
            raise ModelError(f"unknown name {node.id!r} on {m.name}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return v.scale(-1) if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = ev(node.left)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                        and node.right.value >= 0):
                    raise ModelError("exponents must be nonnegative integers")
                return a ** node.right.value
            b = ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if not b.is_const() or not b.constant():
                    raise ModelError("division only by nonzero constants")
                c = b.constant()
                return a.scale(Gauss(1) / c)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1:
            v = ev(node.args[0])
            if node.func.id == "Re":
                return (v + v.conjugate()).scale(Fraction(1, 2))
            if node.func.id == "Im":
                return (v - v.conjugate()).scale(Gauss(0, Fraction(-1, 2)))
            if node.func.id == "conj":
                return v.conjugate()
        raise ModelError(f"unsupported syntax in {text!r}")

    return ev(tree)


@lru_cache(maxsize=None)
def standard(model):
    return standard_structure(_model(model).name)


@lru_cache(maxsize=64)
def _conformal_cached(model, text):
    return conformal_structure(standard(model), parse_function(text, model))


def structure(model="sphere", sigma=None):
    """Standard structure, or its conformal change by e^sigma (sigma as text or Poly)."""
    model = _model(model).name
    if sigma is None or (isinstance(sigma, str) and sigma.strip() in ("", "0")):
        return standard(model)
    if isinstance(sigma, str):
        return _conformal_cached(model, sigma)
    return conformal_structure(standard(model), sigma)


_f = FExpr.jet("f")

OPERATORS = {
    "Delta_b": lambda f: n1ops.lap(f),
    "nabla_0": lambda f: f.d("0"),
    "P_alpha": n1ops.P1,
    "C": n1ops.C,
    "P4": n1ops.P4,
    "P4prime": n1ops.P4prime,
    "D": n1ops.D,
    "Q_hirachi": lambda f: n1ops.Q_hirachi(),
    "Q4prime": lambda f: n1ops.Q4prime(),
}


def apply_operator(op, f, s):
    """Exact value of the operator ``op`` on ``f`` in the structure ``s``.

    P_alpha returns the coefficient against the unitary coframe; Q_hirachi
    and Q4prime ignore ``f``.
    """
    if op not in OPERATORS:
        raise UnknownOperator(f"unknown operator {op!r}")
    if isinstance(f, str):
        f = parse_function(f, s.model)
    if f is None:
        f = Poly.const(s.model, 0)
    return s.evaluate(OPERATORS[op](_f), {"f": f})


def _re_im(p):
    re = (p + p.conjugate()).scale(Fraction(1, 2))
    im = (p - p.conjugate()).scale(Gauss(0, Fraction(-1, 2)))
    return re, im


def pluriharmonic_basis(model, degree, check=True):
    """Real and imaginary parts of holomorphic monomials up to ``degree``.

    Every element is checked to satisfy P_alpha u = 0 on the standard structure.
    """
    m = _model(model)
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    hol = ("z1", "z2") if m.name == "sphere" else ("z",)
    monos = []
    for d in range(degree + 1):
        if len(hol) == 1:
            monos.append(Poly.var(m, hol[0], d) if d else Poly.const(m, 1))
        else:
            for a in range(d, -1, -1):
                monos.append(Poly.var(m, "z1", a) * Poly.var(m, "z2", d - a))
    out = []
    for p in monos:
        re, im = _re_im(p)
        out.append(re)
        if not im.is_zero():
            out.append(im)
    if check:
        s = standard(m.name)
        for u in out:
            if not apply_operator("P_alpha", u, s).is_zero():
                raise ModelError(f"P_alpha does not annihilate {u}")
    return out
