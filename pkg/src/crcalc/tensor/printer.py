"""Plain-text and nested-array output for tensor expressions.

Indices print lowered: ``a`` holomorphic, ``a'`` antiholomorphic, ``0`` the
Reeb direction.  For a contracted pair the antiholomorphic member prints as
the raised holomorphic index ``^a``, so ``D[a](s)*D[^a](s)`` is
∇_α σ ∇^α σ.  Derivatives print outermost first: ``D[b,a](f)`` is ∇_b∇_a f.
"""

from __future__ import annotations

from fractions import Fraction

from ..coeffs import Coeff, RationalInN
from .expr import A_, H, Z0, TensorExpr


def _names(factors):
    free = set()
    dummies = []
    for f in factors:
        for k, l in f.slots():
            if k == Z0:
                continue
            if isinstance(l, str):
                free.add(l)
            elif l not in dummies:
                dummies.append(l)
    out = {}
    k = 0
    for d in dummies:
        while f"k{k}" in free:
            k += 1
        out[d] = f"k{k}"
        k += 1
    return out


def _slot(kind, lab, names):
    if kind == Z0:
        return "0"
    if isinstance(lab, str):
        return lab if kind == H else f"{lab}'"
    name = names[lab]
    return name if kind == H else f"^{name}"


def factor_text(f, names):
    base = f.name
    if f.idx:
        base += "[" + ",".join(_slot(k, l, names) for k, l in f.idx) + "]"
    if f.der:
        base = "D[" + ",".join(_slot(k, l, names) for k, l in reversed(f.der)) + "](" + base + ")"
    return base


def _coeff_text(c):
    """Returns (sign, body); body is '' for a unit coefficient."""
    if c.im.is_zero() and c.re.is_constant():
        v = c.re.constant()
        sign = "-" if v < 0 else "+"
        v = abs(v)
        return sign, ("" if v == 1 else f"{v}")
    if c.re.is_zero() and c.im.is_constant():
        v = c.im.constant()
        sign = "-" if v < 0 else "+"
        v = abs(v)
        return sign, ("i" if v == 1 else f"{v}*i")
    return "+", f"({c})"


def term_text(factors, c):
    names = _names(factors)
    sign, body = _coeff_text(c)
    parts = [body] if body else []
    parts += [factor_text(f, names) for f in factors]
    return sign, "*".join(parts) if parts else "1"


def to_text(e, canonical=True):
    if canonical:
        from .canon import normalize
        e = normalize(e)
    if not e.terms:
        return "0"
    pieces = [term_text(k, c) for k, c in sorted(e.terms.items(), key=lambda kv: _order(kv[0]))]
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def _order(factors):
    return tuple((f.name, len(f.der), str(f.idx), str(f.der)) for f in factors)


# nested arrays ---------------------------------------------------------------

def _rn_to_list(r):
    return [[str(Fraction(int(x.p), int(x.q))) for x in r.num.coeffs()],
            [str(Fraction(int(x.p), int(x.q))) for x in r.den.coeffs()]]


def _rn_from_list(v):
    return RationalInN.from_coeffs([Fraction(x) for x in v[0]] or [0],
                                   [Fraction(x) for x in v[1]] or [1])


def to_nested(e, canonical=True):
    """[[coeff_re, coeff_im, [[name, idx, der], ...]], ...] with JSON-safe leaves."""
    if canonical:
        from .canon import normalize
        e = normalize(e)
    out = []
    for factors, c in sorted(e.terms.items(), key=lambda kv: _order(kv[0])):
        fs = [[f.name, [list(s) for s in f.idx], [list(s) for s in f.der]] for f in factors]
        out.append([_rn_to_list(c.re), _rn_to_list(c.im), fs])
    return out


def from_nested(data, registry=None):
    from .expr import Factor
    pairs = []
    for re, im, fs in data:
        factors = tuple(Factor(n, tuple(tuple(s) for s in idx), tuple(tuple(s) for s in der))
                        for n, idx, der in fs)
        pairs.append((factors, Coeff(_rn_from_list(re), _rn_from_list(im))))
    return TensorExpr.from_terms(pairs, registry)


__all__ = ["to_text", "to_nested", "from_nested", "factor_text", "A_", "H"]
