"""Parser for the plain-text tensor grammar.

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ['^' INT]
    atom   := NUMBER | 'n' | 'i' | '(' expr ')'
            | 'D' '[' slots ']' '(' expr ')'
            | FUNC ['[' slots ']'] '(' [expr {',' expr}] ')'
            | SYMBOL ['[' slots ']']
    slot   := '0' | ['^'] NAME ["'"]

``a`` is a lower holomorphic index, ``a'`` lower antiholomorphic, ``^a``
upper holomorphic and ``^a'`` upper antiholomorphic.  A label used twice
(once up, once down) is a contraction.  ``D[b,a](f)`` is ∇_b∇_a f.
Division is only by scalar coefficients; powers only of index-free factors.
Built-in functions are ``Re``, ``Im`` and ``conj``; callers may add more.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..coeffs import Coeff, I, RationalInN
from .canon import conjugate, imag_part, real_part
from .expr import A_, H, Z0, Factor, TensorError, TensorExpr, derivative, free_slots

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()\[\],']))")


class ParseError(TensorError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def _tokens(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text, registry, functions):
        self.toks = _tokens(text)
        self.k = 0
        self.reg = registry
        self.funcs = {"Re": real_part, "Im": imag_part, "conj": conjugate}
        self.funcs.update(functions or {})

    # token helpers
    def peek(self):
        return self.toks[self.k]

    def take(self, value=None):
        t = self.toks[self.k]
        if value is not None and t[1] != value:
            raise ParseError(f"expected {value!r}, found {t[1]!r}", t[2])
        self.k += 1
        return t

    def at(self, value):
        return self.toks[self.k][1] == value

    # grammar
    def expr(self):
        sign = 1
        if self.at("+") or self.at("-"):
            sign = -1 if self.take()[1] == "-" else 1
        out = self.term()
        if sign < 0:
            out = -out
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self):
        out = self.unary()
        while self.at("*") or self.at("/"):
            op, _, pos = self.take()[1], None, self.peek()[2]
            rhs = self.unary()
            if op == "*":
                out = _mul(out, rhs)
            else:
                c = _as_scalar(rhs)
                if c is None:
                    raise ParseError("division by a non-scalar expression", pos)
                if not c:
                    raise ParseError("division by zero", pos)
                out = out.scale(c.inverse())
        return out

    def unary(self):
        if self.at("-"):
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        pos = self.peek()[2]
        base = self.atom()
        if self.at("^"):
            self.take()
            t = self.take()
            if t[0] != "num" or "." in t[1]:
                raise ParseError("exponent must be a non-negative integer", t[2])
            k = int(t[1])
            c = _as_scalar(base)
            if c is not None:
                return TensorExpr.scalar(c ** k, self.reg)
            if any(free_slots(fs) for fs in base.terms):
                raise ParseError("power of an expression with free indices", pos)
            base = _finalize(base)
            out = TensorExpr.scalar(1, self.reg)
            for _ in range(k):
                out = _mul(out, base)
            return out
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return TensorExpr.scalar(Fraction(val), self.reg)
        if val == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind != "name":
            raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input", pos)
        self.take()
        if val == "n":
            return TensorExpr.scalar(RationalInN.n(), self.reg)
        if val == "i":
            return TensorExpr.scalar(I, self.reg)
        if val == "D" and self.at("["):
            slots = self.slots()
            self.take("(")
            e = self.expr()
            self.take(")")
            for s in reversed(slots):
                e = derivative(e, s)
            return e
        if val in self.funcs and (self.at("(") or self.at("[")):
            fslots = self.slots() if self.at("[") else None
            self.take("(")
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.at(","):
                    self.take()
                    args.append(self.expr())
            self.take(")")
            try:
                if fslots is not None:
                    return self.funcs[val](*args, slots=fslots)
                return self.funcs[val](*args)
            except TensorError:
                raise
            except TypeError as exc:
                raise ParseError(f"bad call to {val}: {exc}", pos) from None
        if self.reg is not None and val not in self.reg:
            raise ParseError(f"unknown symbol {val!r}", pos)
        idx = self.slots() if self.at("[") else []
        if self.reg is not None:
            d = self.reg[val]
            if len(d.kinds) != len(idx):
                raise ParseError(f"{val} takes {len(d.kinds)} indices, got {len(idx)}", pos)
            for want, (got, _) in zip(d.kinds, idx):
                if want != got:
                    raise ParseError(f"index kind mismatch for {val}", pos)
        return TensorExpr.factor(val, tuple(idx), registry=self.reg)

    def slots(self):
        self.take("[")
        out = [self.slot()]
        while self.at(","):
            self.take()
            out.append(self.slot())
        self.take("]")
        return out

    def slot(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            if val != "0":
                raise ParseError(f"bad index {val!r}", pos)
            return (Z0, None)
        up = False
        if val == "^":
            self.take()
            up = True
            kind, val, pos = self.peek()
        if kind != "name":
            raise ParseError("expected an index label", pos)
        self.take()
        bar = False
        if self.at("'"):
            self.take()
            bar = True
        # lowered kind: raising flips holomorphic <-> antiholomorphic
        holo = (not bar) != up
        return (H if holo else A_, val)


def _as_scalar(e):
    if not e.terms:
        return Coeff(0)
    if list(e.terms) == [()]:
        return e.terms[()]
    return None


def _mul(x, y):
    out = x * y
    for fs in out.terms:
        try:
            free_slots(fs)
        except TensorError as exc:
            raise TensorError(f"unbalanced dummy index: {exc}") from None
    return out


def _finalize(e):
    """Turn string labels that occur twice in a term into integer dummies."""
    out = []
    for fs, c in e.terms.items():
        counts = {}
        for f in fs:
            for k, l in f.slots():
                if k != Z0 and isinstance(l, str):
                    counts[l] = counts.get(l, 0) + 1
        nxt = 1 + max((l for f in fs for k, l in f.slots() if isinstance(l, int)), default=-1)
        mapping = {}
        for l, cnt in counts.items():
            if cnt == 2:
                mapping[l] = nxt
                nxt += 1
        fs = tuple(Factor(f.name,
                          tuple((k, mapping.get(l, l)) for k, l in f.idx),
                          tuple((k, mapping.get(l, l)) for k, l in f.der)) for f in fs)
        out.append((fs, c))
    return TensorExpr.from_terms(out, e.registry)


def parse(text, registry=None, functions=None):
    p = _Parser(text, registry, functions)
    e = p.expr()
    t = p.peek()
    if t[0] != "end":
        raise ParseError(f"unexpected token {t[1]!r}", t[2])
    e = _finalize(e)
    try:
        e.check() if registry is not None else [free_slots(fs) for fs in e.terms]
    except TensorError as exc:
        if "occurs" in str(exc) or "repeated" in str(exc):
            raise TensorError(f"unbalanced dummy index: {exc}") from None
        raise
    return e
