"""Exact differential rings for the model manifolds.

``Poly`` is a polynomial with Gaussian rational coefficients.  On the sphere
the variables are (z1, z1b, z2, z2b) reduced modulo z2*z2b -> 1 - z1*z1b;
on the Heisenberg group they are (z, zb, t).  ``MF`` (model function) adds
formal markers e^{k_j σ_j / 2} for a list of fixed real ring elements σ_j.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from ..coeffs import Gauss


class ModelError(ValueError):
    pass


class Model:
    """Variables, conjugation and reduction of one model."""

    def __init__(self, name, variables, conj_perm, reduce_pair=None):
        self.name = name
        self.variables = tuple(variables)
        self.nvars = len(variables)
        self.conj_perm = tuple(conj_perm)
        self.reduce_pair = reduce_pair  # (i, j, replacement-poly-dict) for x_i x_j -> ...

    def __repr__(self):
        return f"Model({self.name})"


def _mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    __slots__ = ("model", "terms")

    def __init__(self, model, terms=None, reduced=False):
        self.model = model
        self.terms = terms if terms is not None else {}
        if not reduced and model.reduce_pair is not None:
            self.terms = _reduce(model, self.terms)

    @classmethod
    def const(cls, model, c):
        c = Gauss.coerce(c)
        return cls(model, {(0,) * model.nvars: c} if c else {}, True)

    @classmethod
    def var(cls, model, name, power=1):
        k = model.variables.index(name)
        e = [0] * model.nvars
        e[k] = power
        return cls(model, {tuple(e): Gauss(1)})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, o):
        if not isinstance(o, Poly):
            o = Poly.const(self.model, o)
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, o):
        if not isinstance(o, Poly):
            o = Poly.const(self.model, o)
        out = dict(self.terms)
        for m, c in o.terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly(self.model, out, True)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.model, {m: -c for m, c in self.terms.items()}, True)

    def __sub__(self, o):
        if not isinstance(o, Poly):
            o = Poly.const(self.model, o)
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def scale(self, c):
        c = Gauss.coerce(c)
        if not c:
            return Poly(self.model, {}, True)
        return Poly(self.model, {m: v * c for m, v in self.terms.items()}, True)

    def __mul__(self, o):
        if not isinstance(o, Poly):
            return self.scale(o)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                s = out.get(m)
                s = c if s is None else s + c
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly(self.model, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Poly.const(self.model, 1)
        for _ in range(k):
            out = out * self
        return out

    def conjugate(self):
        perm = self.model.conj_perm
        return Poly(self.model, {tuple(m[perm[k]] for k in range(len(m))): c.conjugate()
                                 for m, c in self.terms.items()}, True)

    def partial(self, k):
        out = {}
        for m, c in self.terms.items():
            if m[k]:
                e = list(m)
                e[k] -= 1
                e = tuple(e)
                v = c * m[k]
                s = out.get(e)
                s = v if s is None else s + v
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Poly(self.model, out, True)

    def degree(self):
        return max((sum(m) for m in self.terms), default=-1)

    def is_const(self):
        return all(not any(m) for m in self.terms)

    def constant(self):
        return self.terms.get((0,) * self.model.nvars, Gauss(0))

    def __str__(self):
        return poly_text(self)

    def __repr__(self):
        return f"Poly({poly_text(self)!r})"


def _reduce(model, terms):
    i, j, repl = model.reduce_pair
    out = {}

    def acc(m, c):
        s = out.get(m)
        s = c if s is None else s + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)

    for m, c in terms.items():
        k = min(m[i], m[j])
        if not k:
            acc(m, c)
            continue
        base = list(m)
        base[i] -= k
        base[j] -= k
        base = tuple(base)
        # (repl)^k with repl = 1 - x_a x_b; expand binomially
        (ra, rb) = repl
        for r in range(k + 1):
            e = list(base)
            e[ra] += r
            e[rb] += r
            acc(tuple(e), c * (comb(k, r) * (-1) ** r))
    return out


SPHERE = Model("sphere", ("z1", "z1b", "z2", "z2b"), (1, 0, 3, 2), (2, 3, (0, 1)))
HEISENBERG = Model("heisenberg", ("z", "zb", "t"), (1, 0, 2))
MODELS = {"sphere": SPHERE, "heisenberg": HEISENBERG}


def _coeff_text(c):
    if c.im == 0:
        return str(c.re)
    if c.re == 0:
        return f"{c.im}*i" if c.im not in (1, -1) else ("i" if c.im == 1 else "-i")
    return f"({c.re}{'+' if c.im > 0 else '-'}{abs(c.im)}*i)"


def poly_text(p):
    if not p.terms:
        return "0"
    parts = []
    for m in sorted(p.terms, key=lambda m: (-sum(m), tuple(-x for x in m))):
        c = p.terms[m]
        mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in zip(p.model.variables, m) if e)
        ct = _coeff_text(c)
        if not mono:
            parts.append(ct)
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{ct}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


class MF:
    """Model function: Σ_k e^{k·σ/2} p_k with polynomial p_k."""

    __slots__ = ("ctx", "parts")

    def __init__(self, ctx, parts=None):
        self.ctx = ctx
        self.parts = parts or {}

    @property
    def model(self):
        return self.ctx.model

    @classmethod
    def poly(cls, ctx, p, marker=None):
        marker = marker or (0,) * len(ctx.exps)
        return cls(ctx, {marker: p} if p else {})

    @classmethod
    def const(cls, ctx, c):
        return cls.poly(ctx, Poly.const(ctx.model, c))

    def _lift(self, o):
        if isinstance(o, MF):
            return o
        if isinstance(o, Poly):
            return MF.poly(self.ctx, o)
        return MF.const(self.ctx, o)

    def is_zero(self):
        return not self.parts

    def __bool__(self):
        return bool(self.parts)

    def __eq__(self, o):
        return (self - self._lift(o)).is_zero()

    def __hash__(self):
        return hash(frozenset(self.parts.items()))

    def __add__(self, o):
        o = self._lift(o)
        out = dict(self.parts)
        for k, p in o.parts.items():
            s = out.get(k)
            s = p if s is None else s + p
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return MF(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return MF(self.ctx, {k: -p for k, p in self.parts.items()})

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, (MF, Poly)):
            c = Gauss.coerce(o)
            if not c:
                return MF(self.ctx)
            return MF(self.ctx, {k: p.scale(c) for k, p in self.parts.items()})
        o = self._lift(o)
        out = {}
        for k1, p1 in self.parts.items():
            for k2, p2 in o.parts.items():
                k = _mono_mul(k1, k2)
                p = p1 * p2
                s = out.get(k)
                s = p if s is None else s + p
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return MF(self.ctx, out)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self * Gauss.coerce(o).inverse()

    def __pow__(self, k):
        out = MF.const(self.ctx, 1)
        for _ in range(k):
            out = out * self
        return out

    def conjugate(self):
        return MF(self.ctx, {k: p.conjugate() for k, p in self.parts.items()})

    def real(self):
        return (self + self.conjugate()) * Fraction(1, 2)

    def imag(self):
        return (self - self.conjugate()) * Gauss(0, Fraction(-1, 2))

    def exp_marker(self, k):
        """Multiply by e^{k σ_0 / 2} (or a tuple k for several σ)."""
        if isinstance(k, int):
            k = (k,) + (0,) * (len(self.ctx.exps) - 1)
        return MF(self.ctx, {_mono_mul(m, k): p for m, p in self.parts.items()})

    def markers(self):
        return set(self.parts)

    def as_poly(self):
        zero = (0,) * len(self.ctx.exps)
        if any(k != zero for k in self.parts):
            raise ModelError("residual exponential marker")
        return self.parts.get(zero, Poly(self.model, {}, True))

    def __str__(self):
        if not self.parts:
            return "0"
        out = []
        for k in sorted(self.parts):
            body = poly_text(self.parts[k])
            if any(k):
                mk = "*".join(f"exp({Fraction(e, 2)}*{self.ctx.names[j]})"
                              for j, e in enumerate(k) if e)
                out.append(f"{mk}*({body})")
            else:
                out.append(body)
        return " + ".join(out)

    def __repr__(self):
        return f"MF({str(self)!r})"


class RingContext:
    """A model together with the exponents σ_j allowed in markers."""

    def __init__(self, model, exps=(), names=None):
        self.model = model
        self.exps = tuple(exps)
        self.names = tuple(names) if names else tuple(f"s{j}" for j in range(len(exps)))
        for s in self.exps:
            if s.conjugate() != s:
                raise ModelError("marker exponents must be real")

    def extend(self, sigma, name=None):
        return RingContext(self.model, self.exps + (sigma,), self.names + (name or f"s{len(self.exps)}",))

    def embed(self, e):
        """Re-home an MF from a context whose exps are a prefix of ours."""
        pad = (0,) * (len(self.exps) - len(e.ctx.exps))
        if e.ctx.exps != self.exps[:len(e.ctx.exps)]:
            raise ModelError("incompatible ring contexts")
        return MF(self, {k + pad: p for k, p in e.parts.items()})

    def poly(self, p):
        return MF.poly(self, p)

    def const(self, c):
        return MF.const(self, c)

    def var(self, name):
        return MF.poly(self, Poly.var(self.model, name))


class VectorField:
    """Σ_k coeff_k ∂/∂x_k with polynomial coefficients (base fields)."""

    def __init__(self, model, coeffs):
        self.model = model
        self.coeffs = dict(coeffs)  # var index -> Poly

    def on_poly(self, p):
        out = Poly(self.model, {}, True)
        for k, c in self.coeffs.items():
            d = p.partial(k)
            if d:
                out = out + c * d
        return out

    def on(self, e):
        """Apply to an MF, differentiating markers as exponentials."""
        ctx = e.ctx
        dexp = [self.on_poly(s) for s in ctx.exps]
        out = MF(ctx)
        for k, p in e.parts.items():
            q = self.on_poly(p)
            for j, kj in enumerate(k):
                if kj and dexp[j]:
                    q = q + dexp[j] * p * Fraction(kj, 2)
            if q:
                out = out + MF(ctx, {k: q})
        return out


def _vf(model, fields):
    coeffs = {}
    for var, c in fields:
        coeffs[model.variables.index(var)] = c
    return VectorField(model, coeffs)


def base_frame(model):
    """(T, Z, Zb) base frame fields of the model."""
    P = lambda name: Poly.var(model, name)
    if model is SPHERE:
        a = Gauss(Fraction(1, 2), Fraction(-1, 2))
        ab = a.conjugate()
        Z = _vf(model, [("z1", P("z2b").scale(a)), ("z2", P("z1b").scale(-a))])
        Zb = _vf(model, [("z1b", P("z2").scale(ab)), ("z2b", P("z1").scale(-ab))])
        h = Gauss(0, Fraction(1, 2))
        T = _vf(model, [("z1", P("z1").scale(h)), ("z2", P("z2").scale(h)),
                        ("z1b", P("z1b").scale(-h)), ("z2b", P("z2b").scale(-h))])
        return T, Z, Zb
    if model is HEISENBERG:
        one = Poly.const(model, 1)
        Z = _vf(model, [("z", one), ("t", P("zb").scale(Gauss(0, 1)))])
        Zb = _vf(model, [("zb", one), ("t", P("z").scale(Gauss(0, -1)))])
        T = _vf(model, [("t", one.scale(2))])
        return T, Z, Zb
    raise ModelError(f"unknown model {model!r}")


def base_brackets(model):
    """Constant structure functions [E_i, E_j] = Σ_k c[i][j][k] E_k for (T, Z, Zb)."""
    z = Gauss(0)
    c = [[[z] * 3 for _ in range(3)] for _ in range(3)]
    mi = Gauss(0, -1)
    c[1][2] = [mi, z, z]
    c[2][1] = [-mi, z, z]
    if model is SPHERE:
        c[0][1] = [z, mi, z]
        c[1][0] = [z, -mi, z]
        c[0][2] = [z, z, -mi]
        c[2][0] = [z, z, mi]
    return c
