"""Change of contact form θ̂ = e^σ θ in dimension three (unitary frames).

For a component u of charge c and effective weight w_e:

    ∇̂_1 u = ∇_1 u + (w_e - 3c/2) σ_1 u
    ∇̂_1̄ u = ∇_1̄ u + (w_e + 3c/2) σ_1̄ u
    ∇̂_0 u = -i (∇̂_1̄∇̂_1 u - ∇̂_1∇̂_1̄ u - c R̂ u)

which reproduce the scalar and one-form rules for a change of contact form
and extend them linearly in the charge.  Only density-level bookkeeping is
done: no exponential factors appear.
"""

from __future__ import annotations

from fractions import Fraction

from ..coeffs import I
from .frame import SYMBOLS, FExpr, FrameError, mono_charge, mono_weight


class UnsupportedSymbol(FrameError):
    pass


def hatted_symbol(sym, sigma="sigma"):
    s = FExpr.jet(sigma)
    if sym == "A":
        return FExpr.jet("A") + s.d("11") * I - s.d("1") * s.d("1") * I
    if sym == "Ab":
        return FExpr.jet("Ab") - s.d("bb") * I + s.d("b") * s.d("b") * I
    if sym == "R":
        lap = -(s.d("1b") + s.d("b1"))
        return FExpr.jet("R") + lap * 2 - s.d("1") * s.d("b") * 2
    if sym in ("mu", "mub") or sym.startswith("mu"):
        raise UnsupportedSymbol(f"{sym} is a constraint auxiliary and has no transformation rule")
    return FExpr.jet(sym)


class Hatter:
    """Computes hatted expressions in unhatted quantities and σ."""

    def __init__(self, sigma="sigma", symbols=None):
        self.sigma = sigma
        self.symbols = dict(SYMBOLS if symbols is None else symbols)
        self._rhat = hatted_symbol("R", sigma)
        self._memo = {}

    def d(self, e, letter):
        """Hatted covariant derivative of a hatted expression."""
        if letter == "0":
            out = FExpr()
            for m, c in e.terms.items():
                one = FExpr({m: c})
                ch = mono_charge(m, self.symbols)
                t = self.d(self.d(one, "1"), "b") - self.d(self.d(one, "b"), "1")
                if ch:
                    t = t - self._rhat * one * ch
                out = out + t * (-I)
            return out
        s1 = FExpr.jet(self.sigma, letter)
        out = e.d(letter)
        sign = -1 if letter == "1" else 1
        for m, c in e.terms.items():
            k = mono_weight(m, self.symbols) + sign * Fraction(3, 2) * mono_charge(m, self.symbols)
            if k:
                out = out + FExpr({m: c}) * s1 * k
        return out

    def jet(self, sym, word):
        key = (sym, word)
        got = self._memo.get(key)
        if got is None:
            if word:
                got = self.d(self.jet(sym, word[:-1]), word[-1])
            else:
                got = hatted_symbol(sym, self.sigma)
            self._memo[key] = got
        return got

    def __call__(self, e):
        out = FExpr()
        for m, c in e.terms.items():
            acc = FExpr.const(c)
            for sym, word in m:
                acc = acc * self.jet(sym, word)
            out = out + acc
        return out


def transform(e, sigma="sigma", symbols=None):
    """Hatted evaluation of ``e`` (n = 1) in unhatted symbols and σ."""
    return Hatter(sigma, symbols)(e)
