"""Exact coefficient fields.

``RationalInN`` is a reduced rational function of the dimension parameter n
with rational coefficients.  ``Coeff`` adjoins the imaginary unit, giving
Q(n)[i]; it is the coefficient type of abstract tensor expressions.
``Gauss`` is the n-free specialization Q(i) used by the dimension-three
frame engine and by the model rings.
"""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering

import flint

_X = flint.fmpq_poly([0, 1])
_ONE = flint.fmpq_poly([1])
_ZERO = flint.fmpq_poly([])


class PoleAtLimit(ArithmeticError):
    """A coefficient has a pole at the requested value of n."""

    def __init__(self, message, term=None, order=0):
        super().__init__(message)
        self.term = term
        self.order = order


def _to_fmpq(x):
    if isinstance(x, flint.fmpq):
        return x
    x = Fraction(x)
    return flint.fmpq(x.numerator, x.denominator)


def _frac(q):
    return Fraction(int(q.p), int(q.q))


class RationalInN:
    """Element of Q(n), kept as a reduced fraction with monic denominator."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _reduced=False):
        if not isinstance(num, flint.fmpq_poly):
            num = flint.fmpq_poly([_to_fmpq(num)])
        if den is None:
            den = _ONE
        elif not isinstance(den, flint.fmpq_poly):
            den = flint.fmpq_poly([_to_fmpq(den)])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in Q(n)")
        if not _reduced:
            if num.is_zero():
                den = _ONE
            else:
                g = num.gcd(den)
                if g.degree() > 0:
                    num = num / g
                    den = den / g
                lead = den.coeffs()[-1]
                if lead != 1:
                    num = num / lead
                    den = den / lead
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def n(cls):
        return cls(_X, _ONE, _reduced=True)

    @classmethod
    def from_coeffs(cls, num, den=(1,)):
        """Build from ascending coefficient lists (rationals)."""
        return cls(flint.fmpq_poly([_to_fmpq(c) for c in num]),
                   flint.fmpq_poly([_to_fmpq(c) for c in den]))

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RationalInN):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalInN(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            if self.den == _ONE:
                return RationalInN(self.num + other.num, _ONE, _reduced=True)
            return RationalInN(self.num + other.num, self.den)
        return RationalInN(self.num * other.den + other.num * self.den,
                           self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalInN(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero() or other.num.is_zero():
            return RZERO
        if self.den == _ONE and other.den == _ONE:
            return RationalInN(self.num * other.num, _ONE, _reduced=True)
        if other.den == _ONE and other.num.degree() == 0:
            return RationalInN(self.num * other.num, self.den, _reduced=True)
        if self.den == _ONE and self.num.degree() == 0:
            return RationalInN(self.num * other.num, other.den, _reduced=True)
        return RationalInN(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(n)")
        return RationalInN(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        return RationalInN(self.num ** k, self.den ** k)

    # predicates -----------------------------------------------------------
    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.num.coeffs()), tuple(self.den.coeffs())))
        return self._hash

    def is_constant(self):
        return self.num.degree() <= 0 and self.den.degree() <= 0

    def constant(self):
        if not self.is_constant():
            raise ValueError(f"{self} depends on n")
        return _frac(self.num.coeffs()[0]) / _frac(self.den.coeffs()[0]) if not self.num.is_zero() else Fraction(0)

    # n-specific -----------------------------------------------------------
    def root_order(self, n0, which="num"):
        """Multiplicity of n = n0 as a root of numerator or denominator."""
        p = self.num if which == "num" else self.den
        if p.is_zero():
            return 10**9
        lin = flint.fmpq_poly([-_to_fmpq(n0), 1])
        k = 0
        while True:
            q, r = divmod(p, lin)
            if not r.is_zero():
                return k
            p = q
            k += 1

    def valuation(self, n0):
        """Order of vanishing at n0 (negative for a pole)."""
        if self.is_zero():
            return 10**9
        return self.root_order(n0, "num") - self.root_order(n0, "den")

    def evaluate(self, n0):
        """Value at n = n0; raises PoleAtLimit if the denominator vanishes there."""
        v = _to_fmpq(n0)
        d = self.den(v)
        if d == 0:
            order = -self.valuation(n0)
            if order <= 0:
                # removable: cancel the common factor (cannot happen when reduced)
                raise AssertionError("unreduced RationalInN")
            raise PoleAtLimit(f"pole of order {order} at n={n0}", order=order)
        return _frac(self.num(v)) / _frac(d)

    def __repr__(self):
        return f"RationalInN({self})"

    def __str__(self):
        num = _poly_str(self.num)
        if self.den == _ONE:
            return num
        return f"({num})/({_poly_str(self.den)})"


def _poly_str(p):
    if p.is_zero():
        return "0"
    parts = []
    for k, c in reversed(list(enumerate(p.coeffs()))):
        if c == 0:
            continue
        c = _frac(c)
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = "n" if k == 1 else f"n^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


RZERO = RationalInN(0)
RONE = RationalInN(1)


class Coeff:
    """Element re + i*im of Q(n)[i]."""

    __slots__ = ("re", "im")

    def __init__(self, re=RZERO, im=RZERO):
        if not isinstance(re, RationalInN):
            re = RationalInN(re)
        if not isinstance(im, RationalInN):
            im = RationalInN(im)
        self.re = re
        self.im = im

    @classmethod
    def coerce(cls, x):
        if isinstance(x, Coeff):
            return x
        if isinstance(x, RationalInN):
            return cls(x)
        if isinstance(x, Gauss):
            return cls(x.re, x.im)
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    def __add__(self, o):
        o = Coeff.coerce(o)
        return Coeff(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Coeff(-self.re, -self.im)

    def __sub__(self, o):
        o = Coeff.coerce(o)
        return Coeff(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return Coeff.coerce(o) - self

    def __mul__(self, o):
        o = Coeff.coerce(o)
        if o.im.is_zero():
            if self.im.is_zero():
                return Coeff(self.re * o.re, RZERO)
            return Coeff(self.re * o.re, self.im * o.re)
        if self.im.is_zero():
            return Coeff(self.re * o.re, self.re * o.im)
        return Coeff(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self):
        return Coeff(self.re, -self.im)

    def inverse(self):
        d = self.re * self.re + self.im * self.im
        return Coeff(self.re / d, -self.im / d)

    def __truediv__(self, o):
        return self * Coeff.coerce(o).inverse()

    def __rtruediv__(self, o):
        return Coeff.coerce(o) * self.inverse()

    def __pow__(self, k):
        out = Coeff(1)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def is_zero(self):
        return self.re.is_zero() and self.im.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, o):
        try:
            o = Coeff.coerce(o)
        except (TypeError, ValueError):
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def valuation(self, n0):
        return min(self.re.valuation(n0), self.im.valuation(n0))

    def evaluate(self, n0):
        return Gauss(self.re.evaluate(n0), self.im.evaluate(n0))

    def is_constant(self):
        return self.re.is_constant() and self.im.is_constant()

    def __repr__(self):
        return f"Coeff({self})"

    def __str__(self):
        if self.im.is_zero():
            return str(self.re)
        if self.re.is_zero():
            return f"i*({self.im})" if not self.im.is_constant() else f"{_gs(self.im.constant())}*i"
        return f"({self.re}) + i*({self.im})"


def _gs(x):
    return str(x)


@total_ordering
class Gauss:
    """Gaussian rational re + i*im with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @staticmethod
    def coerce(x):
        if isinstance(x, Gauss):
            return x
        if isinstance(x, complex):
            return Gauss(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, Coeff):
            return Gauss(x.re.constant(), x.im.constant())
        if isinstance(x, (int, Fraction)):
            return Gauss(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Gauss")

    @staticmethod
    def _try(o):
        if isinstance(o, Coeff):
            return None     # mixed arithmetic is done in Coeff
        try:
            return Gauss.coerce(o)
        except TypeError:
            return None

    def __add__(self, o):
        if not isinstance(o, Gauss):
            o = Gauss._try(o)
            if o is None:
                return NotImplemented
        return Gauss(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Gauss(-self.re, -self.im)

    def __sub__(self, o):
        if not isinstance(o, Gauss):
            o = Gauss._try(o)
            if o is None:
                return NotImplemented
        return Gauss(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        o = Gauss._try(o)
        return NotImplemented if o is None else o - self

    def __mul__(self, o):
        if not isinstance(o, Gauss):
            o = Gauss._try(o)
            if o is None:
                return NotImplemented
        return Gauss(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self):
        return Gauss(self.re, -self.im)

    def inverse(self):
        d = self.re * self.re + self.im * self.im
        return Gauss(self.re / d, -self.im / d)

    def __truediv__(self, o):
        return self * Gauss.coerce(o).inverse()

    def __rtruediv__(self, o):
        return Gauss.coerce(o) * self.inverse()

    def __pow__(self, k):
        out = Gauss(1)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, o):
        try:
            o = Gauss.coerce(o)
        except (TypeError, ValueError):
            return False
        return self.re == o.re and self.im == o.im

    def __lt__(self, o):
        o = Gauss.coerce(o)
        return (self.re, self.im) < (o.re, o.im)

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def is_real(self):
        return self.im == 0

    def __repr__(self):
        return f"Gauss({self})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        imag = "i" if mag == 1 else f"{mag}*i"
        return f"({self.re} {sign} {imag})"


I = Gauss(0, 1)
