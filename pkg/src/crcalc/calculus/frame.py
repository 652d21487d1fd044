"""Dimension-three calculus in a unitary frame.

With n = 1 and h_{11̄} = 1 every tensor component is a scalar carrying a
*charge* c = (#holomorphic lower) - (#antiholomorphic lower) and an effective
weight w_e = w - (p + q)/2.  A jet is ``(symbol, word)`` where ``word`` is a
string over ``"1"``, ``"b"`` (for 1̄) and ``"0"`` listing covariant
derivatives innermost first.  A monomial is a sorted tuple of jets and a
:class:`FExpr` maps monomials to Gaussian rational coefficients.

Commutators used (u of charge c):

    [∇_1̄, ∇_1] u = i ∇_0 u + c R u
    [∇_1, ∇_0] u = A ∇_1̄ u - c (∇_1̄ A) u
    [∇_1̄, ∇_0] u = Ā ∇_1 u + c (∇_1 Ā) u

together with ∇_0 R = ∇_1̄∇_1̄ A + ∇_1∇_1 Ā.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..coeffs import Gauss, I

ORDER = {"1": 0, "b": 1, "0": 2}
FLIP = {"1": "b", "b": "1", "0": "0"}


@dataclass(frozen=True)
class FrameSymbol:
    name: str
    charge: int
    weight: Fraction  # effective weight w_e
    conj: str


def _base_symbols():
    half = Fraction(1, 2)
    out = {}

    def add(name, c, w, conj=None):
        out[name] = FrameSymbol(name, c, Fraction(w), conj or name)

    for s in ("f", "g", "u", "v", "sigma", "sigma1", "sigma2", "X", "Y"):
        add(s, 0, 0)
    add("R", 0, -1)
    add("A", 2, -1, "Ab")
    add("Ab", -2, -1, "A")
    add("mu", 0, -1, "mub")
    add("mub", 0, -1, "mu")
    add("tau", 1, -1 - half, "taub")
    add("taub", -1, -1 - half, "tau")
    return out


SYMBOLS = _base_symbols()


class FrameError(ValueError):
    pass


def jet_charge(jet, symbols=SYMBOLS):
    sym, word = jet
    return symbols[sym].charge + word.count("1") - word.count("b")


def jet_weight(jet, symbols=SYMBOLS):
    sym, word = jet
    return symbols[sym].weight - Fraction(word.count("1") + word.count("b"), 2) - word.count("0")


def mono_charge(mono, symbols=SYMBOLS):
    return sum(jet_charge(j, symbols) for j in mono)


def mono_weight(mono, symbols=SYMBOLS):
    return sum((jet_weight(j, symbols) for j in mono), Fraction(0))


class FExpr:
    """Polynomial in jets with Gaussian rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms or {}

    @classmethod
    def jet(cls, sym, word="", coeff=1):
        return cls({((sym, word),): Gauss.coerce(coeff)})

    @classmethod
    def const(cls, c):
        c = Gauss.coerce(c)
        return cls({(): c} if c else {})

    def copy(self):
        return FExpr(dict(self.terms))

    def _acc(self, mono, c):
        prev = self.terms.get(mono)
        s = c if prev is None else prev + c
        if s:
            self.terms[mono] = s
        else:
            self.terms.pop(mono, None)

    def __add__(self, o):
        if not isinstance(o, FExpr):
            o = FExpr.const(o)
        out = self.copy()
        for m, c in o.terms.items():
            out._acc(m, c)
        return out

    __radd__ = __add__

    def __neg__(self):
        return FExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        if not isinstance(o, FExpr):
            o = FExpr.const(o)
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, FExpr):
            c = Gauss.coerce(o)
            if not c:
                return FExpr()
            return FExpr({m: v * c for m, v in self.terms.items()})
        out = FExpr()
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                out._acc(tuple(sorted(m1 + m2)), c1 * c2)
        return out

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self * Gauss.coerce(o).inverse()

    def __pow__(self, k):
        out = FExpr.const(1)
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self):
        return not self.terms

    def __eq__(self, o):
        if not isinstance(o, FExpr):
            o = FExpr.const(o)
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def conjugate(self, symbols=SYMBOLS):
        out = FExpr()
        for m, c in self.terms.items():
            mono = tuple(sorted((symbols[s].conj, "".join(FLIP[x] for x in w)) for s, w in m))
            out._acc(mono, c.conjugate())
        return out

    def real(self):
        return (self + self.conjugate()) * Fraction(1, 2)

    def imag(self):
        return (self - self.conjugate()) * (Gauss(0, Fraction(-1, 2)))

    def d(self, letter):
        """Apply the covariant derivative ``letter`` (Leibniz rule).

        A multi-letter argument applies the letters innermost first.
        """
        if len(letter) != 1:
            return self.dw(letter)
        out = FExpr()
        for m, c in self.terms.items():
            for k, (s, w) in enumerate(m):
                mono = tuple(sorted(m[:k] + ((s, w + letter),) + m[k + 1:]))
                out._acc(mono, c)
        return out

    def dw(self, word):
        out = self
        for x in word:
            out = out.d(x)
        return out if word else out.copy()

    def symbols_used(self):
        return {s for m in self.terms for s, _ in m}

    def substitute(self, mapping):
        """Replace bare symbols by expressions; derivative words are re-applied."""
        out = FExpr()
        for m, c in self.terms.items():
            acc = FExpr.const(c)
            for s, w in m:
                if s in mapping:
                    acc = acc * mapping[s].dw(w)
                else:
                    acc = acc * FExpr.jet(s, w)
            out = out + acc
        return out

    def __repr__(self):
        return f"FExpr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)


_LETTER_TXT = {"1": "1", "b": "1'", "0": "0"}


def jet_text(jet):
    s, w = jet
    if not w:
        return s
    return "D[" + ",".join(_LETTER_TXT[x] for x in reversed(w)) + "](" + s + ")"


def to_text(e):
    if not e.terms:
        return "0"
    parts = []
    for m in sorted(e.terms, key=lambda m: (len(m), m)):
        c = e.terms[m]
        body = "*".join(jet_text(j) for j in m)
        if not body:
            parts.append(f"({c})")
        elif c == 1:
            parts.append(body)
        else:
            parts.append(f"({c})*{body}")
    return " + ".join(parts)


def _comm(x, y, base, charge):
    """∇_y∇_x X - ∇_x∇_y X for X = ``base`` (an FExpr jet) of given charge."""
    c = charge
    if x == y:
        return FExpr()
    if x == "1" and y == "b":
        return base.d("0") * I + FExpr.jet("R") * base * c
    if x == "b" and y == "1":
        return -(base.d("0") * I + FExpr.jet("R") * base * c)
    if x == "0" and y == "1":
        return FExpr.jet("A") * base.d("b") - FExpr.jet("A", "b") * base * c
    if x == "1" and y == "0":
        return -(FExpr.jet("A") * base.d("b") - FExpr.jet("A", "b") * base * c)
    if x == "0" and y == "b":
        return FExpr.jet("Ab") * base.d("1") + FExpr.jet("Ab", "1") * base * c
    if x == "b" and y == "0":
        return -(FExpr.jet("Ab") * base.d("1") + FExpr.jet("Ab", "1") * base * c)
    raise FrameError(f"bad letters {x!r}, {y!r}")


def swap(sym, word, k, symbols=SYMBOLS):
    """Rewrite jet(sym, word) swapping letters k, k+1; returns an FExpr."""
    x, y = word[k], word[k + 1]
    inner = word[:k]
    base = FExpr.jet(sym, inner)
    charge = symbols[sym].charge + inner.count("1") - inner.count("b")
    swapped = word[:k] + y + x + word[k + 2:]
    corr = _comm(x, y, base, charge).dw(word[k + 2:])
    return FExpr.jet(sym, swapped) + corr


def reorder(sym, word, target, symbols=SYMBOLS):
    """Express jet(sym, word) through jet(sym, target) plus commutator terms.

    ``target`` must be a permutation of ``word``.  Returns (main, corrections).
    """
    if sorted(word) != sorted(target):
        raise FrameError("target is not a permutation of word")
    corr = FExpr()
    cur = word
    for pos in range(len(target)):
        j = cur.index(target[pos], pos)
        while j > pos:
            res = swap(sym, cur, j - 1, symbols)
            cur = cur[:j - 1] + cur[j] + cur[j - 1] + cur[j + 1:]
            res._acc(((sym, cur),), Gauss(-1))
            corr = corr + res
            j -= 1
    return cur, corr


@dataclass(frozen=True)
class JetRule:
    """jet(symbol, pattern + rest) -> replacement.dw(rest)."""

    symbol: str
    pattern: str
    replacement: FExpr


def _bianchi_rules():
    return [JetRule("R", "0", FExpr.jet("A", "bb") + FExpr.jet("Ab", "11"))]


def pseudo_einstein_rules():
    return [JetRule("A", "b", FExpr.jet("R", "1") * (-I)),
            JetRule("Ab", "1", FExpr.jet("R", "b") * I)]


def torsion_free_rules():
    return [JetRule("A", "", FExpr()), JetRule("Ab", "", FExpr())]


def pluriharmonic_rules(u="u"):
    """P_1 u = 0 encoded through μ := ∇_1̄∇_1 u."""
    mu, mub = FExpr.jet("mu"), FExpr.jet("mub")
    return [
        JetRule(u, "1b", mu),
        JetRule(u, "0", (mu - mub) * (-I)),
        JetRule("mub", "1", FExpr.jet("A") * FExpr.jet(u, "b") * (-I)),
        JetRule("mu", "b", FExpr.jet("Ab") * FExpr.jet(u, "1") * I),
    ]


class NormalFormLoop(RuntimeError):
    pass


class FrameCalculus:
    """Normal ordering (1 innermost, then 1̄, then 0) with optional constraints."""

    def __init__(self, constraints=(), symbols=None):
        self.symbols = dict(SYMBOLS if symbols is None else symbols)
        self.constraints = tuple(constraints)
        rules = []
        pe = "pseudo-einstein" in self.constraints or "torsion-free" in self.constraints
        for c in self.constraints:
            if c == "pseudo-einstein":
                rules += pseudo_einstein_rules()
            elif c == "torsion-free":
                rules += torsion_free_rules()
            elif c.startswith("pluriharmonic"):
                u = c[c.index("(") + 1:-1] if "(" in c else "u"
                if u == "u":
                    rules += pluriharmonic_rules("u")
                else:
                    rules += _renamed_pluriharmonic(u, self.symbols)
            elif c == "general":
                pass
            else:
                raise FrameError(f"unknown constraint {c!r}")
        if not pe:
            rules += _bianchi_rules()
        self.rules = {}
        for r in rules:
            self.rules.setdefault(r.symbol, []).append(r)
        self._memo = {}
        self._active = set()

    def jet_nf(self, jet):
        got = self._memo.get(jet)
        if got is not None:
            return got
        if jet in self._active:
            raise NormalFormLoop(f"rewriting loops on {jet_text(jet)}")
        self._active.add(jet)
        try:
            res = self._jet_nf(jet)
        finally:
            self._active.discard(jet)
        self._memo[jet] = res
        return res

    def _jet_nf(self, jet):
        sym, word = jet
        for rule in self.rules.get(sym, ()):
            rest = list(word)
            ok = True
            for x in rule.pattern:
                if x in rest:
                    rest.remove(x)
                else:
                    ok = False
                    break
            if not ok:
                continue
            target = rule.pattern + "".join(_stable_rest(word, rule.pattern))
            _, corr = reorder(sym, word, target, self.symbols)
            repl = rule.replacement.dw(target[len(rule.pattern):])
            return self.nf(repl + corr)
        for k in range(len(word) - 1):
            if ORDER[word[k]] > ORDER[word[k + 1]]:
                return self.nf(swap(sym, word, k, self.symbols))
        return FExpr({(jet,): Gauss(1)})

    def nf(self, e):
        out = FExpr()
        for m, c in e.terms.items():
            acc = FExpr.const(c)
            for j in m:
                acc = acc * self.jet_nf(j)
                if not acc.terms:
                    break
            for mm, cc in acc.terms.items():
                out._acc(mm, cc)
        return out

    def is_zero(self, e):
        return self.nf(e).is_zero()


def _stable_rest(word, pattern):
    rest = list(word)
    for x in pattern:
        rest.remove(x)
    return rest


def _renamed_pluriharmonic(u, symbols):
    mu, mub = f"mu_{u}", f"mub_{u}"
    symbols.setdefault(mu, FrameSymbol(mu, 0, symbols[u].weight - 1, mub))
    symbols.setdefault(mub, FrameSymbol(mub, 0, symbols[u].weight - 1, mu))
    m, mb = FExpr.jet(mu), FExpr.jet(mub)
    return [
        JetRule(u, "1b", m),
        JetRule(u, "0", (m - mb) * (-I)),
        JetRule(mub, "1", FExpr.jet("A") * FExpr.jet(u, "b") * (-I)),
        JetRule(mu, "b", FExpr.jet("Ab") * FExpr.jet(u, "1") * I),
    ]


# Frequently used operators ------------------------------------------------

def sub_laplacian(e):
    """Δ_b = -(∇^1∇_1 + ∇_1∇^1) in a unitary frame."""
    return -(e.d("1").d("b") + e.d("b").d("1"))


def nabla0(e):
    return e.d("0")
