"""Abstract-index tensor expressions with coefficients in Q(n)[i].

Every index is stored *lowered*; the Levi form is implicit.  A slot is a
pair ``(kind, label)`` with kind ``"h"`` (holomorphic), ``"a"``
(antiholomorphic) or ``"0"`` (Reeb, label ``None``).  A dummy label occurs
exactly twice in a term, once with kind ``h`` and once with kind ``a``; the
pair stands for a contraction through h^{-1}.  Dummy labels are ints, free
labels are strings.

A factor is ``Factor(name, idx, der)``: the symbol's own index slots and the
covariant derivative slots applied to it, innermost first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from ..coeffs import Coeff, RationalInN, RZERO

H, A_, Z0 = "h", "a", "0"
ZERO_SLOT = (Z0, None)


class TensorError(ValueError):
    pass


class WeightMismatch(TensorError):
    pass


class Factor(NamedTuple):
    name: str
    idx: tuple
    der: tuple = ()

    def slots(self):
        return self.idx + self.der


def flip(kind):
    return {H: A_, A_: H, Z0: Z0}[kind]


@dataclass(frozen=True)
class SymbolDecl:
    """Registry entry for a tensor symbol.

    ``kinds`` is the lowered index signature, ``symmetries`` a tuple of
    generating permutations of the index slots, ``conj`` the name of the
    conjugate symbol and ``conj_perm`` the slot permutation applied after
    swapping kinds (``new_idx[k] = old_idx[conj_perm[k]]``).
    """

    name: str
    kinds: tuple = ()
    weight: tuple = (0, 0)
    symmetries: tuple = ()
    conj: str | None = None
    conj_perm: tuple | None = None
    order: int = 0

    @property
    def real(self):
        return self.conj == self.name

    def group(self):
        """All index permutations generated by the declared symmetries."""
        ident = tuple(range(len(self.kinds)))
        seen = {ident}
        frontier = [ident]
        while frontier:
            new = []
            for p in frontier:
                for g in self.symmetries:
                    q = tuple(p[g[k]] for k in range(len(g)))
                    if q not in seen:
                        seen.add(q)
                        new.append(q)
            frontier = new
        return sorted(seen)


class Registry:
    """Frozen symbol table."""

    def __init__(self, decls):
        self._decls = {d.name: d for d in decls}
        for d in decls:
            for g in d.symmetries:
                if sorted(g) != list(range(len(d.kinds))):
                    raise TensorError(f"bad symmetry for {d.name}")
                if any(d.kinds[g[k]] != d.kinds[k] for k in range(len(g))):
                    raise TensorError(f"symmetry of {d.name} mixes index kinds")
        self._groups = {d.name: d.group() for d in decls}

    def __contains__(self, name):
        return name in self._decls

    def __getitem__(self, name):
        try:
            return self._decls[name]
        except KeyError:
            raise TensorError(f"unknown symbol {name!r}") from None

    def group(self, name):
        return self._groups[name]

    def names(self):
        return list(self._decls)

    def with_weights(self, **weights):
        """Copy with some scalar weights replaced (weights given as pairs)."""
        decls = []
        for d in self._decls.values():
            if d.name in weights:
                w = weights[d.name]
                d = SymbolDecl(d.name, d.kinds, (w[0], w[1]), d.symmetries, d.conj,
                               d.conj_perm, d.order)
            decls.append(d)
        return Registry(decls)


def _as_rn(x):
    return x if isinstance(x, RationalInN) else RationalInN(x)


def term_weight(factors, registry):
    """Density weight (w, w') of a product of factors."""
    w = RZERO
    wp = RZERO
    pairs = 0
    zeros = 0
    labels = {}
    for f in factors:
        d = registry[f.name]
        w = w + _as_rn(d.weight[0])
        wp = wp + _as_rn(d.weight[1])
        for kind, lab in f.slots():
            if kind == Z0:
                continue
            labels[lab] = labels.get(lab, 0) + 1
        zeros += sum(1 for s in f.der if s[0] == Z0)
    pairs = sum(1 for c in labels.values() if c == 2)
    shift = pairs + zeros
    return (w - shift, wp - shift)


def term_labels(factors):
    """Map label -> list of (factor position, slot position, kind)."""
    occ = {}
    for i, f in enumerate(factors):
        for j, (kind, lab) in enumerate(f.slots()):
            if kind == Z0:
                continue
            occ.setdefault(lab, []).append((i, j, kind))
    return occ


def free_slots(factors):
    """Sorted tuple of (label, kind) for the free indices of a term."""
    occ = term_labels(factors)
    out = []
    for lab, places in occ.items():
        if len(places) == 1:
            out.append((lab, places[0][2]))
        elif len(places) == 2:
            k1, k2 = places[0][2], places[1][2]
            if k1 == k2:
                raise TensorError(f"index {lab!r} repeated with the same kind")
        else:
            raise TensorError(f"index {lab!r} occurs {len(places)} times")
    return tuple(sorted(out, key=lambda t: (str(t[0]), t[1])))


def max_dummy(factors):
    m = -1
    for f in factors:
        for kind, lab in f.slots():
            if isinstance(lab, int) and lab > m:
                m = lab
    return m


def relabel_factors(factors, mapping):
    out = []
    for f in factors:
        idx = tuple((k, mapping.get(l, l)) if k != Z0 else (k, l) for k, l in f.idx)
        der = tuple((k, mapping.get(l, l)) if k != Z0 else (k, l) for k, l in f.der)
        out.append(Factor(f.name, idx, der))
    return tuple(out)


def shift_dummies(factors, offset):
    mapping = {}
    for f in factors:
        for k, l in f.slots():
            if isinstance(l, int):
                mapping[l] = l + offset
    return relabel_factors(factors, mapping)


@dataclass
class TensorExpr:
    """Finite sum of coefficient * product-of-factors terms.

    ``terms`` maps a tuple of factors to its coefficient.  Instances are
    treated as immutable values; all operations return new expressions.
    Terms are kept in whatever labelling they were built with; call
    :func:`crcalc.tensor.canon.normalize` for the canonical form.
    """

    terms: dict = field(default_factory=dict)
    registry: Registry | None = None

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, registry=None):
        return cls({}, registry)

    @classmethod
    def scalar(cls, c, registry=None):
        c = Coeff.coerce(c)
        return cls({(): c} if c else {}, registry)

    @classmethod
    def factor(cls, name, idx=(), der=(), registry=None, coeff=1):
        return cls({(Factor(name, tuple(idx), tuple(der)),): Coeff.coerce(coeff)}, registry)

    @classmethod
    def from_terms(cls, pairs, registry=None):
        out = {}
        for factors, c in pairs:
            c = Coeff.coerce(c)
            if not c:
                continue
            factors = tuple(factors)
            prev = out.get(factors)
            s = c if prev is None else prev + c
            if s:
                out[factors] = s
            else:
                out.pop(factors, None)
        return cls(out, registry)

    # basic queries --------------------------------------------------------
    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def is_empty(self):
        return not self.terms

    is_zero = is_empty

    def _reg(self, other=None):
        return self.registry or (other.registry if other is not None else None)

    def free_indices(self):
        if not self.terms:
            return ()
        return free_slots(next(iter(self.terms)))

    def weight(self):
        if not self.terms or self.registry is None:
            return None
        return term_weight(next(iter(self.terms)), self.registry)

    def check(self):
        """Validate index structure and weight homogeneity."""
        frees = None
        weight = None
        for factors in self.terms:
            fs = free_slots(factors)
            if frees is None:
                frees = fs
            elif fs != frees:
                raise TensorError(f"terms with different free indices: {fs} vs {frees}")
            for f in factors:
                d = self.registry[f.name]
                if len(d.kinds) != len(f.idx):
                    raise TensorError(f"arity mismatch for {f.name}")
                for want, (kind, _) in zip(d.kinds, f.idx):
                    if kind != want:
                        raise TensorError(f"index kind mismatch for {f.name}")
            if self.registry is not None:
                w = term_weight(factors, self.registry)
                if weight is None:
                    weight = w
                elif w != weight:
                    raise WeightMismatch(f"mixed density weights {w} vs {weight}")
        return self

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TensorExpr):
            other = TensorExpr.scalar(other, self.registry)
        out = dict(self.terms)
        for k, c in other.terms.items():
            prev = out.get(k)
            s = c if prev is None else prev + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        res = TensorExpr(out, self._reg(other))
        if self.terms and other.terms and res.registry is not None:
            w1, w2 = self.weight(), other.weight()
            if w1 != w2:
                raise WeightMismatch(f"cannot add weights {w1} and {w2}")
        return res

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return TensorExpr({k: -c for k, c in self.terms.items()}, self.registry)

    def __sub__(self, other):
        if not isinstance(other, TensorExpr):
            other = TensorExpr.scalar(other, self.registry)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = Coeff.coerce(c)
        if not c:
            return TensorExpr({}, self.registry)
        return TensorExpr({k: v * c for k, v in self.terms.items()}, self.registry)

    def __mul__(self, other):
        if not isinstance(other, TensorExpr):
            return self.scale(other)
        out = {}
        offset = 1 + max((max_dummy(k) for k in self.terms), default=-1)
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + shift_dummies(k2, offset)
                c = c1 * c2
                prev = out.get(k)
                s = c if prev is None else prev + c
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return TensorExpr(out, self._reg(other))

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(Coeff.coerce(other).inverse())

    def map_coeffs(self, fn):
        out = {}
        for k, c in self.terms.items():
            c = fn(c)
            if c:
                out[k] = c
        return TensorExpr(out, self.registry)

    def relabel(self, mapping):
        return TensorExpr.from_terms(((relabel_factors(k, mapping), c)
                                      for k, c in self.terms.items()), self.registry)

    def __eq__(self, other):
        from .canon import normalize
        if not isinstance(other, TensorExpr):
            other = TensorExpr.scalar(other, self.registry)
        return normalize(self - other).is_empty()

    def __hash__(self):
        from .canon import normalize
        return hash(frozenset(normalize(self).terms.items()))

    def __repr__(self):
        from .printer import to_text
        return f"TensorExpr({to_text(self)!r})"

    def __str__(self):
        from .printer import to_text
        return to_text(self)


def derivative(e, slot):
    """Covariant derivative along ``slot`` applied by the Leibniz rule."""
    out = {}
    for factors, c in e.terms.items():
        for i, f in enumerate(factors):
            if f.name == "h":
                continue
            nf = factors[:i] + (Factor(f.name, f.idx, f.der + (slot,)),) + factors[i + 1:]
            prev = out.get(nf)
            s = c if prev is None else prev + c
            if s:
                out[nf] = s
            else:
                out.pop(nf, None)
    return TensorExpr(out, e.registry)
