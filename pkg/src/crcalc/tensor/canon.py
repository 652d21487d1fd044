"""Canonical form of tensor expressions.

A term is canonicalised by choosing, among all orderings of factors with the
same shape and all declared index symmetries, the labelling whose encoded
form is least; dummies are then numbered by first occurrence.  No calculus
rules are applied here.

The Levi form ``h`` may occur transiently (commutator output); it is
contracted away whenever one of its labels is a dummy, and its
self-contraction is replaced by ``n``.  Only h with two free labels survives.
"""

from __future__ import annotations

import itertools

from ..coeffs import Coeff, RationalInN
from .expr import H, Z0, A_, Factor, TensorExpr, term_labels

METRIC = "h"
_N = Coeff(RationalInN.n())


def contract_metric(factors):
    """Remove contractible h factors.  Returns (factors, multiplier) or None if zero."""
    factors = list(factors)
    mult = None
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(factors):
            if f.name != METRIC:
                continue
            if f.der:
                return None
            (_, x), (_, y) = f.idx
            if x == y:
                del factors[i]
                mult = _N if mult is None else mult * _N
                changed = True
                break
            occ = term_labels(factors)
            if len(occ.get(x, ())) == 2:
                j, s, kind = next(p for p in occ[x] if p[0] != i)
                factors[j] = _set_slot(factors[j], s, (A_, y))
                del factors[i]
                changed = True
                break
            if len(occ.get(y, ())) == 2:
                j, s, kind = next(p for p in occ[y] if p[0] != i)
                factors[j] = _set_slot(factors[j], s, (H, x))
                del factors[i]
                changed = True
                break
    return tuple(factors), mult


def _set_slot(f, pos, slot):
    n = len(f.idx)
    if pos < n:
        idx = f.idx[:pos] + (slot,) + f.idx[pos + 1:]
        return Factor(f.name, idx, f.der)
    pos -= n
    return Factor(f.name, f.idx, f.der[:pos] + (slot,) + f.der[pos + 1:])


def _shape(f):
    def pat(slots):
        return tuple((k, l if isinstance(l, str) else "") for k, l in slots)
    return (f.name, len(f.der), pat(f.idx), pat(f.der))


def _variants(f, registry):
    if registry is None or not f.idx or f.name not in registry:
        return [f]
    out = []
    seen = set()
    for g in registry.group(f.name):
        idx = tuple(f.idx[g[k]] for k in range(len(g)))
        if idx not in seen:
            seen.add(idx)
            out.append(Factor(f.name, idx, f.der))
    return out


def _encode(factors):
    """Relabel dummies by first occurrence; return (key, relabelled factors)."""
    mapping = {}
    key = []
    out = []
    for f in factors:
        enc = []
        new = []
        for part in (f.idx, f.der):
            ep = []
            np_ = []
            for kind, lab in part:
                if kind == Z0:
                    ep.append((kind, 0, ""))
                    np_.append((kind, lab))
                elif isinstance(lab, str):
                    ep.append((kind, 1, lab))
                    np_.append((kind, lab))
                else:
                    if lab not in mapping:
                        mapping[lab] = len(mapping)
                    ep.append((kind, 2, mapping[lab]))
                    np_.append((kind, mapping[lab]))
            enc.append(tuple(ep))
            new.append(tuple(np_))
        key.append((f.name, enc[0], enc[1]))
        out.append(Factor(f.name, new[0], new[1]))
    return tuple(key), tuple(out)


def canonical_term(factors, registry):
    """Canonical relabelling of a product (h already contracted)."""
    cache = _cache_for(registry)
    got = cache.get(factors)
    if got is not None:
        return got
    ordered = sorted(factors, key=_shape)
    groups = [list(g) for _, g in itertools.groupby(ordered, key=_shape)]
    per_group = []
    for g in groups:
        opts = []
        for perm in set(itertools.permutations(g)):
            for choice in itertools.product(*(_variants(f, registry) for f in perm)):
                opts.append(choice)
        per_group.append(opts)
    best = None
    for combo in itertools.product(*per_group):
        flat = tuple(f for grp in combo for f in grp)
        key, out = _encode(flat)
        if best is None or key < best[0]:
            best = (key, out)
    result = best[1] if best else ()
    cache[factors] = result
    return result


_CACHES = {}


def _cache_for(registry):
    c = _CACHES.get(id(registry))
    if c is None or c[0] is not registry:
        c = (registry, {})
        _CACHES[id(registry)] = c
    return c[1]


def normalize(e):
    """Canonical form: h contracted, dummies relabelled, like terms merged."""
    reg = e.registry
    out = {}
    for factors, c in e.terms.items():
        got = contract_metric(factors)
        if got is None:
            continue
        fs, mult = got
        if mult is not None:
            c = c * mult
        key = canonical_term(fs, reg)
        prev = out.get(key)
        s = c if prev is None else prev + c
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return TensorExpr(out, reg)


def is_zero(e):
    return normalize(e).is_empty()


def conjugate_factor(f, registry):
    d = registry[f.name]
    if d.conj is None:
        from .expr import TensorError
        raise TensorError(f"symbol {f.name!r} has no declared conjugate")
    flip = {H: A_, A_: H, Z0: Z0}
    idx = tuple((flip[k], l) for k, l in f.idx)
    if d.conj_perm is not None:
        idx = tuple(idx[d.conj_perm[k]] for k in range(len(idx)))
    der = tuple((flip[k], l) for k, l in f.der)
    return Factor(d.conj, idx, der)


def conjugate(e):
    reg = e.registry
    return TensorExpr.from_terms(
        ((tuple(conjugate_factor(f, reg) for f in k), c.conjugate()) for k, c in e.terms.items()),
        reg)


def real_part(e):
    return (e + conjugate(e)).scale(Coeff(RationalInN(1) / 2))


def imag_part(e):
    return (e - conjugate(e)).scale(Coeff(0, RationalInN(-1) / 2))
