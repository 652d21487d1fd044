"""Pseudohermitian calculus at symbolic n over abstract indices.

Normal form of a product, in order of priority:

1. derived symbols are expanded (R = 2(n+1)P, Ric = (n+2)P_{αβ̄} + P h, W, T,
   S, traces of P_{αβ̄}, Ric and the curvature tensor);
2. *targets*: a derivative slot that triggers a rule (divergence of P_{αβ̄},
   ∇_0 P, constraint substitutions) is commuted innermost and replaced;
3. derivative slots are sorted holomorphic < antiholomorphic < Reeb;
4. inside same-kind blocks the ordering is chosen to minimise the canonical
   key, paying for each adjacent swap with its commutator.

Commutators act slot by slot on every index of the differentiated tensor, so
they are valid at any rank.
"""

from __future__ import annotations

import itertools
import sys
from fractions import Fraction

from ..coeffs import Coeff, I, RationalInN
from ..tensor.canon import canonical_term, conjugate_factor, contract_metric
from ..tensor.expr import (A_, H, Z0, Factor, Registry, SymbolDecl, TensorError,
                           TensorExpr, derivative, max_dummy)

n = RationalInN.n()
RANK = {H: 0, A_: 1, Z0: 2}
PLACEHOLDERS = ("f", "g", "u", "v", "sigma")


class UnsupportedRank(TensorError):
    pass


class NormalFormLoop(RuntimeError):
    pass


def mu_names(u):
    return ("mu", "mub") if u == "u" else (f"mu_{u}", f"mub_{u}")


def ph_registry(weights=None):
    """The fixed symbol table.  ``weights`` overrides placeholder weights."""
    z = RationalInN(0)
    m1 = RationalInN(-1)
    herm = (1, 0)
    decls = [
        SymbolDecl("A", (H, H), (z, z), ((1, 0),), "Ab"),
        SymbolDecl("Ab", (A_, A_), (z, z), ((1, 0),), "A"),
        SymbolDecl("P2", (H, A_), (z, z), (), "P2", herm),
        SymbolDecl("Ric", (H, A_), (z, z), (), "Ric", herm),
        SymbolDecl("Rm", (H, A_, H, A_), (RationalInN(1), RationalInN(1)),
                   ((2, 1, 0, 3), (0, 3, 2, 1)), "Rm", (1, 0, 3, 2)),
        SymbolDecl("P", (), (m1, m1), (), "P"),
        SymbolDecl("R", (), (m1, m1), (), "R"),
        SymbolDecl("T", (H,), (m1, m1), (), "Tb"),
        SymbolDecl("Tb", (A_,), (m1, m1), (), "T"),
        SymbolDecl("W", (H,), (m1, m1), (), "Wb"),
        SymbolDecl("Wb", (A_,), (m1, m1), (), "W"),
        SymbolDecl("S", (), (RationalInN(-2), RationalInN(-2)), (), "S"),
        SymbolDecl("h", (H, A_), (RationalInN(1), RationalInN(1)), (), "h", herm),
        SymbolDecl("tau", (H,), (m1, m1), (), "taub"),
        SymbolDecl("taub", (A_,), (m1, m1), (), "tau"),
    ]
    weights = weights or {}
    for p in PLACEHOLDERS:
        w = weights.get(p, (z, z))
        w = (RationalInN(w[0]) if not isinstance(w[0], RationalInN) else w[0],
             RationalInN(w[1]) if not isinstance(w[1], RationalInN) else w[1])
        decls.append(SymbolDecl(p, (), w, (), p))
        mu, mub = mu_names(p)
        decls.append(SymbolDecl(mu, (), (w[0] - 1, w[1] - 1), (), mub))
        decls.append(SymbolDecl(mub, (), (w[0] - 1, w[1] - 1), (), mu))
    return Registry(decls)


REGISTRY = ph_registry()
CONSTRAINTS = ("general", "pseudo-einstein", "torsion-free")


def parse_constraint(c):
    """'pluriharmonic(u)' -> ('pluriharmonic', 'u'); others -> (name, None)."""
    c = c.strip()
    if c.startswith("pluriharmonic"):
        arg = c[len("pluriharmonic"):].strip()
        arg = arg[1:-1].strip() if arg.startswith("(") else "u"
        if arg not in PLACEHOLDERS:
            raise ValueError(f"pluriharmonic constraint needs a scalar placeholder, got {arg!r}")
        return ("pluriharmonic", arg)
    if c not in CONSTRAINTS:
        raise ValueError(f"unknown constraint {c!r}")
    return (c, None)


# small builders ---------------------------------------------------------------

def _c(x):
    return Coeff.coerce(x)


def _fac(name, idx=(), der=()):
    return Factor(name, tuple(idx), tuple(der))


class _Fresh:
    def __init__(self, start):
        self.k = start

    def __call__(self):
        self.k += 1
        return self.k - 1


def _with_slot(f, p, slot):
    k = len(f.idx)
    if p < k:
        return Factor(f.name, f.idx[:p] + (slot,) + f.idx[p + 1:], f.der)
    p -= k
    return Factor(f.name, f.idx, f.der[:p] + (slot,) + f.der[p + 1:])


def _apply_ders(pairs, ders):
    """Apply derivative slots (innermost first) to a list of (factors, coeff)."""
    if not ders:
        return pairs
    e = TensorExpr.from_terms(pairs)
    for s in ders:
        e = derivative(e, s)
    return list(e.terms.items())


class PHCalculus:
    """Rule-aware normal form under a set of constraints."""

    def __init__(self, constraints=("general",), registry=None, strict_rank=False, bianchi=True):
        if isinstance(constraints, str):
            constraints = (constraints,)
        self.registry = registry or REGISTRY
        self.pe = False
        self.torsion_free = False
        self.pluri = []
        for c in constraints:
            name, arg = parse_constraint(c)
            if name == "pseudo-einstein":
                self.pe = True
            elif name == "torsion-free":
                self.torsion_free = True
            elif name == "pluriharmonic":
                self.pluri.append(arg)
        self.strict_rank = strict_rank
        self.bianchi = bianchi
        self._memo = {}
        self._busy = set()

    # ------------------------------------------------------------------ public
    def nf(self, e):
        out = {}
        reg = self.registry
        for factors, c in e.terms.items():
            got = contract_metric(factors)
            if got is None:
                continue
            fs, mult = got
            if mult is not None:
                c = c * mult
            key = canonical_term(fs, reg)
            for k2, c2 in self._nf_key(key).items():
                v = c * c2
                prev = out.get(k2)
                s = v if prev is None else prev + v
                if s:
                    out[k2] = s
                else:
                    out.pop(k2, None)
        return TensorExpr(out, reg)

    def is_zero(self, e):
        return self.nf(e).is_empty()

    # ---------------------------------------------------------------- internals
    def _nf_pairs(self, pairs):
        return self.nf(TensorExpr.from_terms(pairs, self.registry)).terms

    def _nf_key(self, key):
        got = self._memo.get(key)
        if got is not None:
            return got
        if key in self._busy:
            raise NormalFormLoop(f"normal form loops on {key}")
        self._busy.add(key)
        try:
            if sys.getrecursionlimit() < 20000:
                sys.setrecursionlimit(20000)
            res = self._step(key)
        finally:
            self._busy.discard(key)
        self._memo[key] = res
        return res

    def _step(self, term):
        fresh = _Fresh(max_dummy(term) + 1)
        # 1. expansions
        for i, f in enumerate(term):
            rep = self._expand(f, fresh)
            if rep is not None:
                pairs = [(term[:i] + fs + term[i + 1:], c) for fs, c in rep]
                return self._nf_pairs(pairs)
        # 2. targets
        for i, f in enumerate(term):
            t = self._target(f)
            if t is None:
                continue
            j, dest, repl = t
            if j == dest:
                rep = repl(f, fresh)
                pairs = [(term[:i] + fs + term[i + 1:], c) for fs, c in rep]
                return self._nf_pairs(pairs)
            k = j - 1 if j > dest else j
            return self._swap_and_nf(term, i, k, fresh)
        # 3. kind ordering
        for i, f in enumerate(term):
            for k in range(len(f.der) - 1):
                if RANK[f.der[k][0]] > RANK[f.der[k + 1][0]]:
                    return self._swap_and_nf(term, i, k, fresh)
        # 4. same-kind blocks
        return self._blocks(term, fresh)

    def _swap_and_nf(self, term, i, k, fresh):
        f = term[i]
        swapped = Factor(f.name, f.idx, f.der[:k] + (f.der[k + 1], f.der[k]) + f.der[k + 2:])
        corr = self.commutator(Factor(f.name, f.idx, f.der[:k]), f.der[k], f.der[k + 1], fresh)
        corr = _apply_ders(corr, f.der[k + 2:])
        pairs = [(term[:i] + (swapped,) + term[i + 1:], _c(1))]
        pairs += [(term[:i] + fs + term[i + 1:], c) for fs, c in corr]
        return self._nf_pairs(pairs)

    # commutators ---------------------------------------------------------------
    def commutator(self, X, x, y, fresh):
        """(∇_y∇_x − ∇_x∇_y) X as a list of (factors, coeff); x is applied first."""
        kx, ky = x[0], y[0]
        if kx == ky == Z0:
            return []
        if self.strict_rank and sum(1 for s in X.slots() if s[0] != Z0) > 1:
            raise UnsupportedRank(f"commutator on a rank-{len(X.slots())} tensor {X.name}")
        if kx == H and ky == H:
            return self._comm_hh(X, x, y, fresh)
        if kx == H and ky == A_:
            return self._comm_ha(X, x, y, fresh)
        if kx == Z0 and ky == H:
            return self._comm_0h(X, y, fresh)
        if kx == A_ and ky == H:
            return [(fs, -c) for fs, c in self._comm_ha(X, y, x, fresh)]
        if kx == H and ky == Z0:
            return [(fs, -c) for fs, c in self._comm_0h(X, x, fresh)]
        # remaining cases by conjugation
        reg = self.registry
        Xc = conjugate_factor(X, reg)
        flip = {H: A_, A_: H, Z0: Z0}
        xc = (flip[kx], x[1])
        yc = (flip[ky], y[1])
        return [(tuple(conjugate_factor(g, reg) for g in fs), c.conjugate())
                for fs, c in self.commutator(Xc, xc, yc, fresh)]

    def _comm_hh(self, X, x, y, fresh):
        b, c = x[1], y[1]
        out = []
        for p, (kind, lab) in enumerate(X.slots()):
            if kind == H:
                out.append(((_fac("A", ((H, lab), (H, c))), _with_slot(X, p, (H, b))), I))
                out.append(((_fac("A", ((H, lab), (H, b))), _with_slot(X, p, (H, c))), -I))
            elif kind == A_:
                d = fresh()
                out.append(((_fac("h", ((H, b), (A_, lab))), _fac("A", ((H, d), (H, c))),
                             _with_slot(X, p, (A_, d))), -I))
                d = fresh()
                out.append(((_fac("h", ((H, c), (A_, lab))), _fac("A", ((H, d), (H, b))),
                             _with_slot(X, p, (A_, d))), I))
        return out

    def _comm_ha(self, X, x, y, fresh):
        b, c = x[1], y[1]
        out = [((_fac("h", ((H, b), (A_, c))), Factor(X.name, X.idx, X.der + ((Z0, None),))), I)]
        for p, (kind, lab) in enumerate(X.slots()):
            if kind == H:
                d = fresh()
                out.append(((_fac("Rm", ((H, lab), (A_, d), (H, b), (A_, c))),
                             _with_slot(X, p, (H, d))), _c(1)))
            elif kind == A_:
                d = fresh()
                out.append(((_fac("Rm", ((H, d), (A_, lab), (H, b), (A_, c))),
                             _with_slot(X, p, (A_, d))), _c(-1)))
        return out

    def _comm_0h(self, X, y, fresh):
        b = y[1]
        c = fresh()
        out = [((_fac("A", ((H, b), (H, c))), Factor(X.name, X.idx, X.der + ((A_, c),))), _c(1))]
        for p, (kind, lab) in enumerate(X.slots()):
            if kind == H:
                c = fresh()
                out.append(((_fac("A", ((H, lab), (H, b)), ((A_, c),)), _with_slot(X, p, (H, c))),
                            _c(-1)))
            elif kind == A_:
                d = fresh()
                out.append(((_fac("A", ((H, d), (H, b)), ((A_, lab),)), _with_slot(X, p, (A_, d))),
                            _c(1)))
        return out

    # expansions ------------------------------------------------------------------
    def _expand(self, f, fresh):
        name = f.name
        if self.torsion_free and name in ("A", "Ab"):
            return []
        if name == "R":
            return _apply_ders([((_fac("P"),), _c(2 * (n + 1)))], f.der)
        if name in ("Ric", "P2"):
            (_, x), (_, y) = f.idx
            if x == y:
                base = [((_fac("R" if name == "Ric" else "P"),), _c(1))]
            elif name == "Ric":
                base = [((_fac("P2", f.idx),), _c(n + 2)),
                        ((_fac("P"), _fac("h", f.idx)), _c(1))]
            elif self.pe:
                base = [((_fac("P"), _fac("h", f.idx)), _c(1 / n))]
            else:
                return None
            return _apply_ders(base, f.der)
        if name == "Rm":
            i0, i1, i2, i3 = (s[1] for s in f.idx)
            if i0 == i1:
                pair = (f.idx[2], f.idx[3])
            elif i0 == i3:
                pair = (f.idx[2], f.idx[1])
            elif i2 == i1:
                pair = (f.idx[0], f.idx[3])
            elif i2 == i3:
                pair = (f.idx[0], f.idx[1])
            else:
                return None
            return _apply_ders([((_fac("Ric", pair),), _c(1))], f.der)
        if name in ("T", "W", "Tb", "Wb"):
            x = f.idx[0][1]
            y = fresh()
            if name in ("T", "W"):
                grad = ((_fac("P", (), ((H, x),)),), _c(1 if name == "T" else 2 * (n + 1)))
                div = ((_fac("A", ((H, x), (H, y)), ((A_, y),)),), -I)
            else:
                grad = ((_fac("P", (), ((A_, x),)),), _c(1 if name == "Tb" else 2 * (n + 1)))
                div = ((_fac("Ab", ((A_, x), (A_, y)), ((H, y),)),), I)
            base = [grad, div]
            if name in ("T", "Tb"):
                base = [(fs, c * _c(1 / (n + 2))) for fs, c in base]
            return _apply_ders(base, f.der)
        if name == "S":
            y, z = fresh(), fresh()
            k = _c(-1 / n)
            base = [
                ((_fac("T", ((H, y),), ((A_, y),)),), k),
                ((_fac("Tb", ((A_, y),), ((H, y),)),), k),
                ((_fac("P2", ((H, y), (A_, z))), _fac("P2", ((H, z), (A_, y)))), k),
                ((_fac("A", ((H, y), (H, z))), _fac("Ab", ((A_, y), (A_, z)))), -k),
            ]
            return _apply_ders(base, f.der)
        return None

    # targets ---------------------------------------------------------------------
    def _target(self, f):
        """(slot position, destination, replacement) for the first applicable rule."""
        name = f.name
        der = f.der
        if not der:
            return None
        if name == "P2" and self.bianchi:
            (_, x), (_, y) = f.idx
            for j, (k, l) in enumerate(der):
                if (k == A_ and l == x) or (k == H and l == y):
                    return (j, 0, self._schouten_div)
        if name == "P" and self.bianchi and not self.pe:
            for j, (k, _) in enumerate(der):
                if k == Z0:
                    return (j, 0, self._nabla0_P)
        if self.pe and name in ("A", "Ab"):
            labs = {s[1] for s in f.idx}
            want = A_ if name == "A" else H
            for j, (k, l) in enumerate(der):
                if k == want and l in labs:
                    return (j, 0, self._pe_div)
        for u in self.pluri:
            mu, mub = mu_names(u)
            if name == u:
                for j, (k, _) in enumerate(der):
                    if k == Z0:
                        return (j, 0, self._pluri_zero(u))
                kinds = [k for k, _ in der]
                if H in kinds and A_ in kinds:
                    if der[0][0] == H:
                        return (kinds.index(A_), 1, self._pluri_hess(u))
                    return (kinds.index(H), 0, self._pluri_hess(u))
            if name == mub:
                for j, (k, _) in enumerate(der):
                    if k == H:
                        return (j, 0, self._pluri_mub(u))
            if name == mu:
                for j, (k, _) in enumerate(der):
                    if k == A_:
                        return (j, 0, self._pluri_mu(u))
        return None

    def _schouten_div(self, f, fresh):
        (_, x), (_, y) = f.idx
        k, l = f.der[0]
        if k == A_:      # ∇^α P_{αβ̄} = ∇_β̄ P + (n-1) T_β̄
            base = [((_fac("P", (), ((A_, y),)),), _c(1)), ((_fac("Tb", ((A_, y),)),), _c(n - 1))]
        else:
            base = [((_fac("P", (), ((H, x),)),), _c(1)), ((_fac("T", ((H, x),)),), _c(n - 1))]
        return _apply_ders(base, f.der[1:])

    def _nabla0_P(self, f, fresh):
        x, y = fresh(), fresh()
        k = _c(1 / (2 * (n + 1)))
        base = [((_fac("A", ((H, x), (H, y)), ((A_, y), (A_, x))),), k),
                ((_fac("Ab", ((A_, x), (A_, y)), ((H, y), (H, x))),), k)]
        return _apply_ders(base, f.der[1:])

    def _pe_div(self, f, fresh):
        l = f.der[0][1]
        (k0, a), (_, b) = f.idx
        other = b if a == l else a
        if f.name == "A":
            base = [((_fac("P", (), ((H, other),)),), _c(-2 * (n + 1) / n) * I)]
        else:
            base = [((_fac("P", (), ((A_, other),)),), _c(2 * (n + 1) / n) * I)]
        return _apply_ders(base, f.der[1:])

    def _pluri_zero(self, u):
        mu, mub = mu_names(u)

        def rep(f, fresh):
            base = [((_fac(mu),), -I), ((_fac(mub),), I)]
            return _apply_ders(base, f.der[1:])
        return rep

    def _pluri_hess(self, u):
        mu, _ = mu_names(u)

        def rep(f, fresh):
            (_, x), (_, y) = f.der[0], f.der[1]
            base = [((_fac(mu), _fac("h", ((H, x), (A_, y)))), _c(1))]
            return _apply_ders(base, f.der[2:])
        return rep

    def _pluri_mub(self, u):
        def rep(f, fresh):
            x = f.der[0][1]
            z = fresh()
            base = [((_fac("A", ((H, x), (H, z))), _fac(u, (), ((A_, z),))), -I)]
            return _apply_ders(base, f.der[1:])
        return rep

    def _pluri_mu(self, u):
        def rep(f, fresh):
            x = f.der[0][1]
            z = fresh()
            base = [((_fac("Ab", ((A_, x), (A_, z))), _fac(u, (), ((H, z),))), I)]
            return _apply_ders(base, f.der[1:])
        return rep

    # same-kind blocks --------------------------------------------------------------
    def _blocks(self, term, fresh):
        reg = self.registry
        options = []
        for f in term:
            blocks = []
            start = 0
            for k in range(1, len(f.der) + 1):
                if k == len(f.der) or f.der[k][0] != f.der[start][0]:
                    blocks.append((start, k))
                    start = k
            perms = [list(itertools.permutations(range(s, e))) for s, e in blocks
                     if f.der[s][0] != Z0 and e - s > 1]
            if not perms:
                options.append([None])
                continue
            opts = []
            for combo in itertools.product(*perms):
                order = list(range(len(f.der)))
                bi = 0
                for s, e in blocks:
                    if f.der[s][0] != Z0 and e - s > 1:
                        order[s:e] = combo[bi]
                        bi += 1
                opts.append(tuple(order))
            options.append(opts)
        best = None
        for choice in itertools.product(*options):
            fs = tuple(f if ch is None else Factor(f.name, f.idx, tuple(f.der[p] for p in ch))
                       for f, ch in zip(term, choice))
            key = canonical_term(fs, reg)
            sk = _sort_key(key)
            if best is None or sk < best[0]:
                best = (sk, key, choice)
        _, key, choice = best
        out = {key: _c(1)}
        corr_pairs = []
        cur = term
        for i, ch in enumerate(choice):
            if ch is None:
                continue
            target = list(ch)
            pos = list(range(len(cur[i].der)))
            # bubble the current order into the target order, one adjacent swap at a time
            for t in range(len(target)):
                j = pos.index(target[t])
                while j > t:
                    f = cur[i]
                    k = j - 1
                    corr = self.commutator(Factor(f.name, f.idx, f.der[:k]), f.der[k], f.der[k + 1], fresh)
                    corr = _apply_ders(corr, f.der[k + 2:])
                    corr_pairs += [(cur[:i] + fs + cur[i + 1:], c) for fs, c in corr]
                    nf_ = Factor(f.name, f.idx, f.der[:k] + (f.der[k + 1], f.der[k]) + f.der[k + 2:])
                    cur = cur[:i] + (nf_,) + cur[i + 1:]
                    pos[k], pos[k + 1] = pos[k + 1], pos[k]
                    j = k
        if corr_pairs:
            for k2, c2 in self._nf_pairs(corr_pairs).items():
                prev = out.get(k2)
                s = c2 if prev is None else prev + c2
                if s:
                    out[k2] = s
                else:
                    out.pop(k2, None)
        return out


def _constraints(c):
    if c is None:
        return ("general",)
    return (c,) if isinstance(c, str) else tuple(c)


def normal_order(e, strict_rank=False):
    """Derivatives sorted holomorphic innermost, then antiholomorphic, then Reeb.

    Only commutators are used; Bianchi rewrites are left to apply_bianchi.
    """
    return PHCalculus(strict_rank=strict_rank, bianchi=False).nf(e)


def apply_bianchi(e):
    """Normal order together with the divergence-of-Schouten and ∇_0 P rewrites."""
    return PHCalculus().nf(e)


def assume(e, constraint=None):
    """Close ``e`` under the rules plus the given constraint(s)."""
    return PHCalculus(_constraints(constraint)).nf(e)


def _sort_key(factors):
    out = []
    for f in factors:
        out.append((f.name, tuple(_sk(s) for s in f.idx), tuple(_sk(s) for s in f.der)))
    return tuple(out)


def _sk(slot):
    k, l = slot
    if k == Z0:
        return (k, 0, "")
    if isinstance(l, str):
        return (k, 1, l)
    return (k, 2, l)
