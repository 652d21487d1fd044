"""Pseudohermitian structures on the models, solved from structure equations.

A structure stores its frame (T, Z, Zb) as combinations of the model's base
fields, the coframe matrix (rows θ, θ^1, θ^1̄ against base components), the
connection form components ω(T), ω(Z), ω(Zb), the torsion A_{1̄1̄} and the
Webster curvature R.  Everything is computed from brackets of the frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..coeffs import Gauss, I
from .ring import MF, ModelError, Poly, RingContext, base_brackets, base_frame


class SolverDegenerate(ModelError):
    pass


class NotReal(ModelError):
    pass


LETTER_INDEX = {"0": 0, "1": 1, "b": 2}


@dataclass
class PseudohermitianStructure:
    ctx: RingContext
    frame: list          # frame[i][k]: base component k of frame vector i
    coframe: list        # coframe[r][k]: row r applied to base component k
    sigma_total: Poly | None = None
    label: str = ""
    omega: list = field(default_factory=list)
    A11: MF | None = None
    A1b1b: MF | None = None
    R: MF | None = None
    c: list = field(default_factory=list)   # c[i][j][k] frame structure functions
    residuals: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def model(self):
        return self.ctx.model

    # vector fields ---------------------------------------------------------
    def base_apply(self, comps, f):
        out = MF(f.ctx)
        for k, ck in enumerate(comps):
            if ck:
                d = self._base[k].on(f)
                if d:
                    out = out + ck * d
        return out

    def apply(self, i, f):
        """Frame vector i (0 = T, 1 = Z, 2 = Zb) applied to f."""
        return self.base_apply(self.frame[i], self.ctx.embed(f) if f.ctx is not self.ctx else f)

    def cov(self, letter, value, charge):
        i = LETTER_INDEX[letter]
        out = self.apply(i, value)
        if charge and self.omega[i]:
            out = out - self.omega[i] * value * charge
        return out

    def lift(self, x):
        if isinstance(x, MF):
            return self.ctx.embed(x) if x.ctx is not self.ctx else x
        if isinstance(x, Poly):
            return self.ctx.poly(x)
        return self.ctx.const(x)

    # evaluation of frame expressions -------------------------------------------
    def evaluate(self, expr, bindings=None):
        """Evaluate an n = 1 frame expression on this structure."""
        from ..calculus.frame import SYMBOLS
        env = {"A": self.A11, "Ab": self.A1b1b, "R": self.R}
        for k, v in (bindings or {}).items():
            env[k] = self.lift(v)
        memo = {}

        def jet(sym, word):
            key = (sym, word)
            if key in memo:
                return memo[key]
            if not word:
                if sym not in env:
                    raise ModelError(f"no value bound for {sym!r}")
                val = env[sym]
            else:
                inner = jet(sym, word[:-1])
                ch = SYMBOLS[sym].charge + word[:-1].count("1") - word[:-1].count("b") \
                    if sym in SYMBOLS else 0
                val = self.cov(word[-1], inner, ch)
            memo[key] = val
            return val

        out = MF(self.ctx)
        for mono, c in expr.terms.items():
            acc = self.ctx.const(c)
            for sym, word in mono:
                acc = acc * jet(sym, word)
                if acc.is_zero():
                    break
            out = out + acc
        return out

    def residuals_zero(self):
        return all(v.is_zero() for v in self.residuals.values())


def _bracket(struct, V, W):
    """Base components of [V, W] for V, W given by base components."""
    ctx = struct.ctx
    cb = base_brackets(struct.model)
    out = []
    for k in range(3):
        acc = MF(ctx)
        for i in range(3):
            if V[i]:
                acc = acc + V[i] * struct._base[i].on(W[k])
            if W[i]:
                acc = acc - W[i] * struct._base[i].on(V[k])
        for i in range(3):
            for j in range(3):
                if cb[i][j][k] and V[i] and W[j]:
                    acc = acc + V[i] * W[j] * cb[i][j][k]
        out.append(acc)
    return out


def _frame_comps(struct, X):
    return [sum((struct.coframe[r][k] * X[k] for k in range(3) if X[k] and struct.coframe[r][k]),
                MF(struct.ctx)) for r in range(3)]


def _solve(struct):
    ctx = struct.ctx
    c = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            if i == j:
                c[i][j] = [MF(ctx)] * 3
            elif j < i:
                c[i][j] = [-x for x in c[j][i]]
            else:
                c[i][j] = _frame_comps(struct, _bracket(struct, struct.frame[i], struct.frame[j]))
    struct.c = c
    w0 = c[0][1][1]
    w1b = -c[1][2][1]
    w1 = -w1b.conjugate()
    A1b1b = -c[0][2][1]
    A11 = A1b1b.conjugate()
    struct.omega = [w0, w1, w1b]
    struct.A11, struct.A1b1b = A11, A1b1b
    zero = MF(ctx)
    mi = ctx.const(Gauss(0, -1))
    predicted = {
        (0, 1, 0): zero, (0, 2, 0): zero, (1, 2, 0): mi,
        (0, 1, 2): -A11, (0, 2, 2): -w0, (1, 2, 2): -w1,
    }
    res = {}
    for (i, j, k), want in predicted.items():
        res[f"c[{i}{j}]^{k}"] = c[i][j][k] - want
    res["omega_reality"] = w0 + w0.conjugate()
    # R and the torsion components of dω from dω(e_i, e_j)
    om = struct.omega

    def domega(i, j):
        out = struct.apply(i, om[j]) - struct.apply(j, om[i])
        for k in range(3):
            if c[i][j][k] and om[k]:
                out = out - c[i][j][k] * om[k]
        return out

    struct.R = domega(1, 2)
    res["R_real"] = struct.R - struct.R.conjugate()
    divA = struct.cov("b", A11, 2)          # ∇^β A_{1β} = ∇_1̄ A_11
    divAb = struct.cov("1", A1b1b, -2)
    res["domega_1_0"] = domega(1, 0) - divA
    res["domega_2_0"] = domega(2, 0) + divAb
    # θ ∧ dθ non-degeneracy: dθ(Z, Zb) = i must hold (already in c[12]^0)
    struct.residuals = res
    bad = [k for k, v in res.items() if not v.is_zero()]
    if bad:
        raise SolverDegenerate(f"structure equations inconsistent: {bad}")
    return struct


def standard_structure(model):
    """Standard structure: the sphere with R = 1, or the Heisenberg group."""
    from .ring import MODELS
    m = MODELS[model] if isinstance(model, str) else model
    ctx = RingContext(m)
    one, zero = ctx.const(1), MF(ctx)
    ident = [[one if i == k else zero for k in range(3)] for i in range(3)]
    s = PseudohermitianStructure(ctx, ident, [row[:] for row in ident], None, m.name)
    s._base = base_frame(m)
    return _solve(s)


def conformal_structure(base, sigma, name=None):
    """Structure of e^σ θ with admissible coframe θ^1 + i σ^1 θ, unitary rescaled."""
    if isinstance(sigma, MF):
        sigma = sigma.as_poly()
    if sigma.conjugate() != sigma:
        raise NotReal("σ must be real")
    ctx = base.ctx.extend(sigma, name or f"s{len(base.ctx.exps)}")
    j = len(ctx.exps) - 1

    def mk(k):
        key = [0] * len(ctx.exps)
        key[j] = k
        return MF(ctx, {tuple(key): Poly.const(ctx.model, 1)})

    emb = ctx.embed
    bframe = [[emb(x) for x in row] for row in base.frame]
    bco = [[emb(x) for x in row] for row in base.coframe]
    sig = ctx.poly(sigma)
    tmp = PseudohermitianStructure(ctx, bframe, bco)
    tmp._base = base._base
    s1 = tmp.apply(1, sig)
    s1b = tmp.apply(2, sig)
    F = [[mk(-2), mk(-2) * s1b * (-I), mk(-2) * s1 * I],
         [MF(ctx), mk(-1), MF(ctx)],
         [MF(ctx), MF(ctx), mk(-1)]]
    N = [[mk(2), MF(ctx), MF(ctx)],
         [mk(1) * s1b * I, mk(1), MF(ctx)],
         [mk(1) * s1 * (-I), MF(ctx), mk(1)]]
    frame = [[sum((F[i][m] * bframe[m][k] for m in range(3) if F[i][m] and bframe[m][k]), MF(ctx))
              for k in range(3)] for i in range(3)]
    coframe = [[sum((N[r][m] * bco[m][k] for m in range(3) if N[r][m] and bco[m][k]), MF(ctx))
                for k in range(3)] for r in range(3)]
    total = sigma if base.sigma_total is None else base.sigma_total + sigma
    s = PseudohermitianStructure(ctx, frame, coframe, total, f"{base.label}^sigma")
    s._base = base._base
    return _solve(s)
