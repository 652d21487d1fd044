"""Change of contact form θ̂ = e^σ θ at the density level.

``transform`` works on abstract-index expressions at symbolic n.  Base
quantities are replaced by their hatted values

    Â_{αβ}  = A_{αβ} + i∇_β∇_ασ − i∇_ασ∇_βσ
    P̂_{αβ̄}  = P_{αβ̄} − ½(∇_β̄∇_ασ + ∇_α∇_β̄σ) − ½|∇σ|² h_{αβ̄}
    P̂       = P + ½Δ_bσ − (n/2)|∇σ|²

and every derivative is replaced by the hatted derivative, one slot at a
time: for a tensor of weight (w, w) with lowered indices,

    ∇̂_α τ = ∇_α τ + w τ σ_α − Σ_β (τ σ_α + τ[β→α] σ_β) + Σ_γ̄ τ[γ̄→ρ̄] σ_ρ h_{αγ̄}

(β running over holomorphic slots, γ̄ over antiholomorphic ones), its
conjugate for ∇̂_β̄, and ∇̂_0 only on scalars.  For a (1,0)-form these are
exactly the one-form rules; on higher rank tensors the rule is applied to
each slot.  Densities absorb all exponential factors.

The dimension-three covariance checks are run on the frame engine after
specialising to n = 1.
"""

from __future__ import annotations


from .calculus.frame import FrameCalculus, to_text as frame_text
from .calculus.hat import transform as frame_transform
from .calculus.limit import to_frame
from .calculus.operators import parse_ph
from .calculus.ph import REGISTRY, PHCalculus, UnsupportedRank
from .coeffs import Coeff, I, RationalInN
from .report import UnknownIdentity, VerificationReport
from .tensor.expr import A_, H, Z0, Factor, TensorError, TensorExpr, max_dummy

_n = RationalInN.n()
_HALF = Coeff(RationalInN(1) / 2)

# symbols that are unchanged as densities
_INVARIANT = {"h", "f", "g", "u", "v", "sigma", "tau", "taub"}


class ConformalFactor:
    """The function σ with θ̂ = e^σ θ; a weight (0, 0) scalar of the registry."""

    def __init__(self, symbol="sigma"):
        if symbol not in REGISTRY or REGISTRY[symbol].kinds:
            raise TensorError(f"{symbol!r} is not a scalar of the registry")
        self.symbol = symbol

    def __call__(self, e):
        return transform(e, self.symbol)

    def __repr__(self):
        return f"ConformalFactor({self.symbol!r})"


class _Counter:
    def __init__(self, start):
        self.k = start

    def __call__(self):
        self.k += 1
        return self.k - 1


def transform(e, sigma="sigma"):
    """Hatted value of ``e`` in unhatted symbols and σ (symbolic n)."""
    reg = e.registry or REGISTRY
    calc = PHCalculus(registry=reg)
    start = 1 + max((max_dummy(fs) for fs in e.terms), default=-1)
    fresh = _Counter(max(start, 1000))
    out = {}
    for fs, c in e.terms.items():
        acc = [((), c)]
        for f in fs:
            hf = _hat_factor(f, sigma, reg, calc, fresh)
            acc = [(a + b, ca * cb) for a, ca in acc for b, cb in hf]
        for k, v in acc:
            prev = out.get(k)
            s = v if prev is None else prev + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return TensorExpr(out, reg)


def _hat_factor(f, sigma, reg, calc, fresh):
    """List of (factors, coeff) for the hatted factor, original labels kept."""
    if f.name in ("R", "Ric", "T", "Tb", "W", "Wb", "S", "Rm") or \
            (f.name == "P2" and f.idx[0][1] == f.idx[1][1]):
        rep = calc._expand(f, fresh)
        if rep is None:
            raise UnsupportedRank(f"no transformation rule for {f.name}")
        out = []
        for fs, c in rep:
            acc = [((), c)]
            for g in fs:
                hg = _hat_factor(g, sigma, reg, calc, fresh)
                acc = [(a + b, ca * cb) for a, ca in acc for b, cb in hg]
            out += acc
        return out
    # open every index slot under a private string label
    slots = list(f.idx) + list(f.der)
    names = []
    back = {}
    for p, (k, lab) in enumerate(slots):
        if k == Z0:
            names.append((k, None))
            continue
        ph = f"_o{p}"
        back[ph] = lab
        names.append((k, ph))
    nidx = len(f.idx)
    d = reg[f.name]
    if d.weight[0] != d.weight[1]:
        raise UnsupportedRank(f"{f.name} has unequal weights {d.weight}")
    w = d.weight[0]
    cur = _hat_base(f.name, names[:nidx], sigma, fresh)
    open_slots = list(names[:nidx])
    for slot in names[nidx:]:
        cur = _hat_derivative(cur, slot, open_slots, w, sigma, fresh)
        if slot[0] == Z0:
            w = w - 1
        else:
            open_slots.append(slot)
    out = []
    for fs, c in cur.items():
        fs = tuple(Factor(g.name,
                          tuple((k, back.get(l, l)) for k, l in g.idx),
                          tuple((k, back.get(l, l)) for k, l in g.der)) for g in fs)
        out.append((fs, c))
    return out


def _f(name, idx=(), der=()):
    return Factor(name, tuple(idx), tuple(der))


def _add(acc, fs, c):
    c = Coeff.coerce(c)
    prev = acc.get(fs)
    s = c if prev is None else prev + c
    if s:
        acc[fs] = s
    else:
        acc.pop(fs, None)


def _grad_sq(sigma, fresh):
    g = fresh()
    return (_f(sigma, (), ((H, g),)), _f(sigma, (), ((A_, g),)))


def _hat_base(name, idx, sigma, fresh):
    out = {}
    _add(out, (_f(name, idx),), 1)
    if name in _INVARIANT or name.startswith("mu"):
        if name.startswith("mu"):
            raise UnsupportedRank(f"{name} is a constraint auxiliary without a transformation rule")
        return out
    if name in ("A", "Ab"):
        (ka, a), (kb, b) = idx
        s = 1 if name == "A" else -1
        _add(out, (_f(sigma, (), ((ka, a), (kb, b))),), I * s)
        _add(out, (_f(sigma, (), ((ka, a),)), _f(sigma, (), ((kb, b),))), -I * s)
        return out
    if name == "P2":
        (_, a), (_, b) = idx
        _add(out, (_f(sigma, (), ((H, a), (A_, b))),), -_HALF)
        _add(out, (_f(sigma, (), ((A_, b), (H, a))),), -_HALF)
        _add(out, _grad_sq(sigma, fresh) + (_f("h", ((H, a), (A_, b))),), -_HALF)
        return out
    if name == "P":
        g = fresh()
        _add(out, (_f(sigma, (), ((H, g), (A_, g))),), -_HALF)
        g = fresh()
        _add(out, (_f(sigma, (), ((A_, g), (H, g))),), -_HALF)
        _add(out, _grad_sq(sigma, fresh), Coeff(-_n / 2))
        return out
    raise UnsupportedRank(f"no transformation rule for {name}")


def _relabel_one(fs, old, new_slot):
    """Replace the slot carrying label ``old`` by ``new_slot``."""
    out = []
    for g in fs:
        idx = tuple(new_slot if l == old and k != Z0 else (k, l) for k, l in g.idx)
        der = tuple(new_slot if l == old and k != Z0 else (k, l) for k, l in g.der)
        out.append(Factor(g.name, idx, der))
    return tuple(out)


def _diff(fs, slot):
    for i, g in enumerate(fs):
        if g.name == "h":
            continue
        yield fs[:i] + (Factor(g.name, g.idx, g.der + (slot,)),) + fs[i + 1:]


def _hat_derivative(cur, slot, open_slots, w, sigma, fresh):
    kind, lab = slot
    out = {}
    for fs, c in cur.items():
        for g in _diff(fs, slot):
            _add(out, g, c)
    if kind == Z0:
        if open_slots:
            raise UnsupportedRank("∇_0 of a tensor has no transformation rule")
        for fs, c in cur.items():
            r = fresh()
            for g in _diff(fs, (A_, r)):
                _add(out, g + (_f(sigma, (), ((H, r),)),), c * I)
            r = fresh()
            for g in _diff(fs, (H, r)):
                _add(out, g + (_f(sigma, (), ((A_, r),)),), -c * I)
            if w:
                _add(out, fs + (_f(sigma, (), ((Z0, None),)),), c * Coeff(w))
        return out
    for fs, c in cur.items():
        grad = _f(sigma, (), (slot,))
        if w:
            _add(out, fs + (grad,), c * Coeff(w))
        for sk, sl in open_slots:
            if sk == kind:
                _add(out, fs + (grad,), -c)
                _add(out, _relabel_one(fs, sl, (kind, lab)) + (_f(sigma, (), ((sk, sl),)),), -c)
            else:
                r = fresh()
                h = _f("h", ((kind, lab), (sk, sl)) if kind == H else ((sk, sl), (kind, lab)))
                _add(out, _relabel_one(fs, sl, (sk, r)) + (_f(sigma, (), ((kind, r),)), h), c)
    return out


# ---------------------------------------------------------------------------
# covariance catalog (dimension three)

def _frame_nf(expr, constraints):
    return FrameCalculus(tuple(constraints)).nf(expr)


def hatted_frame(text, route="lemma", sigma="sigma"):
    """n = 1 frame value of the hatted expression ``text``."""
    e = parse_ph(text)
    if route == "lemma":
        return to_frame(transform(e, sigma))
    if route == "frame":
        return frame_transform(to_frame(e), sigma)
    raise ValueError(f"unknown route {route!r}")


def check_transformation(lhs, rhs, constraints=("general",), route="lemma", sigma="sigma"):
    """Frame residual of hat(lhs) − rhs at n = 1 (zero iff the law holds)."""
    lhs_f = hatted_frame(lhs, route, sigma)
    rhs_f = to_frame(parse_ph(rhs))
    return _frame_nf(lhs_f - rhs_f, constraints)


def covariance_catalog():
    from .catalog import load
    return load("covariance")


def verify_covariance(id, route="lemma", constraints=None):
    """Verify one entry of the covariance catalog at n = 1."""
    from .catalog import verify_entry
    cat = covariance_catalog()
    if id not in cat:
        raise UnknownIdentity(id)
    return verify_entry(cat[id], route=route, constraints=constraints)


def bochner_check(constraints=("general",), sigma="sigma"):
    """The three-dimensional Bochner formula for |∇σ|², closed at n = 1.

    ⟨∇_bσ, ∇_bΔ_bσ⟩ is written 2 Re(∇^ασ ∇_αΔ_bσ).
    """
    from .catalog import verify_identity
    return verify_identity("bochner", constraints=constraints, sigma=sigma, suite="covariance")


def substitute(e, name, value):
    """Replace the scalar ``name`` (with its derivatives) by the expression ``value``."""
    from .tensor.expr import derivative
    reg = e.registry or REGISTRY
    vlabels = sorted({l for fs in value.terms for g in fs for k, l in g.slots() if isinstance(l, int)})
    span = (vlabels[-1] + 1) if vlabels else 0
    out = {}
    for fs, c in e.terms.items():
        off = max_dummy(fs) + 1
        acc = [((), c)]
        for f in fs:
            if f.name == name and not f.idx:
                v = value.relabel({l: l + off for l in vlabels})
                off += span
                for s in f.der:
                    v = derivative(v, s)
                pieces = list(v.terms.items())
            else:
                pieces = [((f,), Coeff(1))]
            acc = [(a + b, ca * cb) for a, ca in acc for b, cb in pieces]
        for k, v in acc:
            _add(out, k, v)
    return TensorExpr(out, reg)
