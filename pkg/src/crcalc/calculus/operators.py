"""Named operators at symbolic n, written in the expression grammar.

``F()`` is the operand.  Indexed operators (``P_alpha``, ``B``, ``Pzero``)
take their free index slots in brackets, e.g. ``P_alpha[a](f)``.  The
critical (n = 1) forms use R directly; they are valid only after
specialisation to n = 1.
"""

from __future__ import annotations

from ..coeffs import RationalInN
from ..tensor.expr import A_, H, TensorError, TensorExpr, WeightMismatch
from ..tensor.parser import _finalize, parse
from .ph import REGISTRY

_n = RationalInN.n()

TEMPLATES = {
    "Delta_b": "-(D[^a,a](F()) + D[a,^a](F()))",
    "nabla0": "D[0](F())",
    "C": ("Delta_b(Delta_b(F())) + n^2*D[0,0](F()) - 2*i*n*D[b](Ab[^a,^b]*D[a](F()))"
          " + 2*i*n*D[^b](A[a,b]*D[^a](F()))"),
    "C_divergence": "4*D[^a](P_alpha[a](F()))",
    "Q4": ("2*(n+1)^2/(n*(n+2))*Delta_b(P) - 4/(n*(n+2))*Im(D[^a,^b](A[a,b]))"
           " - 2*(n-1)/n*A[a,b]*Ab[^a,^b] - 2*(n+1)/n*Pzero[a,b']()*Pzero[^b',^a]()"
           " + 2*(n-1)*(n+1)^2/n^2*P^2"),
    "P4": ("Delta_b(Delta_b(F())) + D[0,0](F()) - 4*Im(D[^a](A[a,b]*D[^b](F())))"
           " + 4*Re(D[b'](Pzero[^b',^a]()*D[a](F())))"
           " - 4*(n^2-1)/n*Re(D[^b](P*D[b](F()))) + (n-1)/2*Q4()*F()"),
    "P4prime": ("2*(n+1)/n^2*Delta_b(Delta_b(F())) - 8/n*Im(D[^a](A[a,b]*D[^b](F())))"
                " - 8*(n+1)/n*Re(D[^a](P*D[a](F())))"
                " + 16*(n+1)/(n*(n+2))*Re((D[a](P) - i*n/(2*(n+1))*D[^b](A[a,b]))*D[^a](F()))"
                " + Q4()*F()"),
    "P4prime_crit": ("4*Delta_b(Delta_b(F())) - 8*Im(D[^a](A[a,b]*D[^b](F())))"
                     " - 4*Re(D[^a](R*D[a](F())))"
                     " + 8/3*Re((D[a](R) - i*D[^b](A[a,b]))*D[^a](F()))"
                     " + 2/3*(Delta_b(R) - 2*Im(D[^a,^b](A[a,b])))*F()"),
    "P4prime_crit_literal": ("4*Delta_b(Delta_b(F())) - 8*Im(D[^a](A[a,b]*D[^b](F())))"
                             " - 4*Re(D[^a](R*D[a](F())))"
                             " + 8/3*Re((D[a](R) - i*D[^b](A[a,b]))*D[^a](F()))"
                             " + 2/3*(Delta_b(R) - 1/2*Im(D[^a,^b](A[a,b])))*F()"),
    "P4prime_pe": ("4*Delta_b(Delta_b(F())) - 8*Im(D[^a](A[a,b]*D[^b](F())))"
                   " - 4*Re(D[^a](R*D[a](F())))"),
    "Q4prime": "2/n^2*Delta_b(R) - 4/n*A[a,b]*Ab[^a,^b] + 1/n^2*R^2",
    "Q4prime_crit": "2*Delta_b(R) - 4*A[a,b]*Ab[^a,^b] + R^2",
    "Q_hirachi": "-4/3*D[^a](W[a]())",
    "D": ("4*Delta_b(Delta_b(F())) - 8*Im(D[^a](A[a,b]*D[^b](F())))"
          " - 4*Re(D[^a](R*D[a](F())))"),
    "U": "1/2*P4(F()^2) - F()*P4(F()) - 16*Re(D[^a](F())*P_alpha[a](F()))",
    "V": ("4*Delta_b(Delta_b(F())) - 8*Im(D[^a](A[a,b]*D[^b](F())))"
          " - 4*Re(D[^a](R*D[a](F()))) + 8*Re(W[a]()*D[^a](F()))"),
    "W": "D[X](R) - i*D[^b](A[X,b])",
    "T": "1/(n+2)*(D[X](P) - i*D[^b](A[X,b]))",
    "S": ("-1/n*(D[^a](T[a]) + D[a](Tb[^a]) + P2[a,b']*P2[^b',^a]"
          " - A[a,b]*Ab[^a,^b])"),
    "P_alpha": "D[X,b,^b](F()) + i*n*A[X,b]*D[^b](F())",
    "B": "D[Y',X](F()) - 1/n*D[^c,c](F())*h[X,Y']",
    "Pzero": "P2[X,Y'] - 1/n*P*h[X,Y']",
}

# free index signature of indexed operators (lowered kinds)
SIGNATURES = {"P_alpha": (H,), "W": (H,), "T": (H,), "B": (H, A_), "Pzero": (H, A_)}
# operators without an operand
NULLARY = {"Q4", "Q4prime", "Q4prime_crit", "Q_hirachi", "W", "T", "S", "Pzero"}
# operand weight demanded in strict mode
STRICT_WEIGHTS = {"P4": -(_n - 1) / 2}

NAMES = tuple(TEMPLATES)


class UnknownOperator(TensorError):
    pass


def expand_definition(name, argument=None, slots=None, strict=False, registry=None):
    """Fully expanded operator ``name`` applied to ``argument``."""
    if name not in TEMPLATES:
        raise UnknownOperator(f"unknown operator {name!r}")
    reg = registry or (argument.registry if argument is not None and argument.registry else REGISTRY)
    if argument is not None:
        argument = _finalize(argument)
        if strict and name in STRICT_WEIGHTS and argument.terms:
            w = argument.weight()
            want = STRICT_WEIGHTS[name]
            if w is not None and (w[0] != want or w[1] != want):
                raise WeightMismatch(f"{name} acts on weight ({want}, {want}), got {w}")
    elif name not in NULLARY:
        raise TensorError(f"{name} needs an operand")
    funcs = functions(reg)
    if argument is not None:
        funcs["F"] = lambda: argument
    e = parse(TEMPLATES[name], reg, funcs)
    sig = SIGNATURES.get(name)
    if sig:
        slots = slots or [(k, lab) for k, lab in zip(sig, ("a", "b"))]
        if len(slots) != len(sig):
            raise TensorError(f"{name} takes {len(sig)} indices")
        mapping = {}
        for ph, want, (kind, lab) in zip(("X", "Y"), sig, slots):
            if kind != want:
                raise TensorError(f"index kind mismatch for {name}")
            mapping[ph] = lab
        e = e.relabel(mapping)
    return e


def functions(registry=None):
    """Parser function table exposing every operator."""
    reg = registry or REGISTRY
    table = {}
    for name in TEMPLATES:
        def call(*args, slots=None, _name=name):
            if len(args) > 1:
                raise TensorError(f"{_name} takes one operand")
            return expand_definition(_name, args[0] if args else None, slots, registry=reg)
        table[name] = call
    return table


def parse_ph(text, registry=None):
    """Parse with the pseudohermitian registry and all operators available."""
    reg = registry or REGISTRY
    return parse(text, reg, functions(reg))
