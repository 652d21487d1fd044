"""Hypothesis strategies for random well-formed scalar expressions."""

from hypothesis import strategies as st

from crcalc.calculus.operators import parse_ph

# index-free building blocks inside the fragment the rules cover, by weight
WEIGHT_ONE = (
    "D[a](sigma)*D[^a](sigma)",
    "D[^a,a](f)",
    "D[a,^a](f)",
    "P*f",
    "D[0](u)",
    "P",
)
WEIGHT_TWO = (
    "A[a,b]*Ab[^a,^b]",
    "D[^b,a](f)*D[^a,b](u)",
    "A[a,b]*D[^a,^b](f)",
    "D[b,^b,a,^a](f)",
    "D[^a,0,a](f)",
    "D[^a](P)*D[a](f)",
    "R*D[^a](u)*D[a](v)",
    "D[0,^a,a](sigma)",
    "W[a]()*D[^a](f)",
    "S*u",
)
PIECES = WEIGHT_ONE + WEIGHT_TWO

COEFFS = ("1", "-2", "3/2", "i", "-i/3", "n", "(n-1)", "1/(n+2)", "(n^2+1)/n", "2*i*n")


@st.composite
def terms(draw):
    """A term of weight (-2, -2): one weight-two piece or two weight-one pieces."""
    if draw(st.booleans()):
        parts = [draw(st.sampled_from(WEIGHT_TWO))]
    else:
        parts = [draw(st.sampled_from(WEIGHT_ONE)) for _ in range(2)]
    out = parse_ph(draw(st.sampled_from(COEFFS)))
    for p in parts:
        out = out * parse_ph(p)
    return out


@st.composite
def expressions(draw, max_terms=4):
    ts = draw(st.lists(terms(), min_size=1, max_size=max_terms))
    out = ts[0]
    for t in ts[1:]:
        out = out + t
    return out
