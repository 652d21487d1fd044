"""Operators of the dimension-three calculus written directly in a unitary frame.

These are transcriptions of the displayed three-dimensional formulas; they
serve the models and the covariance checks, and are compared against the
general-n definitions specialised to n = 1.
"""

from __future__ import annotations

from fractions import Fraction

from ..coeffs import I
from .frame import FExpr, sub_laplacian

R = FExpr.jet("R")
A = FExpr.jet("A")
Ab = FExpr.jet("Ab")


def lap(e):
    return sub_laplacian(e)


def P1(f):
    """P_1 f = ∇_1∇_1̄∇_1 ... = ∇_α∇_β∇^β f + i A_{αβ}∇^β f."""
    return f.d("b1").d("1") + A * f.d("b") * I


def C(f):
    """C f = 4 ∇^α P_α f."""
    return P1(f).d("b") * 4


def P4(f):
    """Δ_b² f + ∇_0² f - 4 Im ∇^α(A_{αβ}∇^β f) at n = 1 (all curvature terms carry n - 1)."""
    return lap(lap(f)) + f.d("00") - (A * f.d("b")).d("b").imag() * 4


def W1():
    return R.d("1") - A.d("b") * I


def Q_hirachi():
    return W1().d("b") * Fraction(-4, 3)


def P4prime(f):
    """Critical P'_4 with zeroth-order coefficient (2/3)(Δ_b R - 2 Im ∇^α∇^β A_{αβ})."""
    out = lap(lap(f)) * 4
    out = out - (A * f.d("b")).d("b").imag() * 8
    out = out - (R * f.d("1")).d("b").real() * 4
    out = out + ((R.d("1") - A.d("b") * I) * f.d("b")).real() * Fraction(8, 3)
    out = out + (lap(R) - A.d("bb").imag() * 2) * f * Fraction(2, 3)
    return out


def P4prime_literal(f):
    """Same with the zeroth-order Im-coefficient 1/2 exactly as printed."""
    out = P4prime(f) - (lap(R) - A.d("bb").imag() * 2) * f * Fraction(2, 3)
    return out + (lap(R) - A.d("bb").imag() * Fraction(1, 2)) * f * Fraction(2, 3)


def Q4prime():
    return lap(R) * 2 - A * Ab * 4 + R * R


def D(f):
    """Df = 4Δ_b²f - 8 Im ∇^α(A_{αβ}∇^β f) - 4 Re ∇^α(R∇_α f)."""
    return lap(lap(f)) * 4 - (A * f.d("b")).d("b").imag() * 8 - (R * f.d("1")).d("b").real() * 4


def D_shift(f, s):
    """8 Re ∇^α(2∇_β∇^βσ∇_αf + ∇^β∇_βσ∇_αf + ∇_α∇_βf∇^βσ - ∇^β∇_βf∇_ασ)."""
    inner = s.d("b1") * f.d("1") * 2 + s.d("1b") * f.d("1") + f.d("11") * s.d("b") - f.d("1b") * s.d("1")
    return inner.d("b").real() * 8


def genl_transform_rhs(f, s):
    """P'_4(f) + P_4(fσ) - σP_4(f) - 8 Re(P_α f ∇^α σ)."""
    return P4prime(f) + P4(f * s) - s * P4(f) - (P1(f) * s.d("b")).real() * 8


def U(s):
    """U(σ) = ½P_4(σ²) - σP_4(σ) - 16 Re(∇^ασ P_ασ)."""
    return P4(s * s) * Fraction(1, 2) - s * P4(s) - (P1(s) * s.d("b")).real() * 16


def V(s):
    """V(σ) = P'_4(σ) + (16/3) Re ∇^α(σW_α) + 3Qσ."""
    return P4prime(s) + (s * W1()).d("b").real() * Fraction(16, 3) + Q_hirachi() * s * 3


def general_q4prime_rhs(s):
    return Q4prime() + V(s) + U(s)


def signed_version(u):
    """4 Re ∇^α(2∇_α∇^β∇_β u - R∇_α u)."""
    return (u.d("1b").d("1") * 2 - R * u.d("1")).d("b").real() * 4
