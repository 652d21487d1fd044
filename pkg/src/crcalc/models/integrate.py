"""Exact integration on the sphere against theta ^ d theta.

With |z1|^2 = r uniform on [0, 1] and independent uniform phases, the
normalised surface measure of S^3 gives

    E[z1^a z1b^b z2^c z2b^d] = delta_ab delta_cd B(a+1, c+1) = a! c! / (a+c+1)!

The surface area is 2 pi^2.  For theta = 2 theta_0, theta ^ d theta is 8 times
the Euclidean volume form, so the total volume is 16 pi^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from ..coeffs import Gauss
from .ring import MF, SPHERE, ModelError, Poly

# theta ^ d theta = VOLUME_FACTOR * (Euclidean 3-volume) on S^3 with theta = 2 theta_0
VOLUME_FACTOR = 8
SURFACE_AREA_OVER_PI2 = 2


@dataclass(frozen=True)
class PiSquared:
    """An exact number c * pi^2 with Gaussian rational c."""

    coeff: Gauss

    def __add__(self, o):
        return PiSquared(self.coeff + o.coeff)

    def __sub__(self, o):
        return PiSquared(self.coeff - o.coeff)

    def __neg__(self):
        return PiSquared(-self.coeff)

    def scale(self, c):
        return PiSquared(self.coeff * Gauss.coerce(c))

    def __eq__(self, o):
        if isinstance(o, PiSquared):
            return self.coeff == o.coeff
        return not self.coeff and o == 0

    def __hash__(self):
        return hash((self.coeff.re, self.coeff.im))

    def is_zero(self):
        return not self.coeff

    @property
    def real(self):
        if self.coeff.im:
            raise ModelError("integral is not real")
        return self.coeff.re

    def __float__(self):
        return float(self.real) * float(np.pi) ** 2

    def __str__(self):
        c = self.coeff
        body = str(c.re) if not c.im else f"({c.re}+{c.im}*i)".replace("+-", "-")
        return "0" if not c else f"{body}*pi^2"


def moment(a, b, c, d):
    """Normalised moment of z1^a z1b^b z2^c z2b^d on S^3 (probability measure)."""
    if a != b or c != d:
        return Fraction(0)
    return Fraction(factorial(a) * factorial(c), factorial(a + c + 1))


def integrate(f, s=None):
    """Exact integral of f against theta ^ d theta of ``s`` (standard sphere if None).

    For a conformal structure the volume form is e^{2 sigma} theta ^ d theta, so
    f must carry exactly the opposite markers.
    """
    if isinstance(f, MF):
        if s is not None and s.ctx.exps:
            f = s.ctx.embed(f) if f.ctx is not s.ctx else f
            f = f.exp_marker(tuple(4 for _ in s.ctx.exps))
        try:
            f = f.as_poly()
        except ModelError:
            raise ModelError("residual exponential marker in integrand") from None
    if f.model is not SPHERE:
        raise ModelError("integration is defined on the sphere only")
    total = Gauss(0)
    for (a, b, c, d), coef in f.terms.items():
        m = moment(a, b, c, d)
        if m:
            total = total + coef * m
    return PiSquared(total * (VOLUME_FACTOR * SURFACE_AREA_OVER_PI2))


def volume():
    return integrate(Poly.const(SPHERE, 1))


def sample_sphere(count, seed=0):
    """Uniform points of S^3 in C^2 (complex array of shape (count, 2))."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return np.stack([x[:, 0] + 1j * x[:, 1], x[:, 2] + 1j * x[:, 3]], axis=1)


def monte_carlo_moments(max_degree=8, samples=10**6, seed=0):
    """(exponents, exact, estimate) for every monomial of total degree <= max_degree."""
    z = sample_sphere(samples, seed)
    z1, z2 = z[:, 0], z[:, 1]
    pw = {}

    def power(v, k, key):
        if (key, k) not in pw:
            pw[(key, k)] = v ** k
        return pw[(key, k)]

    out = []
    for a in range(max_degree + 1):
        for b in range(max_degree + 1 - a):
            for c in range(max_degree + 1 - a - b):
                for d in range(max_degree + 1 - a - b - c):
                    vals = (power(z1, a, "z1") * power(z1.conj(), b, "z1b")
                            * power(z2, c, "z2") * power(z2.conj(), d, "z2b"))
                    out.append(((a, b, c, d), moment(a, b, c, d), complex(vals.mean())))
    return out


def moment_gate(max_degree=8, samples=10**6, seed=0, tol=0.01):
    """Compare exact and sampled moments.

    Nonzero moments must agree to relative error ``tol``.  A vanishing moment
    has no relative error; its estimate must be below ``tol`` times the
    monomial's root mean square, sqrt(E|m|^2), which is itself an exact moment.
    Returns (ok, worst relative error over nonzero moments, failures).
    """
    rows = monte_carlo_moments(max_degree, samples, seed)
    worst, bad = 0.0, []
    for (a, b, c, d), exact, est in rows:
        if exact:
            err = abs(est - float(exact)) / float(exact)
            worst = max(worst, err)
            if err > tol:
                bad.append(((a, b, c, d), exact, est))
        elif abs(est) > tol * float(moment(a + b, a + b, c + d, c + d)) ** 0.5:
            bad.append(((a, b, c, d), exact, est))
    return not bad, worst, bad


def volume_factor_numeric(points=5, seed=1):
    """theta ^ d theta (T, X, Y) / Euclidean volume of (T, X, Y) at random points.

    X = Z + Zb and Y = i(Z - Zb), so theta ^ d theta (T, X, Y) = dtheta(X, Y) = 2.
    """
    out = []
    for p in sample_sphere(points, seed):
        z1, z2 = p
        a = (1 - 1j) / 2
        # holomorphic components (d/dz1, d/dz2) of each field, realised in R^4
        T = np.array([0.5j * z1, 0.5j * z2])
        Z = np.array([a * z2.conjugate(), -a * z1.conjugate()])
        # sum(h_j d/dz_j + conj(h_j) d/dzb_j) has R^4 components (Re h_j, Im h_j)
        def real_vec(h):
            return np.array([h[0].real, h[0].imag, h[1].real, h[1].imag])

        X = real_vec(Z)          # Z + Zb
        Y = real_vec(1j * Z)     # i(Z - Zb)
        Tv = real_vec(T)
        M = np.stack([Tv, X, Y])
        vol = np.sqrt(abs(np.linalg.det(M @ M.T)))
        out.append(2 / vol)
    return out
