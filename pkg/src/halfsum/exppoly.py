"""Exponential-polynomial functions on the half-line.

An :class:`ExpPoly` is a finite sum of terms ``c * x**p * exp(mu * x)`` on
``[0, inf)`` with ``Re(mu) < 0``.  The whole closed-form kernel catalog lives
in this family, and the family is closed under half-line convolution, so
convolution, powers, masses and Fourier transforms of catalog kernels are all
exact here.  Convolution is done in the transform domain: each term is a
rational function ``C / (z - mu)**a`` of ``z = i*xi``, products of such terms
are split by partial fractions and mapped back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidKernel

_MERGE_TOL = 1e-13


@dataclass(frozen=True)
class Term:
    coef: complex
    power: int        # p >= 0
    rate: complex     # mu, Re(mu) < 0

    def __post_init__(self):
        if self.power < 0:
            raise InvalidKernel("term power must be nonnegative")
        if not (np.isfinite(self.coef) and np.isfinite(self.rate)):
            raise InvalidKernel("non-finite term coefficient or rate")
        if self.rate.real >= 0:
            raise InvalidKernel("term rate must have negative real part")


class ExpPoly:
    """Finite sum of ``c * x**p * exp(mu*x)`` terms on the half-line."""

    def __init__(self, terms):
        merged: dict[tuple, complex] = {}
        for t in terms:
            if not isinstance(t, Term):
                t = Term(complex(t[0]), int(t[1]), complex(t[2]))
            key = (t.power, t.rate)
            merged[key] = merged.get(key, 0.0 + 0.0j) + complex(t.coef)
        scale = max((abs(c) for c in merged.values()), default=0.0)
        self.terms = tuple(
            Term(c, p, mu)
            for (p, mu), c in sorted(merged.items(), key=lambda kv: (kv[0][1].real, kv[0][1].imag, kv[0][0]))
            if abs(c) > _MERGE_TOL * scale
        )

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __call__(self, x):
        """Evaluate pointwise; zero for x < 0 (half-line extension)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        pos = x >= 0
        xp = x[pos] if x.ndim else (x if pos else None)
        if x.ndim == 0:
            if not pos:
                return 0.0 + 0.0j
            return complex(sum(t.coef * x ** t.power * np.exp(t.rate * x) for t in self.terms))
        for t in self.terms:
            out[pos] += t.coef * xp ** t.power * np.exp(t.rate * xp)
        return out

    def scaled(self, factor: complex) -> "ExpPoly":
        return ExpPoly([Term(t.coef * factor, t.power, t.rate) for t in self.terms])

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly(list(self.terms) + list(other.terms))

    # ---- exact integrals -------------------------------------------------

    def mass(self) -> complex:
        """Integral over [0, inf)."""
        return complex(sum(t.coef * math.factorial(t.power) / (-t.rate) ** (t.power + 1)
                           for t in self.terms))

    def antiderivative(self, x):
        """F(x) = integral of the function from 0 to x, vectorized."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for t in self.terms:
            # int_0^x s^p e^{mu s} ds
            p, mu = t.power, t.rate
            acc = np.zeros(x.shape, dtype=complex)
            # e^{mu x} * sum_{i=0..p} (-1)^i p!/(p-i)! x^{p-i} / mu^{i+1}, minus value at 0
            for i in range(p + 1):
                acc += ((-1) ** i * math.factorial(p) / math.factorial(p - i)
                        * x ** (p - i) / mu ** (i + 1))
            at0 = (-1) ** p * math.factorial(p) / mu ** (p + 1)
            out += t.coef * (np.exp(mu * x) * acc - at0)
        return out if out.ndim else complex(out)

    def integral(self, a: float, b: float) -> complex:
        return complex(self.antiderivative(b) - self.antiderivative(a))

    def tail_integral(self, a: float) -> complex:
        """Integral over [a, inf)."""
        return self.mass() - complex(self.antiderivative(a))

    def abs_tail_bound(self, a: float) -> float:
        """Upper bound on the integral of |f| over [a, inf)."""
        return float(sum(abs(t.coef) * _poly_exp_tail(t.power, -t.rate.real, a)
                         for t in self.terms))

    def support_cutoff(self, eps: float, start: float = 1.0) -> float:
        """Smallest grid point beyond which the absolute tail is below eps."""
        a = max(start, 1.0)
        for _ in range(200):
            if self.abs_tail_bound(a) < eps:
                return a
            a *= 1.25
        return a

    # ---- transform domain ------------------------------------------------

    def transform(self, xi):
        """Fourier transform of the zero-extended function: sum c p!/(i xi - mu)^(p+1)."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        z = 1j * xi
        for t in self.terms:
            out += t.coef * math.factorial(t.power) / (z - t.rate) ** (t.power + 1)
        return out if out.ndim else complex(out)

    def transform_derivative_bound(self) -> float:
        """Bound on |d/dxi transform| = int t |f(t)| dt, term-by-term."""
        return float(sum(abs(t.coef) * math.factorial(t.power + 1)
                         / (-t.rate.real) ** (t.power + 2)
                         for t in self.terms))

    def convolve(self, other: "ExpPoly") -> "ExpPoly":
        """Half-line convolution, exact via partial fractions."""
        out: list[Term] = []
        for t1 in self.terms:
            a = t1.power + 1
            c1 = t1.coef * math.factorial(t1.power)
            for t2 in other.terms:
                b = t2.power + 1
                c2 = t2.coef * math.factorial(t2.power)
                out.extend(_pole_product(c1 * c2, t1.rate, a, t2.rate, b))
        return ExpPoly(out)

    def power(self, k: int) -> "ExpPoly":
        if k < 1:
            raise InvalidKernel("convolution power requires k >= 1")
        result = self
        for _ in range(k - 1):
            result = result.convolve(self)
        return result

    def reversed_tail(self):  # pragma: no cover - convenience repr
        return self.terms

    def __repr__(self):
        body = " + ".join(f"({t.coef:.6g})*x^{t.power}*exp({t.rate:.6g}x)" for t in self.terms)
        return f"ExpPoly[{body or '0'}]"


def _poly_exp_tail(p: int, lam: float, a: float) -> float:
    """int_a^inf t^p e^{-lam t} dt for lam > 0, a >= 0."""
    # e^{-lam a} * sum_{i=0..p} p!/(p-i)! a^{p-i} / lam^{i+1}
    acc = 0.0
    for i in range(p + 1):
        acc += math.factorial(p) / math.factorial(p - i) * a ** (p - i) / lam ** (i + 1)
    return math.exp(-lam * a) * acc


def _pole_product(coef: complex, u: complex, a: int, v: complex, b: int):
    """Partial-fraction split of coef / ((z-u)^a (z-v)^b) back into time terms.

    A transform term C/(z-mu)^j corresponds to (C/(j-1)!) x^(j-1) e^(mu x).
    """
    terms = []
    if u == v:
        j = a + b
        terms.append(Term(coef / math.factorial(j - 1), j - 1, u))
        return terms
    d = u - v
    for j in range(1, a + 1):
        k = a - j
        aj = coef * (-1) ** k * math.comb(b - 1 + k, k) * d ** (-(b + k))
        terms.append(Term(aj / math.factorial(j - 1), j - 1, u))
    for j in range(1, b + 1):
        k = b - j
        bj = coef * (-1) ** k * math.comb(a - 1 + k, k) * (-d) ** (-(a + k))
        terms.append(Term(bj / math.factorial(j - 1), j - 1, v))
    return terms
