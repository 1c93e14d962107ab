"""Main terms and error bounds, kept exact where possible.

A :class:`Bound` is a finite sum ``c * q**(h/2)`` with rational ``c`` and
integer ``h``.  Comparing an exact rational error against it never goes
through floating point, so tight cases (error == bound) are decided exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Bound:
    q: int
    terms: tuple  # ((Fraction coefficient, twice the exponent of q), ...)

    @classmethod
    def of(cls, q, *terms):
        return cls(q, tuple((Fraction(c), int(h)) for c, h in terms))

    def _split(self):
        """(R, I) with bound == R + I * sqrt(q), both rational."""
        R, I = Fraction(0), Fraction(0)
        for c, h in self.terms:
            if h % 2 == 0:
                R += c * Fraction(self.q) ** (h // 2)
            else:
                I += c * Fraction(self.q) ** ((h - 1) // 2)
        return R, I

    @property
    def value(self):
        R, I = self._split()
        return float(R) + float(I) * math.sqrt(self.q)

    def admits(self, err):
        """Exact test ``err <= bound`` for a rational ``err``."""
        err = Fraction(err)
        R, I = self._split()
        s = math.isqrt(self.q)
        if s * s == self.q:
            return err <= R + I * s
        diff = err - R
        if I >= 0:
            return diff <= 0 or diff * diff <= I * I * self.q
        return diff < 0 and diff * diff >= I * I * self.q

    def admits_value(self, x, tol):
        """Floating test ``x <= bound + tol`` for values known only numerically."""
        return x <= self.value + tol

    def __str__(self):
        return f"{self.value:.12g}"


def main_term_simple(spec):
    """|B*| / (q(q-1))."""
    q = spec.q
    return Fraction(spec.unit_count, q * (q - 1))


def main_term(spec):
    """|B*| / (q(q-1)) + (-1)^(sum d) q^((n-m)/2) / q."""
    q = spec.q
    return main_term_simple(spec) + Fraction((-1) ** spec.sum_d * q**spec.half_defect, q)


def split_main_term(q, m):
    """((q-1)^(m-1) + (-1)^m) / q, the main term for GF(q)^m."""
    return Fraction((q - 1) ** (m - 1) + (-1) ** m, q)


def field_main_term(q, n):
    """(q^(n-1) - 1) / (q - 1), the main term for GF(q^n)."""
    return Fraction(q ** (n - 1) - 1, q - 1)


def two_term_bound(spec):
    """(m - 1) q^((n-2)/2), against :func:`main_term`."""
    return Bound.of(spec.q, (spec.m - 1, spec.n - 2))


def simple_bound(spec):
    """m q^((n-2)/2), against :func:`main_term_simple`."""
    return Bound.of(spec.q, (spec.m, spec.n - 2))


def degree_bound(spec):
    """n q^((n-2)/2), the weakest form, against :func:`main_term_simple`."""
    return Bound.of(spec.q, (spec.n, spec.n - 2))


def zero_trace_bound(spec):
    """((m, q-1) - 1) q^((n-2)/2) at a = 0, against :func:`main_term`."""
    g = math.gcd(spec.m, spec.q - 1)
    return Bound.of(spec.q, (g - 1, spec.n - 2))


def nonzero_trace_bound(spec):
    """g/(q-1) q^((n-2)/2) + (q-1-g)/(q-1) q^((n-1)/2) at a != 0, g = (m, q-1)."""
    q = spec.q
    g = math.gcd(spec.m, q - 1)
    return Bound.of(q, (Fraction(g, q - 1), spec.n - 2), (Fraction(q - 1 - g, q - 1), spec.n - 1))


def kloosterman_bound(spec):
    """m q^((n-1)/2) on |K_B(b)|."""
    return Bound.of(spec.q, (spec.m, spec.n - 1))


def deligne_bound(q, m):
    """m q^((m-1)/2) on the hyper-Kloosterman sum in m variables."""
    return Bound.of(q, (m, m - 1))


def product_trace_bound(spec, r):
    """r^(sum d) q^((r-1)n/2) on |K(B, r, x)| for regular x."""
    return Bound.of(spec.q, (r**spec.sum_d, (r - 1) * spec.n))


def product_trace_conjecture_bound(spec, r):
    """r^(sum d) q^(((r-1)n - 1)/2), the conjectured error for N(B, r, x, a)."""
    return Bound.of(spec.q, (r**spec.sum_d, (r - 1) * spec.n - 1))


def poly_count_reference_bound(spec, deg):
    """(deg-1)^n q^((n-1)/2) for B = GF(q)^n; smooth hypersurfaces only."""
    return Bound.of(spec.q, ((deg - 1) ** spec.n, spec.n - 1))


def poly_sum_reference_bound(spec, deg):
    """n deg^(n-1) q^((n-1)/2) for etale B."""
    return Bound.of(spec.q, (spec.n * deg ** (spec.n - 1), spec.n - 1))
