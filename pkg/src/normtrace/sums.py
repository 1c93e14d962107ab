"""Exponential sums over fields and semi-simple algebras.

Direct routes enumerate and tally exactly; closed forms and reductions use
Gauss sums.  All enumerations take ``partitions``: the index range is cut
into that many contiguous pieces, each tallied separately and merged in
partition order.  Because tallies are integer counts the merged result does
not depend on the partition count.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from typing import NamedTuple

from . import bounds
from .chars import (
    AdditiveCharacter,
    SumValue,
    Tally,
    all_multiplicative_characters,
    gauss_sum,
)
from .errors import CapExceeded
from .gf import poly_trim, raw
from .ssalg import (
    algebra,
    base_value,
    factor_charpoly,
    mat_det,
    mat_trace,
    partition_ranges,
)

DEFAULT_CAP = 1 << 24

METHODS = ("direct", "closed", "both")


class RouteValues(NamedTuple):
    """One quantity computed two ways; either side may be skipped (None)."""

    direct: SumValue | None
    closed: SumValue | None

    def agree(self, rel_tol=None):
        if self.direct is None or self.closed is None:
            return True
        return self.direct.close_to(self.closed, rel_tol)


def _cap(what, size, cap):
    cap = DEFAULT_CAP if cap is None else cap
    if size > cap:
        raise CapExceeded(what, size, cap)


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def default_psi(spec_or_field, twist=1):
    F = algebra(spec_or_field).base if hasattr(spec_or_field, "factors") else spec_or_field
    return AdditiveCharacter(F, twist)


def _partitioned(total, partitions, work):
    """Run ``work(start, stop)`` on each partition and merge tallies in order."""
    out = None
    for start, stop in partition_ranges(total, partitions):
        t = work(start, stop)
        out = t if out is None else out.merge(t)
    return out


# -- Gauss sums over GL_d ------------------------------------------------------------


def gauss_sum_gl(d, F, chi, psi, method="both", cap=None, partitions=1):
    """Sum over g in GL_d(F) of chi(det g) psi(tr g), directly and in closed form.

    The closed form is |F|^C(d,2) G(chi, psi)^d.
    """
    _check_method(method)
    direct = closed = None
    if method in ("direct", "both"):
        total = F.order ** (d * d)
        _cap(f"GL_{d}({F!r}) enumeration", total, cap)

        def work(start, stop):
            t = Tally(psi.order, chi.order)
            for entries in itertools.islice(itertools.product(F.ordered, repeat=d * d), start, stop):
                M = tuple(entries[r * d:(r + 1) * d] for r in range(d))
                det = mat_det(F, M)
                if det:
                    t.add(psi.exponent(mat_trace(F, M)), chi.exponent(det))
            return t

        direct = _partitioned(total, partitions, work).evaluate()
    if method in ("closed", "both"):
        g = complex(gauss_sum(chi, psi))
        closed = SumValue.from_complex(F.order ** math.comb(d, 2) * g**d)
    return RouteValues(direct, closed)


# -- S_m(a, b) -------------------------------------------------------------------------


def _gauss_table(F, psi):
    chis = all_multiplicative_characters(F)
    return chis, [complex(gauss_sum(chi, psi)) for chi in chis]


def _csum(values):
    values = list(values)
    return SumValue(math.fsum(z.real for z in values), math.fsum(z.imag for z in values))


def s_m(F, m, a, b, psi=None, route="sum"):
    """S_m(a, b) = sum_{v != 0} psi(-a v) sum_chi conj(chi)(b v^m) G(chi, psi)^m.

    ``route="sum"`` evaluates that double sum; ``route="fast"`` uses the
    simplified single sum over characters (separate forms for a = 0 and
    a != 0).  ``b`` must be nonzero.
    """
    a, b = raw(F, a), raw(F, b)
    if b == 0:
        raise ValueError("S_m(a, b) needs b != 0")
    psi = psi or AdditiveCharacter(F)
    chis, G = _gauss_table(F, psi)
    q = F.order
    if route == "sum":
        terms = []
        for v in range(1, q):
            pv = psi(F.neg(F.mul(a, v)))
            w = F.mul(b, F.pow(v, m))
            for chi, g in zip(chis, G):
                terms.append(pv * chi.conjugate()(w) * g**m)
        return _csum(terms)
    if route != "fast":
        raise ValueError(f"unknown route {route!r}")
    if a == 0:
        inner = [(-1) ** m + 0j]
        for chi, g in zip(chis, G):
            if not chi.is_trivial and chi.power(m).is_trivial:
                inner.append(g**m * chi.conjugate()(b))
        return SumValue.from_complex((q - 1) * complex(_csum(inner)))
    w = F.div(F.pow(F.neg(a), m), b)
    terms = []
    for j, (chi, g) in enumerate(zip(chis, G)):
        conj_pow = chi.conjugate().power(m)
        terms.append(chi(w) * G[conj_pow.index] * g**m)
    return _csum(terms)


def t_m(F, m, a, b, psi=None, route="sum"):
    """S_m(a, b) - (-1)^m (q - 1)."""
    return s_m(F, m, a, b, psi, route) - (-1) ** m * (F.order - 1)


# -- hyper-Kloosterman sums --------------------------------------------------------------


def hyper_kloosterman_tally(F, m, b, psi=None, cap=None, partitions=1):
    b = raw(F, b)
    if b == 0:
        raise ValueError("hyper-Kloosterman sum needs b != 0")
    psi = psi or AdditiveCharacter(F)
    units = list(range(1, F.order))
    total = len(units) ** (m - 1)
    _cap(f"hyper-Kloosterman sum over {F!r} in {m} variables", total, cap)

    def work(start, stop):
        t = Tally(psi.order)
        for xs in itertools.islice(itertools.product(units, repeat=m - 1), start, stop):
            last = F.div(b, F.prod(xs))
            t.add(psi.exponent(F.add(F.sum(xs), last)))
        return t

    return _partitioned(total, partitions, work)


def hyper_kloosterman(F, m, b, psi=None, cap=None, partitions=1):
    """Sum of psi(x_1 + ... + x_m) over unit m-tuples with x_1 ... x_m = b."""
    return hyper_kloosterman_tally(F, m, b, psi, cap, partitions).evaluate()


# -- Kloosterman sums over B -------------------------------------------------------------


def _unit_count_cap(spec, cap):
    _cap(f"units of {spec.label}", spec.unit_count, cap)


def _unit_rows(spec):
    """Per-part lists of (base trace, base norm) over units."""
    A = algebra(spec)
    return [[(t, n) for _, t, n in A.part_trace_norm(i, True)] for i in range(spec.k)]


def kloosterman_direct_tally(spec, b, psi=None, cap=None, partitions=1):
    A = algebra(spec)
    B = A.base
    b = base_value(spec, b)
    psi = psi or default_psi(spec)
    _unit_count_cap(spec, cap)
    rows = _unit_rows(spec)

    def work(start, stop):
        t = Tally(psi.order)
        for combo in itertools.islice(itertools.product(*rows), start, stop):
            nm = 1
            for _, n in combo:
                nm = B.mul(nm, n)
            if nm == b:
                t.add(psi.exponent(B.sum(tr for tr, _ in combo)))
        return t

    return _partitioned(spec.unit_count, partitions, work)


def kloosterman_reduction_factor(spec):
    """(sign, power of q) with K_B(b) = sign * q^power * K_{GF(q)^m}(b)."""
    return (-1) ** (spec.m - spec.sum_d), spec.half_defect


def kloosterman_B(spec, b, psi=None, method="both", cap=None, partitions=1):
    """K_B(b) = sum of psi(Tr x) over units with N(x) = b, direct and reduced.

    The reduced route is sign * q^((n-m)/2) times the hyper-Kloosterman sum
    in m = sum d_i n_i variables.
    """
    _check_method(method)
    b = base_value(spec, b)
    if b == 0:
        raise ValueError("K_B(b) needs b != 0")
    psi = psi or default_psi(spec)
    direct = closed = None
    if method in ("direct", "both"):
        direct = kloosterman_direct_tally(spec, b, psi, cap, partitions).evaluate()
    if method in ("closed", "both"):
        sign, h = kloosterman_reduction_factor(spec)
        hk = hyper_kloosterman(algebra(spec).base, spec.m, b, psi, cap, partitions)
        closed = SumValue.from_complex(sign * spec.q**h * complex(hk))
    return RouteValues(direct, closed)


def full_unit_sum(spec, psi=None, method="both", cap=None, partitions=1):
    """Sum of psi(Tr x) over all units; closed form (-1)^(sum d) q^((n-m)/2)."""
    _check_method(method)
    A = algebra(spec)
    B = A.base
    psi = psi or default_psi(spec)
    direct = closed = None
    if method in ("direct", "both"):
        _unit_count_cap(spec, cap)
        rows = _unit_rows(spec)

        def work(start, stop):
            t = Tally(psi.order)
            for combo in itertools.islice(itertools.product(*rows), start, stop):
                t.add(psi.exponent(B.sum(tr for tr, _ in combo)))
            return t

        direct = _partitioned(spec.unit_count, partitions, work).evaluate()
    if method in ("closed", "both"):
        closed = SumValue(float((-1) ** spec.sum_d * spec.q**spec.half_defect))
    return RouteValues(direct, closed)


# -- product-trace sums -------------------------------------------------------------------


def _require_unit(spec, x):
    A = algebra(spec)
    A.check(x)
    if not A.is_unit(x):
        raise ValueError("x must be invertible")


def product_trace_histogram(spec, r, x, cap=None, partitions=1):
    """Counter a -> #{(g_1..g_r) in (B*)^r : g_1...g_r = x, Tr(g_1+...+g_r) = a}.

    The first r-1 factors run freely; g_r = (g_1...g_{r-1})^-1 x.
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    _require_unit(spec, x)
    A = algebra(spec)
    B = A.base
    units = A.units
    U = len(units)
    total = U ** (r - 1)
    _cap(f"(B*)^{r - 1} for {spec.label}", total, cap)
    invs = A.unit_inverses
    traces = A.unit_traces

    def work(start, stop):
        hist = Counter()
        for idx in itertools.islice(itertools.product(range(U), repeat=r - 1), start, stop):
            # (g_1 ... g_{r-1})^-1 x = g_{r-1}^-1 ... g_1^-1 x
            y, s = x, 0
            for i in idx[:-1]:
                y = A.mul(invs[i], y)
                s = B.add(s, traces[i])
            last = idx[-1]
            s = B.add(s, traces[last])
            hist[B.add(s, A.trace_of_product(invs[last], y))] += 1
        return _HistTally(hist)

    return _partitioned(total, partitions, work).hist


class _HistTally:
    """Adapter so Counter histograms merge through :func:`_partitioned`."""

    def __init__(self, hist):
        self.hist = hist

    def merge(self, other):
        self.hist.update(other.hist)
        return self


def _tally_from_histogram(hist, psi):
    t = Tally(psi.order)
    for a, c in sorted(hist.items()):
        t.add(psi.exponent(a), 0, c)
    return t


def product_trace_tally(spec, r, x, psi=None, cap=None, partitions=1):
    psi = psi or default_psi(spec)
    return _tally_from_histogram(product_trace_histogram(spec, r, x, cap, partitions), psi)


def product_trace_K(spec, r, x, psi=None, cap=None, partitions=1):
    """K(B, r, x) = sum over g_1...g_r = x of psi(Tr(g_1 + ... + g_r))."""
    return product_trace_tally(spec, r, x, psi, cap, partitions).evaluate()


def product_trace_etale_tally(spec, r, x, psi=None, cap=None):
    """Etale B only: the product over factors of one-field twisted sums."""
    if not spec.is_etale:
        raise ValueError("factorized product-trace sum needs an etale algebra")
    _require_unit(spec, x)
    A = algebra(spec)
    psi = psi or default_psi(spec)
    out = None
    for F, tw, M in zip(A.fields, A.towers, x.parts):
        xi = M[0][0]
        units = range(1, F.order)
        _cap(f"twisted sum over {F!r}", (F.order - 1) ** (r - 1), cap)
        t = Tally(psi.order)
        for ys in itertools.product(units, repeat=r - 1):
            arg = F.add(F.sum(ys), F.div(xi, F.prod(ys)))
            t.add(psi.exponent(tw.trace_table[arg]))
        out = t if out is None else out.convolve(t)
    return out


class ProductTraceBounds(NamedTuple):
    fine: bounds.Bound
    coarse: bounds.Bound
    factorizations: tuple


def zelingher_bound(spec, x, r):
    """Fine and coarse bounds on |K(B, r, x)| for regular x.

    Fine: product over parts of (q^n_i)^((r-1) d_i^2 / 2) * prod_j C(b_j + r - 1, b_j),
    where b_j are the multiplicities in the characteristic polynomial of part i
    over its own field.  Coarse: r^(sum d) q^((r-1)n/2).
    """
    A = algebra(spec)
    A.check(x)
    facs = tuple(factor_charpoly(F, M) for F, M in zip(A.fields, x.parts))
    binom = 1
    for fac in facs:
        for b in fac.multiplicities:
            binom *= math.comb(b + r - 1, b)
    fine = bounds.Bound.of(spec.q, (binom, (r - 1) * spec.n))
    return ProductTraceBounds(fine, bounds.product_trace_bound(spec, r), facs)


# -- polynomial-trace sums ----------------------------------------------------------------


def _check_poly(spec, f):
    f = poly_trim(tuple(base_value(spec, c) for c in f))
    deg = len(f) - 1
    if deg < 1:
        raise ValueError("f must have degree >= 1")
    if math.gcd(deg, spec.p) != 1:
        warnings.warn(f"deg f = {deg} is divisible by p = {spec.p}", stacklevel=3)
    return f


def poly_trace_kloosterman(spec, f, b, psi=None, cap=None):
    """Sum of psi(Tr f(x)) over units with N(x) = b (direct only)."""
    f = _check_poly(spec, f)
    b = base_value(spec, b)
    if b == 0:
        raise ValueError("needs b != 0")
    psi = psi or default_psi(spec)
    _unit_count_cap(spec, cap)
    A = algebra(spec)
    t = Tally(psi.order)
    for x in A.units:
        if A.norm_raw(x) == b:
            t.add(psi.exponent(A.trace_raw(A.poly_eval(f, x))))
    return t.evaluate()


def poly_trace_reference_bound(spec, f):
    """n r^(n-1) q^((n-1)/2) for etale B (reported, not asserted); None otherwise."""
    if not spec.is_etale:
        return None
    return bounds.poly_sum_reference_bound(spec, len(poly_trim(f)) - 1)
