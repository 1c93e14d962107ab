"""Acceptance run over the standard instance set.

Each test carries a ``criterion`` marker; conftest prints one PASS/FAIL line
per criterion at the end of the session.  Run alone with::

    python3 -m pytest tests/test_acceptance.py -v
"""

import sys
import time
from fractions import Fraction

import pytest

from normtrace import bounds
from normtrace.chars import (
    AdditiveCharacter,
    MultiplicativeCharacter,
    all_multiplicative_characters,
    hasse_davenport_check,
    hasse_davenport_unpowered_rhs,
)
from normtrace.counts import (
    count_norm_trace,
    count_norm_zero,
    count_trace_units,
    identity_suite,
    inclusion_exclusion_norm_zero,
    trace_norm_histogram,
)
from normtrace.gf import construct_field
from normtrace.ssalg import AlgebraSpec, algebra, is_regular
from normtrace.sums import (
    default_psi,
    full_unit_sum,
    gauss_sum_gl,
    hyper_kloosterman,
    kloosterman_B,
    product_trace_etale_tally,
    product_trace_K,
    product_trace_tally,
)
from normtrace.verify import (
    CONJECTURE_VIOLATION,
    FAIL,
    KNOWN_MISMATCH,
    standard_instances,
    verify_norm_trace,
    verify_product_trace,
    verify_trace_units,
)

TOL = 1e-6
INSTANCES = standard_instances()

M2F2 = AlgebraSpec(2, 1, ((2, 1),))
F2F2 = AlgebraSpec(2, 1, ((1, 1), (1, 1)))
F3F3 = AlgebraSpec(3, 1, ((1, 1), (1, 1)))
F4 = AlgebraSpec(2, 1, ((1, 2),))
F3 = AlgebraSpec(3, 1, ((1, 1),))

KLOOSTERMAN_SET = [
    M2F2,
    AlgebraSpec(3, 1, ((2, 1),)),
    AlgebraSpec(2, 2, ((2, 1),)),
    F4,
    F2F2,
    AlgebraSpec(2, 1, ((2, 1), (1, 1))),
]
PRODUCT_SET = [F2F2, F4, M2F2, F3]

BOUND_CHECKS = {
    "two_term_bound", "simple_bound", "degree_bound", "zero_trace_bound", "nonzero_trace_bound",
    "field_bound", "field_improved_bound", "split_bound",
}


def _nonzero(spec):
    return [b for b in algebra(spec).base.ordered if b != 0]


def _formula_sweep(partitions):
    trace_norm_histogram.cache_clear()
    out = {}
    for spec in INSTANCES:
        if spec.unit_count > 10**5:
            continue
        for a in algebra(spec).base.ordered:
            for b in _nonzero(spec):
                rec = count_norm_trace(spec, a, b, partitions=partitions)
                out[(spec.label, a, b)] = (rec.brute, rec.formula)
    return out


def _kloosterman_sweep(partitions):
    out = {}
    for spec in KLOOSTERMAN_SET:
        for b in _nonzero(spec):
            rv = kloosterman_B(spec, b, partitions=partitions)
            out[(spec.label, b)] = (complex(rv.direct), complex(rv.closed))
    return out


@pytest.mark.criterion(1, "formula vs brute exactness for norm-trace counts")
def test_formula_exactness(record_property):
    start = time.perf_counter()
    values = _formula_sweep(1)
    elapsed = time.perf_counter() - start
    bad = [k for k, (brute, formula) in values.items() if brute != formula]
    record_property("detail", f"{len(values)} cells, {len(bad)} mismatches, {elapsed:.1f}s")
    assert not bad
    assert all(isinstance(f, int) for _, f in values.values())
    assert elapsed < 60


@pytest.mark.criterion(2, "reduction-to-split identity has zero residual")
def test_reduction_identity(record_property):
    cells = 0
    for spec in INSTANCES:
        res = [r for r in identity_suite(spec) if r.name == "reduction_to_split"]
        assert len(res) == spec.q * (spec.q - 1)
        assert all(r.residual == 0 for r in res), spec.label
        cells += len(res)
    (spot,) = [r for r in identity_suite(M2F2) if r.name == "reduction_to_split" and r.inputs == {"a": 1, "b": 1}]
    assert spot.lhs == -2 and spot.rhs == -2
    record_property("detail", f"{cells} cells, M_2(F_2) (1,1): {spot.lhs} = {spot.rhs}")


@pytest.mark.criterion(3, "norm-trace error bounds hold on the full sweep")
def test_error_bounds(record_property):
    worst, checked = 0.0, 0
    for spec in INSTANCES:
        rep = verify_norm_trace(spec)
        rows = [r for r in rep.records if r.suite.split("/")[1] in BOUND_CHECKS]
        assert rows
        assert not [r for r in rows if r.status == FAIL], spec.label
        checked += len(rows)
        worst = max(worst, max(r.ratio for r in rows))
    tight = verify_norm_trace(F3F3)
    at_zero = [r.ratio for r in tight.records if r.suite.endswith("/two_term_bound") and r.a == 0]
    record_property("detail", f"{checked} rows, max error/bound {worst:.4g}, F_3^2 a=0 ratio {max(at_zero):.4g}")
    assert worst <= 1.0 + 1e-12
    assert max(at_zero) == pytest.approx(1.0)


@pytest.mark.criterion(4, "GL_d Gauss sums match Q^C(d,2) G^d")
def test_eichler(record_property):
    cases = {(2, 2): (2, 1), (2, 3): (3, 1), (2, 4): (2, 2), (3, 2): (2, 1)}
    count = 0
    for (d, Q), (p, e) in cases.items():
        F = construct_field(p, e)
        psi = AdditiveCharacter(F)
        for chi in all_multiplicative_characters(F):
            rv = gauss_sum_gl(d, F, chi, psi)
            assert abs(complex(rv.direct) - complex(rv.closed)) < TOL, (d, Q, chi)
            count += 1
    F2, F3_ = construct_field(2, 1), construct_field(3, 1)
    triv = gauss_sum_gl(2, F2, MultiplicativeCharacter(F2, 0), AdditiveCharacter(F2))
    quad = gauss_sum_gl(2, F3_, MultiplicativeCharacter(F3_, 1), AdditiveCharacter(F3_))
    assert abs(complex(triv.direct) - 2) < TOL
    assert abs(complex(quad.direct) + 9) < TOL
    record_property("detail", f"{count} characters")


@pytest.mark.criterion(5, "Hasse-Davenport lifting relation, powered form")
def test_hasse_davenport(record_property):
    count = 0
    for p, e, m in [(2, 1, 2), (2, 1, 3), (3, 1, 2), (2, 2, 2), (5, 1, 2)]:
        F = construct_field(p, e)
        psi = AdditiveCharacter(F)
        for chi in all_multiplicative_characters(F):
            lhs, rhs = hasse_davenport_check(chi, psi, m)
            assert abs(complex(lhs) - complex(rhs)) < TOL, (p, e, m, chi)
            count += 1
    F = construct_field(2, 1)
    chi, psi = MultiplicativeCharacter(F, 0), AdditiveCharacter(F)
    lhs, _ = hasse_davenport_check(chi, psi, 2)
    unpowered = hasse_davenport_unpowered_rhs(chi, psi, 2)
    assert abs(complex(lhs) + 1) < TOL and abs(complex(unpowered) - 1) < TOL
    record_property("detail", f"{count} characters; unpowered form gives +1 against -1 at q=2, m=2")


@pytest.mark.criterion(6, "Kloosterman sums over B: direct vs reduced, with bound")
def test_kloosterman(record_property):
    worst = 0.0
    for spec in KLOOSTERMAN_SET:
        bound = bounds.kloosterman_bound(spec)
        for b in _nonzero(spec):
            rv = kloosterman_B(spec, b)
            residual = abs(complex(rv.direct) - complex(rv.closed))
            worst = max(worst, residual)
            assert residual < TOL, (spec.label, b)
            assert bound.admits_value(rv.direct.magnitude(), rv.direct.tolerance()), (spec.label, b)
    spot = kloosterman_B(M2F2, 1)
    assert abs(complex(spot.direct) - 2) < TOL and abs(complex(spot.closed) - 2) < TOL
    record_property("detail", f"max residual {worst:.2e}")


@pytest.mark.criterion(7, "Deligne bound for hyper-Kloosterman sums")
def test_deligne(record_property):
    start = time.perf_counter()
    fields = {2: (2, 1), 3: (3, 1), 4: (2, 2), 5: (5, 1), 7: (7, 1)}
    worst = 0.0
    for q, (p, e) in fields.items():
        F = construct_field(p, e)
        for m in (2, 3, 4):
            bound = bounds.deligne_bound(q, m)
            for b in range(1, q):
                hk = hyper_kloosterman(F, m, b)
                assert bound.admits_value(hk.magnitude(), hk.tolerance()), (q, m, b)
                worst = max(worst, hk.magnitude() / bound.value)
    elapsed = time.perf_counter() - start
    record_property("detail", f"max |K|/bound {worst:.4g}, {elapsed:.1f}s")
    assert elapsed < 30


@pytest.mark.criterion(8, "unit counts by trace and the full unit sum")
def test_trace_units(record_property):
    for spec in INSTANCES:
        for a in algebra(spec).base.ordered:
            rec = count_trace_units(spec, a)
            assert rec.brute == rec.formula, (spec.label, a)
        rv = full_unit_sum(spec)
        expected = (-1) ** spec.sum_d * spec.q ** Fraction(spec.n - spec.m, 2)
        assert abs(complex(rv.direct) - float(expected)) < TOL * max(1, abs(float(expected))), spec.label
        assert rv.agree()
    assert count_trace_units(M2F2, 0).value == 4 and count_trace_units(M2F2, 1).value == 2
    assert abs(complex(full_unit_sum(M2F2).direct) - 2) < TOL


@pytest.mark.criterion(9, "norm-zero counts, with the non-etale mismatch recorded")
def test_norm_zero(record_property):
    for spec in INSTANCES:
        for a in algebra(spec).base.ordered:
            rec = count_norm_zero(spec, a)
            assert rec.brute == rec.formula, (spec.label, a)
            if spec.is_etale:
                assert inclusion_exclusion_norm_zero(spec, a) == rec.brute, (spec.label, a)
    rep = verify_trace_units(M2F2)
    assert not rep.failed
    mism = [r for r in rep.records if r.status == KNOWN_MISMATCH and r.a == 0]
    assert [(r.value, r.main_term) for r in mism] == [(4, 1)]
    record_property("detail", "M_2(F_2) a=0: brute 4, inclusion-exclusion 1 (known mismatch)")


@pytest.mark.criterion(10, "product-trace sums: regular bound and etale factorization")
def test_product_trace_bound(record_property):
    start = time.perf_counter()
    checked = 0
    for spec in PRODUCT_SET:
        A = algebra(spec)
        psi = default_psi(spec)
        for r in (2, 3):
            bound = bounds.product_trace_bound(spec, r)
            for x in A.units:
                if not is_regular(spec, x):
                    continue
                K = product_trace_K(spec, r, x, psi)
                assert bound.admits_value(K.magnitude(), K.tolerance()), (spec.label, r, x)
                if spec.is_etale:
                    lhs = complex(product_trace_tally(spec, r, x, psi).evaluate())
                    rhs = complex(product_trace_etale_tally(spec, r, x, psi).evaluate())
                    assert abs(lhs - rhs) < TOL, (spec.label, r, x)
                checked += 1
    elapsed = time.perf_counter() - start
    record_property("detail", f"{checked} (B, r, x) cases, {elapsed:.1f}s")
    assert elapsed < 120


@pytest.mark.criterion(11, "product-trace count margins for a != 0")
def test_conjecture_sweep(record_property):
    violations, rows = 0, 0
    for spec in PRODUCT_SET:
        U = spec.unit_count
        for r in (2, 3):
            rep = verify_product_trace(spec, r)
            assert "sample" not in rep.header
            conj = [x for x in rep.records if x.suite.endswith("/conjecture")]
            violations += sum(x.status == CONJECTURE_VIOLATION for x in conj)
            rows += len(conj)
            totals = [x for x in rep.records if x.suite.endswith("/sum_over_traces")]
            assert len(totals) == U
            assert all(x.value == U ** (r - 1) for x in totals)
    record_property("detail", f"{rows} margins, {violations} violations")
    assert rows and violations == 0


@pytest.mark.criterion(12, "results independent of partition count")
def test_determinism(record_property):
    counts = [_formula_sweep(k) for k in (1, 2, 8)]
    assert counts[0] == counts[1] == counts[2]
    sums = [_kloosterman_sweep(k) for k in (1, 2, 8)]
    worst = 0.0
    for other in sums[1:]:
        for key, (direct, closed) in sums[0].items():
            worst = max(worst, abs(direct - other[key][0]), abs(closed - other[key][1]))
    record_property("detail", f"max complex drift {worst:.1e}")
    assert worst < 1e-9


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
