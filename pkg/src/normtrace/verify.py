"""Parameter sweeps that check every computed quantity against its bound or identity."""

from __future__ import annotations

import csv
import io
import json
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from . import bounds
from .chars import SumValue, format_complex
from .counts import (
    count_norm_trace,
    count_norm_zero,
    count_trace_units,
    identity_suite,
    trace_norm_histogram,
)
from .ssalg import AlgebraSpec, algebra, format_element, is_regular
from .sums import (
    DEFAULT_CAP,
    _tally_from_histogram,
    default_psi,
    full_unit_sum,
    hyper_kloosterman,
    kloosterman_B,
    product_trace_etale_tally,
    product_trace_histogram,
    zelingher_bound,
)

PASS = "pass"
FAIL = "fail"
CONJECTURE_VIOLATION = "conjecture-violation"
KNOWN_MISMATCH = "known-paper-mismatch"

CSV_COLUMNS = ("suite", "spec", "a", "b", "r", "value", "main_term", "error", "bound", "slack", "status", "x")

DEFAULT_SAMPLE = 256


@dataclass
class Record:
    suite: str
    spec: str
    value: object
    main_term: object = None
    error: object = None
    bound: object = None
    status: str = PASS
    a: int | None = None
    b: int | None = None
    r: int | None = None
    x: str | None = None

    @property
    def slack(self):
        if self.bound is None or self.error is None:
            return None
        return _as_float(self.bound) - float(self.error)

    @property
    def ratio(self):
        if self.bound is None or self.error is None:
            return None
        bv = _as_float(self.bound)
        if bv == 0:
            return 0.0 if float(self.error) == 0 else float("inf")
        return float(self.error) / bv


def _as_float(v):
    return v.value if isinstance(v, bounds.Bound) else float(v)


@dataclass
class VerificationReport:
    suite_name: str
    spec_summary: str
    records: list = field(default_factory=list)
    header: dict = field(default_factory=dict)
    duration: float = 0.0

    @property
    def totals(self):
        return dict(sorted(Counter(r.status for r in self.records).items()))

    @property
    def failed(self):
        return [r for r in self.records if r.status == FAIL]

    @property
    def conjecture_violations(self):
        return [r for r in self.records if r.status == CONJECTURE_VIOLATION]

    def max_ratio(self, check=None):
        ratios = [
            r.ratio
            for r in self.records
            if r.ratio is not None and (check is None or r.suite.endswith("/" + check))
        ]
        return max(ratios, default=0.0)


def _exact_status(err, bound):
    return PASS if bound.admits(err) else FAIL


def _count_row(report, check, rec, main, bound, a, b, spec):
    err = abs(Fraction(rec.value) - main)
    report.records.append(
        Record(f"{report.suite_name}/{check}", spec.label, rec.value, main, err, bound,
               _exact_status(err, bound), a=a, b=b)
    )


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.duration = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def verify_norm_trace(spec, cap=None, partitions=1):
    """All (a, b != 0): formula exactness, four error bounds, reduction identities."""
    rep = VerificationReport("norm_trace", spec.to_json())
    F = algebra(spec).base
    zero = bounds.Bound.of(spec.q)
    field_case = spec.k == 1 and spec.factors[0][0] == 1
    split_case = all(f == (1, 1) for f in spec.factors)
    for a in F.ordered:
        for b in F.ordered:
            if b == 0:
                continue
            rec = count_norm_trace(spec, a, b, cap=cap, partitions=partitions)
            exact_err = abs(rec.brute - rec.formula)
            rep.records.append(
                Record("norm_trace/formula_exact", spec.label, rec.brute, rec.formula, exact_err, zero,
                       PASS if exact_err == 0 else FAIL, a=a, b=b)
            )
            _count_row(rep, "two_term_bound", rec, bounds.main_term(spec), bounds.two_term_bound(spec), a, b, spec)
            _count_row(rep, "simple_bound", rec, bounds.main_term_simple(spec), bounds.simple_bound(spec), a, b, spec)
            _count_row(rep, "degree_bound", rec, bounds.main_term_simple(spec), bounds.degree_bound(spec), a, b, spec)
            if a == 0:
                _count_row(rep, "zero_trace_bound", rec, bounds.main_term(spec), bounds.zero_trace_bound(spec), a, b, spec)
            else:
                _count_row(rep, "nonzero_trace_bound", rec, bounds.main_term_simple(spec),
                           bounds.nonzero_trace_bound(spec), a, b, spec)
            if field_case:
                n, q = spec.n, spec.q
                _count_row(rep, "field_bound", rec, bounds.main_term_simple(spec),
                           bounds.Bound.of(q, (n, n - 2)), a, b, spec)
                _count_row(rep, "field_improved_bound", rec, bounds.field_main_term(q, n),
                           bounds.Bound.of(q, (n - 1, n - 2)), a, b, spec)
            if split_case:
                n, q = spec.n, spec.q
                _count_row(rep, "split_bound", rec, bounds.split_main_term(q, n),
                           bounds.Bound.of(q, (n - 1, n - 2)), a, b, spec)
    for res in identity_suite(spec, cap, partitions):
        if res.name.startswith("kloosterman"):
            continue
        err = abs(res.residual)
        rep.records.append(
            Record(f"norm_trace/{res.name}", spec.label, res.lhs, res.rhs, err, zero,
                   PASS if err == 0 else FAIL, a=res.inputs.get("a"), b=res.inputs.get("b"))
        )
    rep.header["max_ratio_two_term"] = rep.max_ratio("two_term_bound")
    return rep


@_timed
def verify_kloosterman(spec, cap=None, partitions=1, psi=None):
    """All b != 0: direct vs reduced K_B(b), its bound, and the hyper-Kloosterman bound."""
    rep = VerificationReport("kloosterman", spec.to_json())
    A = algebra(spec)
    psi = psi or default_psi(spec)
    zero = bounds.Bound.of(spec.q)
    for b in A.base.ordered:
        if b == 0:
            continue
        routes = kloosterman_B(spec, b, psi, cap=cap, partitions=partitions)
        diff = abs(complex(routes.direct) - complex(routes.closed))
        tau = max(routes.direct.tolerance(), routes.closed.tolerance())
        rep.records.append(
            Record("kloosterman/reduction_agreement", spec.label, routes.direct, routes.closed, diff, tau,
                   PASS if diff <= tau else FAIL, b=b)
        )
        mag = routes.direct.magnitude()
        kb = bounds.kloosterman_bound(spec)
        rep.records.append(
            Record("kloosterman/kloosterman_bound", spec.label, routes.direct, None, mag, kb,
                   PASS if kb.admits_value(mag, routes.direct.tolerance()) else FAIL, b=b)
        )
        hk = hyper_kloosterman(A.base, spec.m, b, psi, cap, partitions)
        db = bounds.deligne_bound(spec.q, spec.m)
        rep.records.append(
            Record("kloosterman/hyper_kloosterman_bound", spec.label, hk, None, hk.magnitude(), db,
                   PASS if db.admits_value(hk.magnitude(), hk.tolerance()) else FAIL, b=b, r=spec.m)
        )
    for res in identity_suite(spec, cap, partitions, psi):
        if not res.name.startswith("kloosterman"):
            continue
        rep.records.append(
            Record(f"kloosterman/{res.name}_exact", spec.label, _cyc(res.lhs), _cyc(res.rhs), res.residual, zero,
                   PASS if res.residual == 0 else FAIL, b=res.inputs.get("b"))
        )
    return rep


def _cyc(coeffs):
    return "[" + " ".join(str(c) for c in coeffs) + "]"


@_timed
def verify_trace_units(spec, cap=None, partitions=1):
    """Unit trace counts, norm-zero counts (both closed forms), and the full unit sum."""
    rep = VerificationReport("trace_units", spec.to_json())
    F = algebra(spec).base
    zero = bounds.Bound.of(spec.q)
    for a in F.ordered:
        rec = count_trace_units(spec, a, cap=cap, partitions=partitions)
        err = abs(rec.brute - rec.formula)
        rep.records.append(
            Record("trace_units/unit_trace_exact", spec.label, rec.brute, rec.formula, err, zero,
                   PASS if err == 0 else FAIL, a=a)
        )
        rec = count_norm_zero(spec, a, cap=cap, partitions=partitions)
        err = abs(rec.brute - rec.formula)
        rep.records.append(
            Record("trace_units/norm_zero_exact", spec.label, rec.brute, rec.formula, err, zero,
                   PASS if err == 0 else FAIL, a=a, b=0)
        )
        ie = rec.extras["inclusion_exclusion"]
        err = abs(Fraction(rec.brute) - Fraction(ie))
        if err == 0:
            status = PASS
        elif not spec.is_etale:
            status = KNOWN_MISMATCH
        else:
            status = FAIL
        rep.records.append(
            Record("trace_units/norm_zero_inclusion_exclusion", spec.label, rec.brute, ie, err, zero,
                   status, a=a, b=0)
        )
    full = trace_norm_histogram(spec, False, cap, partitions)
    total = sum(full.values())
    rep.records.append(
        Record("trace_units/partition_total", spec.label, total, spec.size, abs(total - spec.size), zero,
               PASS if total == spec.size else FAIL)
    )
    routes = full_unit_sum(spec, cap=cap, partitions=partitions)
    diff = abs(complex(routes.direct) - complex(routes.closed))
    tau = routes.direct.tolerance()
    rep.records.append(
        Record("trace_units/full_unit_sum", spec.label, routes.direct, routes.closed, diff, tau,
               PASS if diff <= tau else FAIL)
    )
    return rep


def _sweep_targets(spec, r, sample, cap):
    units = algebra(spec).units
    cap = DEFAULT_CAP if cap is None else cap
    full_cost = len(units) ** r
    if full_cost <= cap:
        return units, None
    return units[:sample], f"first {sample} units in enumeration order (full sweep {full_cost} > cap {cap})"


@_timed
def verify_product_trace(spec, r, sample=DEFAULT_SAMPLE, cap=None, partitions=1, psi=None, explore=False):
    """Sweep x in B* (or a deterministic sample) for the product-trace sum and count.

    Regular x: the proven bound on |K(B, r, x)|, the finer multiplicity bound,
    the etale factorization when applicable, and conjecture margins for a != 0.
    With ``explore=True`` conjecture margins are also reported for a = 0 and for
    non-regular x; those rows never fail.
    """
    rep = VerificationReport("product_trace", spec.to_json())
    A = algebra(spec)
    psi = psi or default_psi(spec)
    zero = bounds.Bound.of(spec.q)
    targets, note = _sweep_targets(spec, r, sample, cap)
    if note:
        rep.header["sample"] = note
    U = len(A.units)
    main = Fraction(U ** (r - 1), spec.q)
    conj = bounds.product_trace_conjecture_bound(spec, r)
    per_x_cap = U ** (r - 1)
    for x in targets:
        xs = format_element(x)
        hist = product_trace_histogram(spec, r, x, cap, partitions)
        tally = _tally_from_histogram(hist, psi)
        K = tally.evaluate()
        total = sum(hist.values())
        rep.records.append(
            Record("product_trace/sum_over_traces", spec.label, total, per_x_cap, abs(total - per_x_cap), zero,
                   PASS if total == per_x_cap else FAIL, r=r, x=xs)
        )
        regular = is_regular(spec, x)
        mag = K.magnitude()
        tol = K.tolerance()
        if regular:
            zb = zelingher_bound(spec, x, r)
            rep.records.append(
                Record("product_trace/regular_bound", spec.label, K, None, mag, zb.coarse,
                       PASS if zb.coarse.admits_value(mag, tol) else FAIL, r=r, x=xs)
            )
            rep.records.append(
                Record("product_trace/multiplicity_bound", spec.label, K, None, mag, zb.fine,
                       PASS if zb.fine.admits_value(mag, tol) else FAIL, r=r, x=xs)
            )
            if spec.is_etale:
                fact = product_trace_etale_tally(spec, r, x, psi, cap)
                lhs, rhs = tally.cyclotomic(), fact.cyclotomic()
                diff = max((abs(u - v) for u, v in zip(lhs, rhs)), default=0)
                rep.records.append(
                    Record("product_trace/etale_factorization", spec.label, K, fact.evaluate(), diff, zero,
                           PASS if diff == 0 else FAIL, r=r, x=xs)
                )
        else:
            trivial = bounds.Bound.of(spec.q, (per_x_cap, 0))
            rep.records.append(
                Record("product_trace/non_regular_observation", spec.label, K, None, mag, trivial,
                       PASS if trivial.admits_value(mag, tol) else FAIL, r=r, x=xs)
            )
        for a in A.base.ordered:
            in_scope = regular and a != 0
            if not in_scope and not explore:
                continue
            n_a = hist.get(a, 0)
            err = abs(Fraction(n_a) - main)
            status = PASS if conj.admits(err) else CONJECTURE_VIOLATION
            check = "conjecture" if in_scope else "conjecture_outside_hypotheses"
            rep.records.append(
                Record(f"product_trace/{check}", spec.label, n_a, main, err, conj, status, a=a, r=r, x=xs)
            )
    return rep


SUITES = ("norm_trace", "kloosterman", "trace_units", "product_trace")


def run_suite(name, specs, r=2, cap=None, partitions=1, sample=DEFAULT_SAMPLE):
    """Run one suite (or ``"all"``) over several specs; reports in deterministic order."""
    names = SUITES if name == "all" else (name,)
    for nm in names:
        if nm not in SUITES:
            raise ValueError(f"unknown suite {nm!r}; choose from {SUITES + ('all',)}")
    out = []
    for spec in specs:
        for nm in names:
            if nm == "product_trace":
                out.append(verify_product_trace(spec, r, sample, cap, partitions))
            elif nm in ("norm_trace",) and spec.n < 2:
                continue
            else:
                out.append(_SUITE_FUNCS[nm](spec, cap, partitions))
    return out


_SUITE_FUNCS = {
    "norm_trace": verify_norm_trace,
    "kloosterman": verify_kloosterman,
    "trace_units": verify_trace_units,
}


def standard_instances():
    """The standard verification set, smallest first within each family."""
    raw = [
        (2, 1, [(1, 1), (1, 1)]),
        (3, 1, [(1, 1), (1, 1)]),
        (2, 1, [(1, 2)]),
        (3, 1, [(1, 2)]),
        (2, 1, [(1, 1), (1, 2)]),
        (2, 1, [(2, 1)]),
        (3, 1, [(2, 1)]),
        (2, 2, [(2, 1)]),
        (2, 1, [(2, 1), (1, 1)]),
        (2, 1, [(2, 1), (1, 2)]),
        (2, 1, [(3, 1)]),
        (3, 1, [(2, 2)]),
    ]
    return [AlgebraSpec(p, e, tuple(f)) for p, e, f in raw]


# -- serialization ----------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, SumValue):
        return format_complex(complex(v))
    if isinstance(v, bounds.Bound):
        return f"{v.value:.12g}"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _row(rec):
    return {
        "suite": rec.suite,
        "spec": rec.spec,
        "a": _fmt(rec.a),
        "b": _fmt(rec.b),
        "r": _fmt(rec.r),
        "value": _fmt(rec.value),
        "main_term": _fmt(rec.main_term),
        "error": _fmt(rec.error),
        "bound": _fmt(rec.bound),
        "slack": _fmt(rec.slack),
        "status": rec.status,
        "x": _fmt(rec.x),
    }


def emit_report(reports, fmt="csv", path=None):
    """Serialize one report or a list of them; byte-stable for identical inputs."""
    if isinstance(reports, VerificationReport):
        reports = [reports]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rep in reports:
            for rec in rep.records:
                w.writerow(_row(rec))
        text = buf.getvalue()
    elif fmt == "structured":
        doc = [
            {
                "suite_name": rep.suite_name,
                "spec": json.loads(rep.spec_summary),
                "header": rep.header,
                "totals": rep.totals,
                "records": [_row(rec) for rec in rep.records],
            }
            for rep in reports
        ]
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    elif fmt == "table":
        lines = []
        for rep in reports:
            spec = AlgebraSpec(**{k: v for k, v in json.loads(rep.spec_summary).items()})
            totals = ", ".join(f"{k}={v}" for k, v in rep.totals.items())
            lines.append(f"== {rep.suite_name} on {spec.label}: {totals}")
            for k, v in sorted(rep.header.items()):
                lines.append(f"   {k}: {_fmt(v)}")
            for rec in rep.records:
                if rec.status != PASS:
                    row = _row(rec)
                    lines.append("   " + " ".join(f"{c}={row[c]}" for c in CSV_COLUMNS if row[c]))
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))
