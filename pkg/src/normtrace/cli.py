"""Command-line frontend: ``normtrace <subcommand> [options]``.

Exit codes: 0 success, 1 a proven bound or exact identity failed, 2 usage
error, 3 enumeration cap exceeded.  Conjecture violations exit 0 with a
warning on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import warnings
from pathlib import Path

from . import bounds, chars
from .chars import (
    MultiplicativeCharacter,
    all_multiplicative_characters,
    format_complex,
    gauss_sum,
    hasse_davenport_check,
)
from .counts import (
    count_norm_trace,
    count_norm_zero,
    count_poly_trace,
    count_product_trace,
    count_trace_units,
)
from .errors import CapExceeded, FieldMismatch, NumericalIntegrityError, SpecError
from .gf import construct_field, poly_str
from .ssalg import algebra, format_element, is_regular, load_spec, parse_element, parse_spec
from .sums import (
    default_psi,
    full_unit_sum,
    gauss_sum_gl,
    hyper_kloosterman,
    kloosterman_B,
    poly_trace_kloosterman,
    poly_trace_reference_bound,
    product_trace_K,
    zelingher_bound,
)
from .verify import FAIL, SUITES, emit_report, run_suite, verify_product_trace

log = logging.getLogger("normtrace")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -- output ---------------------------------------------------------------------------


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, complex):
        return format_complex(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (bounds.Bound, chars.SumValue)):
        return str(v)
    return str(v)


def render(columns, rows, fmt):
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(cells)
        return buf.getvalue()
    if fmt == "structured":
        return json.dumps([dict(zip(columns, c)) for c in cells], indent=2) + "\n"
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _write(args, text):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# -- argument helpers -------------------------------------------------------------------


def _spec(args, required=True):
    if args.spec and args.spec_file:
        raise UsageError("--spec and --spec-file are mutually exclusive")
    try:
        if args.spec:
            return parse_spec(args.spec)
        if args.spec_file:
            return load_spec(args.spec_file)
    except OSError as exc:
        raise UsageError(f"--spec-file: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"{'--spec' if args.spec else '--spec-file'}: {exc}") from None
    if required:
        raise UsageError("one of --spec or --spec-file is required")
    return None


def _psi(args, field_or_spec):
    try:
        return default_psi(field_or_spec, args.psi_twist)
    except ValueError as exc:
        raise UsageError(f"--psi-twist: {exc}") from None


def _method(args):
    return {"direct": "direct", "formula": "closed", "both": "both"}[args.method]


def _poly(text):
    try:
        return tuple(int(c) for c in text.replace(" ", "").split(",") if c != "")
    except ValueError:
        raise UsageError(f"--f: expected comma-separated integers, got {text!r}") from None


def _base_values(spec, value, name, nonzero=False):
    q = spec.q
    if value is None:
        return [v for v in algebra(spec).base.ordered if v or not nonzero]
    if not 0 <= value < q:
        raise UsageError(f"--{name} must lie in 0..{q - 1}, got {value}")
    if nonzero and value == 0:
        raise UsageError(f"--{name} must be nonzero")
    return [value]


def _status(ok):
    return "pass" if ok else FAIL


# -- subcommands -----------------------------------------------------------------------


def cmd_field(args):
    if args.spec or args.spec_file:
        F = algebra(_spec(args)).base
    elif args.p is not None:
        F = construct_field(args.p, args.k)
    else:
        raise UsageError("field needs --p/--k or a spec")
    rows = []
    for x in F.ordered:
        rows.append({
            "element": x,
            "coeffs": " ".join(str(c) for c in F.coeffs(x)),
            "log": F.log(x) if x else None,
            "abs_trace": F.absolute_trace_table[x],
            "provenance": "brute",
        })
    text = render(["element", "coeffs", "log", "abs_trace", "provenance"], rows, args.format)
    if args.format == "table":
        prime = construct_field(F.p, 1)
        text = f"# {F!r} modulus {poly_str(prime, F.modulus)}, generator {F.format(F.generator)}\n" + text
    _write(args, text)
    return EXIT_OK


def cmd_gauss(args):
    if args.spec or args.spec_file:
        F = algebra(_spec(args)).base
    elif args.p is not None:
        F = construct_field(args.p, args.k)
    else:
        raise UsageError("gauss needs --p/--k or a spec")
    psi = _psi(args, F)
    chis = all_multiplicative_characters(F) if args.chi is None else [MultiplicativeCharacter(F, args.chi)]
    rows, ok = [], True
    for chi in chis:
        g = gauss_sum(chi, psi)
        rows.append({"quantity": "G", "chi": chi.index, "value": complex(g), "provenance": "brute"})
        if args.gl:
            rv = gauss_sum_gl(args.gl, F, chi, psi, _method(args), args.max_summands, args.partitions)
            agree = rv.agree() if rv.direct is not None and rv.closed is not None else None
            ok &= agree is not False
            rows.append({
                "quantity": f"G_GL{args.gl}",
                "chi": chi.index,
                "value": complex(rv.direct if rv.direct is not None else rv.closed),
                "reference": complex(rv.closed) if rv.closed is not None else None,
                "status": None if agree is None else _status(agree),
                "provenance": _route_provenance(rv),
            })
        if args.hd:
            lhs, rhs = hasse_davenport_check(chi, psi, args.hd)
            agree = lhs.close_to(rhs)
            ok &= agree
            rows.append({
                "quantity": f"HD_m{args.hd}",
                "chi": chi.index,
                "value": complex(lhs),
                "reference": complex(rhs),
                "status": _status(agree),
                "provenance": "both-agree" if agree else "both-DISAGREE",
            })
    _write(args, render(["quantity", "chi", "value", "reference", "status", "provenance"], rows, args.format))
    return EXIT_OK if ok else EXIT_FAIL


def _route_provenance(rv):
    if rv.direct is not None and rv.closed is not None:
        return "both-agree" if rv.agree() else "both-DISAGREE"
    return "brute" if rv.direct is not None else "formula"


def cmd_count(args):
    spec = _spec(args)
    method = _method(args)
    cols = ["quantity", "a", "b", "value", "main_term", "error", "bound", "status", "notes", "provenance"]
    rows, ok = [], True
    if args.units:
        for a in _base_values(spec, args.a, "a"):
            rec = count_trace_units(spec, a, method, args.max_summands, args.partitions)
            ok &= rec.routes_agree
            rows.append(_count_row(rec, a, None, rec.routes_agree))
    elif args.b == 0:
        for a in _base_values(spec, args.a, "a"):
            rec = count_norm_zero(spec, a, method, args.max_summands, args.partitions)
            ok &= rec.routes_agree
            row = _count_row(rec, a, 0, rec.routes_agree)
            row["notes"] = " ".join(rec.notes + (f"inclusion_exclusion={rec.extras['inclusion_exclusion']}",))
            rows.append(row)
    else:
        psi = _psi(args, spec)
        for a in _base_values(spec, args.a, "a"):
            for b in _base_values(spec, args.b, "b", nonzero=True):
                rec = count_norm_trace(spec, a, b, method, psi, args.max_summands, args.partitions)
                good = rec.routes_agree and rec.within_bound
                ok &= good
                rows.append(_count_row(rec, a, b, good))
    _write(args, render(cols, rows, args.format))
    return EXIT_OK if ok else EXIT_FAIL


def _count_row(rec, a, b, good):
    return {
        "quantity": rec.label,
        "a": a,
        "b": b,
        "value": rec.value,
        "main_term": rec.main_term,
        "error": rec.error,
        "bound": rec.bound,
        "status": _status(good),
        "notes": " ".join(rec.notes),
        "provenance": rec.provenance,
    }


def cmd_kloosterman(args):
    spec = _spec(args)
    psi = _psi(args, spec)
    A = algebra(spec)
    cols = ["quantity", "b", "value", "reference", "bound", "status", "provenance"]
    rows, ok = [], True
    kb = bounds.kloosterman_bound(spec)
    db = bounds.deligne_bound(spec.q, spec.m)
    for b in _base_values(spec, args.b, "b", nonzero=True):
        rv = kloosterman_B(spec, b, psi, _method(args), args.max_summands, args.partitions)
        val = rv.direct if rv.direct is not None else rv.closed
        good = kb.admits_value(val.magnitude(), val.tolerance())
        if rv.direct is not None and rv.closed is not None:
            good &= rv.agree()
        ok &= good
        rows.append({
            "quantity": "K_B", "b": b, "value": complex(val),
            "reference": complex(rv.closed) if rv.closed is not None else None,
            "bound": kb, "status": _status(good), "provenance": _route_provenance(rv),
        })
        hk = hyper_kloosterman(A.base, spec.m, b, psi, args.max_summands, args.partitions)
        good = db.admits_value(hk.magnitude(), hk.tolerance())
        ok &= good
        rows.append({
            "quantity": f"K_hyper_m{spec.m}", "b": b, "value": complex(hk), "bound": db,
            "status": _status(good), "provenance": "brute",
        })
    if args.full:
        rv = full_unit_sum(spec, psi, _method(args), args.max_summands, args.partitions)
        good = rv.agree() if rv.direct is not None and rv.closed is not None else True
        ok &= good
        val = rv.direct if rv.direct is not None else rv.closed
        rows.append({
            "quantity": "K_B*", "value": complex(val),
            "reference": complex(rv.closed) if rv.closed is not None else None,
            "status": _status(good), "provenance": _route_provenance(rv),
        })
    _write(args, render(cols, rows, args.format))
    return EXIT_OK if ok else EXIT_FAIL


def _element(args, spec):
    if args.x is None:
        return None
    try:
        return parse_element(spec, args.x)
    except ValueError as exc:
        raise UsageError(f"--x: {exc}") from None


def cmd_product_trace(args):
    spec = _spec(args)
    psi = _psi(args, spec)
    r = args.r or 2
    if r < 2:
        raise UsageError("--r must be >= 2")
    x = _element(args, spec)
    if x is None:
        raise UsageError("--x is required (element literal, e.g. '0,1/1,1')")
    A = algebra(spec)
    if not A.is_unit(x):
        raise UsageError("--x must be invertible")
    regular = is_regular(spec, x)
    K = product_trace_K(spec, r, x, psi, args.max_summands, args.partitions)
    cols = ["quantity", "x", "r", "a", "value", "main_term", "error", "bound", "status", "notes", "provenance"]
    rows, ok, violations = [], True, 0
    if regular:
        zb = zelingher_bound(spec, x, r)
        good = zb.coarse.admits_value(K.magnitude(), K.tolerance())
        ok &= good
        rows.append({"quantity": "K(B,r,x)", "x": format_element(x), "r": r, "value": complex(K),
                     "bound": zb.coarse, "status": _status(good), "notes": "regular", "provenance": "brute"})
        good = zb.fine.admits_value(K.magnitude(), K.tolerance())
        ok &= good
        rows.append({"quantity": "K(B,r,x) multiplicity", "x": format_element(x), "r": r, "value": complex(K),
                     "bound": zb.fine, "status": _status(good), "notes": "regular", "provenance": "brute"})
    else:
        rows.append({"quantity": "K(B,r,x)", "x": format_element(x), "r": r, "value": complex(K),
                     "notes": "non-regular", "provenance": "brute"})
    for a in _base_values(spec, args.a, "a"):
        rec = count_product_trace(spec, r, x, a, args.max_summands, args.partitions)
        in_scope = regular and a != 0
        within = rec.within_bound
        if in_scope and not within:
            violations += 1
        status = ("pass" if within else "conjecture-violation") if in_scope else None
        rows.append({"quantity": rec.label, "x": format_element(x), "r": r, "a": a, "value": rec.value,
                     "main_term": rec.main_term, "error": rec.error, "bound": rec.bound, "status": status,
                     "notes": " ".join(rec.notes), "provenance": rec.provenance})
    _write(args, render(cols, rows, args.format))
    if violations:
        print(f"warning: {violations} conjecture violation(s)", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_poly(args):
    spec = _spec(args)
    if args.f is None:
        raise UsageError("--f is required (coefficients, constant first)")
    f = _poly(args.f)
    cols = ["quantity", "a", "b", "value", "main_term", "error", "bound", "notes", "provenance"]
    rows = []
    b = args.b
    if b is not None:
        _base_values(spec, b, "b")
    for a in _base_values(spec, args.a, "a"):
        rec = count_poly_trace(spec, f, a, b, args.max_summands)
        rows.append({"quantity": rec.label, "a": a, "b": b, "value": rec.value, "main_term": rec.main_term,
                     "error": rec.error, "bound": rec.bound, "notes": " ".join(rec.notes),
                     "provenance": rec.provenance})
    if b:
        K = poly_trace_kloosterman(spec, f, b, _psi(args, spec), args.max_summands)
        ref = poly_trace_reference_bound(spec, f)
        rows.append({"quantity": "K_B,f(b)", "b": b, "value": complex(K), "bound": ref,
                     "notes": "reference-only", "provenance": "brute"})
    _write(args, render(cols, rows, args.format))
    return EXIT_OK


def _suite_specs(args):
    if args.spec_dir:
        d = Path(args.spec_dir)
        if not d.is_dir():
            raise UsageError(f"--spec-dir: {d} is not a directory")
        files = sorted(d.glob("*.json"))
        if not files:
            raise UsageError(f"--spec-dir: no *.json specs in {d}")
        return [load_spec(p) for p in files]
    return [_spec(args)]


def _report_exit(reports):
    failures = sum(1 for rep in reports for rec in rep.records if rec.status == FAIL)
    violations = sum(len(rep.conjecture_violations) for rep in reports)
    for rep in reports:
        log.info("%s on %s: %s in %.2fs", rep.suite_name, rep.spec_summary, rep.totals, rep.duration)
    if violations:
        print(f"warning: {violations} conjecture violation(s)", file=sys.stderr)
    if failures:
        print(f"error: {failures} failed check(s)", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args):
    suite = args.suite.replace("-", "_")
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"--suite must be one of {', '.join(SUITES + ('all',))}, got {args.suite!r}")
    specs = _suite_specs(args)
    reports = run_suite(suite, specs, args.r or 2, args.max_summands, args.partitions, args.sample)
    _write(args, emit_report(reports, args.format))
    return _report_exit(reports)


def cmd_explore(args):
    specs = _suite_specs(args)
    r = args.r or 2
    reports = [
        verify_product_trace(s, r, args.sample, args.max_summands, args.partitions, explore=args.outside_hypotheses)
        for s in specs
    ]
    _write(args, emit_report(reports, args.format))
    return _report_exit(reports)


COMMANDS = {
    "field": cmd_field,
    "gauss": cmd_gauss,
    "count": cmd_count,
    "kloosterman": cmd_kloosterman,
    "product-trace": cmd_product_trace,
    "poly": cmd_poly,
    "verify": cmd_verify,
    "explore": cmd_explore,
}


# -- parser ---------------------------------------------------------------------------


def _positive(name):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {v}")
        return v

    return conv


def _tolerance(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--tolerance must be a number, got {text!r}") from None
    if not (0 < v <= 1e-3) or math.isnan(v):
        raise argparse.ArgumentTypeError(f"--tolerance must lie in (0, 1e-3], got {v}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="inline algebra spec, e.g. '{p:2,e:1,factors:[[2,1]]}'")
    common.add_argument("--spec-file", help="path to a JSON algebra spec")
    common.add_argument("--a", type=int)
    common.add_argument("--b", type=int)
    common.add_argument("--r", type=int)
    common.add_argument("--x", help="element literal: rows split by '/', entries by ',', parts by '|'")
    common.add_argument("--f", help="polynomial coefficients, constant first, comma separated")
    common.add_argument("--method", choices=("direct", "formula", "both"), default="both")
    common.add_argument("--format", choices=("csv", "table", "structured"), default="table")
    common.add_argument("--output", help="write results here instead of stdout")
    common.add_argument("--max-summands", type=_positive("--max-summands"), default=None)
    common.add_argument("--partitions", type=_positive("--partitions"), default=os.cpu_count() or 1)
    common.add_argument("--tolerance", type=_tolerance, default=None)
    common.add_argument("--psi-twist", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="normtrace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", parents=[common], help="inspect a constructed field")
    p.add_argument("--p", type=int)
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("gauss", parents=[common], help="Gauss sums, GL Gauss sums, Hasse-Davenport")
    p.add_argument("--p", type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--chi", type=int, help="multiplicative character index (default: all)")
    p.add_argument("--gl", type=_positive("--gl"), help="also compute the GL_d Gauss sum for this d")
    p.add_argument("--hd", type=_positive("--hd"), help="also check Hasse-Davenport in degree m")

    p = sub.add_parser("count", parents=[common], help="N_B(a,b), N_B(a,0), N_B*(a)")
    p.add_argument("--units", action="store_true", help="count units by trace only")

    p = sub.add_parser("kloosterman", parents=[common], help="K_B(b), hyper-Kloosterman, full unit sum")
    p.add_argument("--full", action="store_true", help="also the full unit sum")

    sub.add_parser("product-trace", parents=[common], help="K(B,r,x) and N(B,r,x,a)")
    sub.add_parser("poly", parents=[common], help="polynomial-trace counts and sums")

    for name, helptext in (("verify", "run verification suites"), ("explore", "product-trace conjecture sweeps")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--spec-dir", help="directory of *.json specs")
        p.add_argument("--sample", type=_positive("--sample"), default=256)
        if name == "verify":
            p.add_argument("--suite", default="all")
        else:
            p.add_argument("--outside-hypotheses", action="store_true",
                           help="also report a = 0 and non-regular x")
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    old_tol = chars.TOLERANCE
    if args.tolerance is not None:
        chars.TOLERANCE = args.tolerance
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return COMMANDS[args.command](args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NumericalIntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, SpecError, FieldMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        chars.TOLERANCE = old_tol


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
