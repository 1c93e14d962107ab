"""Finite semi-simple algebras B = prod_i M_{d_i}(GF(q^{n_i})) over GF(q).

Matrices are tuples of row tuples of raw field ints.  An element of B is a
tuple of matrices, one per factor.  The canonical trace and norm are the
field trace of the matrix trace and the field norm of the determinant,
summed / multiplied across factors.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import re
from dataclasses import dataclass
from functools import cached_property

from .errors import CapExceeded, SpecError
from .gf import (
    ENUMERATION_CAP,
    FieldElement,
    construct_field,
    enumerate_irreducibles,
    is_prime,
    poly_add,
    poly_divmod,
    poly_mul,
    poly_str,
    poly_sub,
    poly_trim,
    raw,
    tower,
)

CHARPOLY_MAX_DIM = 6


@dataclass(frozen=True)
class AlgebraSpec:
    p: int
    e: int
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple(f) for f in self.factors))
        if not is_prime(self.p):
            raise SpecError(f"p={self.p} is not prime")
        if self.e < 1:
            raise SpecError(f"e={self.e} must be >= 1")
        if not self.factors:
            raise SpecError("factors: list is empty")
        for i, (d, n) in enumerate(self.factors):
            if d < 1 or n < 1:
                raise SpecError(f"factors[{i}]=[{d}, {n}]: d and n must be >= 1")

    @property
    def q(self):
        return self.p**self.e

    @property
    def n(self):
        return sum(d * d * ni for d, ni in self.factors)

    @property
    def m(self):
        return sum(d * ni for d, ni in self.factors)

    @property
    def sum_d(self):
        return sum(d for d, _ in self.factors)

    @property
    def k(self):
        return len(self.factors)

    @property
    def size(self):
        return self.q**self.n

    @property
    def unit_count(self):
        q = self.q
        out = 1
        for d, ni in self.factors:
            for j in range(d):
                out *= q ** (d * ni) - q ** (j * ni)
        return out

    @property
    def is_etale(self):
        return all(d == 1 for d, _ in self.factors)

    @property
    def half_defect(self):
        """(n - m) / 2 = sum_i n_i * C(d_i, 2); always an integer."""
        return sum(ni * math.comb(d, 2) for d, ni in self.factors)

    @property
    def label(self):
        parts = []
        for d, ni in self.factors:
            fld = f"F_{self.q ** ni}"
            parts.append(fld if d == 1 else f"M_{d}({fld})")
        return "x".join(parts) + f"/F_{self.q}"

    def to_dict(self):
        return {"p": self.p, "e": self.e, "factors": [list(f) for f in self.factors]}

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))


_SPEC_KEYS = {"p", "e", "factors"}
_BARE_KEY = re.compile(r"([{,]\s*)([A-Za-z_]\w*)\s*:")


def _loads_lenient(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return json.loads(_BARE_KEY.sub(r'\1"\2":', text))
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed spec text: {exc}") from None


def _int_field(obj, key):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecError(f"{key}: expected an integer, got {v!r}")
    return v


def parse_spec(source, min_degree=2):
    """Parse a spec from JSON text (bare keys allowed) or a mapping.

    Schema: ``{"p": prime, "e": int >= 1, "factors": [[d, n], ...]}``; unknown
    keys are rejected.
    """
    obj = _loads_lenient(source) if isinstance(source, str) else source
    if not isinstance(obj, dict):
        raise SpecError("spec must be an object with keys p, e, factors")
    unknown = set(obj) - _SPEC_KEYS
    if unknown:
        raise SpecError(f"unknown keys: {sorted(unknown)}")
    missing = _SPEC_KEYS - set(obj)
    if missing:
        raise SpecError(f"missing keys: {sorted(missing)}")
    p, e = _int_field(obj, "p"), _int_field(obj, "e")
    factors = obj["factors"]
    if not isinstance(factors, list):
        raise SpecError("factors: expected a list of [d, n] pairs")
    pairs = []
    for i, f in enumerate(factors):
        if (
            not isinstance(f, list)
            or len(f) != 2
            or any(isinstance(v, bool) or not isinstance(v, int) for v in f)
        ):
            raise SpecError(f"factors[{i}]: expected an integer pair [d, n], got {f!r}")
        pairs.append(tuple(f))
    spec = AlgebraSpec(p, e, tuple(pairs))
    if spec.n < min_degree:
        raise SpecError(f"degree n={spec.n} is below the required minimum {min_degree}")
    return spec


def load_spec(path, min_degree=2):
    with open(path) as fh:
        return parse_spec(fh.read(), min_degree=min_degree)


@dataclass(frozen=True)
class AlgebraElement:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(tuple(tuple(r) for r in M) for M in self.parts))


# -- matrices over a field ------------------------------------------------------------


def mat_identity(d):
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def mat_zero(d):
    return tuple((0,) * d for _ in range(d))


def mat_scalar(d, c):
    return tuple(tuple(c if i == j else 0 for j in range(d)) for i in range(d))


def mat_add(F, A, B):
    return tuple(tuple(F.add(a, b) for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_mul(F, A, B):
    cols = list(zip(*B))
    add, mul = F.add, F.mul
    out = []
    for row in A:
        r = []
        for col in cols:
            s = 0
            for a, b in zip(row, col):
                if a and b:
                    s = add(s, mul(a, b))
            r.append(s)
        out.append(tuple(r))
    return tuple(out)


def mat_trace(F, A):
    s = 0
    for i in range(len(A)):
        s = F.add(s, A[i][i])
    return s


def mat_det(F, A):
    d = len(A)
    if d == 1:
        return A[0][0]
    if d == 2:
        return F.sub(F.mul(A[0][0], A[1][1]), F.mul(A[0][1], A[1][0]))
    M = [list(r) for r in A]
    det = 1
    for c in range(d):
        piv = next((r for r in range(c, d) if M[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = F.neg(det)
        det = F.mul(det, M[c][c])
        inv = F.inv(M[c][c])
        for r in range(c + 1, d):
            if M[r][c]:
                f = F.mul(M[r][c], inv)
                M[r] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[r], M[c])]
    return det


def mat_inv(F, A):
    d = len(A)
    M = [list(r) + list(e) for r, e in zip(A, mat_identity(d))]
    for c in range(d):
        piv = next((r for r in range(c, d) if M[r][c]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        inv = F.inv(M[c][c])
        M[c] = [F.mul(inv, x) for x in M[c]]
        for r in range(d):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[r], M[c])]
    return tuple(tuple(r[d:]) for r in M)


def mat_poly_eval(F, f, A):
    """f(A) by Horner's rule; f has coefficients in F."""
    d = len(A)
    acc = mat_zero(d)
    for c in reversed(f):
        acc = mat_add(F, mat_mul(F, acc, A), mat_scalar(d, c))
    return acc


def _solve(F, cols, target):
    """Coefficients c with sum c_j cols[j] == target, or None."""
    rows = len(target)
    k = len(cols)
    M = [[cols[j][i] for j in range(k)] + [target[i]] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = F.inv(M[r][c])
        M[r] = [F.mul(inv, x) for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    if any(M[i][k] for i in range(r, rows)):
        return None
    sol = [0] * k
    for i, c in enumerate(pivots):
        sol[c] = M[i][k]
    return sol


def _charpoly(F, A):
    d = len(A)
    # entries of tI - A as polynomials
    P = [
        [poly_trim((F.neg(A[i][j]), 1)) if i == j else poly_trim((F.neg(A[i][j]),)) for j in range(d)]
        for i in range(d)
    ]

    @functools.lru_cache(maxsize=None)
    def minor(row, mask):
        if row == d:
            return (1,)
        acc = ()
        avail = [j for j in range(d) if mask >> j & 1]
        for pos, j in enumerate(avail):
            if not P[row][j]:
                continue
            term = poly_mul(F, P[row][j], minor(row + 1, mask & ~(1 << j)))
            acc = poly_add(F, acc, term) if pos % 2 == 0 else poly_sub(F, acc, term)
        return acc

    return minor(0, (1 << d) - 1)


def _minpoly(F, A):
    d = len(A)
    powers = [mat_identity(d)]
    flat = [tuple(x for r in powers[0] for x in r)]
    while True:
        nxt = mat_mul(F, powers[-1], A)
        v = tuple(x for r in nxt for x in r)
        sol = _solve(F, flat, v)
        if sol is not None:
            return poly_trim(tuple(F.neg(c) for c in sol) + (1,))
        powers.append(nxt)
        flat.append(v)


def char_min_poly(F, A):
    """(characteristic polynomial, minimal polynomial) of a square matrix over F."""
    d = len(A)
    if d > CHARPOLY_MAX_DIM:
        raise CapExceeded("characteristic polynomial dimension", d, CHARPOLY_MAX_DIM)
    return _charpoly(F, A), _minpoly(F, A)


@dataclass(frozen=True)
class CharPolyFactorization:
    factors: tuple  # ((f, multiplicity), ...)

    @property
    def degrees(self):
        return tuple(len(f) - 1 for f, _ in self.factors)

    @property
    def multiplicities(self):
        return tuple(b for _, b in self.factors)

    @property
    def s(self):
        return len(self.factors)

    def format(self, F):
        return " * ".join(
            f"({poly_str(F, f)})" + (f"^{b}" if b > 1 else "") for f, b in self.factors
        )


def factor_charpoly(F, A):
    charpoly, _ = char_min_poly(F, A)
    rest = charpoly
    out = []
    for f in enumerate_irreducibles(F, len(A)):
        if len(rest) == 1:
            break
        if len(f) > len(rest):
            continue
        b = 0
        while True:
            quo, rem = poly_divmod(F, rest, f)
            if rem:
                break
            rest, b = quo, b + 1
        if b:
            out.append((f, b))
    if rest != (1,):
        raise ArithmeticError("charpoly did not factor completely")
    return CharPolyFactorization(tuple(out))


def is_regular_matrix(F, A):
    charpoly, minpoly = char_min_poly(F, A)
    return charpoly == minpoly


# -- the algebra -------------------------------------------------------------------------


class Algebra:
    """Field data and element operations for one :class:`AlgebraSpec`."""

    def __init__(self, spec):
        self.spec = spec
        self.base = construct_field(spec.p, spec.e)
        self.fields = [construct_field(spec.p, spec.e * ni) for _, ni in spec.factors]
        self.towers = [tower(self.base, F) for F in self.fields]
        self.dims = [d for d, _ in spec.factors]

    # per-part data ---------------------------------------------------------

    def _part_cap(self, i, cap):
        F, d = self.fields[i], self.dims[i]
        size = F.order ** (d * d)
        if size > cap:
            raise CapExceeded(f"matrices of factor {i} ({self.spec.label})", size, cap)

    @functools.lru_cache(maxsize=None)
    def part_matrices(self, i):
        """All d x d matrices of factor i, lexicographic in row-major entries."""
        self._part_cap(i, ENUMERATION_CAP)
        F, d = self.fields[i], self.dims[i]
        out = []
        for entries in itertools.product(F.ordered, repeat=d * d):
            out.append(tuple(tuple(entries[r * d:(r + 1) * d]) for r in range(d)))
        return tuple(out)

    @functools.lru_cache(maxsize=None)
    def part_trace_norm(self, i, units_only):
        """(matrix, base trace, base norm) for each matrix (or unit) of factor i."""
        F, tw = self.fields[i], self.towers[i]
        out = []
        for M in self.part_matrices(i):
            det = mat_det(F, M)
            if units_only and det == 0:
                continue
            out.append((M, tw.trace_table[mat_trace(F, M)], tw.norm_table[det]))
        return tuple(out)

    def part_units(self, i):
        return tuple(M for M, _, _ in self.part_trace_norm(i, True))

    # element operations -----------------------------------------------------

    def check(self, x):
        if len(x.parts) != self.spec.k:
            raise ValueError(f"element has {len(x.parts)} parts, algebra has {self.spec.k}")
        for i, (M, F, d) in enumerate(zip(x.parts, self.fields, self.dims)):
            if len(M) != d or any(len(r) != d for r in M):
                raise ValueError(f"part {i} must be {d}x{d}")
            if any(not 0 <= v < F.order for r in M for v in r):
                raise ValueError(f"part {i} has entries outside {F!r}")

    def identity(self):
        return AlgebraElement(tuple(mat_identity(d) for d in self.dims))

    def mul(self, x, y):
        return AlgebraElement(
            tuple(mat_mul(F, A, B) for F, A, B in zip(self.fields, x.parts, y.parts))
        )

    def add(self, x, y):
        return AlgebraElement(
            tuple(mat_add(F, A, B) for F, A, B in zip(self.fields, x.parts, y.parts))
        )

    def inv(self, x):
        return AlgebraElement(tuple(mat_inv(F, A) for F, A in zip(self.fields, x.parts)))

    def is_unit(self, x):
        return all(mat_det(F, A) for F, A in zip(self.fields, x.parts))

    def poly_eval(self, f, x):
        """f(x) for f with coefficients in the base field."""
        parts = []
        for F, tw, A in zip(self.fields, self.towers, x.parts):
            parts.append(mat_poly_eval(F, tuple(tw.embed(c) for c in f), A))
        return AlgebraElement(tuple(parts))

    def trace_raw(self, x, regular_rep=False):
        B = self.base
        s = 0
        for F, tw, d, A in zip(self.fields, self.towers, self.dims, x.parts):
            t = tw.trace_table[mat_trace(F, A)]
            if regular_rep:
                t = B.mul(d % B.p, t)
            s = B.add(s, t)
        return s

    def norm_raw(self, x, regular_rep=False):
        B = self.base
        out = 1
        for F, tw, d, A in zip(self.fields, self.towers, self.dims, x.parts):
            nm = tw.norm_table[mat_det(F, A)]
            if regular_rep:
                nm = B.pow(nm, d)
            out = B.mul(out, nm)
        return out

    def elements(self, units_only=False, start=0, stop=None):
        """Elements in deterministic order, optionally a [start, stop) slice."""
        total = self.spec.unit_count if units_only else self.spec.size
        if total > ENUMERATION_CAP:
            raise CapExceeded(f"{'units' if units_only else 'elements'} of {self.spec.label}", total, ENUMERATION_CAP)
        lists = [self.part_units(i) if units_only else self.part_matrices(i) for i in range(self.spec.k)]
        for parts in itertools.islice(itertools.product(*lists), start, stop):
            yield AlgebraElement(parts)

    @cached_property
    def units(self):
        return tuple(self.elements(units_only=True))

    @cached_property
    def unit_inverses(self):
        return tuple(self.inv(g) for g in self.units)

    @cached_property
    def unit_traces(self):
        return tuple(self.trace_raw(g) for g in self.units)

    def trace_of_product(self, x, y):
        """trace_raw(x * y) without forming the product."""
        B = self.base
        s = 0
        for F, tw, X, Y in zip(self.fields, self.towers, x.parts, y.parts):
            d = len(X)
            t = F.sum(F.mul(X[i][j], Y[j][i]) for i in range(d) for j in range(d))
            s = B.add(s, tw.trace_table[t])
        return s

    def format_element(self, x):
        return format_element(x)


@functools.lru_cache(maxsize=None)
def algebra(spec):
    return Algebra(spec)


def trace_norm(spec, x, regular_rep=False):
    """(Tr_B(x), N_B(x)) as base-field elements.

    Default: sum of field traces of matrix traces, product of field norms of
    determinants.  ``regular_rep=True`` gives the trace and norm of the
    multiplication-by-x map instead (d_i-scaled trace, d_i-th power norm).
    """
    A = algebra(spec)
    A.check(x)
    return (
        FieldElement(A.base, A.trace_raw(x, regular_rep)),
        FieldElement(A.base, A.norm_raw(x, regular_rep)),
    )


def enumerate_elements(spec, units_only=False, start=0, stop=None):
    return algebra(spec).elements(units_only, start, stop)


def is_regular(spec, x):
    """True iff every part has minimal polynomial equal to its characteristic polynomial."""
    A = algebra(spec)
    A.check(x)
    return all(is_regular_matrix(F, M) for F, M in zip(A.fields, x.parts))


def partition_ranges(total, parts):
    """Split range(total) into ``parts`` contiguous [start, stop) pieces."""
    parts = max(1, int(parts))
    step, extra = divmod(total, parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        out.append((start, stop))
        start = stop
    return out


def format_element(x):
    return "|".join("/".join(",".join(str(v) for v in row) for row in M) for M in x.parts)


def parse_element(spec, text):
    """Parse ``rows/separated,by,commas|next part``; entries are field ints."""
    A = algebra(spec)
    chunks = text.strip().split("|")
    if len(chunks) != spec.k:
        raise ValueError(f"element literal has {len(chunks)} parts, spec has {spec.k}")
    parts = []
    for i, chunk in enumerate(chunks):
        try:
            rows = tuple(tuple(int(v) for v in r.split(",")) for r in chunk.split("/"))
        except ValueError:
            raise ValueError(f"part {i}: entries must be integers, got {chunk!r}") from None
        parts.append(rows)
    x = AlgebraElement(tuple(parts))
    A.check(x)
    return x


def base_value(spec, v):
    """Coerce an int or base-field element for ``spec`` to a raw int."""
    return raw(algebra(spec).base, v)
