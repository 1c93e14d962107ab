"""Prime-power finite fields, field towers, and polynomials over them.

Field elements are plain ints in ``range(q)``.  The coefficient vector
``(c_0, ..., c_{k-1})`` of the residue representative (constant term first)
is read as base-``p`` digits with ``c_0`` least significant, so the prime
subfield is exactly ``range(p)``.  The *enumeration order* used to pick
moduli, generators and to list elements is different: coefficient vectors
ordered lexicographically with ``c_0`` varying slowest.  ``FiniteField.ordered``
gives the elements in that order.

Polynomials are tuples of field ints, constant term first, with no trailing
zeros (the zero polynomial is ``()``).
"""

from __future__ import annotations

import functools
import itertools
from functools import cached_property

from .errors import CapExceeded, FieldMismatch

TABLE_CAP = 1 << 20
ENUMERATION_CAP = 1 << 24
_ADD_TABLE_MAX = 256


def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n):
    """Distinct prime factors of ``n``, ascending."""
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def _digits(v, p, k):
    out = []
    for _ in range(k):
        v, r = divmod(v, p)
        out.append(r)
    return out


def _undigits(coeffs, p):
    v = 0
    for c in reversed(coeffs):
        v = v * p + c
    return v


class FiniteField:
    """The field with ``p**k`` elements, with dense exp/log tables.

    Build instances with :func:`construct_field`; the constructor trusts its
    arguments.
    """

    def __init__(self, p, k, modulus, generator, exp_table):
        self.p = p
        self.k = k
        self.order = p**k
        self.modulus = tuple(modulus)
        self.generator = generator
        self.exp_table = list(exp_table)
        n = self.order - 1
        log = [-1] * self.order
        for i, x in enumerate(self.exp_table):
            log[x] = i
        self.log_table = log
        # doubled so that log a + log b never needs a reduction
        self._exp = self.exp_table + self.exp_table
        self._n = n

    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    @property
    def field_id(self):
        return (self.p, self.k, self.modulus)

    # -- arithmetic on raw ints ------------------------------------------------

    def add(self, a, b):
        if self.p == 2:
            return a ^ b
        if self.k == 1:
            return (a + b) % self.p
        if self.order <= _ADD_TABLE_MAX:
            return self._add_table[a][b]
        return self._add_digits(a, b)

    def _add_digits(self, a, b):
        p = self.p
        out, place = 0, 1
        while a or b:
            a, ra = divmod(a, p)
            b, rb = divmod(b, p)
            out += ((ra + rb) % p) * place
            place *= p
        return out

    @cached_property
    def _add_table(self):
        q = self.order
        return [[self._add_digits(a, b) for b in range(q)] for a in range(q)]

    @cached_property
    def _neg_table(self):
        p, k = self.p, self.k
        return [_undigits([(-c) % p for c in _digits(a, p, k)], p) for a in range(self.order)]

    def neg(self, a):
        if self.p == 2:
            return a
        if self.k == 1:
            return (-a) % self.p
        return self._neg_table[a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp[self.log_table[a] + self.log_table[b]]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.exp_table[(-self.log_table[a]) % self._n]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        return self.exp_table[(self.log_table[a] * e) % self._n]

    def frobenius(self, a):
        return self.pow(a, self.p)

    def log(self, a):
        if a == 0:
            raise ValueError("discrete log of zero")
        return self.log_table[a]

    def sum(self, values):
        s = 0
        for v in values:
            s = self.add(s, v)
        return s

    def prod(self, values):
        s = 1
        for v in values:
            s = self.mul(s, v)
        return s

    # -- representation ----------------------------------------------------------

    def coeffs(self, a):
        return tuple(_digits(a, self.p, self.k))

    def from_coeffs(self, coeffs):
        coeffs = list(coeffs)
        if len(coeffs) > self.k or any(not 0 <= c < self.p for c in coeffs):
            raise ValueError(f"bad coefficient vector {coeffs} for {self!r}")
        return _undigits(coeffs, self.p)

    @cached_property
    def ordered(self):
        """All elements in enumeration order (coefficient vectors, c_0 slowest)."""
        return tuple(_undigits(c, self.p) for c in itertools.product(range(self.p), repeat=self.k))

    @cached_property
    def rank(self):
        """Inverse of :attr:`ordered`: element -> position in enumeration order."""
        r = [0] * self.order
        for i, x in enumerate(self.ordered):
            r[x] = i
        return r

    @cached_property
    def absolute_trace_table(self):
        """Trace down to the prime field, as an int in ``range(p)``, per element."""
        return tower(construct_field(self.p, 1), self).trace_table

    def element(self, value):
        return FieldElement(self, value)

    def format(self, a, var="t"):
        if self.k == 1:
            return str(a)
        terms = []
        for j, c in enumerate(self.coeffs(a)):
            if c == 0:
                continue
            if j == 0:
                terms.append(str(c))
            else:
                mono = var if j == 1 else f"{var}^{j}"
                terms.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(terms) or "0"


class FieldElement:
    """A field value bound to its field; mixed-field arithmetic is rejected."""

    __slots__ = ("field", "value")

    def __init__(self, field, value):
        if isinstance(value, FieldElement):
            _check_same(field, value.field)
            value = value.value
        if not 0 <= value < field.order:
            raise ValueError(f"{value} is not an element index of {field!r}")
        self.field = field
        self.value = value

    @property
    def coeffs(self):
        return self.field.coeffs(self.value)

    @property
    def field_id(self):
        return self.field.field_id

    def _other(self, other):
        if isinstance(other, FieldElement):
            _check_same(self.field, other.field)
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def _wrap(self, v):
        return FieldElement(self.field, v)

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(self.value, o))

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(o, self.value))

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.div(self.value, o))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __pow__(self, e):
        return self._wrap(self.field.pow(self.value, e))

    def inverse(self):
        return self._wrap(self.field.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field_id == other.field_id and self.value == other.value
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.field_id, self.value))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.field!r}<{self.field.format(self.value)}>"


def _check_same(f, g):
    if f is not g and f.field_id != g.field_id:
        raise FieldMismatch(f"elements of {f!r} and {g!r} cannot be combined without an embedding")


def raw(field, x):
    """Coerce an int or :class:`FieldElement` of ``field`` to a raw int."""
    if isinstance(x, FieldElement):
        _check_same(field, x.field)
        return x.value
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError(f"expected a field element or int, got {type(x).__name__}")
    if not 0 <= x < field.order:
        raise ValueError(f"{x} is not an element index of {field!r}")
    return x


# -- polynomials ------------------------------------------------------------------


def poly_trim(f):
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def poly_degree(f):
    return len(f) - 1


def poly_add(F, f, g):
    n = max(len(f), len(g))
    f = tuple(f) + (0,) * (n - len(f))
    g = tuple(g) + (0,) * (n - len(g))
    return poly_trim(F.add(a, b) for a, b in zip(f, g))


def poly_sub(F, f, g):
    return poly_add(F, f, tuple(F.neg(c) for c in g))


def poly_scale(F, f, c):
    return poly_trim(F.mul(c, a) for a in f)


def poly_mul(F, f, g):
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            if b:
                out[i + j] = F.add(out[i + j], F.mul(a, b))
    return poly_trim(out)


def poly_divmod(F, f, g):
    g = poly_trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(poly_trim(f))
    dg = len(g) - 1
    lead_inv = F.inv(g[-1])
    if len(r) <= dg:
        return (), tuple(r)
    q = [0] * (len(r) - dg)
    for i in range(len(r) - 1, dg - 1, -1):
        c = r[i]
        if c == 0:
            continue
        c = F.mul(c, lead_inv)
        q[i - dg] = c
        for j, b in enumerate(g):
            if b:
                r[i - dg + j] = F.sub(r[i - dg + j], F.mul(c, b))
    return poly_trim(q), poly_trim(r)


def poly_eval(F, f, x):
    acc = 0
    for c in reversed(f):
        acc = F.add(F.mul(acc, x), c)
    return acc


def poly_pow(F, f, e):
    out = (1,)
    for _ in range(e):
        out = poly_mul(F, out, f)
    return out


def poly_str(F, f, var="t"):
    if not f:
        return "0"
    terms = []
    for j in range(len(f) - 1, -1, -1):
        c = f[j]
        if c == 0:
            continue
        cs = F.format(c) if F.k == 1 else f"[{F.format(c, 'a')}]"
        if j == 0:
            terms.append(cs)
            continue
        mono = var if j == 1 else f"{var}^{j}"
        terms.append(mono if c == 1 else f"{cs}{mono}")
    return " + ".join(terms)


def is_irreducible(F, f):
    """Trial division against every monic irreducible of degree <= deg(f)/2."""
    f = poly_trim(f)
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    for g in enumerate_irreducibles(F, d // 2):
        if not poly_divmod(F, f, g)[1]:
            return False
    return True


def _monic_polys(F, k):
    for coeffs in itertools.product(F.ordered, repeat=k):
        yield tuple(coeffs) + (1,)


@functools.lru_cache(maxsize=None)
def _irreducibles_of_degree(F, k):
    if k == 1:
        return tuple(_monic_polys(F, 1))
    lower = [g for j in range(1, k // 2 + 1) for g in _irreducibles_of_degree(F, j)]
    out = []
    for f in _monic_polys(F, k):
        if all(poly_divmod(F, f, g)[1] for g in lower):
            out.append(f)
    return tuple(out)


def enumerate_irreducibles(F, d):
    """Monic irreducible polynomials over ``F`` of degree 1..d.

    Sorted by degree, then by coefficient vector in enumeration order.
    """
    if d < 1:
        return []
    if F.order**d > ENUMERATION_CAP:
        raise CapExceeded(f"irreducibles of degree <= {d} over {F!r}", F.order**d, ENUMERATION_CAP)
    return [f for k in range(1, d + 1) for f in _irreducibles_of_degree(F, k)]


# -- construction -----------------------------------------------------------------


def _prime_field(p):
    g = next(x for x in range(1, p) if _prime_order_is_full(x, p))
    exp = [1]
    for _ in range(p - 2):
        exp.append(exp[-1] * g % p)
    return FiniteField(p, 1, (0, 1), g, exp)


def _prime_order_is_full(x, p):
    n = p - 1
    return all(pow(x, n // ell, p) != 1 for ell in prime_factors(n)) if n > 1 else True


def _mulmod(Fp, a, b, mod):
    return poly_divmod(Fp, poly_mul(Fp, a, b), mod)[1]


def _powmod(Fp, a, e, mod):
    out, base = (1,), a
    while e:
        if e & 1:
            out = _mulmod(Fp, out, base, mod)
        base = _mulmod(Fp, base, base, mod)
        e >>= 1
    return out


@functools.lru_cache(maxsize=None)
def construct_field(p, k):
    """Build GF(p**k) with a deterministic modulus and generator.

    The modulus is the first monic irreducible of degree ``k`` in enumeration
    order; the generator is the first element in enumeration order whose
    multiplicative order is ``p**k - 1``.  Results are cached, so equal
    arguments return the same object.
    """
    if isinstance(p, bool) or not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p={p!r} is not a prime")
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValueError(f"k={k!r} must be a positive integer")
    if p**k > TABLE_CAP:
        raise CapExceeded(f"GF({p}^{k}) tables", p**k, TABLE_CAP)
    if k == 1:
        return _prime_field(p)
    return _build_extension(p, k)


def _build_extension(p, k):
    Fp = construct_field(p, 1)
    modulus = next(f for f in _monic_polys(Fp, k) if is_irreducible(Fp, f))
    q = p**k
    n = q - 1
    ells = prime_factors(n)
    generator = None
    for coeffs in itertools.product(range(p), repeat=k):
        g = poly_trim(coeffs)
        if not g:
            continue
        if all(_powmod(Fp, g, n // ell, modulus) != (1,) for ell in ells):
            generator = g
            break
    exp = []
    cur = (1,)
    for _ in range(n):
        exp.append(_undigits(cur, p))
        cur = _mulmod(Fp, cur, generator, modulus)
    return FiniteField(p, k, modulus, _undigits(generator, p), exp)


class TowerEmbedding:
    """The inclusion GF(p^e) -> GF(p^(e*m)) fixed by a root of the base modulus.

    ``root_image`` is the first element of the extension, in enumeration
    order, that is a root of the base field's modulus; it is the image of the
    base field's defining class ``t``.
    """

    def __init__(self, base, extension):
        if base.p != extension.p or extension.k % base.k:
            raise FieldMismatch(f"{base!r} is not a subfield of {extension!r}")
        self.base = base
        self.extension = extension
        self.degree = extension.k // base.k
        E = extension
        self.root_image = next(x for x in E.ordered if poly_eval(E, base.modulus, x) == 0)
        powers = [E.pow(self.root_image, j) for j in range(base.k)]
        image = []
        for x in range(base.order):
            acc = 0
            for c, r in zip(base.coeffs(x), powers):
                acc = E.add(acc, E.mul(c, r))
            image.append(acc)
        self._image = image
        self._pull = {y: x for x, y in enumerate(image)}

    @property
    def image_of_base_generator(self):
        return self.root_image

    def embed(self, x):
        return self._image[x]

    def pull(self, y):
        try:
            return self._pull[y]
        except KeyError:
            raise ValueError(f"{self.extension.format(y)} is not in the embedded base field") from None

    @cached_property
    def trace_table(self):
        E, qb, m = self.extension, self.base.order, self.degree
        out = []
        for y in range(E.order):
            s, z = 0, y
            for _ in range(m):
                s = E.add(s, z)
                z = E.pow(z, qb)
            out.append(self.pull(s))
        return out

    @cached_property
    def norm_table(self):
        E = self.extension
        e = (E.order - 1) // (self.base.order - 1)
        return [0] + [self.pull(E.pow(y, e)) for y in range(1, E.order)]


@functools.lru_cache(maxsize=None)
def tower(base, extension):
    return TowerEmbedding(base, extension)


def relative_trace(emb, x):
    """Sum of the conjugates x^(q^j), j < m, returned as a base-field element."""
    y = raw(emb.extension, x)
    return FieldElement(emb.base, emb.trace_table[y])


def relative_norm(emb, x):
    """Product of the conjugates x^(q^j), j < m, returned as a base-field element."""
    y = raw(emb.extension, x)
    return FieldElement(emb.base, emb.norm_table[y])


def discrete_log(F, x):
    """Exponent t in ``range(q-1)`` with ``generator**t == x``."""
    v = raw(F, x)
    if v == 0:
        raise ValueError("discrete log of zero is undefined")
    return F.log_table[v]
