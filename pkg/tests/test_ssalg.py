import itertools
import json

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from normtrace.errors import CapExceeded, SpecError
from normtrace.gf import construct_field, poly_divmod, poly_mul
from normtrace.ssalg import (
    AlgebraElement,
    AlgebraSpec,
    algebra,
    char_min_poly,
    enumerate_elements,
    factor_charpoly,
    format_element,
    is_regular,
    load_spec,
    mat_det,
    mat_identity,
    mat_mul,
    mat_poly_eval,
    parse_element,
    parse_spec,
    partition_ranges,
    trace_norm,
)

M2F2 = AlgebraSpec(2, 1, ((2, 1),))
F2F2 = AlgebraSpec(2, 1, ((1, 1), (1, 1)))
F4 = AlgebraSpec(2, 1, ((1, 2),))
M2F3 = AlgebraSpec(3, 1, ((2, 1),))

SMALL_SPECS = [
    F2F2,
    AlgebraSpec(3, 1, ((1, 1), (1, 1))),
    F4,
    AlgebraSpec(3, 1, ((1, 2),)),
    AlgebraSpec(2, 1, ((1, 1), (1, 2))),
    M2F2,
    M2F3,
    AlgebraSpec(2, 2, ((2, 1),)),
    AlgebraSpec(2, 1, ((2, 1), (1, 1))),
    AlgebraSpec(2, 1, ((1, 1), (1, 1), (1, 1))),
]


class TestSpec:
    def test_m2f2(self):
        s = parse_spec("{p:2, e:1, factors:[[2,1]]}")
        assert (s.n, s.m, s.k, s.unit_count) == (4, 2, 1, 6)

    def test_f2xf2(self):
        s = parse_spec('{"p": 2, "e": 1, "factors": [[1, 1], [1, 1]]}')
        assert (s.n, s.m, s.unit_count) == (2, 2, 1)

    def test_m2f9(self):
        s = parse_spec({"p": 3, "e": 1, "factors": [[2, 2]]})
        assert (s.n, s.m, s.unit_count) == (8, 4, 5760)

    @pytest.mark.parametrize(
        "text,needle",
        [
            ('{"p":4,"e":1,"factors":[[2,1]]}', "p=4"),
            ('{"p":2,"e":1,"factors":[[1,1]]}', "n=1"),
            ('{"p":2,"e":1,"factors":[]}', "factors"),
            ('{"p":2,"e":1,"factors":[[2,1]],"q":2}', "unknown"),
            ('{"p":2,"factors":[[2,1]]}', "missing"),
            ('{"p":2,"e":0,"factors":[[2,1]]}', "e=0"),
            ('{"p":2,"e":1,"factors":[[2]]}', "factors[0]"),
            ('{"p":2,"e":1,"factors":[[0,1]]}', "factors[0]"),
            ('{"p":"2","e":1,"factors":[[2,1]]}', "p"),
            ("{p:2,", "malformed"),
            ("[1,2]", "object"),
        ],
    )
    def test_rejections(self, text, needle):
        with pytest.raises(SpecError, match=None) as info:
            parse_spec(text)
        assert needle in str(info.value)

    def test_defect_is_integral(self):
        for s in SMALL_SPECS + [AlgebraSpec(3, 1, ((3, 2), (2, 1)))]:
            assert s.n - s.m == 2 * s.half_defect

    def test_roundtrip_file(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(M2F3.to_json())
        assert load_spec(path) == M2F3
        assert json.loads(M2F3.to_json()) == {"p": 3, "e": 1, "factors": [[2, 1]]}

    def test_label(self):
        assert AlgebraSpec(2, 1, ((2, 1), (1, 2))).label == "M_2(F_2)xF_4/F_2"

    @pytest.mark.parametrize("spec", SMALL_SPECS)
    def test_unit_count_matches_enumeration(self, spec):
        assert sum(1 for _ in enumerate_elements(spec, units_only=True)) == spec.unit_count


class TestTraceNorm:
    def test_identity(self):
        x = algebra(M2F2).identity()
        assert tuple(v.value for v in trace_norm(M2F2, x)) == (0, 1)

    def test_companion(self):
        x = parse_element(M2F2, "0,1/1,1")
        assert tuple(v.value for v in trace_norm(M2F2, x)) == (1, 1)

    def test_omega(self):
        w = construct_field(2, 2).generator
        x = AlgebraElement((((w,),),))
        assert tuple(v.value for v in trace_norm(F4, x)) == (1, 1)

    def test_regular_representation_variant(self):
        x = parse_element(M2F3, "2,0/0,1")
        tr, nm = trace_norm(M2F3, x)
        rtr, rnm = trace_norm(M2F3, x, regular_rep=True)
        assert (tr.value, nm.value) == (0, 2)
        assert (rtr.value, rnm.value) == (0, 1)

    @pytest.mark.parametrize("spec", SMALL_SPECS)
    def test_additive_and_multiplicative(self, spec):
        A = algebra(spec)
        F = A.base
        elems = list(enumerate_elements(spec))
        step = max(1, len(elems) // 40)
        for x in elems[::step]:
            for y in elems:
                assert A.trace_raw(A.add(x, y)) == F.add(A.trace_raw(x), A.trace_raw(y))
                assert A.norm_raw(A.mul(x, y)) == F.mul(A.norm_raw(x), A.norm_raw(y))

    @pytest.mark.parametrize("spec", SMALL_SPECS)
    def test_fibers(self, spec):
        A = algebra(spec)
        q = spec.q
        tr_count, nm_count = {}, {}
        for x in enumerate_elements(spec):
            t, nm = A.trace_raw(x), A.norm_raw(x)
            tr_count[t] = tr_count.get(t, 0) + 1
            if nm:
                nm_count[nm] = nm_count.get(nm, 0) + 1
            assert (nm != 0) == A.is_unit(x)
        assert tr_count == {a: spec.size // q for a in range(q)}
        assert nm_count == {b: spec.unit_count // (q - 1) for b in range(1, q)}

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            trace_norm(M2F2, AlgebraElement((((1,),),)))
        with pytest.raises(ValueError):
            trace_norm(M2F2, AlgebraElement((((1, 0), (0, 2)),)))


class TestEnumeration:
    def test_counts(self):
        assert sum(1 for _ in enumerate_elements(M2F2, True)) == 6
        assert sum(1 for _ in enumerate_elements(F2F2)) == 4
        assert sum(1 for _ in enumerate_elements(M2F3, True)) == 48

    def test_deterministic_and_sliceable(self):
        full = list(enumerate_elements(M2F3, True))
        chunks = []
        for start, stop in partition_ranges(len(full), 5):
            chunks.extend(enumerate_elements(M2F3, True, start, stop))
        assert chunks == full
        assert full == list(enumerate_elements(M2F3, True))

    def test_cap(self):
        big = AlgebraSpec(2, 1, ((5, 1),))
        with pytest.raises(CapExceeded) as info:
            next(enumerate_elements(big))
        assert str(2**25) in str(info.value)

    @given(st.integers(0, 500), st.integers(1, 16))
    def test_partition_ranges_cover(self, total, parts):
        rs = partition_ranges(total, parts)
        assert len(rs) == parts
        assert rs[0][0] == 0 and rs[-1][1] == total
        assert all(a[1] == b[0] for a, b in zip(rs, rs[1:]))


def _sympy_charpoly(p, A):
    t = sympy.Symbol("t")
    cp = sympy.Matrix(A).charpoly(t).as_expr()
    return tuple(int(c) % p for c in reversed(sympy.Poly(cp, t).all_coeffs()))


class TestCharMinPoly:
    def test_identity(self):
        F = construct_field(2, 1)
        cp, mp = char_min_poly(F, ((1, 0), (0, 1)))
        assert cp == (1, 0, 1) and mp == (1, 1)

    def test_companion(self):
        F = construct_field(2, 1)
        cp, mp = char_min_poly(F, ((0, 1), (1, 1)))
        assert cp == mp == (1, 1, 1)

    def test_diag_f3(self):
        F = construct_field(3, 1)
        cp, mp = char_min_poly(F, ((1, 0), (0, 2)))
        assert cp == mp == poly_mul(F, (2, 1), (1, 1))

    def test_dimension_cap(self):
        F = construct_field(2, 1)
        with pytest.raises(CapExceeded):
            char_min_poly(F, mat_identity(7))

    @settings(max_examples=80, deadline=None)
    @given(st.sampled_from([2, 3, 5]), st.integers(1, 5), st.data())
    def test_against_sympy_and_cayley_hamilton(self, p, d, data):
        F = construct_field(p, 1)
        A = tuple(tuple(data.draw(st.integers(0, p - 1)) for _ in range(d)) for _ in range(d))
        cp, mp = char_min_poly(F, A)
        assert cp == _sympy_charpoly(p, A)
        assert len(cp) == d + 1 and cp[-1] == 1
        zero = tuple(tuple(0 for _ in range(d)) for _ in range(d))
        assert mat_poly_eval(F, cp, A) == zero
        assert mat_poly_eval(F, mp, A) == zero
        assert poly_divmod(F, cp, mp)[1] == ()
        # minimality: no monic polynomial of lower degree annihilates A
        for deg in range(len(mp) - 1):
            if p**deg > 125:
                break
            for c in itertools.product(range(p), repeat=deg):
                assert mat_poly_eval(F, c + (1,), A) != zero

    @settings(max_examples=30, deadline=None)
    @given(st.data())
    def test_extension_field_entries(self, data):
        F = construct_field(2, 2)
        A = tuple(tuple(data.draw(st.integers(0, 3)) for _ in range(3)) for _ in range(3))
        cp, _ = char_min_poly(F, A)
        # constant term is (-1)^3 det, and -1 = 1 in characteristic 2
        assert cp[0] == mat_det(F, A)


class TestFactorization:
    def test_companion(self):
        fac = factor_charpoly(construct_field(2, 1), ((0, 1), (1, 1)))
        assert fac.factors == (((1, 1, 1), 1),) and fac.s == 1

    def test_identity(self):
        fac = factor_charpoly(construct_field(2, 1), ((1, 0), (0, 1)))
        assert fac.factors == (((1, 1), 2),) and fac.s == 1

    def test_diag_f3(self):
        fac = factor_charpoly(construct_field(3, 1), ((1, 0), (0, 2)))
        assert set(fac.factors) == {((2, 1), 1), ((1, 1), 1)} and fac.s == 2

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([(2, 1), (3, 1), (2, 2)]), st.integers(1, 4), st.data())
    def test_reconstructs(self, pk, d, data):
        F = construct_field(*pk)
        A = tuple(tuple(data.draw(st.integers(0, F.order - 1)) for _ in range(d)) for _ in range(d))
        fac = factor_charpoly(F, A)
        prod = (1,)
        for f, b in fac.factors:
            for _ in range(b):
                prod = poly_mul(F, prod, f)
        assert prod == char_min_poly(F, A)[0]
        assert sum(a * b for a, b in zip(fac.degrees, fac.multiplicities)) == d


class TestRegularity:
    def test_identity_not_regular(self):
        assert not is_regular(M2F2, algebra(M2F2).identity())

    def test_companion_regular(self):
        assert is_regular(M2F2, parse_element(M2F2, "0,1/1,1"))

    @pytest.mark.parametrize("spec", [s for s in SMALL_SPECS if s.is_etale])
    def test_etale_always_regular(self, spec):
        assert all(is_regular(spec, x) for x in enumerate_elements(spec))

    def test_regular_count_gl2f2(self):
        # GL_2(F_2): only the identity is non-regular
        assert sum(not is_regular(M2F2, x) for x in algebra(M2F2).units) == 1


class TestElementLiterals:
    def test_roundtrip(self):
        spec = AlgebraSpec(2, 1, ((2, 1), (1, 2)))
        for x in list(enumerate_elements(spec))[::7]:
            assert parse_element(spec, format_element(x)) == x

    @pytest.mark.parametrize("text", ["0,1/1", "0,1/1,1|1", "a,b/c,d", "0,1/1,2"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            parse_element(M2F2, text)

    def test_inverse(self):
        A = algebra(M2F3)
        for x in A.units:
            assert A.mul(x, A.inv(x)) == A.identity()
        assert mat_mul(construct_field(3, 1), ((1, 1), (0, 1)), ((1, 2), (0, 1))) == ((1, 0), (0, 1))
