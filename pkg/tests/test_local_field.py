import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilation_spaces.errors import DivisionByZero, InvalidArgument, PrecisionExhausted
from dilation_spaces.local_field import (
    FieldSpec,
    field_from_json,
    field_make,
    field_to_json,
    ls_add,
    ls_inv,
    ls_make,
    ls_monomial,
    ls_mul,
    ls_neg,
    ls_random,
    ls_sub,
    ls_valuation,
    ls_zero,
    series_from_json,
    series_to_json,
)

# q -> (p, k) for the small fields used below
FIELDS = [(2, 1), (3, 1), (2, 2), (2, 3), (3, 2), (5, 1), (7, 1)]


def test_least_irreducible_moduli():
    # F4: t^2, t^2+1 and t^2+t factor; t^2+t+1 is the first irreducible
    assert field_make(2, 2).modulus == (1, 1, 1)
    # F9: -1 is not a square mod 3, so t^2+1 is irreducible
    assert field_make(3, 2).modulus == (1, 0, 1)
    # F8: t^3+t+1 precedes t^3+t^2+1 in (c2, c1, c0) order
    assert field_make(2, 3).modulus == (1, 1, 0, 1)


def test_reducible_modulus_rejected():
    with pytest.raises(InvalidArgument):
        FieldSpec(2, 2, (1, 0, 1))
    with pytest.raises(InvalidArgument):
        field_make(4, 1)


def test_f4_multiplication_table_entries():
    f = field_make(2, 2)
    t = (0, 1)
    assert f.mul(t, t) == (1, 1)  # t^2 = t + 1
    assert f.mul(t, (1, 1)) == (1, 0)  # t^3 = 1
    assert f.inv(t) == (1, 1)


def test_prime_field_inverse():
    f = field_make(7, 1)
    assert f.inv((3,)) == (5,)
    with pytest.raises(DivisionByZero):
        f.inv((0,))


@pytest.mark.parametrize("pk", FIELDS)
def test_field_axioms_exhaustive(pk):
    f = field_make(*pk)
    elems = list(f.elements())
    for x in elems:
        assert f.add(x, f.neg(x)) == f.zero
        assert f.mul(x, f.one) == x
        if any(x):
            assert f.mul(x, f.inv(x)) == f.one
    # distributivity on a sweep
    for x in elems[:5]:
        for y in elems:
            for z in elems[:5]:
                assert f.mul(x, f.add(y, z)) == f.add(f.mul(x, y), f.mul(x, z))


@pytest.mark.parametrize("pk", FIELDS)
def test_index_round_trip(pk):
    f = field_make(*pk)
    assert [f.index(f.unindex(i)) for i in range(f.q)] == list(range(f.q))


def test_geometric_series_inverse_over_f2():
    f = field_make(2, 1)
    one_plus_x = ls_make(f, 0, [(1,), (1,), (0,), (0,), (0,)])
    inv = ls_inv(one_plus_x)
    assert inv.v0 == 0 and inv.coeffs == ((1,),) * 5


def test_inverse_shifts_valuation():
    f = field_make(3, 1)
    s = ls_make(f, 2, [(2,), (1,), (0,)])
    inv = ls_inv(s)
    assert ls_valuation(inv) == -2
    prod = ls_mul(s, inv)
    assert prod.v0 == 0 and prod.coeffs == ((1,), (0,), (0,))


def test_inverse_precision_limits():
    f = field_make(2, 1)
    with pytest.raises(PrecisionExhausted):
        ls_inv(ls_make(f, 0, [(1,), (1,)]), prec=5)
    with pytest.raises(DivisionByZero):
        ls_inv(ls_zero(f))


def test_monomial_product():
    f = field_make(5, 1)
    p = ls_mul(ls_monomial(f, -2, (3,), prec=4), ls_monomial(f, 3, (2,), prec=4))
    assert p.v0 == 1 and p.coeffs[0] == (1,)


def test_cancellation_same_window_is_exact_zero():
    f = field_make(2, 1)
    s = ls_make(f, 0, [(1,), (1,)])
    assert ls_add(s, s).zero


def test_cancellation_across_windows_is_unresolved():
    f = field_make(2, 1)
    s = ls_make(f, 0, [(1,), (1,)])
    t = ls_make(f, 0, [(1,), (1,), (0,)])
    d = ls_add(s, t)
    assert not d.zero
    with pytest.raises(PrecisionExhausted):
        ls_valuation(d)


def test_valuation_skips_leading_zeros():
    f = field_make(3, 1)
    assert ls_valuation(ls_make(f, -3, [(0,), (0,), (1,)])) == -1
    assert ls_valuation(ls_zero(f)) == float("inf")


def test_mixing_fields_rejected():
    with pytest.raises(InvalidArgument):
        ls_add(ls_monomial(field_make(2, 1), 0), ls_monomial(field_make(3, 1), 0))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(-4, 4), st.integers(-4, 4), st.integers(0, 2 ** 31))
def test_series_ring_identities(pk, v1, v2, seed):
    f = field_make(*pk)
    s = ls_random(f, v1, v1, 6, seed)
    t = ls_random(f, v2, v2, 6, seed + 1)
    assert ls_valuation(ls_mul(s, t)) == v1 + v2
    r = ls_sub(ls_add(s, t), t)
    # agreement is only meaningful on the window both inputs determine
    common = min(s.end, t.end)
    assert all(r.coeff(e) == s.coeff(e) for e in range(min(v1, v2), common))
    assert ls_add(s, ls_neg(s)).zero
    prod = ls_mul(s, ls_inv(s))
    assert prod.v0 == 0 and prod.coeffs == (f.one,) + (f.zero,) * 5


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(0, 2 ** 31))
def test_json_round_trip(pk, seed):
    f = field_make(*pk)
    s = ls_random(f, -3, 3, 4, seed)
    g = field_from_json(field_to_json(f))
    assert g == f
    assert series_from_json(g, series_to_json(s)) == s
