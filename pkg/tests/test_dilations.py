import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilation_spaces.dilations import (
    GeoScale,
    RealScale,
    Type1Composite,
    affine,
    apply,
    check_partial,
    compose,
    dilation_from_json,
    dilation_to_json,
    dilation_violations,
    extend_partial,
    identity,
    inverse,
    monomial_scaling,
    pair_map,
    scale_of,
    similarity,
    translation,
    two_point_witness,
)
from dilation_spaces.errors import DomainError, InvalidArgument, InvalidDilation
from dilation_spaces.local_field import ls_monomial, ls_random
from dilation_spaces.spaces import (
    PD,
    PR,
    Geo,
    Type0,
    Type1,
    Type2,
    distance,
    point_from_digits,
    random_point,
    same_point,
    sample,
    space_make,
    zero_point,
)
from dilation_spaces.verify import random_dilation

F2 = space_make(Type1(2, 1, 2))
F6 = space_make(Type1(6, 1.5, 3))


def test_monomial_scaling_scale():
    u = monomial_scaling(F2, 1)
    assert scale_of(u, F2) == GeoScale(2.0, -1)
    assert scale_of(u, F2).value == 0.5
    x = point_from_digits(F2, 0, [1, 1, 0, 0])
    assert distance(F2, apply(u, x), zero_point(F2)) == Geo(1.0, 2.0, -1)


def test_scale_values():
    assert GeoScale(3.0, 2) * GeoScale(3.0, -5) == GeoScale(3.0, -3)
    assert (RealScale(2.0) * RealScale(0.25)).value == 0.5


def test_compose_and_inverse_type1():
    rng = np.random.default_rng(3)
    u, v = random_dilation(F6, rng, 2), random_dilation(F6, rng, 2)
    w = compose(u, v)
    assert scale_of(w, F6) == scale_of(u, F6) * scale_of(v, F6)
    x = random_point(F6, -2, 2, 6, rng)
    assert same_point(F6, apply(w, x), apply(u, apply(v, x)))
    assert same_point(F6, apply(inverse(u), apply(u, x)), x)
    assert same_point(F6, apply(identity(F6), x), x)


def test_unit_valuations_must_agree():
    f2, f3 = F6.fields
    with pytest.raises(InvalidDilation):
        affine(F6, [ls_monomial(f2, 0, prec=4), ls_monomial(f3, 1, prec=4)], zero_point(F6))


def test_similarity_rejects_non_orthogonal():
    with pytest.raises(InvalidDilation):
        similarity(1.0, [[1.0, 0.1], [0.0, 1.0]], [0.0, 0.0])
    with pytest.raises(InvalidDilation):
        similarity(-1.0, np.eye(2), [0.0, 0.0])


def test_type2_witness_example():
    sp = space_make(Type2(2, 0.5))
    a, b, c = PR((0.0, 0.0)), PR((1.0, 0.0)), PR((0.0, 2.0))
    u = two_point_witness(sp, a, b, c)
    assert np.allclose(apply(u, a).coords, a.coords)
    assert np.allclose(apply(u, b).coords, c.coords)
    assert abs(scale_of(u, sp).value - 2 ** 0.5) < 1e-12


def test_type0_witness_is_a_transposition():
    sp = space_make(Type0(5, 1.0))
    u = two_point_witness(sp, PD(0), PD(1), PD(3))
    assert apply(u, PD(0)) == PD(0) and apply(u, PD(1)) == PD(3)
    assert sorted(u.perm) == list(range(5))


def test_witness_needs_distinct_points():
    a = zero_point(F2)
    with pytest.raises(InvalidArgument):
        two_point_witness(F2, a, a, point_from_digits(F2, 0, [1]))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([Type1(2, 1, 2), Type1(3, 1, 2), Type1(9, 1, 1.5)]), st.integers(0, 2 ** 31))
def test_single_field_witness_is_exact(desc, seed):
    sp = space_make(desc)
    pts = sample(sp, 12, 3, seed=seed % 1000)
    a, b, c = pts[1], pts[4], pts[7]
    u = two_point_witness(sp, a, b, c)
    assert same_point(sp, apply(u, a), a) and same_point(sp, apply(u, b), c)
    expected = distance(sp, a, c).k - distance(sp, a, b).k
    assert scale_of(u, sp) == GeoScale(desc.b, expected)
    assert not dilation_violations(sp, u, pts)


def test_multi_field_witness_is_tabulated_on_domain():
    pts = sample(F6, 20, 3, seed=5)
    a, b, c = pts[2], pts[9], pts[15]
    u = two_point_witness(F6, a, b, c, domain=pts)
    assert isinstance(u, Type1Composite)
    assert same_point(F6, apply(u, a), a) and same_point(F6, apply(u, b), c)
    assert not dilation_violations(F6, u, pts)
    outside = point_from_digits(F6, -5, [1, 2, 3, 4, 5, 0, 1, 2, 3, 4, 5, 0, 1, 2, 3, 4])
    with pytest.raises(DomainError):
        apply(u, outside)


def test_table_after_affine_needs_domain():
    pts = sample(F6, 10, 2, seed=1)
    table = two_point_witness(F6, pts[0], pts[1], pts[2], domain=pts)
    shift = translation(F6, pts[3])
    with pytest.raises(InvalidDilation):
        compose(table, shift)


@pytest.mark.parametrize("space", [F2, F6, space_make(Type2(3, 0.7)), space_make(Type0(6, 2.0))])
def test_pair_map_sends_pair_to_pair(space):
    pts = sample(space, 6, 3, seed=2)
    a, b, p = pts[0], pts[1], pts[2]
    q = pts[5]
    u = pair_map(space, a, b, p, q, domain=pts) if space.type == 1 else pair_map(space, a, b, p, q)
    assert same_point(space, apply(u, a), p, 1e-9)
    assert same_point(space, apply(u, b), q, 1e-9)


def _partial_from_affine(space, rng, pts, k):
    u = random_dilation(space, rng, 2)
    idx = rng.choice(len(pts), k, replace=False)
    return u, [(pts[i], apply(u, pts[i])) for i in idx]


def test_extension_reproduces_partial_and_scale():
    rng = np.random.default_rng(0)
    for run in range(10):
        pts = sample(F2, 12, 3, seed=run)
        u, partial = _partial_from_affine(F2, rng, pts, 4)
        v = extend_partial(F2, pts, partial)
        for x, y in partial:
            assert same_point(F2, apply(v, x), y)
        assert scale_of(v, F2) == scale_of(u, F2)
        assert not dilation_violations(F2, v, pts)


def test_extension_rejects_mismatch():
    pts = sample(F2, 12, 3, seed=0)
    x0, x1, x2 = pts[2], pts[5], pts[8]
    # identity on x0 and x1, but x2 goes to a point at another distance from x0
    bad = next(p for p in pts if p not in (x0, x1) and distance(F2, x0, p) != distance(F2, x0, x2))
    with pytest.raises(InvalidArgument):
        check_partial(F2, [(x0, x0), (x1, x1), (x2, bad)])
    with pytest.raises(InvalidArgument):
        extend_partial(F2, pts, [(x0, x0), (x1, x1), (x2, bad)])


def test_extension_rejects_non_injective_partial():
    pts = sample(F2, 6, 2, seed=0)
    with pytest.raises(InvalidArgument):
        check_partial(F2, [(pts[0], pts[3]), (pts[1], pts[3])])


@pytest.mark.parametrize("space", [F2, F6, space_make(Type2(2, 0.5)), space_make(Type0(4, 1.0))])
def test_dilation_json_round_trip(space):
    rng = np.random.default_rng(9)
    u = random_dilation(space, rng, 2)
    v = dilation_from_json(space, dilation_to_json(u))
    for x in sample(space, 4, 2, seed=3):
        assert same_point(space, apply(u, x), apply(v, x), 1e-12)


def test_table_map_json_round_trip():
    pts = sample(F6, 8, 2, seed=4)
    u = two_point_witness(F6, pts[0], pts[1], pts[2], domain=pts)
    v = dilation_from_json(F6, dilation_to_json(u))
    assert v.table == u.table and v.scale_exponent == u.scale_exponent


def test_random_units_keep_valuation():
    f = F2.fields[0]
    for seed in range(5):
        lam = ls_random(f, 2, 2, 8, seed)
        u = affine(F2, [lam], zero_point(F2))
        assert scale_of(u, F2) == GeoScale(2.0, -2)


def test_all_pairs_scaled_under_composite():
    pts = sample(F6, 15, 3, seed=6)
    u = two_point_witness(F6, pts[0], pts[3], pts[11], domain=pts)
    s = scale_of(u, F6).k
    for x, y in itertools.combinations(pts, 2):
        assert distance(F6, apply(u, x), apply(u, y)).k == distance(F6, x, y).k + s
