import itertools

import numpy as np
import pytest

from dilation_spaces.errors import InvalidArgument
from dilation_spaces.products import (
    align_rotation,
    euclidean_product,
    lp_rule_evaluator,
    probe_product_homogeneity,
    sup_product,
)
from dilation_spaces.spaces import PD, Type0, Type1, Type2, distance, random_point


def test_sup_product_descriptor():
    res = sup_product([Type1(2, 1, 2), Type1(3, 1, 2)])
    assert res.desc == Type1(6, 1, 2)
    assert [(f.p, f.k) for f in res.space.fields] == [(2, 1), (3, 1)]


def test_sup_product_merges_equal_primes():
    res = sup_product([Type1(2, 1, 3), Type1(2, 1, 3), Type1(3, 1, 3)])
    assert res.desc == Type1(12, 1, 3)
    assert [(f.p, f.k) for f in res.space.fields] == [(2, 2), (3, 1)]
    rng = np.random.default_rng(0)
    for _ in range(50):
        xs = [random_point(s, -2, 2, 6, rng) for s in res.factors]
        ys = [random_point(s, -2, 2, 6, rng) for s in res.factors]
        assert distance(res.space, res.pack(xs), res.pack(ys)) == res.product_distance(xs, ys)


def test_sup_product_pack_is_exact_and_invertible():
    res = sup_product([Type1(2, 1, 2), Type1(3, 1, 2)])
    rng = np.random.default_rng(1)
    for _ in range(100):
        xs = [random_point(s, -3, 3, 8, rng) for s in res.factors]
        ys = [random_point(s, -3, 3, 8, rng) for s in res.factors]
        assert distance(res.space, res.pack(xs), res.pack(ys)) == res.product_distance(xs, ys)
        back = res.unpack(res.pack(xs))
        assert all(distance(s, a, b).value == 0 for s, a, b in zip(res.factors, back, xs))


def test_sup_product_type0():
    res = sup_product([Type0(2, 1.5), Type0(3, 1.5)])
    assert res.desc == Type0(6, 1.5)
    pairs = [(PD(i), PD(j)) for i in range(2) for j in range(3)]
    packed = [res.pack(p) for p in pairs]
    assert sorted(p.index for p in packed) == list(range(6))
    for p, q in itertools.combinations(pairs, 2):
        assert distance(res.space, res.pack(p), res.pack(q)) == res.product_distance(p, q)
    assert all(res.unpack(res.pack(p)) == p for p in pairs)


@pytest.mark.parametrize(
    "descs",
    [[Type1(2, 1, 2)], [Type1(2, 1, 2), Type1(3, 1, 3)], [Type0(2, 1.0), Type0(2, 2.0)], [Type0(2, 1), Type1(2, 1, 2)]],
)
def test_sup_product_rejects(descs):
    with pytest.raises(InvalidArgument):
        sup_product(descs)


def test_euclidean_product_matches_snowflake():
    desc, evaluate = euclidean_product([Type2(1, 0.6), Type2(2, 0.6)])
    assert desc == Type2(3, 0.6)
    rng = np.random.default_rng(2)
    for _ in range(200):
        x, y = rng.normal(size=(2, 3))
        ref = np.linalg.norm(x - y) ** 0.6
        assert abs(evaluate(x, y) - ref) <= 1e-12 * ref


def test_lp_rule_at_alpha_one_is_l1():
    rule = lp_rule_evaluator([Type2(1, 1.0), Type2(1, 1.0)])
    assert rule([0.0, 0.0], [3.0, -4.0]) == 7.0


def test_euclidean_product_needs_common_alpha():
    with pytest.raises(InvalidArgument):
        euclidean_product([Type2(1, 0.5), Type2(1, 0.6)])


@pytest.mark.parametrize("dim", [1, 2, 3, 5])
def test_align_rotation(dim):
    rng = np.random.default_rng(dim)
    for _ in range(20):
        u, v = rng.normal(size=(2, dim))
        Q = align_rotation(u, v)
        assert np.allclose(Q.T @ Q, np.eye(dim), atol=1e-12)
        assert np.allclose(Q @ (u / np.linalg.norm(u)), v / np.linalg.norm(v), atol=1e-12)
    Q = align_rotation(np.eye(dim)[0], -np.eye(dim)[0])
    assert np.allclose(Q @ np.eye(dim)[0], -np.eye(dim)[0])


def test_probe_separates_l1_from_euclidean():
    l1 = probe_product_homogeneity(lambda x, y: float(np.sum(np.abs(np.subtract(x, y)))), 2, samples=30)
    assert l1.max_equidistant_clique_size == 4
    assert l1.homogeneity_violations > 0
    _, euclid = euclidean_product([Type2(1, 1.0), Type2(1, 1.0)])
    e = probe_product_homogeneity(euclid, 2, samples=30)
    assert e.max_equidistant_clique_size == 3
    assert e.homogeneity_violations == 0


def test_probe_on_the_line():
    rep = probe_product_homogeneity(lambda x, y: float(abs(x[0] - y[0])), 1, samples=20)
    assert rep.max_equidistant_clique_size == 2 and rep.homogeneity_violations == 0
