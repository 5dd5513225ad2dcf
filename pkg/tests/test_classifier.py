import numpy as np
import pytest

from dilation_spaces.classifier import (
    TolerancePolicy,
    alpha_analytic,
    alpha_from_ball,
    alpha_from_matrix,
    alpha_monte_carlo,
    classify,
    max_equidistant_clique,
)
from dilation_spaces.distmat import DistanceMatrix, distance_matrix
from dilation_spaces.errors import ClassificationFailed, InvalidArgument
from dilation_spaces.spaces import (
    Geo,
    Type0,
    Type1,
    Type2,
    enumerate_points,
    sample,
    space_make,
)


def _matrix(desc, count, depth=3, seed=0, exact=True):
    sp = space_make(desc)
    m = distance_matrix(sp, sample(sp, count, depth, seed))
    return m if exact else DistanceMatrix(m.values)


def test_type0_recovered():
    rep = classify(_matrix(Type0(5, 2.0), 5))
    assert rep.detected_type == 0 and rep.params == Type0(5, 2.0)
    assert rep.clique_witness == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("desc", [Type1(2, 1, 2), Type1(3, 1.5, 3), Type1(6, 1, 1.5), Type1(9, 2.5, 4)])
def test_type1_exact_path_is_exact(desc):
    rep = classify(_matrix(desc, 40))
    assert rep.detected_type == 1
    assert rep.params == desc
    assert rep.evidence["exact"] is True
    assert len(rep.clique_witness) == desc.n


@pytest.mark.parametrize("desc", [Type1(2, 1, 2), Type1(4, 1.7, 2.2), Type1(7, 1.2, 3.5)])
def test_type1_float_path(desc):
    rep = classify(_matrix(desc, 40, exact=False))
    assert rep.detected_type == 1 and rep.params.n == desc.n
    assert abs(rep.params.a - desc.a) < 1e-9 * desc.a
    assert abs(rep.params.b - desc.b) < 1e-9 * desc.b


@pytest.mark.parametrize("n, alpha", [(1, 1.0), (2, 0.5), (3, 0.8)])
def test_type2_recovered_from_seeded_sample(n, alpha):
    rep = classify(_matrix(Type2(n, alpha), n + 10, seed=1, exact=False))
    assert rep.detected_type == 2
    assert rep.params.n == n
    assert abs(rep.params.alpha - alpha) < 1e-9


def test_geometric_but_not_ultrametric_fails():
    # a path metric 1 - 2 - 4 on three collinear points
    v = np.array([[0, 1, 4], [1, 0, 2], [4, 2, 0]], dtype=float)
    with pytest.raises(ClassificationFailed) as info:
        classify(DistanceMatrix(v))
    assert info.value.diagnostics["violations"] == 1


def test_too_few_points():
    with pytest.raises(InvalidArgument):
        classify(DistanceMatrix(np.zeros((1, 1))))


def test_clique_at_distance_a_on_enumeration():
    sp = space_make(Type1(4, 1, 2))
    m = distance_matrix(sp, enumerate_points(sp, 0, 1))
    c = max_equidistant_clique(m, Geo(1.0, 2.0, 0))
    assert len(c) == 4
    # the lexicographically least: indices are base-4 numbers (d0, d1); points 0, 4, 8, 12
    assert c == [0, 4, 8, 12]
    with pytest.raises(InvalidArgument):
        max_equidistant_clique(m, Geo(1.0, 2.0, 5))


def test_policy_is_reported():
    rep = classify(_matrix(Type1(3, 1, 2), 20), TolerancePolicy(1e-8, 1.5))
    assert rep.evidence["tolerances"] == {"rel_tol": 1e-8, "gap_ratio": 1.5}
    assert rep.to_json(None)["params"]["type"] == 1


@pytest.mark.parametrize("n, alpha", [(1, 0.3), (2, 0.65), (3, 1.0)])
def test_alpha_analytic(n, alpha):
    assert abs(alpha_analytic(space_make(Type2(n, alpha))) - alpha) < 1e-9
    assert abs(alpha_from_ball(space_make(Type2(n, alpha)), radius=2.5, mode="analytic") - alpha) < 1e-9


def test_alpha_monte_carlo_small():
    est = alpha_monte_carlo(space_make(Type2(2, 0.6)), count=2000, seed=1)
    assert abs(est - 0.6) < 0.05
    # a finite cloud can only under-fill the ball
    assert est <= 0.6 + 1e-12


def test_alpha_from_matrix_on_axis_points():
    sp = space_make(Type2(1, 0.4))
    m = _matrix(Type2(1, 0.4), 5, exact=False)
    alpha, center, radius = alpha_from_matrix(m)
    assert abs(alpha - 0.4) < 1e-12
    assert sp.desc.alpha == 0.4 and radius > 0 and 0 <= center < 5


def test_alpha_modes_reject_wrong_inputs():
    with pytest.raises(InvalidArgument):
        alpha_from_ball(space_make(Type2(1, 0.5)), mode="matrix")
    with pytest.raises(InvalidArgument):
        alpha_analytic(space_make(Type1(2, 1, 2)))
    with pytest.raises(InvalidArgument):
        alpha_from_ball(space_make(Type2(1, 0.5)), mode="bogus")
