"""Recover the canonical family and parameters from a finite distance sample."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from ._clique import max_clique
from .distmat import (
    DEFAULT_GAP_RATIO,
    DEFAULT_REL_TOL,
    DistanceMatrix,
    GammaSummary,
    distinct_values,
    exponent_matrix,
    fit_geometric,
    gamma_observed,
    ultrametric_violations,
)
from .errors import ClassificationFailed, InvalidArgument
from .spaces import Fixed, Geo, Space, Type0, Type1, Type2, Zero, descriptor_to_json

# bisection steps for the analytic ball boundary; 200 halvings reach float resolution
_BISECT_STEPS = 200


@dataclass(frozen=True)
class TolerancePolicy:
    rel_tol: float = DEFAULT_REL_TOL
    gap_ratio: float = DEFAULT_GAP_RATIO

    def to_json(self) -> dict:
        return {"rel_tol": self.rel_tol, "gap_ratio": self.gap_ratio}


@dataclass
class ClassificationReport:
    detected_type: int
    params: object
    clique_witness: list
    evidence: dict = field(default_factory=dict)

    def to_json(self, ids: Sequence[str] | None = None) -> dict:
        witness = [ids[i] for i in self.clique_witness] if ids else list(self.clique_witness)
        return {
            "detected_type": self.detected_type,
            "params": descriptor_to_json(self.params),
            "clique_witness": witness,
            "evidence": self.evidence,
        }


def detect_type(gamma: Sequence[float], rel_tol: float = DEFAULT_REL_TOL,
                gap_ratio: float = DEFAULT_GAP_RATIO) -> int:
    """0 for a single distance, 1 for a geometric progression, 2 otherwise."""
    vals = distinct_values(gamma, rel_tol)
    if not vals:
        raise InvalidArgument("no distances given")
    if len(vals) == 1:
        return 0
    return 1 if fit_geometric(vals, rel_tol, gap_ratio) is not None else 2


# -- cliques ----------------------------------------------------------------


def _edges_at(m: DistanceMatrix, r, rel_tol: float) -> np.ndarray:
    if m.exact is not None and isinstance(r, (Geo, Fixed)):
        A = np.array([[d == r for d in row] for row in m.exact], dtype=bool)
    else:
        x = r.value if hasattr(r, "value") else float(r)
        A = np.abs(m.values - x) <= rel_tol * x
    np.fill_diagonal(A, False)
    return A


def max_equidistant_clique(m: DistanceMatrix, r, rel_tol: float = DEFAULT_REL_TOL) -> list:
    """Lexicographically least maximum set of points pairwise at distance ``r``.

    ``r`` may be an exact distance (compared exactly against exact entries)
    or a real number (compared with relative tolerance ``rel_tol``).
    """
    if isinstance(r, Zero) or (not hasattr(r, "value") and float(r) <= 0):
        raise InvalidArgument("r must be a positive distance")
    A = _edges_at(m, r, rel_tol)
    if not A.any():
        raise InvalidArgument(f"distance {r!r} is not realized in the sample")
    return max_clique(A)


def _float_cliques(m: DistanceMatrix, rel_tol: float):
    """Largest equidistant clique over all realized values, scanning only values hit by >= 3 pairs."""
    iu, ju = np.triu_indices(m.n_points, 1)
    vals = m.values[iu, ju]
    order = np.argsort(vals, kind="stable")
    best, best_r = [int(iu[order[0]]), int(ju[order[0]])], float(vals[order[0]])
    best = sorted(best)
    start = 0
    while start < len(order):
        stop = start + 1
        base = vals[order[start]]
        while stop < len(order) and vals[order[stop]] <= base * (1 + rel_tol):
            stop += 1
        if stop - start >= 3:
            idx = order[start:stop]
            verts = sorted(set(iu[idx]) | set(ju[idx]))
            pos = {v: k for k, v in enumerate(verts)}
            A = np.zeros((len(verts), len(verts)), dtype=bool)
            for i, j in zip(iu[idx], ju[idx]):
                A[pos[i], pos[j]] = A[pos[j], pos[i]] = True
            c = [int(verts[k]) for k in max_clique(A)]
            if len(c) > len(best) or (len(c) == len(best) and c < best):
                best, best_r = c, float(base)
        start = stop
    return best, best_r


# -- alpha ------------------------------------------------------------------


def _ball_profile(D: np.ndarray, center: int):
    """Radii and diameters of the balls around ``center`` grown one sample point at a time."""
    order = np.argsort(D[center], kind="stable")
    M = D[np.ix_(order, order)]
    radii = M[0]
    row_max = np.max(np.tril(M, -1), axis=1)
    diam = np.maximum.accumulate(row_max)
    return order, radii, diam


def alpha_from_matrix(m: DistanceMatrix, center: int | None = None, radius: float | None = None,
                      rel_tol: float = DEFAULT_REL_TOL):
    """``log2(diam B(c, r) / r)`` on the sample; maximised over centres and radii when not given.

    Returns ``(alpha, center, radius)``.  A finite ball can only under-fill the
    true ball, so the maximum is the best sample estimate.
    """
    D = m.values
    centers = range(m.n_points) if center is None else [center]
    best = (-math.inf, None, None)
    for c in centers:
        order, radii, diam = _ball_profile(D, c)
        if radius is not None:
            inside = radii <= radius * (1 + rel_tol)
            if inside.sum() < 2:
                raise InvalidArgument("ball contains no sample point besides its centre")
            k = int(np.nonzero(inside)[0][-1])
            cand = [(math.log2(diam[k] / radius), c, float(radius))]
        else:
            ks = np.arange(1, m.n_points)
            with np.errstate(divide="ignore"):
                est = np.log2(diam[ks] / radii[ks])
            k = int(np.argmax(est))
            cand = [(float(est[k]), c, float(radii[ks[k]]))]
        for e in cand:
            if e[0] > best[0] + 1e-15:
                best = e
    if best[1] is None:
        raise InvalidArgument("degenerate ball")
    return best


def _boundary(metric: Callable, center: np.ndarray, direction: np.ndarray, radius: float) -> float:
    """Largest t with metric(center, center + t*direction) <= radius (metric increasing in t)."""
    lo, hi = 0.0, 1.0
    while metric(center, center + hi * direction) <= radius:
        hi *= 2.0
        if hi > 1e300:
            raise InvalidArgument("ball is unbounded along the probe direction")
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if metric(center, center + mid * direction) <= radius:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    return lo


def _metric_of(space_or_metric, dim):
    if isinstance(space_or_metric, Space):
        desc = space_or_metric.desc
        if not isinstance(desc, Type2):
            raise InvalidArgument("analytic ball estimates need a type-2 space or a metric on R^dim")
        alpha = desc.alpha
        return (lambda x, y: float(np.linalg.norm(np.asarray(x) - np.asarray(y))) ** alpha), desc.n
    if dim is None:
        raise InvalidArgument("dim is required with a metric callable")
    return space_or_metric, dim


def alpha_analytic(space_or_metric, center=None, radius: float = 1.0, dim: int | None = None) -> float:
    """Exponent from the closed ball's diameter, located by bisection along the first axis.

    For a rotation-invariant metric the ball is symmetric and its diameter is
    realised by the two boundary points on a line through the centre.
    """
    metric, dim = _metric_of(space_or_metric, dim)
    if radius <= 0:
        raise InvalidArgument("radius must be positive")
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    e = np.eye(dim)[0]
    t = _boundary(metric, c, e, radius)
    if t <= 0:
        raise InvalidArgument("degenerate ball")
    diam = metric(c - t * e, c + t * e)
    return math.log2(diam / radius)


def alpha_monte_carlo(space_or_metric, count: int = 10_000, center=None, radius: float = 1.0,
                      dim: int | None = None, seed=0) -> float:
    """Exponent from the diameter of ``count`` points drawn uniformly in the ball.

    Points are drawn in the bounding cube and rejected outside the ball; the
    diameter of a Euclidean-snowflake point cloud is attained on its convex
    hull, so only hull vertices are compared.
    """
    from scipy.spatial import ConvexHull

    metric, dim = _metric_of(space_or_metric, dim)
    rng = np.random.default_rng(seed)
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    t = _boundary(metric, c, np.eye(dim)[0], radius)
    pts = []
    while len(pts) < count:
        cand = c + rng.uniform(-t, t, size=(count, dim))
        for p in cand:
            if metric(c, p) <= radius:
                pts.append(p)
                if len(pts) == count:
                    break
    P = np.array(pts)
    if dim == 1:
        hull = P[[int(np.argmin(P[:, 0])), int(np.argmax(P[:, 0]))]]
    else:
        hull = P[ConvexHull(P).vertices]
    diam = max(metric(p, q) for i, p in enumerate(hull) for q in hull[i + 1:])
    return math.log2(diam / radius)


def alpha_from_ball(source, center=None, radius=None, mode: str = "matrix", **kw) -> float:
    """Dispatch: ``matrix`` (a DistanceMatrix), ``analytic`` or ``montecarlo`` (a space or metric)."""
    if mode == "matrix":
        if not isinstance(source, DistanceMatrix):
            raise InvalidArgument("matrix mode needs a DistanceMatrix")
        return alpha_from_matrix(source, center, radius)[0]
    if mode == "analytic":
        return alpha_analytic(source, center, 1.0 if radius is None else radius, **kw)
    if mode == "montecarlo":
        return alpha_monte_carlo(source, center=center, radius=1.0 if radius is None else radius, **kw)
    raise InvalidArgument(f"unknown mode {mode!r}")


# -- classification ---------------------------------------------------------


def classify(m: DistanceMatrix, policy: TolerancePolicy | None = None) -> ClassificationReport:
    policy = policy or TolerancePolicy()
    if m.n_points < 2:
        raise InvalidArgument("need at least two points")
    m.validate(policy.rel_tol)
    gamma = gamma_observed(m, policy.rel_tol, policy.gap_ratio)
    evidence = {
        "gamma_summary": gamma.to_json(),
        "geometric_fit_residual": gamma.residual,
        "alpha_estimate": None,
        "tolerances": policy.to_json(),
        "exact": gamma.exact,
        "notes": [],
    }
    if gamma.kind == "single":
        return _classify_single(m, gamma, policy, evidence)
    if gamma.kind == "geometric":
        return _classify_geometric(m, gamma, policy, evidence)
    return _classify_dense(m, policy, evidence)


def _classify_single(m, gamma, policy, evidence):
    r = gamma.values[0]
    if m.exact is not None:
        witness = max_equidistant_clique(m, m.exact[0][1], policy.rel_tol)
    else:
        witness = max_equidistant_clique(m, r, policy.rel_tol)
    evidence["notes"].append("every pair is at the same distance")
    return ClassificationReport(0, Type0(len(witness), r), witness, evidence)


def _classify_geometric(m, gamma: GammaSummary, policy, evidence):
    count, examples = ultrametric_violations(m, policy.rel_tol)
    if count:
        raise ClassificationFailed(
            "distances fit a geometric progression but the ultrametric inequality fails",
            {"violations": count, "examples": examples, "gamma_summary": gamma.to_json()},
        )
    a, b = gamma.a, gamma.b
    levels = {}
    if gamma.exact:
        K = exponent_matrix(m)
        ks = sorted({int(x) for x in K[np.triu_indices(m.n_points, 1)]})
        # observed exponents re-expressed in steps of the fitted ratio
        g = reduce(math.gcd, (k - ks[0] for k in ks[1:]))
        for k in ks:
            A = K == k
            np.fill_diagonal(A, False)
            levels[(k - ks[0] % g) // g] = max_clique(A)
    else:
        for e, v in zip(gamma.exponents, gamma.values):
            levels[e] = max_equidistant_clique(m, v, policy.rel_tol)
    sizes = {k: len(c) for k, c in levels.items()}
    n = max(sizes.values())
    level = 0 if sizes.get(0) == n else min(k for k, s in sizes.items() if s == n)
    witness = levels[level]
    if not gamma.a_observed:
        evidence["notes"].append("the least distance >= 1 of the progression was not observed; a is the fitted representative")
    if sizes.get(0, 0) < n:
        evidence["notes"].append(f"largest clique found at level {level}, not at distance a")
    evidence["clique_sizes_by_level"] = {str(k): s for k, s in sorted(sizes.items())}
    evidence["size_parameter"] = "observed lower bound"
    try:
        desc = Type1(n, a, b)
        desc.validate()
    except InvalidArgument as exc:
        raise ClassificationFailed(str(exc), {"gamma_summary": gamma.to_json(), "clique_sizes": sizes}) from None
    return ClassificationReport(1, desc, witness, evidence)


def _classify_dense(m, policy, evidence):
    witness, r = _float_cliques(m, policy.rel_tol)
    alpha, center, radius = alpha_from_matrix(m, rel_tol=policy.rel_tol)
    alpha = min(alpha, 1.0)
    evidence["alpha_estimate"] = alpha
    evidence["alpha_ball"] = {"center": center, "radius": radius}
    evidence["clique_distance"] = r
    evidence["size_parameter"] = "observed lower bound"
    if alpha <= 0:
        raise ClassificationFailed("no ball in the sample gives a positive exponent", dict(evidence))
    n = len(witness) - 1
    return ClassificationReport(2, Type2(n, alpha), witness, evidence)
