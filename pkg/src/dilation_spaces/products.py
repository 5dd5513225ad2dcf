"""Products of canonical spaces and an empirical probe for candidate product metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._clique import max_clique
from .errors import InvalidArgument
from .local_field import LaurentSeries, ls_zero
from .spaces import (
    PD,
    PF,
    PR,
    Space,
    Type0,
    Type1,
    Type2,
    distance,
    regular_simplex,
    space_make,
)


@dataclass(frozen=True)
class ProductResult:
    """A canonical space isometric to the sup-metric product of ``factors``.

    ``pack`` sends a tuple of factor points to a point of ``space`` and
    ``unpack`` inverts it; ``product_distance`` evaluates the max metric on
    tuples directly.
    """

    desc: object
    space: Space
    factors: tuple
    pack: Callable
    unpack: Callable

    def product_distance(self, xs: Sequence, ys: Sequence):
        if len(xs) != len(self.factors) or len(ys) != len(self.factors):
            raise InvalidArgument("point tuple does not match the number of factors")
        return max(distance(s, x, y) for s, x, y in zip(self.factors, xs, ys))


def sup_product(descs: Sequence) -> ProductResult:
    """Max-metric product of type-1 spaces sharing (a, b) or type-0 spaces sharing r."""
    descs = list(descs)
    if len(descs) < 2:
        raise InvalidArgument("a product needs at least two factors")
    if all(isinstance(d, Type1) for d in descs):
        return _sup_type1(descs)
    if all(isinstance(d, Type0) for d in descs):
        return _sup_type0(descs)
    raise InvalidArgument("sup_product takes only type-1 or only type-0 descriptors")


def _sup_type0(descs):
    if len({d.r for d in descs}) != 1:
        raise InvalidArgument("type-0 factors must share r")
    sizes = [d.size for d in descs]
    desc = Type0(math.prod(sizes), descs[0].r)
    factors = tuple(space_make(d) for d in descs)

    def pack(xs):
        i = 0
        for x, s in zip(xs, sizes):
            i = i * s + x.index
        return PD(i)

    def unpack(x):
        i, out = x.index, []
        for s in reversed(sizes):
            out.append(PD(i % s))
            i //= s
        return tuple(reversed(out))

    return ProductResult(desc, space_make(desc), factors, pack, unpack)


def _sup_type1(descs):
    if len({(d.a, d.b) for d in descs}) != 1:
        raise InvalidArgument("type-1 factors must share (a, b)")
    desc = Type1(math.prod(d.n for d in descs), descs[0].a, descs[0].b)
    space = space_make(desc)
    factors = tuple(space_make(d) for d in descs)
    # for each output prime: the (factor space, field slot) pairs whose coordinates it concatenates
    layout = []
    for f in space.fields:
        parts = [(i, s) for i, sp in enumerate(factors) for s, g in enumerate(sp.fields) if g.p == f.p]
        layout.append(parts)

    def pack(xs):
        out = []
        for f, parts in zip(space.fields, layout):
            series = [xs[i].factors[s] for i, s in parts]
            live = [t for t in series if not t.zero]
            if not live:
                out.append(ls_zero(f))
                continue
            lo = min(t.v0 for t in live)
            end = min(t.end for t in live)
            coeffs = tuple(sum((tuple(t.coeff(e)) for t in series), ()) for e in range(lo, end))
            out.append(LaurentSeries(f, lo, coeffs).normalized())
        return PF(tuple(out))

    def unpack(w):
        pieces = {}
        for f, parts, t in zip(space.fields, layout, w.factors):
            offset = 0
            for i, s in parts:
                g = factors[i].fields[s]
                chunk = [tuple(c[offset:offset + g.k]) for c in t.coeffs]
                offset += g.k
                if t.zero or not any(any(c) for c in chunk):
                    pieces[i, s] = ls_zero(g)
                else:
                    pieces[i, s] = LaurentSeries(g, t.v0, tuple(chunk)).normalized()
        return tuple(
            PF(tuple(pieces[i, s] for s in range(len(sp.fields)))) for i, sp in enumerate(factors)
        )

    return ProductResult(desc, space, factors, pack, unpack)


# -- type-2 combinations ----------------------------------------------------


def _split(descs, point: Sequence[float]):
    out, i = [], 0
    for d in descs:
        out.append(PR(tuple(float(c) for c in point[i:i + d.n])))
        i += d.n
    if i != len(point):
        raise InvalidArgument(f"expected {i} coordinates, got {len(point)}")
    return out


def _common_alpha(descs):
    descs = list(descs)
    if len(descs) < 2 or not all(isinstance(d, Type2) for d in descs):
        raise InvalidArgument("need at least two type-2 descriptors")
    if len({d.alpha for d in descs}) != 1:
        raise InvalidArgument("type-2 factors must share alpha")
    return descs, descs[0].alpha


def euclidean_product(descs: Sequence):
    """``R_{sum n_k, alpha}`` with evaluator ``(sum d_k^(2/alpha))^(alpha/2)`` on concatenated coordinates."""
    descs, alpha = _common_alpha(descs)
    spaces = [space_make(d) for d in descs]

    def evaluate(x, y):
        ds = [distance(s, p, q).value for s, p, q in zip(spaces, _split(descs, x), _split(descs, y))]
        return sum(d ** (2 / alpha) for d in ds) ** (alpha / 2)

    return Type2(sum(d.n for d in descs), alpha), evaluate


def lp_rule_evaluator(descs: Sequence):
    """The combination ``(sum d_k^(1/alpha))^alpha``; at alpha = 1 this is the l1 metric."""
    descs, alpha = _common_alpha(descs)
    spaces = [space_make(d) for d in descs]

    def evaluate(x, y):
        ds = [distance(s, p, q).value for s, p, q in zip(spaces, _split(descs, x), _split(descs, y))]
        return sum(d ** (1 / alpha) for d in ds) ** alpha

    return evaluate


# -- probing a metric on R^dim ------------------------------------------------


def align_rotation(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal matrix sending the direction of ``u`` to that of ``v``.

    Built from two Householder reflections, so it is a proper rotation when
    ``dim >= 2``; in dimension one it is ``+-1``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = u.shape[0]
    x = u / np.linalg.norm(u)
    y = v / np.linalg.norm(v)
    if n == 1:
        return np.array([[1.0 if x[0] * y[0] > 0 else -1.0]])

    def householder(w):
        w = w / np.linalg.norm(w)
        return np.eye(n) - 2.0 * np.outer(w, w)

    hx = householder(x)
    s = x + y
    if np.linalg.norm(s) < 1e-12:
        # antipodal: rotate by pi in a plane containing x
        e = np.eye(n)[int(np.argmin(np.abs(x)))]
        e = e - x * (e @ x)
        return householder(e) @ hx
    return householder(s) @ hx


@dataclass
class ProbeReport:
    max_equidistant_clique_size: int
    clique_witness: list
    clique_distance: float
    homogeneity_violations: int
    triples_tested: int

    def to_json(self) -> dict:
        return {
            "max_equidistant_clique_size": self.max_equidistant_clique_size,
            "clique_witness": self.clique_witness,
            "clique_distance": self.clique_distance,
            "homogeneity_violations": self.homogeneity_violations,
            "triples_tested": self.triples_tested,
        }


def _candidate_sets(dim: int, rng, samples: int):
    sets = [regular_simplex(dim)]
    eye = np.eye(dim)
    sets.append(np.vstack([eye, -eye]))
    if dim <= 10:
        cube = np.array([[(i >> j) & 1 for j in range(dim)] for i in range(2 ** dim)], dtype=float)
        sets.append(cube)
    sets.append(rng.uniform(-1, 1, size=(max(samples, 2), dim)))
    return sets


def _largest_clique(metric, pts, rel_tol):
    m = len(pts)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            D[i, j] = D[j, i] = metric(pts[i], pts[j])
    best, best_r = [], 0.0
    iu = np.triu_indices(m, 1)
    for r in sorted(set(np.round(D[iu], 12))):
        if r <= 0:
            continue
        A = np.abs(D - r) <= rel_tol * r
        np.fill_diagonal(A, False)
        c = max_clique(A)
        if len(c) > len(best):
            best, best_r = c, float(r)
    return best, best_r


def probe_product_homogeneity(metric: Callable, dim: int, samples: int = 50, seed=0,
                              rel_tol: float = 1e-9, probes: int = 20) -> ProbeReport:
    """Search structured and random point sets for equidistant cliques, and
    count random triples (a, b, c) for which the Euclidean similarity fixing a
    and sending b to c fails to scale ``metric`` by a constant factor.
    """
    if dim < 1:
        raise InvalidArgument("dim must be >= 1")
    rng = np.random.default_rng(seed)
    best, best_r = [], 0.0
    for pts in _candidate_sets(dim, rng, samples):
        c, r = _largest_clique(metric, pts, rel_tol)
        if len(c) > len(best):
            best, best_r = [[float(t) for t in pts[i]] for i in c], r
    violations = 0
    for _ in range(samples):
        a, b, c = rng.uniform(-1, 1, size=(3, dim))
        if min(np.linalg.norm(b - a), np.linalg.norm(c - a)) < 1e-6:
            continue
        s = np.linalg.norm(c - a) / np.linalg.norm(b - a)
        Q = align_rotation(b - a, c - a)

        def u(x):
            return a + s * (Q @ (x - a))

        ratios = []
        for x, y in rng.uniform(-1, 1, size=(probes, 2, dim)):
            ratios.append(metric(u(x), u(y)) / metric(x, y))
        ratios.append(metric(u(b), a) / metric(b, a))
        if max(ratios) - min(ratios) > 1e-9 * max(ratios):
            violations += 1
    return ProbeReport(len(best), best, best_r, violations, samples)
