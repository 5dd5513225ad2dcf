"""Property suites run over deterministic samples; each returns counts, never raises on a failed check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coding import address_distance, canonical_decode, canonical_encode
from .dilations import (
    GeoScale,
    affine,
    apply,
    compose,
    dilation_violations,
    scale_of,
    similarity,
    two_point_witness,
    Type0Permutation,
)
from .distmat import distance_matrix, ultrametric_violations
from .errors import InvalidArgument
from .local_field import ls_random
from .spaces import (
    Fixed,
    Geo,
    Space,
    Type0,
    Type1,
    Type2,
    descriptor_to_json,
    distance,
    random_point,
    same_point,
    sample,
    translate,
)


@dataclass
class PropertyResult:
    name: str
    checked: int
    violations: int
    examples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {"property": self.name, "checked": self.checked, "violations": self.violations,
                "ok": self.ok, "examples": self.examples}


STATEMENTS = {
    "ultrametric": "Type-1 metrics (and the discrete type-0 metric) are ultrametrics: "
                   "d(x,z) <= max(d(x,y), d(y,z)) for all x, y, z.",
    "gamma": "The positive distances of a type-1 space F_{n,a,b} are exactly the numbers a*b^k with k an integer "
             "(and the single value r for D_{size,r}).",
    "scale-hom": "The scale map u -> |u| from dilations to positive reals is a group homomorphism: "
                 "|u o v| = |u| * |v|.",
    "two-point": "Two-point homogeneity: for distinct a, b, c there is a dilation u with u(a) = a and u(b) = c, "
                 "of scale d(a,c)/d(a,b).",
    "coding": "Every type-1 space is isometric to the address space with its tree ultrametric D: "
              "d(x,y) = D(Phi(x), Phi(y)), and decoding inverts encoding.",
    "translation": "Translations of the field model are isometries: d(x+t, y+t) = d(x,y).",
}


def _rng(seed):
    return np.random.default_rng(seed)


def _sample(space, count, depth, seed):
    if isinstance(space.desc, Type0):
        count = min(count, space.desc.size)
    return sample(space, count, depth, seed)


def random_dilation(space: Space, rng, depth: int = 3):
    """Random dilation of the space: affine (type 1), similarity (type 2) or permutation (type 0)."""
    desc = space.desc
    if isinstance(desc, Type1):
        m = int(rng.integers(-depth, depth + 1))
        units = [ls_random(f, m, m, 8 * depth + 16, int(rng.integers(2 ** 31))) for f in space.fields]
        return affine(space, units, random_point(space, -depth, depth, 8 * depth + 16, rng))
    if isinstance(desc, Type2):
        Q, R = np.linalg.qr(rng.normal(size=(desc.n, desc.n)))
        Q = Q * np.sign(np.diag(R))
        return similarity(float(np.exp(rng.uniform(-1.5, 1.5))), Q, rng.normal(size=desc.n))
    return Type0Permutation(tuple(int(i) for i in rng.permutation(desc.size)))


def check_ultrametric(space: Space, count=200, depth=5, seed=0) -> PropertyResult:
    if isinstance(space.desc, Type2):
        raise InvalidArgument("the ultrametric property concerns type-0 and type-1 spaces")
    pts = _sample(space, count, depth, seed)
    m = distance_matrix(space, pts)
    n = len(pts)
    bad, ex = ultrametric_violations(m)
    return PropertyResult("ultrametric", n * (n - 1) * (n - 2) // 6, bad, [list(t) for t in ex])


def check_gamma(space: Space, count=200, depth=5, seed=0) -> PropertyResult:
    """Re-derive the integer exponent of each real distance and compare to 1e-12 relative."""
    desc = space.desc
    if isinstance(desc, Type2):
        raise InvalidArgument("the distance-set property concerns type-0 and type-1 spaces")
    pts = _sample(space, count, depth, seed)
    m = distance_matrix(space, pts)
    checked, bad, ex = 0, 0, []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            checked += 1
            d, v = m.exact[i][j], float(repr(float(m.values[i, j])))
            if isinstance(desc, Type1):
                k = round(math.log(v / desc.a) / math.log(desc.b))
                ok = isinstance(d, Geo) and d.k == k and abs(desc.a * desc.b ** k - v) < 1e-12 * v
            else:
                ok = isinstance(d, Fixed) and abs(v - desc.r) < 1e-12 * desc.r
            if not ok:
                bad += 1
                if len(ex) < 10:
                    ex.append([i, j])
    return PropertyResult("gamma", checked, bad, ex)


def check_scale_hom(space: Space, count=100, depth=3, seed=0, probes=5) -> PropertyResult:
    rng = _rng(seed)
    pts = _sample(space, max(probes + 1, 12), depth, seed)
    checked, bad, ex = 0, 0, []
    for t in range(count):
        u, v = random_dilation(space, rng, depth), random_dilation(space, rng, depth)
        w = compose(u, v)
        su, sv, sw = scale_of(u, space), scale_of(v, space), scale_of(w, space)
        if isinstance(sw, GeoScale):
            ok = su * sv == sw
        else:
            ok = abs((su * sv).value - sw.value) <= 1e-12 * sw.value
        probe = [pts[int(i)] for i in rng.choice(len(pts), min(len(pts), probes), replace=False)]
        ok = ok and not dilation_violations(space, w, probe)
        ok = ok and all(same_point(space, apply(w, x), apply(u, apply(v, x)), 1e-9) for x in probe)
        checked += 1
        if not ok:
            bad += 1
            if len(ex) < 10:
                ex.append(t)
    return PropertyResult("scale-hom", checked, bad, ex)


def check_two_point(space: Space, count=100, depth=3, seed=0, probes=50, sample_size=60) -> PropertyResult:
    """Witnesses for random triples; the ratio is checked on ``probes`` pairs drawn from the sample."""
    rng = _rng(seed)
    pts = _sample(space, sample_size, depth, seed)
    if len(pts) < 3:
        raise InvalidArgument("need at least three points")
    checked, bad, ex = 0, 0, []
    for t in range(count):
        a, b, c = (pts[int(i)] for i in rng.choice(len(pts), 3, replace=False))
        pairs = [tuple(int(i) for i in rng.choice(len(pts), 2, replace=False)) for _ in range(probes)]
        dom = sorted({i for p in pairs for i in p})
        u = two_point_witness(space, a, b, c, domain=[pts[i] for i in dom])
        ok = same_point(space, apply(u, a), a, 1e-9) and same_point(space, apply(u, b), c, 1e-9)
        s = scale_of(u, space)
        dab, dac = distance(space, a, b), distance(space, a, c)
        if isinstance(s, GeoScale):
            ok = ok and s.k == dac.k - dab.k
        else:
            ok = ok and abs(s.value - dac.value / dab.value) <= 1e-9 * s.value
        for i, j in pairs:
            d = distance(space, pts[i], pts[j])
            e = distance(space, apply(u, pts[i]), apply(u, pts[j]))
            if isinstance(s, GeoScale):
                ok = ok and isinstance(e, Geo) and e.k == d.k + s.k
            else:
                ok = ok and abs(e.value - s.value * d.value) <= 1e-9 * s.value * d.value
        checked += 1
        if not ok:
            bad += 1
            if len(ex) < 10:
                ex.append(t)
    return PropertyResult("two-point", checked, bad, ex)


def check_coding(space: Space, count=500, depth=6, seed=0) -> PropertyResult:
    """Round trip decode(encode(x)) == x and exact distance preservation on random points."""
    if not isinstance(space.desc, Type1):
        raise InvalidArgument("the coding property concerns type-1 spaces")
    rng = _rng(seed)
    pts = [random_point(space, -depth, depth, depth - 1, rng) for _ in range(count)]
    codes = [canonical_encode(space, x, depth) for x in pts]
    bad, ex, checked = 0, [], 0
    for i, (x, c) in enumerate(zip(pts, codes)):
        checked += 1
        if canonical_decode(space, c, depth) != x or canonical_encode(space, canonical_decode(space, c, depth), depth) != c:
            bad += 1
            if len(ex) < 10:
                ex.append(["round-trip", i])
    a, b = space.desc.a, space.desc.b
    for i in range(count):
        for j in range(i + 1, count):
            checked += 1
            if address_distance(codes[i], codes[j], a, b) != distance(space, pts[i], pts[j]):
                bad += 1
                if len(ex) < 10:
                    ex.append(["distance", i, j])
    return PropertyResult("coding", checked, bad, ex)


def check_translation(space: Space, count=1000, depth=5, seed=0) -> PropertyResult:
    if not isinstance(space.desc, Type1):
        raise InvalidArgument("the translation property concerns type-1 field models")
    rng = _rng(seed)
    bad, ex = 0, []
    for t in range(count):
        x, y = (random_point(space, -depth, depth, 2 * depth + 1, rng) for _ in range(2))
        # the translation is known further than either point, so sums keep the points' windows
        s = random_point(space, -depth, depth, 4 * depth + 2, rng)
        d = distance(space, x, y)
        e = distance(space, translate(space, x, s), translate(space, y, s))
        if d != e:
            bad += 1
            if len(ex) < 10:
                ex.append(t)
    return PropertyResult("translation", count, bad, ex)


PROPERTIES: dict[str, Callable] = {
    "ultrametric": check_ultrametric,
    "gamma": check_gamma,
    "scale-hom": check_scale_hom,
    "two-point": check_two_point,
    "coding": check_coding,
    "translation": check_translation,
}


def run_property(name: str, space: Space, **kw) -> PropertyResult:
    if name not in PROPERTIES:
        raise InvalidArgument(f"unknown property {name!r}; choose from {sorted(PROPERTIES)}")
    kw = {k: v for k, v in kw.items() if v is not None}
    return PROPERTIES[name](space, **kw)


def report_json(space: Space, results) -> dict:
    return {"space": descriptor_to_json(space.desc), "results": [r.to_json() for r in results]}
