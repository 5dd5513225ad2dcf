"""Dilations: affine and table maps on type-1 models, similarities on R^n.

A dilation multiplies every distance by a fixed constant, its scale.  Type-1
scales are exact powers ``b**k`` and compose by adding exponents; type-2
scales are positive reals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InvalidArgument, InvalidDilation, InvariantViolation, PrecisionExhausted
from .local_field import (
    LaurentSeries,
    ls_add,
    ls_inv,
    ls_monomial,
    ls_mul,
    ls_neg,
    ls_sub,
    ls_valuation,
    series_from_json,
    series_to_json,
)
from .products import align_rotation
from .spaces import (
    PD,
    PF,
    PR,
    Geo,
    Space,
    Type0,
    Type1,
    Type2,
    Zero,
    _check_point,
    _diff_valuation,
    _digit_at,
    distance,
    point_from_digits,
    point_from_json,
    point_to_json,
    same_point,
    scale_point,
    zero_point,
)

# coefficients kept for exact monomial units; far beyond any sampled window
EXACT_UNIT_PREC = 64
ORTHO_TOL = 1e-12


# -- scales -----------------------------------------------------------------


@dataclass(frozen=True)
class GeoScale:
    """The scale ``b**k``."""

    b: float
    k: int

    @property
    def value(self) -> float:
        return self.b ** self.k

    def __mul__(self, other):
        if isinstance(other, GeoScale) and other.b == self.b:
            return GeoScale(self.b, self.k + other.k)
        return RealScale(self.value * _value(other))


@dataclass(frozen=True)
class RealScale:
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidArgument("scale must be positive")

    @property
    def value(self) -> float:
        return float(self.c)

    def __mul__(self, other):
        return RealScale(self.c * _value(other))


ExactScale = Union[GeoScale, RealScale]


def _value(s) -> float:
    return s.value if isinstance(s, (GeoScale, RealScale)) else float(s)


def scale_to_json(s: ExactScale) -> dict:
    if isinstance(s, GeoScale):
        return {"kind": "geo", "b": s.b, "k": s.k, "value": s.value}
    return {"kind": "real", "c": s.c, "value": s.value}


# -- maps -------------------------------------------------------------------


@dataclass(frozen=True)
class Type1Affine:
    """``x -> units * x + shift``, factor by factor."""

    units: tuple
    shift: PF


@dataclass(frozen=True)
class Type1Composite:
    """A dilation known on a finite domain: ``table`` pairs each source with its image.

    ``scale_exponent`` is ``m`` with scale ``b**(-m)``, as for multiplication by ``X**m``.
    """

    scale_exponent: int
    table: tuple

    @cached_property
    def lookup(self) -> dict:
        return dict(self.table)


@dataclass(frozen=True)
class Type2Similarity:
    """``x -> scale * Q x + translation``."""

    scale: float
    orthogonal: tuple
    translation: tuple

    @property
    def Q(self) -> np.ndarray:
        return np.array(self.orthogonal, dtype=float).reshape(len(self.translation), len(self.translation))


@dataclass(frozen=True)
class Type0Permutation:
    perm: tuple


DilationMap = Union[Type1Affine, Type1Composite, Type2Similarity, Type0Permutation]


def _require(space: Space, kind):
    if not isinstance(space.desc, kind):
        raise InvalidArgument(f"operation needs a {kind.__name__} space, got {space.desc}")


def identity(space: Space) -> DilationMap:
    desc = space.desc
    if isinstance(desc, Type1):
        units = tuple(ls_monomial(f, 0, prec=EXACT_UNIT_PREC) for f in space.fields)
        return Type1Affine(units, zero_point(space))
    if isinstance(desc, Type2):
        return similarity(1.0, np.eye(desc.n), np.zeros(desc.n))
    return Type0Permutation(tuple(range(desc.size)))


def monomial_scaling(space: Space, m: int) -> Type1Affine:
    """``x -> X**m * x``."""
    _require(space, Type1)
    units = tuple(ls_monomial(f, m, prec=EXACT_UNIT_PREC) for f in space.fields)
    return Type1Affine(units, zero_point(space))


def translation(space: Space, t) -> DilationMap:
    desc = space.desc
    if isinstance(desc, Type1):
        _check_point(space, t)
        return Type1Affine(identity(space).units, t)
    if isinstance(desc, Type2):
        return similarity(1.0, np.eye(desc.n), np.asarray(t.coords))
    raise InvalidArgument("translations are defined for type-1 and type-2 spaces")


def similarity(scale: float, Q, t) -> Type2Similarity:
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if Q.shape != (n, n) or np.max(np.abs(Q.T @ Q - np.eye(n))) > ORTHO_TOL * max(1, n):
        raise InvalidDilation("orthogonal part fails Q^T Q = I")
    if not (scale > 0 and math.isfinite(scale)):
        raise InvalidDilation("similarity scale must be positive")
    t = np.asarray(t, dtype=float).reshape(n)
    return Type2Similarity(float(scale), tuple(float(x) for x in Q.ravel()), tuple(float(x) for x in t))


def affine(space: Space, units: Sequence[LaurentSeries], shift: PF) -> Type1Affine:
    _require(space, Type1)
    _check_point(space, shift)
    units = tuple(units)
    if len(units) != len(space.fields) or any(u.spec != f for u, f in zip(units, space.fields)):
        raise InvalidArgument("one unit per field factor is required")
    _unit_valuation(units)
    return Type1Affine(units, shift)


def _unit_valuation(units) -> int:
    vals = {ls_valuation(u) for u in units}
    if len(vals) != 1 or math.inf in vals:
        raise InvalidDilation(f"unit valuations must be equal and finite, got {sorted(vals)}")
    return int(vals.pop())


# -- evaluation -------------------------------------------------------------


def apply(u: DilationMap, x):
    if isinstance(u, Type1Affine):
        if not isinstance(x, PF) or len(x.factors) != len(u.units):
            raise InvalidArgument("point does not match the dilation")
        return PF(tuple(ls_add(ls_mul(lam, s), q) for lam, s, q in zip(u.units, x.factors, u.shift.factors)))
    if isinstance(u, Type1Composite):
        table = u.lookup
        if x not in table:
            raise DomainError("point outside the recorded domain of the dilation")
        return table[x]
    if isinstance(u, Type2Similarity):
        if not isinstance(x, PR) or len(x.coords) != len(u.translation):
            raise InvalidArgument("point does not match the dilation")
        y = u.scale * (u.Q @ np.asarray(x.coords)) + np.asarray(u.translation)
        return PR(tuple(float(c) for c in y))
    if isinstance(u, Type0Permutation):
        if not isinstance(x, PD) or not 0 <= x.index < len(u.perm):
            raise InvalidArgument("point does not match the permutation")
        return PD(u.perm[x.index])
    raise InvalidArgument(f"not a dilation: {u!r}")


def scale_of(u: DilationMap, space: Space) -> ExactScale:
    desc = space.desc
    if isinstance(u, Type1Affine):
        _require(space, Type1)
        return GeoScale(desc.b, -_unit_valuation(u.units))
    if isinstance(u, Type1Composite):
        _require(space, Type1)
        return GeoScale(desc.b, -u.scale_exponent)
    if isinstance(u, Type2Similarity):
        _require(space, Type2)
        return RealScale(u.scale ** desc.alpha)
    if isinstance(u, Type0Permutation):
        _require(space, Type0)
        return RealScale(1.0)
    raise InvalidArgument(f"not a dilation: {u!r}")


def compose(u: DilationMap, v: DilationMap, domain: Sequence | None = None) -> DilationMap:
    """``u after v``.

    A table map after an affine map is only known pointwise, so that case
    needs ``domain``: the result is tabulated on it.
    """
    if isinstance(u, Type1Affine) and isinstance(v, Type1Affine):
        if len(u.units) != len(v.units):
            raise InvalidArgument("dilations of different spaces")
        units = tuple(ls_mul(a, b) for a, b in zip(u.units, v.units))
        shift = PF(tuple(ls_add(ls_mul(a, q), p) for a, q, p in zip(u.units, v.shift.factors, u.shift.factors)))
        return Type1Affine(units, shift)
    if isinstance(u, (Type1Affine, Type1Composite)) and isinstance(v, Type1Composite):
        m = _exponent(u) + v.scale_exponent
        return Type1Composite(m, tuple((x, apply(u, y)) for x, y in v.table))
    if isinstance(u, Type1Composite) and isinstance(v, Type1Affine):
        if domain is None:
            raise InvalidDilation("composing a table map after an affine map needs an explicit domain")
        m = u.scale_exponent + _unit_valuation(v.units)
        return Type1Composite(m, tuple((x, apply(u, apply(v, x))) for x in domain))
    if isinstance(u, Type2Similarity) and isinstance(v, Type2Similarity):
        if len(u.translation) != len(v.translation):
            raise InvalidArgument("dilations of different spaces")
        Q = u.Q @ v.Q
        t = u.scale * (u.Q @ np.asarray(v.translation)) + np.asarray(u.translation)
        return Type2Similarity(u.scale * v.scale, tuple(float(x) for x in Q.ravel()), tuple(float(x) for x in t))
    if isinstance(u, Type0Permutation) and isinstance(v, Type0Permutation):
        if len(u.perm) != len(v.perm):
            raise InvalidArgument("dilations of different spaces")
        return Type0Permutation(tuple(u.perm[i] for i in v.perm))
    raise InvalidArgument(f"cannot compose {type(u).__name__} with {type(v).__name__}")


def _exponent(u) -> int:
    return _unit_valuation(u.units) if isinstance(u, Type1Affine) else u.scale_exponent


def inverse(u: DilationMap) -> DilationMap:
    if isinstance(u, Type1Affine):
        inv = tuple(ls_inv(lam) for lam in u.units)
        shift = PF(tuple(ls_neg(ls_mul(i, q)) for i, q in zip(inv, u.shift.factors)))
        return Type1Affine(inv, shift)
    if isinstance(u, Type1Composite):
        return Type1Composite(-u.scale_exponent, tuple((y, x) for x, y in u.table))
    if isinstance(u, Type2Similarity):
        Qt = u.Q.T
        t = -(Qt @ np.asarray(u.translation)) / u.scale
        return Type2Similarity(1.0 / u.scale, tuple(float(x) for x in Qt.ravel()), tuple(float(x) for x in t))
    if isinstance(u, Type0Permutation):
        out = [0] * len(u.perm)
        for i, j in enumerate(u.perm):
            out[j] = i
        return Type0Permutation(tuple(out))
    raise InvalidArgument(f"not a dilation: {u!r}")


# -- witnesses ----------------------------------------------------------------


def _distinct(space, a, b, c):
    for x, y in ((a, b), (a, c), (b, c)):
        if isinstance(distance(space, x, y), Zero):
            raise InvalidArgument("witness needs three pairwise distinct points")


def two_point_witness(space: Space, a, b, c, domain: Sequence = ()) -> DilationMap:
    """A dilation fixing ``a`` and sending ``b`` to ``c``.

    Type-1 spaces over a single field use the affine map with multiplier
    ``(c - a) / (b - a)``.  With several field factors the witness is built by
    the extension engine and is tabulated on ``{a, b}`` plus ``domain``.
    """
    for p in (a, b, c, *domain):
        _check_point(space, p)
    _distinct(space, a, b, c)
    desc = space.desc
    if isinstance(desc, Type1):
        if len(space.fields) == 1:
            ba = ls_sub(b.factors[0], a.factors[0])
            ca = ls_sub(c.factors[0], a.factors[0])
            lam = ls_mul(ca, ls_inv(ba))
            shift = ls_sub(a.factors[0], ls_mul(lam, a.factors[0]))
            return Type1Affine((lam,), PF((shift,)))
        pts = _dedup(space, [a, b, *domain])
        return extend_partial(space, pts, [(a, a), (b, c)])
    if isinstance(desc, Type2):
        A, B, C = (np.asarray(p.coords, dtype=float) for p in (a, b, c))
        s = np.linalg.norm(C - A) / np.linalg.norm(B - A)
        Q = align_rotation(B - A, C - A)
        return similarity(s, Q, A - s * (Q @ A))
    perm = list(range(desc.size))
    perm[b.index], perm[c.index] = c.index, b.index
    return Type0Permutation(tuple(perm))


def _dedup(space, pts):
    out = []
    for p in pts:
        if not any(same_point(space, p, q) for q in out):
            out.append(p)
    return out


def pair_map(space: Space, a, b, p, q, domain: Sequence = ()) -> DilationMap:
    """A dilation with ``a -> p`` and ``b -> q``: a translation followed by a witness."""
    desc = space.desc
    if isinstance(desc, Type0):
        perm = list(range(desc.size))
        # send a -> p, then fix p and move the image of b to q
        perm[a.index], perm[p.index] = perm[p.index], perm[a.index]
        first = Type0Permutation(tuple(perm))
        b1 = apply(first, b)
        if b1 == q:
            return first
        return compose(two_point_witness(space, p, b1, q), first)
    if isinstance(desc, Type1):
        t = PF(tuple(ls_sub(x, y) for x, y in zip(p.factors, a.factors)))
        T = translation(space, t)
        # use the computed image of a as the fixed point so table lookups match exactly
        p1, b1 = apply(T, a), apply(T, b)
        moved = [apply(T, x) for x in domain]
        if same_point(space, b1, q):
            return T
        w = two_point_witness(space, p1, b1, q, moved)
        if isinstance(w, Type1Composite):
            return compose(w, T, domain=[a, b, *domain])
        return compose(w, T)
    t = np.asarray(p.coords) - np.asarray(a.coords)
    T = translation(space, PR(tuple(t)))
    b1 = apply(T, b)
    return compose(two_point_witness(space, p, b1, q), T)


# -- extension engine -------------------------------------------------------


def _exponent_of(space, x, y) -> int:
    d = distance(space, x, y)
    if isinstance(d, Zero):
        raise InvalidArgument("coincident points")
    return d.k


def check_partial(space: Space, pairs: Sequence[tuple]) -> int:
    """Validate a partial dilation and return its exponent shift ``s`` (scale ``b**s``)."""
    _require(space, Type1)
    for x, y in pairs:
        _check_point(space, x)
        _check_point(space, y)
    s = None
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            (x1, y1), (x2, y2) = pairs[i], pairs[j]
            if isinstance(distance(space, x1, x2), Zero):
                raise InvalidArgument(f"partial map has a repeated source (entries {i}, {j})")
            if isinstance(distance(space, y1, y2), Zero):
                raise InvalidArgument(f"partial map is not injective (entries {i}, {j})")
            shift = _exponent_of(space, y1, y2) - _exponent_of(space, x1, x2)
            if s is None:
                s = shift
            elif shift != s:
                raise InvalidArgument(
                    f"partial map is not a dilation: pair ({i}, {j}) scales by b^{shift}, expected b^{s}"
                )
    return 0 if s is None else s


def _place(space: Space, z0_img: PF, j: int, used: set, min_end: int) -> PF:
    """Point agreeing with ``z0_img`` below ``j``, with the least digit at ``j`` not in ``used``.

    Digits past ``j`` are zero up to the anchor's window end (at least ``min_end``).
    """
    n = space.desc.n
    free = next((d for d in range(n) if d not in used), None)
    if free is None:
        raise InvariantViolation(f"no free branch at exponent {j}")
    info = z0_img.digits
    if info is None:
        lo, end = j, max(j + 1, min_end)
        below = []
    else:
        lo = min(info[0], j)
        end = max(info[1], j + 1, min_end)
        if info[1] < j:
            raise PrecisionExhausted(f"anchor image known only below X^{info[1]}")
        below = [_digit_at(info, e) for e in range(lo, j)]
    return point_from_digits(space, lo, below + [free] + [0] * (end - j - 1))


def extend_partial(space: Space, sample: Sequence[PF], partial: Sequence[tuple]) -> Type1Composite:
    """Extend a partial dilation on ``sample`` to every sample point.

    Targets are built in the canonical model, one point at a time, on the
    least free branch next to the nearest already-mapped point.
    """
    _require(space, Type1)
    sample = list(sample)
    partial = [(x, y) for x, y in partial]
    s = check_partial(space, partial)
    for x, _ in partial:
        if not any(same_point(space, x, p) for p in sample):
            raise InvalidArgument("partial map domain is not contained in the sample")
    # isometric normalisation: phi(x) = X^s * psi(x)
    src = [x for x, _ in partial]
    img = [scale_point(y, s) for _, y in partial]
    if not src:
        src, img = [sample[0]], [sample[0]]
    # placed points are zero-padded to the widest window among the inputs
    frame_end = max((p.digits[1] for p in [*sample, *img] if p.digits is not None), default=1)
    for z in sample:
        if any(same_point(space, z, x) for x in src):
            continue
        ks = [_exponent_of(space, z, x) for x in src]
        k0 = min(ks)
        i0 = ks.index(k0)
        j = -k0  # first differing digit between z and its nearest anchor
        used = set()
        for x, y, k in zip(src, img, ks):
            if k == k0 and _diff_valuation(src[i0], x) >= j:
                used.add(_digit_at(y.digits, j) if y.digits is not None else 0)
        img.append(_place(space, img[i0], j, used, frame_end))
        src.append(z)
    table = {}
    for x, y in zip(src, img):
        table[x] = scale_point(y, -s)
    for x, y in partial:
        table[x] = y
    pairs = tuple((x, table[x]) for x in src)
    u = Type1Composite(-s, pairs)
    _check_dilation(space, u, s)
    return u


def _check_dilation(space, u: Type1Composite, s: int):
    tab = u.table
    for i in range(len(tab)):
        for j in range(i + 1, len(tab)):
            (x1, y1), (x2, y2) = tab[i], tab[j]
            if _exponent_of(space, y1, y2) != _exponent_of(space, x1, x2) + s:
                raise InvariantViolation(f"extension breaks the scale on pair ({i}, {j})")


def dilation_violations(space: Space, u: DilationMap, points: Sequence, rel_tol: float = 1e-9):
    """Pairs whose distance ratio under ``u`` differs from ``scale_of(u)``."""
    scale = scale_of(u, space)
    imgs = [apply(u, p) for p in points]
    bad = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = distance(space, points[i], points[j])
            e = distance(space, imgs[i], imgs[j])
            if isinstance(d, Zero):
                continue
            if isinstance(d, Geo) and isinstance(scale, GeoScale):
                ok = isinstance(e, Geo) and e.k == d.k + scale.k
            else:
                ok = abs(e.value - scale.value * d.value) <= rel_tol * scale.value * d.value
            if not ok:
                bad.append((i, j))
    return bad


# -- JSON -------------------------------------------------------------------


def dilation_to_json(u: DilationMap) -> dict:
    if isinstance(u, Type1Affine):
        return {"kind": "type1-affine", "units": [series_to_json(s) for s in u.units],
                "shift": point_to_json(u.shift)}
    if isinstance(u, Type1Composite):
        return {"kind": "type1-composite", "scale_exponent": u.scale_exponent,
                "table": [[point_to_json(x), point_to_json(y)] for x, y in u.table]}
    if isinstance(u, Type2Similarity):
        n = len(u.translation)
        return {"kind": "type2-similarity", "scale": u.scale,
                "orthogonal": [list(u.orthogonal[i * n:(i + 1) * n]) for i in range(n)],
                "translation": list(u.translation)}
    return {"kind": "type0-permutation", "perm": list(u.perm)}


def dilation_from_json(space: Space, obj: dict) -> DilationMap:
    kind = obj.get("kind")
    try:
        if kind == "type1-affine":
            units = [series_from_json(f, s) for f, s in zip(space.fields, obj["units"])]
            return affine(space, units, point_from_json(space, obj["shift"]))
        if kind == "type1-composite":
            table = tuple((point_from_json(space, x), point_from_json(space, y)) for x, y in obj["table"])
            return Type1Composite(int(obj["scale_exponent"]), table)
        if kind == "type2-similarity":
            return similarity(float(obj["scale"]), obj["orthogonal"], obj["translation"])
        if kind == "type0-permutation":
            perm = tuple(int(i) for i in obj["perm"])
            if sorted(perm) != list(range(len(perm))):
                raise InvalidDilation("not a permutation")
            return Type0Permutation(perm)
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"malformed dilation: {exc}") from None
    raise InvalidArgument(f"unknown dilation kind {kind!r}")
