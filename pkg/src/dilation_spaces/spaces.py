"""Canonical spaces D_{size,r}, F_{n,a,b} and R_{n,alpha}: points, exact distances, sampling.

Type-1 points are tuples of Laurent series, one per prime-power factor of
``n``.  For distance purposes a point is read as a string of *digits*: the
digit at exponent ``e`` is the mixed-radix index of the tuple of factor
coefficients at ``X^e`` (first factor most significant), so the digit is
zero exactly when every factor coefficient vanishes.  The valuation of
``x - y`` is then the first exponent where the digit strings differ.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, total_ordering
from typing import Sequence, Union

import numpy as np

from .errors import InvalidArgument, PrecisionExhausted
from .local_field import (
    FieldSpec,
    field_make,
    ls_add,
    ls_make,
    ls_zero,
    series_from_json,
    series_to_json,
)

# -- descriptors ------------------------------------------------------------


@dataclass(frozen=True)
class Type0:
    """``size`` points, all pairwise at distance ``r``."""

    size: int
    r: float

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))

    def validate(self):
        if int(self.size) != self.size or self.size < 2:
            raise InvalidArgument(f"Type0 requires integer size >= 2, got {self.size}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise InvalidArgument(f"Type0 requires r > 0, got {self.r}")


@dataclass(frozen=True)
class Type1:
    """prod_s F_{p_s^k_s}((X)) with distance a * b^(-min_s |x_s - y_s|)."""

    n: int
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    def validate(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"Type1 requires integer n >= 2, got {self.n}")
        if not (1 <= self.a < self.b and math.isfinite(self.b)):
            raise InvalidArgument(f"Type1 requires 1 <= a < b, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class Type2:
    """R^n with the snowflaked Euclidean metric d_e^alpha."""

    n: int
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))

    def validate(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"Type2 requires integer n >= 1, got {self.n}")
        if not 0 < self.alpha <= 1:
            raise InvalidArgument(f"Type2 requires 0 < alpha <= 1, got {self.alpha}")


SpaceDescriptor = Union[Type0, Type1, Type2]


def type_of(desc: SpaceDescriptor) -> int:
    return {Type0: 0, Type1: 1, Type2: 2}[type(desc)]


def descriptor_to_json(desc: SpaceDescriptor) -> dict:
    if isinstance(desc, Type0):
        return {"type": 0, "params": {"size": desc.size, "r": desc.r}}
    if isinstance(desc, Type1):
        return {"type": 1, "params": {"n": desc.n, "a": desc.a, "b": desc.b}}
    return {"type": 2, "params": {"n": desc.n, "alpha": desc.alpha}}


def descriptor_from_json(obj: dict) -> SpaceDescriptor:
    try:
        t, params = int(obj["type"]), obj["params"]
        if t == 0:
            desc = Type0(int(params["size"]), float(params["r"]))
        elif t == 1:
            desc = Type1(int(params["n"]), float(params["a"]), float(params["b"]))
        elif t == 2:
            desc = Type2(int(params["n"]), float(params["alpha"]))
        else:
            raise InvalidArgument(f"unknown space type {t}")
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"malformed descriptor: {exc}") from None
    desc.validate()
    return desc


def prime_decompose(n: int) -> list[tuple[int, int]]:
    if int(n) != n or n < 2:
        raise InvalidArgument(f"n={n} must be an integer >= 2")
    if n > 2 ** 20:
        raise InvalidArgument(f"n={n} exceeds 2^20")
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            k = 0
            while n % f == 0:
                n //= f
                k += 1
            out.append((f, k))
        f += 1
    if n > 1:
        out.append((n, 1))
    return out


# -- exact distances --------------------------------------------------------


@total_ordering
class _Dist:
    __slots__ = ()

    @property
    def value(self) -> float:  # pragma: no cover - overridden
        raise NotImplementedError

    def __lt__(self, other):
        if isinstance(self, Zero):
            return not isinstance(other, Zero)
        if isinstance(other, Zero):
            return False
        if isinstance(self, Geo) and isinstance(other, Geo) and (self.a, self.b) == (other.a, other.b):
            return self.k < other.k
        return self.value < other.value


@dataclass(frozen=True, eq=True)
class Zero(_Dist):
    @property
    def value(self) -> float:
        return 0.0


@dataclass(frozen=True, eq=True)
class Fixed(_Dist):
    r: float

    @property
    def value(self) -> float:
        return float(self.r)


@dataclass(frozen=True, eq=True)
class Geo(_Dist):
    """The distance ``a * b**k``."""

    a: float
    b: float
    k: int

    @property
    def value(self) -> float:
        return self.a * self.b ** self.k


@dataclass(frozen=True, eq=True)
class Cont(_Dist):
    x: float

    @property
    def value(self) -> float:
        return float(self.x)


ExactDistance = Union[Zero, Fixed, Geo, Cont]


def distance_to_json(d: ExactDistance) -> dict:
    if isinstance(d, Zero):
        return {"kind": "zero"}
    if isinstance(d, Fixed):
        return {"kind": "fixed", "r": d.r}
    if isinstance(d, Geo):
        return {"kind": "geo", "a": d.a, "b": d.b, "k": d.k}
    return {"kind": "cont", "x": d.x}


def distance_from_json(obj: dict) -> ExactDistance:
    kind = obj.get("kind")
    if kind == "zero":
        return Zero()
    if kind == "fixed":
        return Fixed(float(obj["r"]))
    if kind == "geo":
        return Geo(float(obj["a"]), float(obj["b"]), int(obj["k"]))
    if kind == "cont":
        return Cont(float(obj["x"]))
    raise InvalidArgument(f"unknown distance kind {kind!r}")


# -- points -----------------------------------------------------------------


@dataclass(frozen=True)
class PD:
    index: int


@dataclass(frozen=True)
class PF:
    factors: tuple

    @cached_property
    def digits(self):
        """``(lo, end, digits)`` over the common window, or ``None`` for the exact zero point."""
        live = [s for s in self.factors if not s.zero]
        if not live:
            return None
        lo = min(s.v0 for s in live)
        end = min(s.end for s in live)
        out = []
        for e in range(lo, end):
            d = 0
            for s in self.factors:
                d = d * s.spec.q + s.spec.index(s.coeff(e))
            out.append(d)
        return lo, end, tuple(out)


@dataclass(frozen=True)
class PR:
    coords: tuple


Point = Union[PD, PF, PR]


@dataclass(frozen=True)
class Space:
    desc: SpaceDescriptor
    fields: tuple = ()

    @property
    def type(self) -> int:
        return type_of(self.desc)

    @property
    def radices(self) -> tuple:
        return tuple(f.q for f in self.fields)

    def distance(self, x: Point, y: Point) -> ExactDistance:
        return distance(self, x, y)


def space_make(desc: SpaceDescriptor) -> Space:
    if not isinstance(desc, (Type0, Type1, Type2)):
        raise InvalidArgument(f"not a space descriptor: {desc!r}")
    desc.validate()
    if isinstance(desc, Type1):
        return Space(desc, tuple(field_make(p, k) for p, k in prime_decompose(desc.n)))
    return Space(desc)


def _check_point(space: Space, x: Point):
    desc = space.desc
    if isinstance(desc, Type0):
        if not isinstance(x, PD) or not 0 <= x.index < desc.size:
            raise InvalidArgument(f"{x!r} is not a point of {desc}")
    elif isinstance(desc, Type1):
        if (
            not isinstance(x, PF)
            or len(x.factors) != len(space.fields)
            or any(s.spec != f for s, f in zip(x.factors, space.fields))
        ):
            raise InvalidArgument(f"point does not belong to {desc}")
    else:
        if not isinstance(x, PR) or len(x.coords) != desc.n:
            raise InvalidArgument(f"{x!r} is not a point of {desc}")
        if not all(math.isfinite(c) for c in x.coords):
            raise InvalidArgument("coordinates must be finite")


def split_digit(space: Space, d: int) -> tuple:
    """Mixed-radix digit -> tuple of per-factor field indices."""
    out = []
    for q in reversed(space.radices):
        out.append(d % q)
        d //= q
    return tuple(reversed(out))


def pack_digit(space: Space, parts: Sequence[int]) -> int:
    d = 0
    for q, i in zip(space.radices, parts):
        d = d * q + i
    return d


def point_from_digits(space: Space, lo: int, digits: Sequence[int]) -> PF:
    """Type-1 point whose digit string over ``[lo, lo + len(digits))`` is given.

    Factors whose coefficients all vanish on the window become the exact zero.
    """
    per_factor = [[] for _ in space.fields]
    for d in digits:
        for s, i in enumerate(split_digit(space, int(d))):
            per_factor[s].append(space.fields[s].unindex(i))
    factors = []
    for f, coeffs in zip(space.fields, per_factor):
        if any(any(c) for c in coeffs):
            factors.append(ls_make(f, lo, coeffs))
        else:
            factors.append(ls_zero(f))
    return PF(tuple(factors))


def zero_point(space: Space) -> PF:
    return PF(tuple(ls_zero(f) for f in space.fields))


def _digit_at(info, e):
    lo, end, digits = info
    if e < lo:
        return 0
    if e >= end:
        raise PrecisionExhausted(f"digit at X^{e} beyond window end {end}")
    return digits[e - lo]


def point_valuation(x: PF):
    """min_s |x_s|; ``math.inf`` for the zero point."""
    info = x.digits
    if info is None:
        return math.inf
    lo, end, digits = info
    for i, d in enumerate(digits):
        if d:
            return lo + i
    raise PrecisionExhausted("point valuation unresolved at stored precision")


def _diff_valuation(x: PF, y: PF):
    """Valuation of x - y (``math.inf`` when equal)."""
    dx, dy = x.digits, y.digits
    if dx is None:
        return point_valuation(y)
    if dy is None:
        return point_valuation(x)
    lo = min(dx[0], dy[0])
    hi = min(dx[1], dy[1])
    for e in range(lo, hi):
        if _digit_at(dx, e) != _digit_at(dy, e):
            return e
    if dx[1] == dy[1]:
        return math.inf
    raise PrecisionExhausted(f"points agree up to X^{hi}; their difference is unresolved")


def distance(space: Space, x: Point, y: Point) -> ExactDistance:
    _check_point(space, x)
    _check_point(space, y)
    desc = space.desc
    if isinstance(desc, Type0):
        return Zero() if x.index == y.index else Fixed(desc.r)
    if isinstance(desc, Type1):
        v = _diff_valuation(x, y)
        return Zero() if v == math.inf else Geo(desc.a, desc.b, -v)
    de = math.dist(x.coords, y.coords)
    return Zero() if de == 0 else Cont(de ** desc.alpha)


def same_point(space: Space, x: Point, y: Point, rel_tol: float = 0.0) -> bool:
    """Equality up to the precision both points determine."""
    desc = space.desc
    if isinstance(desc, Type1):
        try:
            return _diff_valuation(x, y) == math.inf
        except PrecisionExhausted:
            return True
    if isinstance(desc, Type2):
        scale = max(1.0, max(abs(c) for c in x.coords))
        return math.dist(x.coords, y.coords) <= rel_tol * scale
    return x == y


def translate(space: Space, x: PF, t: PF) -> PF:
    """x + t in the additive group of the type-1 model."""
    _check_point(space, x)
    _check_point(space, t)
    return PF(tuple(ls_add(a, b) for a, b in zip(x.factors, t.factors)))


def scale_point(x: PF, m: int) -> PF:
    """X^m * x."""
    return PF(tuple(s.shifted(m) for s in x.factors))


# -- sampling ---------------------------------------------------------------


def sample_window(depth: int) -> tuple[int, int]:
    """Digit window used by :func:`sample`: support in [-depth, depth], window end 3*depth + 1.

    The zero digits past the support are guard precision; they keep images
    under dilations of scale up to b^(2*depth) resolvable.
    """
    return -depth, 3 * depth + 1


def random_point(space: Space, val_lo: int, val_hi: int, ncoeffs: int, rng) -> PF:
    """Type-1 point with valuation uniform in ``[val_lo, val_hi]`` and window ``[v, v + ncoeffs)``."""
    n = space.desc.n
    v = int(rng.integers(val_lo, val_hi + 1))
    digits = [int(rng.integers(1, n))] + [int(d) for d in rng.integers(0, n, size=ncoeffs - 1)]
    return point_from_digits(space, v, digits)


def regular_simplex(n: int, side: float = 1.0) -> np.ndarray:
    """(n+1) x n array: vertices of a regular simplex in R^n centred at the origin."""
    if n == 0:
        return np.zeros((1, 0))
    e = np.eye(n + 1) * (side / math.sqrt(2.0))
    centred = e - e.mean(axis=0)
    # orthonormal basis of the hyperplane sum(x) = 0
    basis = np.linalg.svd(centred)[2][:n]
    verts = centred @ basis.T
    # fix the sign convention so the output is deterministic
    for j in range(n):
        if verts[0, j] < 0:
            verts[:, j] = -verts[:, j]
    return verts


def sample(space: Space, count: int, depth: int = 3, seed=0) -> list:
    """Deterministic sample of pairwise-distinct points.

    Seeded structure comes first: for type 1 the ``n`` constant points (a
    maximal equidistant set at distance ``a``) when ``count >= n``; for type
    2 the unit regular simplex when ``count >= n + 1``, then the origin and
    the pair ``+-e_1`` when there is room.
    """
    if count < 1 or depth < 1:
        raise InvalidArgument("count and depth must be >= 1")
    rng = np.random.default_rng(seed)
    desc = space.desc
    if isinstance(desc, Type0):
        if count > desc.size:
            raise InvalidArgument(f"cannot draw {count} distinct points from {desc.size}")
        if count == desc.size:
            return [PD(i) for i in range(count)]
        return [PD(int(i)) for i in sorted(rng.choice(desc.size, size=count, replace=False))]

    if isinstance(desc, Type1):
        lo, end = sample_window(depth)
        out, seen = [], set()
        if count >= desc.n:
            for c in range(desc.n):
                digits = [0] * (0 - lo) + [c] + [0] * (end - 1)
                pt = point_from_digits(space, lo, digits)
                out.append(pt)
                seen.add(pt)
        attempts = 0
        while len(out) < count:
            attempts += 1
            if attempts > 1000 * count:
                raise InvalidArgument("sample space too small for the requested count")
            v = int(rng.integers(lo, depth + 1))
            support = [int(rng.integers(1, desc.n))]
            support += [int(d) for d in rng.integers(0, desc.n, size=depth - v)]
            pt = point_from_digits(space, v, support + [0] * (end - depth - 1))
            if pt not in seen:
                seen.add(pt)
                out.append(pt)
        return out

    n = desc.n
    pts = []
    if count >= n + 1:
        pts.extend(map(tuple, regular_simplex(n)))
        extra = [np.zeros(n), np.eye(n)[0], -np.eye(n)[0]]
        for v in extra:
            if len(pts) < count:
                pts.append(tuple(v))
    while len(pts) < count:
        v = tuple(rng.uniform(-depth, depth, size=n))
        if v not in pts:
            pts.append(v)
    return [PR(tuple(float(c) for c in p)) for p in pts]


def enumerate_points(space: Space, lo: int, hi: int) -> list:
    """Every type-1 point supported on exponents ``lo..hi`` (window end ``hi + 1``)."""
    if not isinstance(space.desc, Type1):
        raise InvalidArgument("enumeration is defined for type-1 spaces")
    if hi < lo:
        raise InvalidArgument("hi must be >= lo")
    n, width = space.desc.n, hi - lo + 1
    if n ** width > 10 ** 6:
        raise InvalidArgument("enumeration too large")
    out = []
    for idx in range(n ** width):
        digits = []
        for _ in range(width):
            digits.append(idx % n)
            idx //= n
        out.append(point_from_digits(space, lo, digits[::-1]))
    return out


# -- JSON for points ----------------------------------------------------------


def point_to_json(x: Point):
    if isinstance(x, PD):
        return [x.index]
    if isinstance(x, PF):
        return [series_to_json(s) for s in x.factors]
    return list(x.coords)


def point_from_json(space: Space, obj) -> Point:
    desc = space.desc
    try:
        if isinstance(desc, Type0):
            (i,) = obj
            x = PD(int(i))
        elif isinstance(desc, Type1):
            if len(obj) != len(space.fields):
                raise InvalidArgument("wrong number of factors")
            x = PF(tuple(series_from_json(f, s) for f, s in zip(space.fields, obj)))
        else:
            x = PR(tuple(float(c) for c in obj))
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"malformed point: {exc}") from None
    _check_point(space, x)
    return x


def field_specs(space: Space) -> tuple[FieldSpec, ...]:
    return space.fields
