"""Finite fields F_{p^k} and truncated formal Laurent series over them.

Field elements are tuples of ``k`` residues mod ``p``: the coordinates of
the element in the basis ``1, t, ..., t^{k-1}`` of ``F_p[t]/(m(t))``.

A :class:`LaurentSeries` stores the coefficients for exponents in the
window ``[v0, v0 + prec)``; everything below ``v0`` is zero and nothing is
known at or above ``v0 + prec`` (the *end* of the window).  The exact zero
series carries ``zero=True`` so that its valuation is a genuine infinity
rather than something inferred from a run of zero coefficients.

Window conventions for arithmetic:

* sums and products keep the largest window both operands determine;
* a sum whose coefficients all cancel is the exact zero when both operands
  share the same window end (identical truncations of the same number),
  otherwise it is left unresolved and :func:`ls_valuation` refuses it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import DivisionByZero, InvalidArgument, PrecisionExhausted

FieldElement = tuple  # tuple[int, ...] of length k

INF = math.inf
MAX_FIELD_SIZE = 2 ** 20
_TABLE_LIMIT = 256


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# -- polynomials over F_p, coefficient lists low -> high ---------------------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_rem(a, m, p):
    """Remainder of ``a`` modulo the monic polynomial ``m``."""
    a = [c % p for c in a]
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return a[:dm] if dm > 0 else []


def _monic_polys(p, d):
    for low in range(p ** d):
        coeffs = []
        for _ in range(d):
            coeffs.append(low % p)
            low //= p
        yield coeffs + [1]


@lru_cache(maxsize=None)
def _is_irreducible(modulus: tuple, p: int) -> bool:
    k = len(modulus) - 1
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for f in _monic_polys(p, d):
            if not any(_poly_rem(modulus, f, p)):
                return False
    return True


def _poly_divmod(a, b, p):
    a = _trim(a)
    b = _trim(b)
    inv_lead = pow(b[-1], p - 2, p)
    q = [0] * max(len(a) - len(b) + 1, 1)
    a = list(a)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        c = a[-1] * inv_lead % p
        q[shift] = c
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - c * bj) % p
        a = _trim(a)
    return q, a


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    return _trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _trim(out)


# -- finite fields ----------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """The field F_{p^k} = F_p[t]/(modulus); ``modulus`` is low -> high and monic."""

    p: int
    k: int
    modulus: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise InvalidArgument(f"p={self.p} is not prime")
        if self.k < 1:
            raise InvalidArgument(f"k={self.k} must be >= 1")
        if self.p ** self.k > MAX_FIELD_SIZE:
            raise InvalidArgument(f"field size {self.p}^{self.k} exceeds {MAX_FIELD_SIZE}")
        mod = tuple(int(c) for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if len(mod) != self.k + 1 or mod[-1] != 1:
            raise InvalidArgument("modulus must be monic of degree k")
        if any(not 0 <= c < self.p for c in mod):
            raise InvalidArgument("modulus residues must lie in [0, p)")
        if not _is_irreducible(mod, self.p):
            raise InvalidArgument(f"modulus {mod} is reducible over F_{self.p}")

    @property
    def q(self) -> int:
        return self.p ** self.k

    @property
    def zero(self) -> FieldElement:
        return (0,) * self.k

    @property
    def one(self) -> FieldElement:
        return (1,) + (0,) * (self.k - 1)

    def check(self, x) -> FieldElement:
        x = tuple(int(c) for c in x)
        if len(x) != self.k or any(not 0 <= c < self.p for c in x):
            raise InvalidArgument(f"{x} is not an element of F_{self.p}^{self.k}")
        return x

    def add(self, x, y):
        p = self.p
        return tuple((a + b) % p for a, b in zip(x, y))

    def sub(self, x, y):
        p = self.p
        return tuple((a - b) % p for a, b in zip(x, y))

    def neg(self, x):
        p = self.p
        return tuple((-a) % p for a in x)

    def _mul_raw(self, x, y):
        p, k = self.p, self.k
        if k == 1:
            return ((x[0] * y[0]) % p,)
        prod = [0] * (2 * k - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    prod[i + j] += a * b
        rem = _poly_rem(prod, self.modulus, p)
        return tuple(rem) + (0,) * (k - len(rem))

    @cached_property
    def _mul_table(self):
        elems = [self.unindex(i) for i in range(self.q)]
        return [[self.index(self._mul_raw(x, y)) for y in elems] for x in elems]

    def mul(self, x, y):
        if self.k == 1:
            return ((x[0] * y[0]) % self.p,)
        if self.q <= _TABLE_LIMIT:
            return self.unindex(self._mul_table[self.index(x)][self.index(y)])
        return self._mul_raw(x, y)

    def inv(self, x):
        if not any(x):
            raise DivisionByZero("inverse of zero in a finite field")
        p = self.p
        if self.k == 1:
            return (pow(x[0], p - 2, p),)
        # extended Euclid on (modulus, x)
        r0, r1 = list(self.modulus), _trim(x)
        s0, s1 = [], [1]
        while r1:
            quo, rem = _poly_divmod(r0, r1, p)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(quo, s1, p), p)
        # r0 is a nonzero constant
        c = pow(r0[0], p - 2, p)
        res = [(c * a) % p for a in s0]
        res = _poly_rem(res, self.modulus, p) if len(res) > self.k else res
        return tuple(res) + (0,) * (self.k - len(res))

    def index(self, x) -> int:
        i = 0
        for c in reversed(x):
            i = i * self.p + c
        return i

    def unindex(self, i: int) -> FieldElement:
        if not 0 <= i < self.q:
            raise InvalidArgument(f"index {i} out of range [0, {self.q})")
        out = []
        for _ in range(self.k):
            out.append(i % self.p)
            i //= self.p
        return tuple(out)

    def elements(self) -> Iterator[FieldElement]:
        for i in range(self.q):
            yield self.unindex(i)


@lru_cache(maxsize=None)
def field_make(p: int, k: int) -> FieldSpec:
    """F_{p^k} with the lexicographically least monic irreducible modulus.

    Candidates ``t^k + c_{k-1} t^{k-1} + ... + c_0`` are ordered by the tuple
    ``(c_{k-1}, ..., c_0)``.
    """
    if not is_prime(p):
        raise InvalidArgument(f"p={p} is not prime")
    if k < 1:
        raise InvalidArgument(f"k={k} must be >= 1")
    if p ** k > MAX_FIELD_SIZE:
        raise InvalidArgument(f"field size {p}^{k} exceeds {MAX_FIELD_SIZE}")
    for cand in _monic_polys(p, k):
        if _is_irreducible(tuple(cand), p):
            return FieldSpec(p, k, tuple(cand))
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


def ff_add(spec: FieldSpec, x, y):
    return spec.add(x, y)


def ff_mul(spec: FieldSpec, x, y):
    return spec.mul(x, y)


def ff_inv(spec: FieldSpec, x):
    return spec.inv(x)


def ff_index(spec: FieldSpec, x) -> int:
    return spec.index(spec.check(x))


def ff_unindex(spec: FieldSpec, i: int):
    return spec.unindex(i)


# -- Laurent series ---------------------------------------------------------

@dataclass(frozen=True)
class LaurentSeries:
    spec: FieldSpec
    v0: int
    coeffs: tuple
    zero: bool = False

    def __post_init__(self):
        if not self.coeffs:
            raise InvalidArgument("a series needs prec >= 1")
        if self.zero and any(any(c) for c in self.coeffs):
            raise InvalidArgument("zero series with nonzero coefficients")

    @property
    def prec(self) -> int:
        return len(self.coeffs)

    @property
    def end(self) -> float:
        """First exponent whose coefficient is unknown (infinite for exact zero)."""
        return INF if self.zero else self.v0 + len(self.coeffs)

    def coeff(self, e: int) -> FieldElement:
        if self.zero or e < self.v0:
            return self.spec.zero
        if e >= self.v0 + len(self.coeffs):
            raise PrecisionExhausted(f"coefficient of X^{e} beyond window end {self.end}")
        return self.coeffs[e - self.v0]

    @property
    def resolved(self) -> bool:
        return self.zero or any(any(c) for c in self.coeffs)

    def normalized(self) -> "LaurentSeries":
        if self.zero:
            return self
        for i, c in enumerate(self.coeffs):
            if any(c):
                if i == 0:
                    return self
                return LaurentSeries(self.spec, self.v0 + i, self.coeffs[i:])
        return self

    def shifted(self, m: int) -> "LaurentSeries":
        """Multiply by the monomial X^m (exact: only the window moves)."""
        if self.zero:
            return self
        return LaurentSeries(self.spec, self.v0 + m, self.coeffs)

    def __str__(self):
        if self.zero:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if any(c):
                terms.append(f"{self.spec.index(c)}*X^{self.v0 + i}")
        return (" + ".join(terms) or "0") + f" + O(X^{self.end})"


def ls_zero(spec: FieldSpec) -> LaurentSeries:
    return LaurentSeries(spec, 0, (spec.zero,), zero=True)


def ls_make(spec: FieldSpec, v0: int, coeffs: Sequence) -> LaurentSeries:
    """Series with the given window, leading zeros stripped (never flagged zero)."""
    return LaurentSeries(spec, int(v0), tuple(spec.check(c) for c in coeffs)).normalized()


def ls_monomial(spec: FieldSpec, exponent: int, coeff=None, prec: int = 1) -> LaurentSeries:
    """``coeff * X^exponent`` known to ``prec`` coefficients."""
    c = spec.one if coeff is None else spec.check(coeff)
    if not any(c):
        raise InvalidArgument("monomial coefficient must be nonzero")
    return LaurentSeries(spec, exponent, (c,) + (spec.zero,) * (prec - 1))


def ls_valuation(s: LaurentSeries):
    if s.zero:
        return INF
    for i, c in enumerate(s.coeffs):
        if any(c):
            return s.v0 + i
    raise PrecisionExhausted(f"valuation unresolved: no nonzero coefficient below X^{s.end}")


def _same_field(s, t):
    if s.spec != t.spec:
        raise InvalidArgument("series over different fields")


def ls_neg(s: LaurentSeries) -> LaurentSeries:
    if s.zero:
        return s
    return LaurentSeries(s.spec, s.v0, tuple(s.spec.neg(c) for c in s.coeffs))


def ls_add(s: LaurentSeries, t: LaurentSeries) -> LaurentSeries:
    _same_field(s, t)
    if s.zero:
        return t
    if t.zero:
        return s
    spec = s.spec
    lo = min(s.v0, t.v0)
    hi = min(s.end, t.end)
    out = tuple(spec.add(s.coeff(e), t.coeff(e)) for e in range(lo, hi))
    if not any(any(c) for c in out) and s.end == t.end:
        return ls_zero(spec)
    return LaurentSeries(spec, lo, out).normalized()


def ls_sub(s: LaurentSeries, t: LaurentSeries) -> LaurentSeries:
    return ls_add(s, ls_neg(t))


def ls_mul(s: LaurentSeries, t: LaurentSeries) -> LaurentSeries:
    _same_field(s, t)
    spec = s.spec
    if s.zero or t.zero:
        return ls_zero(spec)
    n = min(s.prec, t.prec)
    a, b = s.coeffs, t.coeffs
    out = []
    for e in range(n):
        acc = spec.zero
        for i in range(e + 1):
            if any(a[i]) and any(b[e - i]):
                acc = spec.add(acc, spec.mul(a[i], b[e - i]))
        out.append(acc)
    return LaurentSeries(spec, s.v0 + t.v0, tuple(out)).normalized()


def ls_inv(s: LaurentSeries, prec: int | None = None) -> LaurentSeries:
    """Inverse known to ``prec`` coefficients (default: the relative precision of ``s``)."""
    if s.zero:
        raise DivisionByZero("inverse of the zero series")
    s = s.normalized()
    if not s.resolved:
        raise PrecisionExhausted("cannot invert a series with unresolved valuation")
    if prec is None:
        prec = s.prec
    if prec < 1:
        raise InvalidArgument("prec must be >= 1")
    if prec > s.prec:
        raise PrecisionExhausted(f"requested {prec} coefficients, input determines only {s.prec}")
    spec = s.spec
    a = s.coeffs
    a0inv = spec.inv(a[0])
    u = [a0inv]
    for n in range(1, prec):
        acc = spec.zero
        for i in range(1, n + 1):
            if any(a[i]) and any(u[n - i]):
                acc = spec.add(acc, spec.mul(a[i], u[n - i]))
        u.append(spec.neg(spec.mul(a0inv, acc)))
    return LaurentSeries(spec, -s.v0, tuple(u))


def ls_random(spec: FieldSpec, val_lo: int, val_hi: int, prec: int, seed=None) -> LaurentSeries:
    """Random series with valuation uniform in ``[val_lo, val_hi]`` and nonzero leading term."""
    if val_lo > val_hi:
        raise InvalidArgument("val_lo must be <= val_hi")
    if prec < 1:
        raise InvalidArgument("prec must be >= 1")
    rng = np.random.default_rng(seed)
    v = int(rng.integers(val_lo, val_hi + 1))
    lead = spec.unindex(int(rng.integers(1, spec.q)))
    rest = [spec.unindex(int(i)) for i in rng.integers(0, spec.q, size=prec - 1)]
    return LaurentSeries(spec, v, (lead, *rest))


# -- JSON -------------------------------------------------------------------

def field_to_json(spec: FieldSpec) -> dict:
    return {"p": spec.p, "k": spec.k, "modulus": list(spec.modulus)}


def field_from_json(obj: dict) -> FieldSpec:
    return FieldSpec(int(obj["p"]), int(obj["k"]), tuple(obj["modulus"]))


def series_to_json(s: LaurentSeries) -> dict:
    return {"v0": s.v0, "coeffs": [list(c) for c in s.coeffs], "prec": s.prec, "zero": s.zero}


def series_from_json(spec: FieldSpec, obj: dict) -> LaurentSeries:
    coeffs = tuple(spec.check(c) for c in obj["coeffs"])
    if int(obj["prec"]) != len(coeffs):
        raise InvalidArgument("prec does not match the number of coefficients")
    return LaurentSeries(spec, int(obj["v0"]), coeffs, zero=bool(obj["zero"]))
