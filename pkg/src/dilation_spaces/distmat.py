"""Distance matrices: construction, CSV/JSON exchange, observed distance sets."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, InvariantViolation
from .spaces import (
    Fixed,
    Geo,
    Space,
    Zero,
    distance,
    distance_from_json,
    distance_to_json,
)

DEFAULT_REL_TOL = 1e-9
DEFAULT_GAP_RATIO = 1.25
_NO_DISTANCE = np.iinfo(np.int64).min // 4


@dataclass
class DistanceMatrix:
    """Symmetric matrix of distances; ``exact`` holds ExactDistance entries when known."""

    values: np.ndarray
    exact: list | None = None
    ids: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise InvalidArgument("distance matrix must be square")
        if not self.ids:
            self.ids = [str(i) for i in range(self.n_points)]
        if len(self.ids) != self.n_points:
            raise InvalidArgument("ids do not match matrix size")
        if self.exact is not None and (
            len(self.exact) != self.n_points or any(len(r) != self.n_points for r in self.exact)
        ):
            raise InvalidArgument("exact entries do not match matrix size")

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    def validate(self, rel_tol: float = 0.0):
        v = self.values
        if self.n_points == 0:
            raise InvalidArgument("empty distance matrix")
        if np.any(np.diag(v) != 0):
            raise InvalidArgument("diagonal must be zero")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("distances must be finite")
        scale = np.maximum(np.abs(v), np.abs(v.T))
        if np.any(np.abs(v - v.T) > rel_tol * scale):
            raise InvalidArgument("distance matrix is not symmetric")
        off = ~np.eye(self.n_points, dtype=bool)
        if np.any(v[off] <= 0):
            raise InvalidArgument("off-diagonal distances must be positive")

    def submatrix(self, idx: Sequence[int]) -> "DistanceMatrix":
        idx = list(idx)
        exact = None if self.exact is None else [[self.exact[i][j] for j in idx] for i in idx]
        return DistanceMatrix(self.values[np.ix_(idx, idx)], exact, [self.ids[i] for i in idx])


def distance_matrix(space: Space, points: Sequence, ids: Sequence[str] | None = None) -> DistanceMatrix:
    m = len(points)
    exact = [[Zero()] * m for _ in range(m)]
    values = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d = distance(space, points[i], points[j])
            exact[i][j] = exact[j][i] = d
            values[i, j] = values[j, i] = d.value
    return DistanceMatrix(values, exact, list(ids) if ids else [])


# -- exchange formats -------------------------------------------------------


def write_csv(m: DistanceMatrix, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(m.ids)
    for row in m.values:
        w.writerow([repr(float(x)) for x in row])


def read_csv(fh) -> DistanceMatrix:
    rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise InvalidArgument("empty CSV")
    ids = [s.strip() for s in rows[0]]
    try:
        values = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InvalidArgument(f"non-numeric CSV entry: {exc}") from None
    if values.shape != (len(ids), len(ids)):
        raise InvalidArgument(f"CSV matrix shape {values.shape} does not match {len(ids)} ids")
    return DistanceMatrix(values, None, ids)


def sidecar_to_json(m: DistanceMatrix) -> dict:
    if m.exact is None:
        raise InvalidArgument("matrix has no exact entries")
    return {"ids": m.ids, "entries": [[distance_to_json(d) for d in row] for row in m.exact]}


def attach_sidecar(m: DistanceMatrix, obj: dict, rel_tol: float = 1e-12) -> DistanceMatrix:
    """Attach exact entries, checking they reproduce the numeric matrix."""
    exact = [[distance_from_json(d) for d in row] for row in obj["entries"]]
    if obj.get("ids") and list(obj["ids"]) != m.ids:
        raise InvalidArgument("sidecar ids do not match CSV header")
    out = DistanceMatrix(m.values, exact, m.ids)
    ev = np.array([[d.value for d in row] for row in exact])
    if np.any(np.abs(ev - m.values) > rel_tol * np.maximum(np.abs(ev), 1e-300)):
        raise InvalidArgument("sidecar entries disagree with the CSV values")
    return out


def matrix_to_csv_text(m: DistanceMatrix) -> str:
    buf = io.StringIO()
    write_csv(m, buf)
    return buf.getvalue()


def matrix_from_csv_text(text: str, sidecar: str | None = None) -> DistanceMatrix:
    m = read_csv(io.StringIO(text))
    if sidecar is not None:
        m = attach_sidecar(m, json.loads(sidecar))
    return m


# -- exponent arithmetic ------------------------------------------------------


def geo_parameters(m: DistanceMatrix):
    """``(a, b)`` if every off-diagonal exact entry is Geo with one common base, else ``None``."""
    if m.exact is None:
        return None
    ab = None
    for i, row in enumerate(m.exact):
        for j, d in enumerate(row):
            if i == j:
                continue
            if not isinstance(d, Geo):
                return None
            if ab is None:
                ab = (d.a, d.b)
            elif (d.a, d.b) != ab:
                return None
    return ab


def exponent_matrix(m: DistanceMatrix) -> np.ndarray:
    """Integer matrix of Geo exponents; the diagonal holds a large negative sentinel."""
    if geo_parameters(m) is None and m.n_points > 1:
        raise InvalidArgument("exponent matrix needs exact Geo entries with a common (a, b)")
    K = np.full((m.n_points, m.n_points), _NO_DISTANCE, dtype=np.int64)
    for i, row in enumerate(m.exact or []):
        for j, d in enumerate(row):
            if i != j:
                K[i, j] = d.k
    return K


def ultrametric_violations(m: DistanceMatrix, rel_tol: float = DEFAULT_REL_TOL, limit: int = 10):
    """Triples (x, y, z) with d(x, z) > max(d(x, y), d(y, z)), counted once per unordered triple.

    Exact exponent comparison when Geo entries are available, otherwise a
    relative tolerance on the float values.  Returns ``(count, examples)``.
    """
    if m.n_points < 3:
        return 0, []
    if geo_parameters(m) is not None:
        M = exponent_matrix(m)
        bad = lambda lhs, rhs: lhs > rhs  # noqa: E731
    else:
        M = m.values
        bad = lambda lhs, rhs: lhs > rhs * (1 + rel_tol)  # noqa: E731
    count, examples = 0, []
    for y in range(m.n_points):
        bound = np.maximum(M[:, y][:, None], M[y, :][None, :])
        # a failing triple has exactly one middle point, so x < z counts it once
        viol = np.triu(bad(M, bound), 1)
        viol[y, :] = False
        viol[:, y] = False
        c = int(viol.sum())
        if c:
            count += c
            if len(examples) < limit:
                for x, z in zip(*np.nonzero(viol)):
                    examples.append((int(x), y, int(z)))
                    if len(examples) >= limit:
                        break
    return count, examples


def require_ultrametric(m: DistanceMatrix):
    count, ex = ultrametric_violations(m, limit=1)
    if count:
        x, y, z = ex[0]
        raise InvariantViolation(
            f"ultrametric inequality fails on triple ({m.ids[x]}, {m.ids[y]}, {m.ids[z]})"
        )


# -- observed distance sets -------------------------------------------------


@dataclass
class GammaSummary:
    values: list
    kind: str  # "single" | "geometric" | "dense"
    a: float | None = None
    b: float | None = None
    residual: float | None = None
    exponents: list | None = None
    exact: bool = False
    a_observed: bool | None = None

    def to_json(self) -> dict:
        return {
            "values": self.values,
            "kind": self.kind,
            "a": self.a,
            "b": self.b,
            "residual": self.residual,
            "exponents": self.exponents,
            "exact": self.exact,
            "a_observed": self.a_observed,
        }


def distinct_values(values, rel_tol: float = DEFAULT_REL_TOL) -> list:
    vals = sorted(float(v) for v in values)
    out = []
    for v in vals:
        if not out or v > out[-1] * (1 + rel_tol):
            out.append(v)
    return out


def fit_geometric(values: Sequence[float], rel_tol: float = DEFAULT_REL_TOL,
                  gap_ratio: float = DEFAULT_GAP_RATIO, max_subdivision: int = 6):
    """Fit sorted distinct positive ``values`` to ``a * b**k`` with ``1 <= a < b``.

    The step ``log b`` is the smallest log-gap, or an integer fraction of it
    when consecutive powers are missing from the sample.  Returns
    ``(a, b, residual, exponents)`` or ``None`` when no progression with
    ``b >= gap_ratio`` fits within ``rel_tol`` in log space.
    """
    if len(values) < 2:
        return None
    L = np.log(np.asarray(values, dtype=float))
    gap = float(np.min(np.diff(L)))
    for sub in range(1, max_subdivision + 1):
        step = gap / sub
        if math.exp(step) < gap_ratio:
            return None
        ks = np.rint((L - L[0]) / step)
        A = np.column_stack([np.ones_like(ks), ks])
        (c, s), *_ = np.linalg.lstsq(A, L, rcond=None)
        residual = float(np.max(np.abs(L - (c + ks * s))))
        if residual < rel_tol:
            shift = math.floor(c / s + 1e-12)
            a = math.exp(c - shift * s)
            b = math.exp(s)
            if a >= b * (1 - 1e-12):
                a, shift = a / b, shift + 1
            exps = [int(k) + shift for k in ks]
            return a, b, residual, exps
    return None


def gamma_observed(m: DistanceMatrix, rel_tol: float = DEFAULT_REL_TOL,
                   gap_ratio: float = DEFAULT_GAP_RATIO) -> GammaSummary:
    if m.n_points < 2:
        raise InvalidArgument("need at least two points to observe a distance")
    iu = np.triu_indices(m.n_points, 1)
    if m.exact is not None:
        entries = {m.exact[i][j] for i, j in zip(*iu)}
        if any(isinstance(d, Zero) for d in entries):
            raise InvalidArgument("coincident points in sample")
        kinds = {type(d) for d in entries}
        if kinds == {Fixed} and len(entries) == 1:
            (d,) = entries
            return GammaSummary([d.r], "single", exact=True)
        ab = geo_parameters(m)
        if ab is not None:
            a, b = ab
            ks = sorted({d.k for d in entries})
            vals = [Geo(a, b, k).value for k in ks]
            if len(ks) == 1:
                return GammaSummary(vals, "single", exact=True)
            g = reduce(math.gcd, (k - ks[0] for k in ks[1:]))
            b_obs = b ** g
            # least exponent >= 0 in the observed residue class mod g
            k_star = ks[0] % g
            return GammaSummary(vals, "geometric", a * b ** k_star, b_obs, 0.0,
                                [(k - k_star) // g for k in ks], exact=True,
                                a_observed=k_star + 0 in ks)
    vals = distinct_values(m.values[iu], rel_tol)
    if vals[0] <= 0:
        raise InvalidArgument("coincident points in sample")
    if len(vals) == 1:
        return GammaSummary(vals, "single")
    fit = fit_geometric(vals, rel_tol, gap_ratio)
    if fit is None:
        return GammaSummary(vals, "dense")
    a, b, res, exps = fit
    return GammaSummary(vals, "geometric", a, b, res, exps, a_observed=0 in exps)
