"""Tree addresses for type-1 spaces.

An address is either ``Empty`` (the chosen base point) or ``Seq(mu0, tail)``:
``mu0`` is the exponent of the sphere around the base point, ``tail[0]`` in
``1..N-1`` picks a ball inside that sphere, and every later entry in ``1..N``
picks a sub-ball one level down.  The address distance ``D`` reproduces the
metric exactly (see :func:`address_distance`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union


from .distmat import DistanceMatrix, exponent_matrix, geo_parameters, require_ultrametric
from .errors import DepthExhausted, InvalidArgument, InvariantViolation
from .spaces import (
    PF,
    Geo,
    Space,
    Type1,
    Zero,
    _check_point,
    _digit_at,
    point_from_digits,
    point_valuation,
    zero_point,
)


@dataclass(frozen=True)
class Empty:
    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class Seq:
    mu0: int
    tail: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tail", tuple(int(t) for t in self.tail))

    @property
    def depth(self) -> int:
        return 1 + len(self.tail)

    def entry(self, i: int) -> int:
        return self.mu0 if i == 0 else self.tail[i - 1]


Address = Union[Empty, Seq]


def address_validate(addr: Address, n: int) -> None:
    if isinstance(addr, Empty):
        return
    for j, t in enumerate(addr.tail):
        hi = n - 1 if j == 0 else n
        if not 1 <= t <= hi:
            raise InvalidArgument(f"address entry {j + 1} = {t} outside [1, {hi}]")


def address_to_json(addr: Address) -> dict:
    if isinstance(addr, Empty):
        return {"empty": True}
    return {"mu0": addr.mu0, "tail": list(addr.tail)}


def address_from_json(obj: dict) -> Address:
    if obj.get("empty"):
        return Empty()
    try:
        return Seq(int(obj["mu0"]), tuple(obj.get("tail", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"malformed address: {exc}") from None


def address_eta(mu: Address, nu: Address) -> int:
    """Least index at which two non-empty addresses differ."""
    if isinstance(mu, Empty) or isinstance(nu, Empty):
        raise InvalidArgument("eta is defined for non-empty addresses")
    for i in range(min(mu.depth, nu.depth)):
        if mu.entry(i) != nu.entry(i):
            return i
    raise DepthExhausted(f"addresses agree on their first {min(mu.depth, nu.depth)} entries")


def address_distance(mu: Address, nu: Address, a: float, b: float):
    """The address ultrametric.

    Zero for equal addresses; ``a*b**mu0`` against the empty address;
    ``a*b**max(mu0, nu0)`` when the sphere exponents differ; otherwise
    ``a*b**(mu0 - eta + 1)``.
    """
    if mu == nu:
        return Zero()
    if isinstance(nu, Empty):
        return Geo(a, b, mu.mu0)
    if isinstance(mu, Empty):
        return Geo(a, b, nu.mu0)
    eta = address_eta(mu, nu)
    if eta == 0:
        return Geo(a, b, max(mu.mu0, nu.mu0))
    return Geo(a, b, mu.mu0 - eta + 1)


# -- canonical coding on F_{n,a,b} --------------------------------------------


def canonical_encode(space: Space, x: PF, depth: int) -> Address:
    """Address of ``x`` relative to the base point 0, with ``depth`` entries."""
    if not isinstance(space.desc, Type1):
        raise InvalidArgument("coding is defined for type-1 spaces")
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    _check_point(space, x)
    v = point_valuation(x)
    if v == math.inf:
        return Empty()
    info = x.digits
    tail = [_digit_at(info, v)]
    tail += [_digit_at(info, v + j - 1) + 1 for j in range(2, depth)]
    return Seq(-v, tuple(tail))


def canonical_decode(space: Space, addr: Address, depth: int) -> PF:
    """Point with the given address; digits beyond the address are zero up to ``depth``."""
    if not isinstance(space.desc, Type1):
        raise InvalidArgument("coding is defined for type-1 spaces")
    if isinstance(addr, Empty):
        return zero_point(space)
    if addr.depth > depth:
        raise InvalidArgument(f"address depth {addr.depth} exceeds requested depth {depth}")
    address_validate(addr, space.desc.n)
    if not addr.tail:
        raise InvalidArgument("a non-empty address needs its first branch entry to fix a point")
    digits = [addr.tail[0]] + [t - 1 for t in addr.tail[1:]]
    digits += [0] * (depth - 1 - len(digits))
    return point_from_digits(space, -addr.mu0, digits)


# -- sample trees -------------------------------------------------------------


@dataclass
class BallNode:
    """``members`` index the sample; ``level`` is the ball exponent (sphere exponent for sphere nodes)."""

    center: int
    level: int | None
    members: list
    branch_index: int | None = None
    kind: str = "ball"  # "root" | "sphere" | "ball"
    children: list = field(default_factory=list)

    def to_json(self, ids: Sequence[str] | None = None) -> dict:
        name = (lambda i: ids[i]) if ids else (lambda i: i)
        return {
            "kind": self.kind,
            "center": name(self.center),
            "level": self.level,
            "branch_index": self.branch_index,
            "members": [name(i) for i in self.members],
            "children": [c.to_json(ids) for c in self.children],
        }


def point_sort_key(points: Sequence[PF]) -> Callable[[int], tuple]:
    """Key ordering type-1 points lexicographically by digit, lowest exponent first."""
    infos = [p.digits for p in points]
    live = [i for i in infos if i is not None]
    if not live:
        return lambda i: ()
    lo = min(i[0] for i in live)

    def key(i):
        info = infos[i]
        if info is None:
            return ()
        return tuple(_digit_at(info, e) for e in range(lo, info[1]))

    return key


def _partition(members, K, level, key):
    """Group ``members`` into balls {d <= a*b**level}, ordered by least key."""
    ordered = sorted(members, key=key)
    groups, assigned = [], set()
    for i in ordered:
        if i in assigned:
            continue
        g = [j for j in ordered if j not in assigned and (j == i or K[i, j] <= level)]
        assigned.update(g)
        groups.append(g)
    return groups


def _grow(node: BallNode, K, key):
    if len(node.members) == 1:
        return
    for idx, g in enumerate(_partition(node.members, K, node.level - 1, key), start=1):
        child = BallNode(g[0], node.level - 1, g, idx)
        node.children.append(child)
        _grow(child, K, key)


def build_ball_tree(m: DistanceMatrix, root: int = 0, key: Callable[[int], object] | None = None) -> BallNode:
    """Sphere/ball hierarchy of an exact ultrametric sample around ``root``."""
    if m.n_points == 0:
        raise InvalidArgument("empty sample")
    if not 0 <= root < m.n_points:
        raise InvalidArgument(f"root index {root} out of range")
    node = BallNode(root, None, list(range(m.n_points)), kind="root")
    if m.n_points == 1:
        return node
    if geo_parameters(m) is None:
        raise InvalidArgument("ball trees need exact Geo distances with a common (a, b)")
    require_ultrametric(m)
    K = exponent_matrix(m)
    key = key or (lambda i: i)
    others = [i for i in range(m.n_points) if i != root]
    for level in sorted({int(K[root, i]) for i in others}, reverse=True):
        shell = [i for i in others if K[root, i] == level]
        sphere = BallNode(min(shell, key=key), level, shell, level, kind="sphere")
        for idx, g in enumerate(_partition(shell, K, level - 1, key), start=1):
            child = BallNode(g[0], level - 1, g, idx)
            sphere.children.append(child)
            _grow(child, K, key)
        node.children.append(sphere)
    return node


def leaf_points(tree: BallNode) -> list:
    """Sample indices at the leaves, the root's own point first."""
    out = [tree.center]
    stack = list(reversed(tree.children))
    while stack:
        nd = stack.pop()
        if not nd.children:
            if len(nd.members) != 1:
                raise InvariantViolation("leaf ball with more than one point")
            out.append(nd.members[0])
        stack.extend(reversed(nd.children))
    return out


def encode_points(m: DistanceMatrix, root: int = 0, key=None, tree: BallNode | None = None) -> list:
    """Address of every sample point; the root gets ``Empty``."""
    tree = tree or build_ball_tree(m, root, key)
    out: list = [None] * m.n_points
    out[tree.center] = Empty()

    def walk(nd, mu0, path):
        if not nd.children:
            out[nd.members[0]] = Seq(mu0, tuple(path))
            return
        for c in nd.children:
            walk(c, mu0, path + [c.branch_index])

    for sphere in tree.children:
        for c in sphere.children:
            walk(c, sphere.level, [c.branch_index])
    return out


@dataclass
class CodingReport:
    pairs_checked: int
    violation_count: int
    violations: list

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def to_json(self) -> dict:
        return {
            "pairs_checked": self.pairs_checked,
            "violation_count": self.violation_count,
            "violations": self.violations,
            "ok": self.ok,
        }


def verify_coding(exact: Sequence[Sequence], addresses: Sequence[Address], a: float, b: float,
                  limit: int = 20) -> CodingReport:
    """Compare every pairwise distance with the address distance, exactly."""
    n = len(addresses)
    if len(exact) != n:
        raise InvalidArgument("distance table and address list differ in size")
    examples, count, checked = [], 0, 0
    for i in range(n):
        for j in range(i + 1, n):
            checked += 1
            try:
                D = address_distance(addresses[i], addresses[j], a, b)
            except DepthExhausted:
                D = None
            if D != exact[i][j]:
                count += 1
                if len(examples) < limit:
                    examples.append({"pair": [i, j], "distance": repr(exact[i][j]), "address_distance": repr(D)})
    return CodingReport(checked, count, examples)
