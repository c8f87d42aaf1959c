"""8VSOS partition functions with fixed boundary conditions, by enumeration.

Conventions.  An m x n lattice has m vertical lines (columns, spectral
parameters w_1..w_m, left to right) and n horizontal lines (rows, z_1..z_n,
top to bottom).  Around a vertex the edges are (a, b, c, d) = (south, north,
west, east); the boundary is ``a`` along the bottom, ``b`` along the top, ``c``
down the left side and ``d`` down the right side.  The top-left face has
label 0 and crossing an edge labelled x moving east or south adds x.  The
vertex in row i, column j with north-west face label alpha has weight
R^{bd}_{ac}(lam - alpha, w_j / z_i).

With these conventions the 1 x 1 lattice is the generator pairing
<L_ab(w), L_cd(z)> = R^{bd}_{ac}(lam, w/z) and the partition function is the
scalar part of <L_{a_1 b_1}(w_1)...L_{a_m b_m}(w_m), L_{c_1 d_1}(z_1)...>.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import CapacityError, DomainError, EllipticParams, SingularError, csum, rel_residual

__all__ = [
    "ENUMERATION_CAP",
    "LatticeBoundary",
    "LatticeState",
    "r_entry",
    "enumerate_states",
    "partition_function",
    "partition_function_cond",
    "domain_wall_pf",
    "domain_wall_boundary",
    "PROPERTY_KINDS",
    "lattice_property_at",
    "lattice_property_residual",
]

ENUMERATION_CAP = 25

Signs = tuple[int, ...]


def _signs(v: Sequence[int], name: str) -> Signs:
    t = tuple(int(s) for s in v)
    if any(s not in (1, -1) for s in t):
        raise DomainError(f"{name} must contain only +1/-1, got {v!r}")
    return t


@dataclass(frozen=True)
class LatticeBoundary:
    """Boundary signs: bottom ``a`` and top ``b`` (length m), left ``c`` and
    right ``d`` (length n)."""

    a: Signs
    b: Signs
    c: Signs
    d: Signs

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, _signs(getattr(self, name), name))
        if len(self.a) != len(self.b) or len(self.c) != len(self.d):
            raise DomainError("boundary lengths do not match")

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def n(self) -> int:
        return len(self.c)

    def balanced(self) -> bool:
        return sum(self.a) + sum(self.c) == sum(self.b) + sum(self.d)


def domain_wall_boundary(n: int) -> LatticeBoundary:
    """Arrows in at top and bottom, out at left and right."""
    return LatticeBoundary((1,) * n, (-1,) * n, (-1,) * n, (1,) * n)


@dataclass(frozen=True)
class LatticeState:
    """Edge labels of a state.

    ``vertical[i][j]`` is the edge directly south of vertex (i, j) (the last
    row coincides with the boundary ``a``), ``horizontal[i][j]`` the edge
    directly east of it, and ``faces[i][j]`` the north-west face label.
    """

    vertical: tuple[Signs, ...]
    horizontal: tuple[Signs, ...]
    faces: tuple[tuple[int, ...], ...]

    def vertices(self, boundary: LatticeBoundary):
        """Yield (i, j, a, b, c, d, alpha) for every vertex."""
        for i in range(boundary.n):
            for j in range(boundary.m):
                north = boundary.b[j] if i == 0 else self.vertical[i - 1][j]
                west = boundary.c[i] if j == 0 else self.horizontal[i][j - 1]
                yield (i, j, self.vertical[i][j], north, west,
                       self.horizontal[i][j], self.faces[i][j])


def r_entry(a: int, b: int, c: int, d: int, lam: complex, z: complex,
            params: EllipticParams) -> complex:
    """Dynamical R-matrix entry R^{bd}_{ac}(lam, z) of the 8VSOS model."""
    if a + c != b + d:
        return 0j
    if a == b == c == d:
        return 1 + 0j
    P = params
    q = P.q
    den = P.rtheta(q * z)
    if (a, c, b, d) == (1, -1, 1, -1):    # a(lam, z)
        return P.theta(z) * P.theta(P.qpow(lam + 2)) * den * P.rtheta(P.qpow(lam + 1))
    if (a, c, b, d) == (1, -1, -1, 1):    # b(lam, z)
        return P.theta(q) * P.theta(P.qpow(-lam - 1) * z) * den * P.rtheta(P.qpow(-lam - 1))
    if (a, c, b, d) == (-1, 1, 1, -1):    # c(lam, z)
        return P.theta(q) * P.theta(P.qpow(lam + 1) * z) * den * P.rtheta(P.qpow(lam + 1))
    # d(lam, z)
    return P.theta(z) * P.theta(P.qpow(-lam)) * den * P.rtheta(P.qpow(-lam - 1))


def _check_size(boundary: LatticeBoundary) -> None:
    if boundary.m * boundary.n > ENUMERATION_CAP:
        raise CapacityError(
            f"{boundary.n}x{boundary.m} lattice exceeds the enumeration cap {ENUMERATION_CAP}")


def _dfs(boundary: LatticeBoundary, visit) -> None:
    """Row-major depth-first search over edge labels with ice-rule pruning.

    ``visit(i, j, south, north, west, east, alpha, acc)`` is called for every
    admissible local labelling and returns the accumulator for the subtree,
    or None to prune it; ``visit.leaf(acc)`` receives each completed state.
    """
    m, n = boundary.m, boundary.n
    A, B, C, D = boundary.a, boundary.b, boundary.c, boundary.d
    if not boundary.balanced():
        return
    if m * n == 0:
        if _trivially_consistent(boundary):
            visit.leaf(visit.root)
        return
    south = [[0] * m for _ in range(n)]
    east = [[0] * m for _ in range(n)]
    row_start = [0] * n   # NW face label of the first vertex of each row
    visit.south, visit.east = south, east

    def rec(k, alpha_next, acc):
        if k == m * n:
            visit.leaf(acc)
            return
        i, j = divmod(k, m)
        north = B[j] if i == 0 else south[i - 1][j]
        west = C[i] if j == 0 else east[i][j - 1]
        if j == 0:
            alpha = 0 if i == 0 else row_start[i - 1] + C[i - 1]
            row_start[i] = alpha
        else:
            alpha = alpha_next
        for s in ((A[j],) if i == n - 1 else (1, -1)):
            e = s + west - north
            if e not in (1, -1) or (j == m - 1 and e != D[i]):
                continue
            south[i][j] = s
            east[i][j] = e
            token = visit(i, j, s, north, west, e, alpha, acc)
            if token is not None:
                rec(k + 1, alpha + north, token)

    rec(0, 0, visit.root)


def _trivially_consistent(boundary: LatticeBoundary) -> bool:
    # An empty lattice (m == 0 or n == 0) has a state iff opposite sides agree.
    if boundary.m == 0:
        return boundary.c == boundary.d
    return boundary.a == boundary.b


class _Collect:
    root = ()

    def __init__(self, boundary):
        self.boundary = boundary
        self.states: list[LatticeState] = []

    def __call__(self, i, j, s, north, west, e, alpha, acc):
        return acc + (alpha,)

    def leaf(self, acc):
        b = self.boundary
        if b.m * b.n == 0:
            self.states.append(LatticeState((), (), ()))
            return
        m = b.m
        faces = tuple(tuple(acc[i * m:(i + 1) * m]) for i in range(b.n))
        self.states.append(LatticeState(
            tuple(tuple(r) for r in self.south),
            tuple(tuple(r) for r in self.east),
            faces))


def enumerate_states(boundary: LatticeBoundary) -> Iterator[LatticeState]:
    """All states compatible with ``boundary``, in row-major DFS order."""
    _check_size(boundary)
    col = _Collect(boundary)
    _dfs(boundary, col)
    yield from col.states


class _Weigh:
    root = 1 + 0j

    def __init__(self, lam, w, z, params):
        self.lam, self.w, self.z, self.params = lam, w, z, params
        self.cache: dict = {}
        self.weights: list[complex] = []

    def __call__(self, i, j, s, north, west, e, alpha, acc):
        key = (i, j, s, north, west, alpha)
        r = self.cache.get(key)
        if r is None:
            try:
                r = r_entry(s, north, west, e, self.lam - alpha,
                            self.w[j] / self.z[i], self.params)
            except SingularError as exc:
                raise SingularError(f"vertex (row {i + 1}, column {j + 1}): {exc}") from exc
            self.cache[key] = r
        if r == 0:
            return None
        return acc * r

    def leaf(self, acc):
        self.weights.append(acc)


def partition_function(lam: complex, w: Sequence[complex], z: Sequence[complex],
                       boundary: LatticeBoundary, params: EllipticParams) -> complex:
    """Sum over states of the product of vertex weights."""
    return partition_function_cond(lam, w, z, boundary, params)[0]


def partition_function_cond(lam: complex, w: Sequence[complex], z: Sequence[complex],
                            boundary: LatticeBoundary,
                            params: EllipticParams) -> tuple[complex, float]:
    """Partition function and the condition number sum|weight| / |sum|."""
    if len(w) != boundary.m or len(z) != boundary.n:
        raise DomainError("spectral vectors do not match the boundary")
    _check_size(boundary)
    if not boundary.balanced():
        return 0j, 1.0
    weigh = _Weigh(complex(lam), [complex(x) for x in w], [complex(x) for x in z], params)
    _dfs(boundary, weigh)
    total = csum(weigh.weights)
    mag = math.fsum(abs(x) for x in weigh.weights)
    if total == 0:
        return total, (math.inf if mag else 1.0)
    return total, mag / abs(total)


def domain_wall_pf(lam: complex, w: Sequence[complex], z: Sequence[complex],
                   params: EllipticParams) -> complex:
    """Partition function with domain wall boundary, <beta(w), gamma(z)>."""
    if len(w) != len(z):
        raise DomainError("domain wall lattice must be square")
    return partition_function(lam, w, z, domain_wall_boundary(len(w)), params)


# ---------------------------------------------------------------- structural identities

def _sign_vectors(n: int):
    return itertools.product((1, -1), repeat=n)


def _family_residual(pairs) -> float:
    """Max |lhs - rhs| over a family, relative to the largest value in it."""
    pairs = list(pairs)
    scale = max((max(abs(x), abs(y)) for x, y in pairs), default=0.0)
    if scale == 0.0:
        return 0.0
    return max(abs(x - y) for x, y in pairs) / scale


def _splitting_v(lam, w, z, P, cut, pf):
    m, n = len(w), len(z)
    for a in _sign_vectors(m):
        for b in _sign_vectors(m):
            for c in _sign_vectors(n):
                for d in _sign_vectors(n):
                    if sum(a) + sum(c) != sum(b) + sum(d):
                        continue
                    lhs = pf(lam, w, z, LatticeBoundary(a, b, c, d), P)
                    rhs = csum(
                        pf(lam, w[:cut], z, LatticeBoundary(a[:cut], b[:cut], c, x), P)
                        * pf(lam - sum(b[:cut]), w[cut:], z,
                             LatticeBoundary(a[cut:], b[cut:], x, d), P)
                        for x in _sign_vectors(n))
                    yield lhs, rhs


def _splitting_h(lam, w, z, P, cut, pf):
    m, n = len(w), len(z)
    for a in _sign_vectors(m):
        for b in _sign_vectors(m):
            for c in _sign_vectors(n):
                for d in _sign_vectors(n):
                    if sum(a) + sum(c) != sum(b) + sum(d):
                        continue
                    lhs = pf(lam, w, z, LatticeBoundary(a, b, c, d), P)
                    rhs = csum(
                        pf(lam, w, z[:cut], LatticeBoundary(x, b, c[:cut], d[:cut]), P)
                        * pf(lam - sum(c[:cut]), w, z[cut:],
                             LatticeBoundary(a, x, c[cut:], d[cut:]), P)
                        for x in _sign_vectors(m))
                    yield lhs, rhs


def _lll(lam, z, P, pf):
    n = len(z)
    for a in _sign_vectors(n):
        for b in _sign_vectors(n):
            for c in _sign_vectors(n):
                for d in _sign_vectors(n):
                    val = pf(lam, z, z, LatticeBoundary(a, b, c, d), P)
                    yield val, (1.0 if (a == d and b == c) else 0.0)


def _adl(lam, w, z, P, pf):
    m, n = len(w), len(z)
    q = P.q
    yield (pf(lam, w, z, LatticeBoundary((1,) * m, (1,) * m, (1,) * n, (1,) * n), P),
           1.0)
    rhs = P.poch(P.qpow(lam + 2 + n - m), m) * P.rpoch(P.qpow(lam + 2 - m), m)
    for wi in w:
        for zj in z:
            rhs *= P.theta(wi / zj) * P.rtheta(q * wi / zj)
    yield (pf(lam, w, z, LatticeBoundary((1,) * m, (1,) * m, (-1,) * n, (-1,) * n), P),
           rhs)


def _crossing(lam, w, z, P, pf):
    m, n = len(w), len(z)
    q = P.q
    zq = [x / q for x in reversed(z)]
    for a in _sign_vectors(m):
        for b in _sign_vectors(m):
            for c in _sign_vectors(n):
                for d in _sign_vectors(n):
                    if sum(a) + sum(c) != sum(b) + sum(d):
                        continue
                    lhs = pf(lam, w, z, LatticeBoundary(a, b, c, d), P)
                    pref = (-1) ** ((sum(c) - sum(d)) // 2) * P.qpow(-m * n / 2)
                    for zi in z:
                        for wj in w:
                            pref *= P.theta(zi / wj) * P.rtheta(zi / (q * wj))
                    for j in range(1, n + 1):
                        pref *= P.cap_f(lam - sum(c[:j])) / P.cap_f(lam - sum(d[:j]) - sum(b))
                    # reversing the label order goes with reversing the spectral order
                    bd = LatticeBoundary(tuple(-x for x in reversed(d)),
                                         tuple(-x for x in reversed(c)), a, b)
                    yield lhs, pref * pf(lam - sum(c), zq, w, bd, P)


def _square(lam, w, z, P, pf):
    m, n = len(w), len(z)
    cols, rows = list(w) + list(z), list(z) + list(w)
    plus = (1,) * (m + n)
    for a in _sign_vectors(m):
        for c in _sign_vectors(m):
            for b in _sign_vectors(n):
                for d in _sign_vectors(n):
                    big = pf(lam, cols, rows, LatticeBoundary(plus, a + b, d + c, plus), P)
                    small = pf(lam, w, z, LatticeBoundary(c, a, d, b), P)
                    yield big, small


PROPERTY_KINDS = ("splitting_v", "splitting_h", "lll_delta", "adl_products", "crossing", "square")


class _Recorder:
    """partition_function that remembers the largest sum of |state weight|."""

    def __init__(self):
        self.mag = 0.0

    def __call__(self, lam, w, z, boundary, params):
        if len(w) != boundary.m or len(z) != boundary.n:
            raise DomainError("spectral vectors do not match the boundary")
        _check_size(boundary)
        if not boundary.balanced():
            return 0j
        weigh = _Weigh(complex(lam), [complex(x) for x in w], [complex(x) for x in z], params)
        _dfs(boundary, weigh)
        self.mag = max(self.mag, math.fsum(abs(x) for x in weigh.weights))
        return csum(weigh.weights)


def lattice_property_at(kind: str, lam: complex, w: Sequence[complex], z: Sequence[complex],
                        params: EllipticParams, with_condition: bool = False):
    """Residual of a structural identity at explicit data.

    Every boundary compatible with the identity is checked; the residual is
    relative to the largest partition function in the family.  For
    ``lll_delta`` only ``z`` is used.  With ``with_condition`` the pair
    ``(residual, condition)`` is returned, the condition being the largest
    sum of |state weight| met, over the family scale.
    """
    P = params
    m, n = len(w), len(z)
    if kind not in PROPERTY_KINDS:
        raise DomainError(f"unknown lattice property {kind!r}")
    if (kind == "splitting_v" and m < 2) or (kind == "splitting_h" and n < 2):
        raise DomainError("splitting needs at least two lines to cut")
    pf = _Recorder()
    if kind == "splitting_v":
        pairs = list(_splitting_v(lam, w, z, P, m // 2, pf))
    elif kind == "splitting_h":
        pairs = list(_splitting_h(lam, w, z, P, n // 2, pf))
    elif kind == "lll_delta":
        pairs = list(_lll(lam, z, P, pf))
    elif kind == "adl_products":
        pairs = list(_adl(lam, w, z, P, pf))
    elif kind == "crossing":
        pairs = list(_crossing(lam, w, z, P, pf))
    else:
        pairs = list(_square(lam, w, z, P, pf))
    if kind == "adl_products":
        res = max(rel_residual(x, y) for x, y in pairs)
        scale = min(max(abs(x), abs(y)) for x, y in pairs)
    else:
        res = _family_residual(pairs)
        scale = max(max(abs(x), abs(y)) for x, y in pairs)
    if not with_condition:
        return res
    return res, (pf.mag / scale if scale else (math.inf if pf.mag else 1.0))


def lattice_property_residual(kind: str, m: int, n: int, seed: int, params: EllipticParams,
                              samples: int = 1) -> float:
    """Seeded version of :func:`lattice_property_at` (max over ``samples`` draws).

    For ``lll_delta`` both spectral vectors have length ``n`` and ``m`` is ignored.
    """
    from .sampling import make_rng, rand_complex, rand_lambda, retry_generic

    if kind not in PROPERTY_KINDS:
        raise DomainError(f"unknown lattice property {kind!r}")
    rng = make_rng("lattice", kind, m, n, seed)

    def trial(r):
        lam = rand_lambda(r)
        w = [rand_complex(r) for _ in range(m)]
        z = [rand_complex(r) for _ in range(n)]
        return lattice_property_at(kind, lam, w, z, params)

    return max(retry_generic(trial, rng) for _ in range(samples))
