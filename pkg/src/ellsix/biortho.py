"""Multivariable biorthogonal rational functions of type V_n^n.

Parameters are a, b, c, the vector x and the multi-index N; grid points are
multi-indices 0 <= y_i <= N_i.  Besides the functions f_u, g_u, the weight w
and the norms Gamma_u, the module provides the triangular matrix pair
A_{mk}(a, b), B_{kl}(a, b) that inverts each other and the assembly of the
biorthogonality sum from it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .core import DomainError, EllipticParams, csum, rel_residual
from .series import SeriesSpec, v_series, v_series_cond, v_term

__all__ = [
    "BiorthoParams",
    "grid",
    "f_fn",
    "g_fn",
    "g_alt_series",
    "weight_w",
    "norm_gamma",
    "biortho_sum",
    "biortho_residual",
    "biortho_grid_residual",
    "inv_matrix_entry",
    "inversion_residual",
    "g_alt_ratio_residual",
    "g_alt_factor",
    "g_alt_factor_residual",
    "c_weight",
    "assembled_kernels",
    "assembled_residual",
]


@dataclass(frozen=True)
class BiorthoParams:
    a: complex
    b: complex
    c: complex
    x: tuple
    N: tuple

    def __post_init__(self):
        x = tuple(complex(v) for v in self.x)
        N = tuple(int(v) for v in self.N)
        if len(x) != len(N):
            raise DomainError("x and N must have the same length")
        if any(v < 0 for v in N):
            raise DomainError("N must be nonnegative")
        if any(v == 0 for v in x) or 0 in (self.a, self.b, self.c):
            raise DomainError("parameters must be nonzero")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "N", N)
        for k in "abc":
            object.__setattr__(self, k, complex(getattr(self, k)))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def total(self) -> int:
        return sum(self.N)


def grid(N: Sequence[int]):
    """Multi-indices 0 <= y_i <= N_i in lexicographic order."""
    return itertools.product(*(range(k + 1) for k in N))


def _check_point(u, B: BiorthoParams, name="u"):
    u = tuple(int(v) for v in u)
    if len(u) != B.n or any(not 0 <= ui <= Ni for ui, Ni in zip(u, B.N)):
        raise DomainError(f"{name}={u} outside the grid {B.N}")
    return u


def f_fn(u, y, B: BiorthoParams, params: EllipticParams) -> complex:
    u, y = _check_point(u, B), _check_point(y, B, "y")
    return v_series(_f_spec(u, y, B, params), params, validate=False)


def _f_spec(u, y, B: BiorthoParams, params: EllipticParams) -> SeriesSpec:
    q = params.q
    a, b, c, x = B.a, B.b, B.c, B.x
    nN = B.total
    spec = SeriesSpec(
        a / b,
        (a * q ** sum(y), c * q ** sum(u)) + tuple(a * q ** (1 + Ni) * xi / b for xi, Ni in zip(x, B.N)),
        (1, a * q ** (1 - nN) / (b * b * c))
        + tuple(q ** -yi / xi for xi, yi in zip(x, y))
        + tuple(q ** -ui / xi for xi, ui in zip(x, u)),
        x, ("c", tuple(min(ui, yi) for ui, yi in zip(u, y))))
    return spec


def _series_mag(spec: SeriesSpec, params: EllipticParams) -> tuple[complex, float]:
    """Series value and the sum of its term moduli."""
    terms = [v_term(spec.a, spec.b, spec.c, spec.z, y, params) for y in spec.support()]
    return csum(terms), math.fsum(abs(t) for t in terms)


def _fg_tables(B: BiorthoParams, params: EllipticParams, pts):
    """f and g on the grid, each entry a (value, magnitude) pair."""
    f = {(u, y): _series_mag(_f_spec(u, y, B, params), params) for u in pts for y in pts}
    g = {(u, y): _series_mag(_g_spec(u, y, B, params), params) for u in pts for y in pts}
    return f, g


def g_fn(u, y, B: BiorthoParams, params: EllipticParams) -> complex:
    u, y = _check_point(u, B), _check_point(y, B, "y")
    return v_series(_g_spec(u, y, B, params), params, validate=False)


def _g_spec(u, y, B: BiorthoParams, params: EllipticParams) -> SeriesSpec:
    q = params.q
    a, b, c, x = B.a, B.b, B.c, B.x
    nN = B.total
    spec = SeriesSpec(
        q ** -nN * b / a,
        (q ** (-sum(y) - nN) / a, q ** (-sum(u) - nN) / c)
        + tuple(q ** (1 - nN) * b / (a * xi) for xi in x),
        (q, q ** nN * b * b * c / a)
        + tuple(q ** yi * xi for xi, yi in zip(x, y))
        + tuple(q ** ui * xi for xi, ui in zip(x, u)),
        tuple(q ** -Ni / xi for xi, Ni in zip(x, B.N)),
        ("c", tuple(Ni - max(ui, yi) for ui, yi, Ni in zip(u, y, B.N))))
    return spec


def g_alt_series(u, y, B: BiorthoParams, params: EllipticParams) -> complex:
    """The rkt-partner series of g_u(y); g_u(y) = g_alt_factor * g_alt_series."""
    u, y = _check_point(u, B), _check_point(y, B, "y")
    q = params.q
    a, b, c, x = B.a, B.b, B.c, B.x
    nN, nu, ny = B.total, sum(u), sum(y)
    e = -nu - ny - nN
    spec = SeriesSpec(
        q ** (e - 1) / (b * c),
        (q ** (-ny - nN) / a, q ** (-nu - nN) / c)
        + tuple(q ** (e + Ni) * xi / (b * c) for xi, Ni in zip(x, B.N)),
        (1 / q, a * q ** -nN / (b * b * c))
        + tuple(q ** -yi / xi for xi, yi in zip(x, y))
        + tuple(q ** -ui / xi for xi, ui in zip(x, u)),
        x, ("c", tuple(min(ui, yi) for ui, yi in zip(u, y))))
    return v_series(spec, params, validate=False)


def weight_w(y, B: BiorthoParams, params: EllipticParams) -> complex:
    y = _check_point(y, B, "y")
    P = params
    q = P.q
    a, b, x, N = B.a, B.b, B.x, B.N
    nN, ny = B.total, sum(y)
    r = (P.delta_ratio(x, y) * q ** ny * P.theta(a * q ** (2 * ny)) * P.rtheta(a)
         * P.poch(a, ny) * P.rpoch(a * q ** (1 + nN), ny))
    for i, xi in enumerate(x):
        for j, xj in enumerate(x):
            r *= P.poch(q ** -N[j] * xi / xj, y[i]) * P.rpoch(q * xi / xj, y[i])
        r *= (P.theta(b * q ** (ny - y[i]) / xi) * P.poch(b / xi, ny)
              * P.poch(q ** nN * a * xi / b, y[i])
              * P.rtheta(b / xi) * P.rpoch(b * q ** (1 - N[i]) / xi, ny)
              * P.rpoch(a * q * xi / b, y[i]))
    return r


def norm_gamma(u, B: BiorthoParams, params: EllipticParams) -> complex:
    u = _check_point(u, B)
    P = params
    q = P.q
    a, b, c, x, N = B.a, B.b, B.c, B.x, B.N
    nN, nu = B.total, sum(u)
    r = (c ** nN * q ** (nN * nN - nu) / P.delta_ratio(x, u)
         * P.poch(a * q, nN) * P.poch(q ** (-nu - nN) / c, nN - nu) * P.poch(q ** (1 - 2 * nu) / c, nu)
         * P.rpoch(a * q / b, nN) * P.rpoch(b * c * q ** nN, nN))
    for i, xi in enumerate(x):
        for j, xj in enumerate(x):
            r *= P.poch(q * xi / xj, u[i]) * P.rpoch(q ** -N[j] * xi / xj, u[i])
        s = a * xi / (b * c)
        r *= (P.theta(q ** -nu * s) * P.rtheta(q ** (u[i] - nu) * s)
              * P.poch(xi, N[i]) * P.poch(a * q ** (1 - nN) * xi / (b * b * c), N[i])
              * P.rpoch(xi / b, N[i]) * P.rpoch(q ** -nu * s, N[i])
              * P.poch(q ** (u[i] + nN) * a * xi / b, N[i] - u[i])
              * P.rpoch(q ** (1 + u[i]) * a * xi / b, N[i] - u[i]))
    return r


def biortho_sum(u, v, B: BiorthoParams, params: EllipticParams) -> complex:
    """sum_y w(y) f_u(y) g_v(y) over the grid."""
    return csum(weight_w(y, B, params) * f_fn(u, y, B, params) * g_fn(v, y, B, params)
                for y in grid(B.N))


def biortho_residual(u, v, B: BiorthoParams, params: EllipticParams) -> float:
    """|sum - delta_{uv} Gamma_u| / max(|Gamma_u|, |Gamma_v|)."""
    u, v = _check_point(u, B), _check_point(v, B, "v")
    s = biortho_sum(u, v, B, params)
    gu = norm_gamma(u, B, params)
    target = gu if u == v else 0j
    scale = max(abs(gu), abs(norm_gamma(v, B, params)))
    return abs(s - target) / scale


def biortho_grid_residual(B: BiorthoParams, params: EllipticParams,
                          with_condition: bool = False):
    """Worst residual over all (u, v) pairs of the grid, sharing the evaluations.

    With ``with_condition`` the pair ``(residual, condition)`` is returned.  The
    condition bounds the summed term moduli, with f and g replaced by the
    moduli sums of their own series, relative to the Gamma scale.
    """
    pts = list(grid(B.N))
    w = {y: weight_w(y, B, params) for y in pts}
    f, g = _fg_tables(B, params, pts)
    gam = {u: norm_gamma(u, B, params) for u in pts}
    worst = cond = 0.0
    for u in pts:
        for v in pts:
            terms = [w[y] * f[u, y][0] * g[v, y][0] for y in pts]
            target = gam[u] if u == v else 0j
            scale = max(abs(gam[u]), abs(gam[v]))
            worst = max(worst, abs(csum(terms) - target) / scale)
            mags = (abs(w[y]) * f[u, y][1] * g[v, y][1] for y in pts)
            cond = max(cond, math.fsum(mags) / scale)
    return (worst, cond) if with_condition else worst


def g_alt_ratio_residual(u, B: BiorthoParams, params: EllipticParams) -> float:
    """Spread of g_u(y) / g_alt(y) over the grid, relative to its value at y = 0."""
    u = _check_point(u, B)
    ratios = [g_fn(u, y, B, params) / g_alt_series(u, y, B, params) for y in grid(B.N)]
    r0 = ratios[0]
    return max(abs(r - r0) for r in ratios) / abs(r0)


# ---------------------------------------------------------------- matrix inversion

def inv_matrix_entry(kind: str, m, k, a: complex, b: complex, x: Sequence[complex],
                     params: EllipticParams) -> complex:
    """A_{mk}(a, b) or B_{mk}(a, b); zero unless k_i <= m_i for all i."""
    P = params
    q = P.q
    m, k = tuple(m), tuple(k)
    n = len(x)
    if len(m) != n or len(k) != n:
        raise DomainError("multi-index length must match x")
    if any(ki > mi for ki, mi in zip(k, m)):
        return 0j
    if m == k:
        return 1 + 0j
    nm, nk = sum(m), sum(k)
    d = nm - nk
    if kind == "A":
        r = P.poch(a * b * q ** (2 * nk), d)
        for i in range(n):
            r *= P.poch(a * q ** (nk - k[i]) / x[i], d)
            r *= P.rpoch(b * x[i] * q ** (1 + k[i] + nk), m[i] - k[i])
            for j in range(n):
                r *= P.rpoch(q ** (1 + k[i] - k[j]) * x[i] / x[j], m[i] - k[i])
        return r
    if kind == "B":
        # rows m play the role of k and columns k the role of l in B_{kl}
        K, L = m, k
        nK, nL = nm, nk
        r = ((-1) ** d * q ** (d * (d - 1) // 2)
             * P.theta(a * b * q ** (2 * nL)) * P.rtheta(a * b * q ** (2 * nK))
             * P.poch(a * b * q ** (1 + nL + nK), d))
        for i in range(n):
            r *= (P.theta(a * q ** (nL - L[i]) / x[i]) * P.rtheta(a * q ** (nK - K[i]) / x[i])
                  * P.poch(a * q ** (1 + nL - K[i]) / x[i], d)
                  * P.rpoch(b * x[i] * q ** (L[i] + nK), K[i] - L[i]))
            for j in range(n):
                r *= P.rpoch(q ** (1 + L[i] - L[j]) * x[i] / x[j], K[i] - L[i])
        return r
    raise DomainError(f"unknown matrix {kind!r}")


def _matrix(kind, box, a, b, x, P):
    pts = list(grid(box))
    return pts, {(m, k): inv_matrix_entry(kind, m, k, a, b, x, P) for m in pts for k in pts}


def inversion_residual(box, a: complex, b: complex, x: Sequence[complex],
                       params: EllipticParams, with_condition: bool = False):
    """Max entrywise deviation of AB and BA from the identity on the box.

    With ``with_condition`` also returns the largest sum of |A_mk B_kl| (or
    |B_mk A_kl|), which bounds the cancellation in each product entry.
    """
    pts, A = _matrix("A", box, a, b, x, params)
    _, B = _matrix("B", box, a, b, x, params)
    worst = cond = 0.0
    for m in pts:
        for l in pts:
            delta = 1.0 if m == l else 0.0
            for X, Y in ((A, B), (B, A)):
                terms = [X[m, k] * Y[k, l] for k in pts]
                worst = max(worst, abs(csum(terms) - delta))
                cond = max(cond, math.fsum(abs(t) for t in terms))
    return (worst, cond) if with_condition else worst


# ---------------------------------------------------------------- assembled route

def c_weight(s, B: BiorthoParams, params: EllipticParams) -> complex:
    """The sequence C_s that turns the inversion pair into the biorthogonal system."""
    P = params
    q = P.q
    a, b, c, x, N = B.a, B.b, B.c, B.x, B.N
    n = len(x)
    s = tuple(s)
    ns, nN = sum(s), B.total
    r = q ** (2 * sum(s[i] * s[j] for i in range(n) for j in range(i + 1, n)))
    for i in range(n):
        r /= x[i] ** (2 * s[i])
    r *= ((b * b * c / (q * a)) ** ns / P.delta_ratio(x, s)
          * P.poch(a, 2 * ns) * P.poch(c, 2 * ns)
          * P.rpoch(a * q / b, ns) * P.rpoch(q ** nN * b * c, ns))
    for i in range(n):
        xi = x[i]
        r *= (P.poch(a * xi / b, ns) * P.poch(a * q ** (1 + N[i]) * xi / b, ns)
              * P.poch(b / xi, ns - s[i]) * P.poch(b * c / (a * xi), ns - s[i])
              * P.poch(xi, s[i]) * P.poch(a * q ** (1 - nN) * xi / (b * b * c), s[i])
              * P.rpoch(a * xi / b, ns + s[i]) * P.rpoch(a * q * xi / b, ns + s[i]))
        for j in range(n):
            r *= P.rpoch(q * xi / x[j], s[i]) * P.rpoch(q ** -N[j] * xi / x[j], s[i])
    return r


def assembled_kernels(B: BiorthoParams, params: EllipticParams):
    """Kernels F(u, y) and G(v, y) built from C_s and the inversion pair.

    With (a', b', c', d') = (cb/a, a/b, b, a/b),
    F(u, y) = sum_s C_s A_{us}(a', b') A_{ys}(c', d') and
    G(v, y) = sum_t B_{N-t, v}(a', b') B_{N-t, y}(c', d') / C_{N-t}.
    """
    return _kernels(B, params)[:3]


def _kernels(B: BiorthoParams, params: EllipticParams):
    """assembled_kernels plus the term-moduli sums of F and G."""
    P = params
    a, b, c, x = B.a, B.b, B.c, B.x
    ab, cd = (c * b / a, a / b), (b, a / b)
    pts = list(grid(B.N))
    C = {s: c_weight(s, B, P) for s in pts}
    A1 = {(m, k): inv_matrix_entry("A", m, k, *ab, x, P) for m in pts for k in pts}
    A2 = {(m, k): inv_matrix_entry("A", m, k, *cd, x, P) for m in pts for k in pts}
    B1 = {(m, k): inv_matrix_entry("B", m, k, *ab, x, P) for m in pts for k in pts}
    B2 = {(m, k): inv_matrix_entry("B", m, k, *cd, x, P) for m in pts for k in pts}
    F, G, FM, GM = {}, {}, {}, {}
    for u in pts:
        for y in pts:
            acc = [C[s] * A1[u, s] * A2[y, s] for s in pts]
            F[u, y], FM[u, y] = csum(acc), math.fsum(map(abs, acc))
    for v in pts:
        for y in pts:
            acc = []
            for t in pts:
                r = tuple(Ni - ti for Ni, ti in zip(B.N, t))
                acc.append(B1[r, v] * B2[r, y] / C[r])
            G[v, y], GM[v, y] = csum(acc), math.fsum(map(abs, acc))
    return pts, F, G, FM, GM


def assembled_residual(B: BiorthoParams, params: EllipticParams,
                       with_condition: bool = False):
    """Checks that the assembled kernels reproduce the biorthogonal system.

    Three quantities enter the maximum: the deviation of sum_y F(u,y) G(v,y)
    from delta_{uv}; on the diagonal the deviation of F G Gamma_u from
    w f_u g_u; off the diagonal the spread over y of F G Gamma_u / (w f_u g_v).
    """
    P = params
    pts, F, G, FM, GM = _kernels(B, P)
    w = {y: weight_w(y, B, P) for y in pts}
    fm, gm = _fg_tables(B, P, pts)
    f = {k: v[0] for k, v in fm.items()}
    g = {k: v[0] for k, v in gm.items()}
    gam = {u: norm_gamma(u, B, P) for u in pts}
    worst = cond = 0.0
    for u in pts:
        for v in pts:
            delta = 1.0 if u == v else 0.0
            terms = [F[u, y] * G[v, y] for y in pts]
            worst = max(worst, abs(csum(terms) - delta))
            cond = max(cond, math.fsum(FM[u, y] * GM[v, y] for y in pts))
            lhs = [F[u, y] * G[v, y] * gam[u] for y in pts]
            rhs = [w[y] * f[u, y] * g[v, y] for y in pts]
            scale = max(max(abs(z) for z in lhs), max(abs(z) for z in rhs))
            cond = max(cond, max(max(FM[u, y] * GM[v, y] * abs(gam[u]),
                                     abs(w[y]) * fm[u, y][1] * gm[v, y][1]) for y in pts) / scale)
            if u == v:
                worst = max(worst, max(abs(p - r) for p, r in zip(lhs, rhs)) / scale)
            else:
                # proportionality lhs = rho * rhs, rho fitted at the largest rhs
                k = max(range(len(pts)), key=lambda i: abs(rhs[i]))
                rho = lhs[k] / rhs[k]
                dev = max(abs(p - rho * r) for p, r in zip(lhs, rhs))
                worst = max(worst, dev / max(scale, abs(rho) * max(abs(z) for z in rhs)))
    return (worst, cond) if with_condition else worst


def _g_rkt(u, y, B: BiorthoParams, params: EllipticParams):
    """g_u(y) through the right side of rkt, with the summation condition."""
    from .series import rkt_sides

    q = params.q
    a, b, c, x = B.a, B.b, B.c, B.x
    nN = B.total
    _, rhs, cond = rkt_sides(params, q ** -nN * b / a, q ** (-sum(y) - nN) / a,
                             q ** (-sum(u) - nN) / c, q, q ** nN * b * b * c / a,
                             list(x), [q ** -Ni / xi for xi, Ni in zip(x, B.N)],
                             [Ni - yi for Ni, yi in zip(B.N, y)], list(u))
    return rhs, cond


def g_alt_factor(u, y, B: BiorthoParams, params: EllipticParams) -> complex:
    """The elementary factor E with g_u(y) = E * g_alt(y), read off from rkt."""
    u, y = _check_point(u, B), _check_point(y, B, "y")
    return _g_rkt(u, y, B, params)[0] / g_alt_series(u, y, B, params)


def g_alt_factor_residual(u, B: BiorthoParams, params: EllipticParams,
                          with_condition: bool = False):
    """Max over the grid of the relative deviation of g_u(y) from
    g_alt_factor(u, y) * g_alt_series(u, y), optionally with the worst
    summation condition number met on the way."""
    u = _check_point(u, B)
    worst = cond = 0.0
    for y in grid(B.N):
        alt, k1 = _g_rkt(u, y, B, params)
        g, k2 = v_series_cond(_g_spec(u, y, B, params), params, validate=False)
        cond = max(cond, k1, k2)
        worst = max(worst, rel_residual(g, alt))
    return (worst, cond) if with_condition else worst
