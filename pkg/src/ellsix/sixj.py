"""Generalized elliptic 6j-symbols R_{SU}^{TV}(lam; w; z).

Index sets are 0-based sorted tuples: S, T are subsets of range(M) (M = len(w))
and U, V subsets of range(N) (N = len(z)).  Complements are always taken in
the ambient range of the owning spectral vector.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import CapacityError, DomainError, EllipticParams, csum, rel_residual
from .lattice import ENUMERATION_CAP, LatticeBoundary, partition_function_cond
from .series import SeriesSpec, rkt_sides, v_series, v_series_cond, v_term
from .weights import coeff_a, coeff_g, complement, cross_ratio, phi, phi_cond, restrict, subset

__all__ = [
    "SixJIndex",
    "METHODS",
    "r6j",
    "r6j_mcmt",
    "r6j_mcmt_mag",
    "r6j_lattice_mag",
    "r6j_rat1_mag",
    "r6j_rat2_mag",
    "MAG_METHODS",
    "r6j_rat1",
    "r6j_rat2",
    "r6j_lattice",
    "r6j_rese",
    "subsets",
    "admissible_indices",
    "check_qdyb",
    "check_unitarity",
    "symmetry_sides",
    "symmetry_residual",
    "vempty_summation_sides",
    "vanishes_trivially",
    "Specialization",
    "r6j_specialized_ahc",
    "r6j_specialized_iri",
    "ahc_series",
    "rat2_series",
    "specialization_residuals",
]


@dataclass(frozen=True)
class SixJIndex:
    S: tuple
    T: tuple
    U: tuple
    V: tuple
    w: tuple
    z: tuple
    lam: complex

    def __post_init__(self):
        w = tuple(complex(x) for x in self.w)
        z = tuple(complex(x) for x in self.z)
        if any(x == 0 for x in w + z):
            raise DomainError("spectral parameters must be nonzero")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "lam", complex(self.lam))
        for name, amb in (("S", len(w)), ("T", len(w)), ("U", len(z)), ("V", len(z))):
            object.__setattr__(self, name, subset(getattr(self, name), amb))

    @property
    def M(self) -> int:
        return len(self.w)

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def parity_ok(self) -> bool:
        return len(self.S) + len(self.U) == len(self.T) + len(self.V)

    @property
    def L(self) -> int:
        return len(self.S) + len(self.U)


def subsets(n: int, size: int | None = None):
    """Subsets of range(n) in lexicographic order (optionally of fixed size)."""
    sizes = range(n + 1) if size is None else ([size] if 0 <= size <= n else [])
    for k in sizes:
        yield from itertools.combinations(range(n), k)


def _inter(A, B):
    sb = set(B)
    return tuple(i for i in A if i in sb)


def _minus(A, B):
    sb = set(B)
    return tuple(i for i in A if i not in sb)


def _qq(P, x):
    return P.qpow(x)


# ------------------------------------------------------------------ mcmt

def r6j_mcmt(idx: SixJIndex, params: EllipticParams) -> complex:
    """Double-subset sum expressing R in terms of two weight functions."""
    return r6j_mcmt_mag(idx, params)[0]


def r6j_mcmt_mag(idx: SixJIndex, params: EllipticParams) -> tuple[complex, float]:
    """mcmt value with an error magnitude: rounding error is about eps times it.

    The magnitude is |prefactor| * sum|term| times the worst condition number
    of the inner weight functions; it is absolute, so exactly vanishing
    symbols do not look ill-conditioned.
    """
    P = params
    if not idx.parity_ok:
        return 0j, 0.0
    S, T, U, V, w, z, lam = idx.S, idx.T, idx.U, idx.V, idx.w, idx.z, idx.lam
    M, N, L = idx.M, idx.N, idx.L
    q = P.q
    Sc, Tc = complement(S, M), complement(T, M)
    pref = (P.poch(_qq(P, lam + 2 + M + N - 2 * L), len(S))
            * P.rpoch(_qq(P, lam + 2 + M - 2 * len(T)), len(T))
            * P.rpoch(_qq(P, lam + 2 + M + N - 2 * L), len(V)))
    ScTc = _inter(Sc, Tc)
    UV = _inter(U, V)
    thq = P.theta(q)
    Vc = complement(V, N)
    terms = []
    inner = 1.0
    for nx in range(len(ScTc) + 1):
        ny = nx + L - M
        if ny < 0 or ny > len(UV):
            continue
        for X in itertools.combinations(ScTc, nx):
            Xc = complement(X, M)
            wX = restrict(w, X)
            ScX, TcX = _minus(Sc, X), _minus(Tc, X)
            wScX, wTcX = restrict(w, ScX), restrict(w, TcX)
            for Y in itertools.combinations(UV, ny):
                Yc = complement(Y, N)
                UY, VY = _minus(U, Y), _minus(V, Y)
                zY, zUY, zVY = restrict(z, Y), restrict(z, UY), restrict(z, VY)
                t = (thq ** (len(U) + len(V) - 2 * ny)
                     * P.poch(_qq(P, lam + 2 + N - len(U) - ny), ny)
                     * P.rpoch(_qq(P, -lam + 2 * len(T) - M), len(V) - ny))
                t *= cross_ratio(P, restrict(w, T), wTcX, q, 1)
                t *= cross_ratio(P, wScX, wX, q, 1)
                t *= cross_ratio(P, zVY, restrict(z, Vc), q, 1)
                t *= cross_ratio(P, zY, zUY, q, 1)
                t *= cross_ratio(P, zY, wX, q, 1)
                t *= cross_ratio(P, restrict(w, Xc), restrict(z, Yc), 1, q)
                t *= cross_ratio(P, wScX, zUY, q, 1)
                t *= cross_ratio(P, wTcX, zVY, q, 1)
                v1, k1 = phi_cond(wScX, zUY, _qq(P, lam + 2 + N - len(U) - ny), P)
                v2, k2 = phi_cond(wTcX, zVY, _qq(P, -lam + len(T) - nx), P)
                t *= v1 * v2
                inner = max(inner, k1 * k2) if t else inner
                terms.append(t)
    return pref * csum(terms), abs(pref) * math.fsum(abs(t) for t in terms) * inner


# ------------------------------------------------------------------ rat

def r6j_rat1(idx: SixJIndex, params: EllipticParams) -> complex:
    """First asymmetric expression (sum over X in S∩T, Y in [N])."""
    return r6j_rat1_mag(idx, params)[0]


def r6j_rat1_mag(idx: SixJIndex, params: EllipticParams) -> tuple[complex, float]:
    P = params
    if not idx.parity_ok:
        return 0j, 0.0
    S, T, U, V, w, z, lam = idx.S, idx.T, idx.U, idx.V, idx.w, idx.z, idx.lam
    M, N, L = idx.M, idx.N, idx.L
    q = P.q
    nS, nT, nU, nV = len(S), len(T), len(U), len(V)
    Sc, Tc, Uc, Vc = complement(S, M), complement(T, M), complement(U, N), complement(V, N)
    pref = ((-1) ** (nU + nV) * q ** (nV * (nV - 1) // 2 + N * (M - L) + nU * (nU + 1) // 2)
            * cross_ratio(P, restrict(z, V), restrict(z, Vc), q, 1)
            * cross_ratio(P, w, z, 1, q)
            * P.poch(_qq(P, lam + 1 + N - 2 * nU), nU)
            * P.rpoch(_qq(P, lam + 1 + M - 2 * nT - nV), nV)
            * P.rpoch(_qq(P, lam + 2 + M - 2 * nT), nT)
            * P.rpoch(_qq(P, lam + 2 + M - 2 * nT), N - nV))
    ST = _inter(S, T)
    ScTc = _inter(Sc, Tc)
    thq = P.theta(q)
    qinv = 1 / q
    total = nS + N - nV
    terms = []
    inner = 1.0
    for nx in range(len(ST) + 1):
        ny = total - nx
        if ny < 0 or ny > N:
            continue
        for X in itertools.combinations(ST, nx):
            wX = restrict(w, X)
            SX, TX = _minus(S, X), _minus(T, X)
            STXc = _minus(ST, X)
            for Y in itertools.combinations(range(N), ny):
                Yc = complement(Y, N)
                UY, VY = _inter(U, Y), _inter(V, Y)
                UcYc, VcYc = _inter(Uc, Yc), _inter(Vc, Yc)
                zY, zYc = restrict(z, Y), restrict(z, Yc)
                t = thq ** (len(UY) + len(VY))
                t *= cross_ratio(P, wX, restrict(w, SX), q, 1)
                t *= cross_ratio(P, restrict(w, TX), restrict(w, Tc), q, 1)
                t *= cross_ratio(P, wX, zYc, q * q, q)
                t *= cross_ratio(P, zY, restrict(w, ScTc), qinv, 1)
                t *= cross_ratio(P, zY, restrict(w, STXc), 1, qinv)
                t *= cross_ratio(P, zY, zYc, q, 1)
                t *= P.poch(_qq(P, lam + 2 + M - 2 * nT - nV + len(VY)), N + nS - nV - len(VY))
                t *= P.rpoch(_qq(P, -lam - N + nU), len(UY))
                v1, k1 = phi_cond([qinv * x for x in restrict(z, UY)],
                                  restrict(w, TX) + [qinv * x for x in restrict(z, UcYc)],
                                  _qq(P, -lam - N + nU + len(UY)), P)
                v2, k2 = phi_cond([qinv * x for x in restrict(z, VY)],
                                  restrict(w, SX) + [qinv * x for x in restrict(z, VcYc)],
                                  _qq(P, lam + 2 + M - 2 * nT - nV + len(VY)), P)
                t *= v1 * v2
                inner = max(inner, k1 * k2) if t else inner
                terms.append(t)
    return pref * csum(terms), abs(pref) * math.fsum(abs(t) for t in terms) * inner


def _rat2_sum(S, T, U, V, w, z, lam, P, restrict_X_to=None):
    """Inner double sum of the second asymmetric expression.

    Also used by the V = empty summation corollary, where X ranges over U^c.
    Returns the sum and its error magnitude.
    """
    M, N = len(w), len(z)
    q = P.q
    nS, nT, nU, nV = len(S), len(T), len(U), len(V)
    Sc, Tc, Uc, Vc = complement(S, M), complement(T, M), complement(U, N), complement(V, N)
    UcVc = _inter(Uc, Vc) if restrict_X_to is None else restrict_X_to
    UV = _inter(U, V)
    thq = P.theta(q)
    total = N + nS - nV
    terms = []
    inner = 1.0
    for nx in range(len(UcVc) + 1):
        ny = total - nx
        if ny < 0 or ny > M:
            continue
        for X in itertools.combinations(UcVc, nx):
            zX = restrict(z, X)
            UcX, VcX = _minus(Uc, X), _minus(Vc, X)
            UcVcXc = _minus(_inter(Uc, Vc), X)
            for Y in itertools.combinations(range(M), ny):
                Yc = complement(Y, M)
                ScY, TcY = _inter(Sc, Y), _inter(Tc, Y)
                SYc, TYc = _inter(S, Yc), _inter(T, Yc)
                wY, wYc = restrict(w, Y), restrict(w, Yc)
                t = thq ** (len(ScY) + len(TcY))
                t *= cross_ratio(P, restrict(z, UcX), zX, q, 1)
                t *= cross_ratio(P, restrict(z, V), restrict(z, VcX), q, 1)
                t *= cross_ratio(P, wYc, zX, q * q, q)
                # prod_{i in Y, j in U∩V} theta(z_j/qw_i)/theta(z_j/w_i)
                t *= cross_ratio(P, restrict(z, UV), wY, 1 / q, 1)
                t *= cross_ratio(P, restrict(z, UcVcXc), wY, 1, 1 / q)
                t *= cross_ratio(P, wYc, wY, q, 1)
                t *= P.poch(_qq(P, lam + 2 - nT + len(TcY)), N + nS - nV - len(TcY))
                t *= P.rpoch(_qq(P, -lam - M - N + nS + 2 * nU), len(ScY))
                v1, k1 = phi_cond(restrict(z, VcX) + [q * x for x in restrict(w, SYc)],
                                  [q * x for x in restrict(w, ScY)],
                                  _qq(P, -lam - M - N + nS + 2 * nU + len(ScY)), P)
                v2, k2 = phi_cond(restrict(z, UcX) + [q * x for x in restrict(w, TYc)],
                                  [q * x for x in restrict(w, TcY)],
                                  _qq(P, lam + 2 - nT + len(TcY)), P)
                t *= v1 * v2
                inner = max(inner, k1 * k2) if t else inner
                terms.append(t)
    return csum(terms), math.fsum(abs(t) for t in terms) * inner


def r6j_rat2(idx: SixJIndex, params: EllipticParams) -> complex:
    """Second asymmetric expression (sum over X in U^c∩V^c, Y in [M])."""
    return r6j_rat2_mag(idx, params)[0]


def r6j_rat2_mag(idx: SixJIndex, params: EllipticParams) -> tuple[complex, float]:
    P = params
    if not idx.parity_ok:
        return 0j, 0.0
    S, T, U, V, w, z, lam = idx.S, idx.T, idx.U, idx.V, idx.w, idx.z, idx.lam
    M, N = idx.M, idx.N
    q = P.q
    nS, nT, nU, nV = len(S), len(T), len(U), len(V)
    Tc = complement(T, M)
    pref = ((-1) ** (nS + nT) * q ** (nS * (nS - 1) // 2 + M * (nU - nT) + nT * (nT + 1) // 2)
            * cross_ratio(P, restrict(w, T), restrict(w, Tc), q, 1)
            * cross_ratio(P, w, z, 1, q)
            * P.poch(_qq(P, lam + 1 + N - 2 * nU), M - nS)
            * P.rpoch(_qq(P, lam + 1 - nT), M - nT)
            * P.rpoch(_qq(P, lam + 2 + M - 2 * nT), nT)
            * P.rpoch(_qq(P, lam + 2 + M - 2 * nT), N - nV))
    total, mag = _rat2_sum(S, T, U, V, w, z, lam, P)
    return pref * total, abs(pref) * mag


# ------------------------------------------------------------------ lattice oracle

def r6j_lattice(idx: SixJIndex, params: EllipticParams) -> complex:
    """Brute-force value from an (M+N) x (M+N) lattice with two domain walls."""
    return r6j_lattice_mag(idx, params)[0]


def r6j_lattice_mag(idx: SixJIndex, params: EllipticParams) -> tuple[complex, float]:
    """Lattice value with its error magnitude (state-sum of |weights|, rescaled)."""
    P = params
    if not idx.parity_ok:
        return 0j, 0.0
    S, T, U, V, w, z, lam = idx.S, idx.T, idx.U, idx.V, idx.w, idx.z, idx.lam
    M, N = idx.M, idx.N
    K = M + N
    if K * K > ENUMERATION_CAP:
        raise CapacityError(f"M + N = {K} needs a {K}x{K} lattice, beyond the enumeration cap")
    Tc, Vc = complement(T, M), complement(V, N)
    Sc, Uc = complement(S, M), complement(U, N)
    cols = restrict(w, T) + restrict(w, Tc) + restrict(z, V) + restrict(z, Vc)
    rows = restrict(z, Uc) + restrict(z, U) + restrict(w, Sc) + restrict(w, S)
    b = (1,) * len(T) + (-1,) * len(Tc) + (1,) * len(V) + (-1,) * len(Vc)
    c = (-1,) * len(Uc) + (1,) * len(U) + (-1,) * len(Sc) + (1,) * len(S)
    bd = LatticeBoundary((1,) * K, b, c, (1,) * K)
    Z, cond = partition_function_cond(lam, cols, rows, bd, P)
    den = coeff_a(T, w, lam, P) * coeff_a(V, z, lam + M - 2 * len(T), P)
    return Z / den, abs(Z) * cond / abs(den)


# ------------------------------------------------------------------ closed form

def r6j_rese(idx: SixJIndex, params: EllipticParams) -> complex:
    """Closed form when V is empty: nonzero only for S ⊆ T with |T∖S| = |U|."""
    P = params
    if idx.V:
        raise DomainError("the closed form needs V = empty")
    S, T, U, w, z, lam = idx.S, idx.T, idx.U, idx.w, idx.z, idx.lam
    M, N = idx.M, idx.N
    TS = _minus(T, S)
    if len(_minus(S, T)) or len(TS) != len(U):
        return 0j
    q = P.q
    nT = len(T)
    Tc = complement(T, M)
    return (P.theta(q) ** len(U)
            * cross_ratio(P, restrict(w, TS), restrict(z, U), q, 1)
            * cross_ratio(P, restrict(w, TS), restrict(w, Tc), q, 1)
            * cross_ratio(P, restrict(w, T), z, 1, q)
            * P.poch(_qq(P, lam + 2 + M + N - 2 * nT), len(S))
            * P.rpoch(_qq(P, lam + 2 + M - 2 * nT), nT)
            * phi(restrict(w, TS), restrict(z, U), _qq(P, lam + 2 + N - len(U)), P))


# ------------------------------------------------------------------ specializations

@dataclass(frozen=True)
class Specialization:
    """Geometric data for the hypergeometric reductions.

    w_j = q^{j-1} omega, S and T are the last s and t indices of range(M).
    z restricted to U∩V is the concatenation of the progressions
    eta_i, eta_i q, ..., eta_i q^{k_i - 1}; on U^c∩V^c it is the concatenation
    of q^{1-l_i}/xi_i, ..., 1/xi_i; the entries on U∩V^c and U^c∩V are free.
    """

    M: int
    s: int
    t: int
    omega: complex
    U: tuple
    V: tuple
    N: int
    eta: tuple
    k: tuple
    xi: tuple
    l: tuple
    z_free: dict  # index -> value for U∩V^c and U^c∩V

    def sets(self):
        U, V = subset(self.U, self.N), subset(self.V, self.N)
        Uc, Vc = complement(U, self.N), complement(V, self.N)
        return U, V, Uc, Vc

    def build(self, lam: complex, params: EllipticParams) -> SixJIndex:
        q = params.q
        M, N = self.M, self.N
        U, V, Uc, Vc = self.sets()
        UV, UcVc = _inter(U, V), _inter(Uc, Vc)
        if sum(self.k) != len(UV) or sum(self.l) != len(UcVc):
            raise DomainError("block sizes do not match |U∩V| and |U^c∩V^c|")
        if len(self.eta) != len(self.k) or len(self.xi) != len(self.l):
            raise DomainError("one eta per k and one xi per l")
        z: list = [None] * N
        vals = [e * q ** j for e, kk in zip(self.eta, self.k) for j in range(kk)]
        for i, v in zip(UV, vals):
            z[i] = v
        vals = [q ** (1 - ll + j) / x for x, ll in zip(self.xi, self.l) for j in range(ll)]
        for i, v in zip(UcVc, vals):
            z[i] = v
        for i in _inter(U, Vc) + _inter(Uc, V):
            z[i] = self.z_free[i]
        w = [self.omega * q ** j for j in range(M)]
        S = tuple(range(M - self.s, M))
        T = tuple(range(M - self.t, M))
        return SixJIndex(S, T, U, V, tuple(w), tuple(z), lam)


def _spec_common(sp: Specialization, lam: complex, P: EllipticParams):
    """Theta-product factors shared by the two specialized forms."""
    q = P.q
    idx = sp.build(lam, P)
    U, V, Uc, Vc = sp.sets()
    z, om = idx.z, sp.omega
    M, N, L, t = sp.M, sp.N, idx.L, sp.t
    nU = len(U)
    UVc, UcV = _inter(U, Vc), _inter(Uc, V)
    r = cross_ratio(P, restrict(z, UcV), restrict(z, UVc), q, 1)
    for i in UVc:
        zi = z[i]
        r *= P.theta(_qq(P, lam + 1 + M + N - L - nU) * om / zi) * P.rtheta(q ** M * om / zi)
        for e, kk in zip(sp.eta, sp.k):
            r *= P.theta(e * q ** kk / zi) * P.rtheta(e / zi)
    for i in UcV:
        zi = z[i]
        r *= P.theta(_qq(P, -lam + t - 1) * om / zi) * P.rtheta(q ** M * om / zi)
        for x, ll in zip(sp.xi, sp.l):
            r *= P.theta(q ** ll * x * zi) * P.rtheta(x * zi)
    return idx, r


def ahc_series(sp: Specialization, lam: complex, params: EllipticParams) -> SeriesSpec:
    """The V_m^n series (m = number of eta blocks) inside the specialized symbol."""
    P = params
    q = P.q
    idx = sp.build(lam, P)
    L, M, N, t = idx.L, sp.M, sp.N, sp.t
    K = sum(sp.k)
    nU = len(idx.U)
    om = sp.omega
    e0 = L - M - K
    return SeriesSpec(
        q ** e0 / om,
        (q ** e0, q ** (1 + L - K)) + tuple(q ** (1 + e0) / (om * x) for x in sp.xi),
        (_qq(P, lam + 1 - t) / om, _qq(P, -lam - 1 + L + nU - M - N) / om)
        + tuple(q ** -kk / e for e, kk in zip(sp.eta, sp.k))
        + tuple(q ** ll * x for x, ll in zip(sp.xi, sp.l)),
        tuple(sp.eta), ("c", tuple(sp.k)))


def rat2_series(sp: Specialization, lam: complex, params: EllipticParams) -> SeriesSpec:
    """The V_n^m series produced by the second asymmetric expression."""
    P = params
    q = P.q
    idx = sp.build(lam, P)
    L, M, N, t = idx.L, sp.M, sp.N, sp.t
    K = sum(sp.k)
    nU = len(idx.U)
    om = sp.omega
    return SeriesSpec(
        q ** (L - K) * om,
        (q ** (L - M - K), q ** (1 + L - K)) + tuple(q ** (1 + L - K) * om / e for e in sp.eta),
        (_qq(P, -lam - 1 + t) * om, _qq(P, lam + 1 + M + N - L - nU) * om)
        + tuple(q ** kk * e for e, kk in zip(sp.eta, sp.k))
        + tuple(q ** -ll / x for x, ll in zip(sp.xi, sp.l)),
        tuple(sp.xi), ("c", tuple(sp.l)))


def r6j_specialized_ahc(sp: Specialization, lam: complex, params: EllipticParams) -> complex:
    """Single multiple-sum form of the symbol at geometric data."""
    return _ahc(sp, lam, params)[0]


def _ahc(sp, lam, P):
    """(value, error magnitude) of the single multiple-sum form."""
    q = P.q
    idx, common = _spec_common(sp, lam, P)
    L, M, N, s, t = idx.L, sp.M, sp.N, sp.s, sp.t
    nU, nV = len(idx.U), len(idx.V)
    K = sum(sp.k)
    om = sp.omega
    e0 = L - M - K
    pref = (P.poch(q, M - s) * P.poch(q, L - K) * P.rpoch(q, t) * P.rpoch(q, M + K - L)
            * P.poch(_qq(P, lam + 2 + M + N - 2 * L), s)
            * P.poch(_qq(P, lam + 2 + N - nU - K), K)
            * P.rpoch(_qq(P, lam + 2 + M - 2 * t), t)
            * P.rpoch(_qq(P, lam + 2 + M + N - 2 * L), nV)
            * P.rpoch(_qq(P, -lam + 2 * t - M), nV - K))
    for e, kk in zip(sp.eta, sp.k):
        pref *= P.poch(q * e / om, kk) * P.rpoch(q ** (1 + e0) * e / om, kk)
    for x, ll in zip(sp.xi, sp.l):
        pref *= P.poch(q ** (M + K - L) * om * x, ll) * P.rpoch(q ** M * om * x, ll)
    if M + K - L < 0:
        return 0j, 0.0
    sp_ser = ahc_series(sp, lam, P)
    terms = [v_term(sp_ser.a, sp_ser.b, sp_ser.c, sp_ser.z, y, P)
             for y in sp_ser.support() if sum(y) <= K + M - L]
    return pref * common * csum(terms), abs(pref * common) * math.fsum(map(abs, terms))


def r6j_specialized_iri(sp: Specialization, lam: complex, params: EllipticParams) -> complex:
    """Reversed-summation form; for L > M the sum is restricted to |y| >= L - M."""
    return _iri(sp, lam, params)[0]


def _iri(sp, lam, P):
    q = P.q
    idx, common = _spec_common(sp, lam, P)
    L, M, N, s, t = idx.L, sp.M, sp.N, sp.s, sp.t
    nU, nV = len(idx.U), len(idx.V)
    K = sum(sp.k)
    om = sp.omega
    pref = (q ** ((s + N - M - nV) * K) * P.poch(q, M - s) * P.poch(q, L) * P.rpoch(q, t)
            * P.poch(_qq(P, lam + 2 + M + N - 2 * L), s)
            * P.rpoch(_qq(P, lam + 2 + M - 2 * t), t)
            * P.rpoch(_qq(P, lam + 2 + M + N - 2 * L), nV)
            * P.rpoch(_qq(P, -lam + 2 * t - M), nV))
    for e, kk in zip(sp.eta, sp.k):
        for x, ll in zip(sp.xi, sp.l):
            ex = e * x
            pref *= P.poch(ex, kk + ll) * P.rpoch(ex, kk) * P.rpoch(ex, ll)
        pref *= (P.poch(_qq(P, -lam - 1 + L + nU - M - N) * e / om, kk)
                 * P.poch(_qq(P, lam + 1 - t) * e / om, kk)
                 * P.rpoch(q ** (L - M) * e / om, kk) * P.rpoch(q ** -M * e / om, kk))
    for x, ll in zip(sp.xi, sp.l):
        pref *= P.poch(q ** (M - L) * om * x, ll) * P.rpoch(q ** M * om * x, ll)
    a = q ** (M - L) * om
    b = ((_qq(P, lam + 1 + M - L - t), _qq(P, -lam - 1 - N + nU))
         + tuple(q ** (M - L + ll) * x * om for x, ll in zip(sp.xi, sp.l)))
    c = (om, q ** (M + 1) * om) + tuple(q / x for x in sp.xi) + tuple(sp.eta)
    zz = tuple(q ** -kk / e for e, kk in zip(sp.eta, sp.k))
    # 1/(q)_{M-L} * 1/(q^{1+M-L})_{|y|} is merged into 1/(q)_{M-L+|y|}, which
    # vanishes for |y| < L - M
    terms = [v_term(a, b, c, zz, y, P, omit_c=(0,)) * P.rpoch(q, M - L + sum(y))
             for y in itertools.product(*(range(kk + 1) for kk in sp.k))]
    return pref * common * csum(terms), abs(pref * common) * math.fsum(map(abs, terms))


def specialization_residuals(sp: Specialization, lam: complex, params: EllipticParams,
                             floor: float = 1.0, with_condition: bool = False):
    """Residuals of the specialized forms against mcmt and of the rkt link.

    ``floor`` bounds the residual denominator from below so that exactly
    vanishing symbols are compared in absolute terms.  With ``with_condition``
    the pair (residuals, condition) is returned; the condition is the largest
    error magnitude relative to its residual denominator.
    """
    P = params
    ref, m0 = r6j_mcmt_mag(sp.build(lam, P), P)
    (ahc, m1), (iri, m2) = _ahc(sp, lam, P), _iri(sp, lam, P)
    out = {
        "ahc": rel_residual(ref, ahc, floor),
        "iri": rel_residual(ref, iri, floor),
    }
    cond = max(m0, m1, m2) / max(abs(ref), abs(ahc), abs(iri), floor)
    ser = ahc_series(sp, lam, P)
    # the ahc series is the left side of the rkt transformation with
    # (w, z, N, M) = (xi, eta, k, l); its right side is the rat2 series
    lhs, rhs, k = rkt_sides(P, ser.a, ser.b[0], ser.b[1], ser.c[0], ser.c[1],
                            list(sp.xi), list(sp.eta), list(sp.k), list(sp.l))
    direct, k2 = v_series_cond(ser, P, validate=False)
    out["rkt_lhs"] = rel_residual(lhs, direct, floor)
    out["rkt"] = rel_residual(lhs, rhs, floor)
    # the series conditions are relative to the sums themselves
    big = max(abs(lhs), abs(rhs), floor)
    cond = max(cond, k * abs(lhs) / big if math.isfinite(k) else k,
               k2 * abs(direct) / big if math.isfinite(k2) else k2)
    return (out, cond) if with_condition else out


# ------------------------------------------------------------------ dispatch

METHODS: dict[str, Callable] = {
    "mcmt": r6j_mcmt,
    "rat1": r6j_rat1,
    "rat2": r6j_rat2,
    "lattice_oracle": r6j_lattice,
}

# Same methods, returning (value, error magnitude).  Rounding error in the
# value is a modest multiple of eps times the magnitude.
MAG_METHODS: dict[str, Callable] = {
    "mcmt": r6j_mcmt_mag,
    "rat1": r6j_rat1_mag,
    "rat2": r6j_rat2_mag,
    "lattice_oracle": r6j_lattice_mag,
}


def r6j(idx: SixJIndex, method: str, params: EllipticParams,
        specialization: Specialization | None = None) -> complex:
    """Evaluate the symbol by the named method.

    The specialized methods take their data from ``specialization`` and
    ignore the spectral vectors of ``idx`` (only its lam is used).
    """
    if method == "specialized_ahc":
        if specialization is None:
            raise DomainError("specialized methods need a Specialization")
        return r6j_specialized_ahc(specialization, idx.lam, params)
    if method == "specialized_iri":
        if specialization is None:
            raise DomainError("specialized methods need a Specialization")
        return r6j_specialized_iri(specialization, idx.lam, params)
    try:
        f = METHODS[method]
    except KeyError:
        raise DomainError(f"unknown method {method!r}") from None
    return f(idx, params)


def admissible_indices(M: int, N: int):
    """All (S, T, U, V) with |S| + |U| = |T| + |V|."""
    for S in subsets(M):
        for T in subsets(M):
            for U in subsets(N):
                for V in subsets(N):
                    if len(S) + len(U) == len(T) + len(V):
                        yield S, T, U, V


# ------------------------------------------------------------------ QDYB / unitarity

class _Cache:
    """Memoized symbols; ``mag`` holds the error magnitude of each value."""

    def __init__(self, params, method="mcmt"):
        self.P, self.method, self.d, self.mag = params, method, {}, {}

    def __call__(self, upper_left, upper_right, lower_left, lower_right, lam, x, y):
        # R^{AB}_{CD}(lam; x, y) = r6j(S=C, T=A, U=D, V=B; w=x, z=y)
        key = (upper_left, upper_right, lower_left, lower_right, lam, x, y)
        v = self.d.get(key)
        if v is None:
            idx = SixJIndex(lower_left, upper_left, lower_right, upper_right, x, y, lam)
            self.d[key], self.mag[key] = MAG_METHODS[self.method](idx, self.P)
            v = self.d[key]
        return v

    def m(self, *key) -> float:
        self(*key)
        return self.mag[key]


def check_qdyb(u: Sequence[complex], w: Sequence[complex], z: Sequence[complex],
               lam: complex, params: EllipticParams, method: str = "mcmt",
               with_condition: bool = False):
    """Max relative residual of the hexagon identity over all admissible labels.

    The residual is relative to the largest side in the family; the optional
    condition is the largest sum of products of the symbols' error
    magnitudes, over that scale.
    """
    u, w, z = tuple(complex(x) for x in u), tuple(complex(x) for x in w), tuple(complex(x) for x in z)
    Lu, M, N = len(u), len(w), len(z)
    R = _Cache(params, method)
    worst = mag = 0.0
    records = []
    for Q in subsets(Lu):
        for Rr in subsets(Lu):
            for S in subsets(M):
                for T in subsets(M):
                    for U in subsets(N):
                        for V in subsets(N):
                            if len(Q) + len(S) + len(U) != len(Rr) + len(T) + len(V):
                                continue
                            lhs, rhs, lmag, rmag = [], [], [], []
                            for X in subsets(Lu):
                                for Y in subsets(M):
                                    for Z in subsets(N):
                                        if (len(X) + len(Y) == len(Rr) + len(T)
                                                and len(Y) + len(Z) == len(S) + len(U)):
                                            k1 = (X, Y, Rr, T, lam + N - 2 * len(V), u, w)
                                            k2 = (Q, Z, X, V, lam, u, z)
                                            k3 = (S, U, Y, Z, lam + Lu - 2 * len(Q), w, z)
                                            lhs.append(R(*k1) * R(*k2) * R(*k3))
                                            lmag.append(R.m(*k1) * R.m(*k2) * R.m(*k3))
                                        if (len(X) + len(Y) == len(Q) + len(S)
                                                and len(Y) + len(Z) == len(T) + len(V)):
                                            k1 = (Y, Z, T, V, lam, w, z)
                                            k2 = (X, U, Rr, Z, lam + M - 2 * len(Y), u, z)
                                            k3 = (Q, S, X, Y, lam, u, w)
                                            rhs.append(R(*k1) * R(*k2) * R(*k3))
                                            rmag.append(R.m(*k1) * R.m(*k2) * R.m(*k3))
                            records.append((csum(lhs), csum(rhs)))
                            mag = max(mag, math.fsum(lmag), math.fsum(rmag))
    scale = max((max(abs(a), abs(b)) for a, b in records), default=0.0)
    for a, b in records:
        worst = max(worst, rel_residual(a, b, scale))
    if not with_condition:
        return worst
    return worst, (mag / scale if scale else 1.0)


def check_unitarity(w: Sequence[complex], z: Sequence[complex], lam: complex,
                    params: EllipticParams, method: str = "mcmt",
                    with_condition: bool = False):
    """Max absolute residual of sum_{X,Y} R^{XY}_{SU}(w,z) R^{VT}_{YX}(z,w) - delta.

    The optional condition is the largest sum, over the terms of one entry,
    of the product of the symbols' error magnitudes.
    """
    w, z = tuple(complex(x) for x in w), tuple(complex(x) for x in z)
    M, N = len(w), len(z)
    R = _Cache(params, method)
    worst = mag = 0.0
    for S, T, U, V in admissible_indices(M, N):
        acc, amag = [], []
        for X in subsets(M):
            for Y in subsets(N):
                if len(X) + len(Y) == len(S) + len(U):
                    k1, k2 = (X, Y, S, U, lam, w, z), (V, T, Y, X, lam, z, w)
                    acc.append(R(*k1) * R(*k2))
                    amag.append(R.m(*k1) * R.m(*k2))
        target = 1.0 if (S == T and U == V) else 0.0
        worst = max(worst, abs(csum(acc) - target))
        mag = max(mag, math.fsum(amag))
    return (worst, mag) if with_condition else worst


# ------------------------------------------------------------------ symmetries

def _g_ratio(idx: SixJIndex, P: EllipticParams) -> complex:
    lam, M, N, L = idx.lam, idx.M, idx.N, idx.L
    return (coeff_g(idx.U, idx.z, lam + N - 2 * len(idx.U), P)
            * coeff_g(idx.S, idx.w, lam + M + N - 2 * L, P)
            / (coeff_g(idx.T, idx.w, lam + M - 2 * len(idx.T), P)
               * coeff_g(idx.V, idx.z, lam + M + N - 2 * L, P)))


def symmetry_sides(kind: str, idx: SixJIndex, params: EllipticParams,
                   method: str = "mcmt") -> tuple[complex, complex]:
    """(left, right) of a symmetry line; the left side is always R at idx."""
    P = params
    f = METHODS[method]
    lhs = f(idx, P)
    M, N, L, lam = idx.M, idx.N, idx.L, idx.lam
    winv = tuple(1 / x for x in idx.w)
    zinv = tuple(1 / x for x in idx.z)
    Sc, Tc = complement(idx.S, M), complement(idx.T, M)
    Uc, Vc = complement(idx.U, N), complement(idx.V, N)
    if kind == "op_flip":
        rhs = f(SixJIndex(Uc, Vc, Sc, Tc, zinv, winv, lam + M + N - 2 * L), P)
    elif kind == "antipode_flip":
        rhs = _g_ratio(idx, P) * f(SixJIndex(Vc, Uc, Tc, Sc, zinv, winv, -lam - 2), P)
    elif kind == "combined":
        rhs = _g_ratio(idx, P) * f(
            SixJIndex(idx.T, idx.S, idx.V, idx.U, idx.w, idx.z, -lam - 2 + 2 * L - M - N), P)
    elif kind == "vempty_summation":
        return vempty_summation_sides(idx, P)
    elif kind == "rese":
        rhs = r6j_rese(idx, P)
    else:
        raise DomainError(f"unknown symmetry {kind!r}")
    return lhs, rhs


def symmetry_residual(kind: str, idx: SixJIndex, params: EllipticParams,
                      method: str = "mcmt", scale: float = 0.0) -> float:
    lhs, rhs = symmetry_sides(kind, idx, params, method)
    return rel_residual(lhs, rhs, scale)


def vempty_summation_sides(idx: SixJIndex, params: EllipticParams) -> tuple[complex, complex]:
    """Both sides of the summation formula obtained from the V = empty case."""
    P = params
    if idx.V or len(idx.S) + len(idx.U) != len(idx.T):
        raise DomainError("the summation needs V = empty and |S| + |U| = |T|")
    S, T, U, w, z, lam = idx.S, idx.T, idx.U, idx.w, idx.z, idx.lam
    M, N = idx.M, idx.N
    q = P.q
    Uc = complement(U, N)
    # with V empty the restriction X ⊆ U^c∩V^c is X ⊆ U^c, and the theta
    # products over V vanish from the general sum
    lhs = _rat2_sum(S, T, U, (), w, z, lam, P, restrict_X_to=Uc)[0]
    if not set(S) <= set(T):
        return lhs, 0j
    nS, nT, nU = len(S), len(T), len(U)
    Tc = complement(T, M)
    TS = _minus(T, S)
    rhs = ((-1) ** nU * q ** ((M - nT) * nS - nU * (nU + 1) // 2) * P.theta(q) ** nU
           * P.poch(_qq(P, lam + 1 - nT), M - nT) * P.poch(_qq(P, lam + 2 + M - 2 * nT), N + nS)
           * P.rpoch(_qq(P, lam + 1 + N - 2 * nU), M - nS)
           * cross_ratio(P, restrict(w, S), restrict(w, Tc), 1, q)
           * cross_ratio(P, restrict(w, Tc), z, q, 1)
           * cross_ratio(P, restrict(w, TS), restrict(z, U), q, 1)
           * phi(restrict(w, TS), restrict(z, U), _qq(P, lam + 2 + N - nU), P))
    return lhs, rhs


# ------------------------------------------------------------------ vanishing

def vanishes_trivially(idx: SixJIndex, params: EllipticParams | None = None,
                       tol: float = 1e-12) -> tuple[bool, str]:
    """Decide vanishing from cardinalities and from q-coincidences.

    Returns (True, reason) when one of the sufficient conditions applies and
    (False, "") otherwise; False does not assert that the value is nonzero.
    """
    if not idx.parity_ok:
        return True, "parity: |S|+|U| != |T|+|V|"
    M, N = idx.M, idx.N
    S, T, U, V = idx.S, idx.T, idx.U, idx.V
    Sc, Tc = complement(S, M), complement(T, M)
    checks = [
        (len(V) < len(_minus(S, T)), "|V| < |S\\T|"),
        (len(U) < len(_minus(T, S)), "|U| < |T\\S|"),
        (len(Sc) < len(_minus(U, V)), "|S^c| < |U\\V|"),
        (len(Tc) < len(_minus(V, U)), "|T^c| < |V\\U|"),
    ]
    for hit, why in checks:
        if hit:
            return True, why
    if params is not None:
        q = params.q
        Sset, Uset = set(S), set(U)
        for i in T:
            for j in Tc:
                if abs(idx.w[j] - q * idx.w[i]) <= tol * abs(idx.w[j]):
                    if not (i in Sset and j not in Sset):
                        return True, f"w_{j + 1} = q w_{i + 1} with ({i + 1},{j + 1}) in T x T^c"
        Vc = complement(V, N)
        for i in V:
            for j in Vc:
                if abs(idx.z[j] - q * idx.z[i]) <= tol * abs(idx.z[j]):
                    if not (i in Uset and j not in Uset):
                        return True, f"z_{j + 1} = q z_{i + 1} with ({i + 1},{j + 1}) in V x V^c"
    return False, ""
