"""Terminating multiple elliptic hypergeometric series V_n^m and the
classical transformation and summation identities they satisfy."""
from __future__ import annotations

import cmath
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .core import DomainError, EllipticParams, SingularError, csum, rel_residual
from .sampling import rand_complex as _rc

__all__ = [
    "TERMINATION_TOL",
    "SeriesSpec",
    "box_indices",
    "simplex_indices",
    "v_term",
    "v_series",
    "very_well_poised",
    "normalize_scaling",
    "CONDITION_LIMIT",
    "IllConditioned",
    "v_series_cond",
    "very_well_poised_cond",
    "rkt_sides",
    "IDENTITIES",
    "identity_sides",
    "identity_residual",
    "identity_trial",
    "sample_identity",
]

#: relative tolerance used to recognise a terminating parameter
TERMINATION_TOL = 1e-9

#: samples whose sums lose more than this factor to cancellation are
#: treated like singular ones and redrawn
CONDITION_LIMIT = 1e5


class IllConditioned(SingularError):
    """A sampled sum sits so close to a zero that its rounding error dominates."""


def _summed(terms) -> tuple[complex, float]:
    terms = list(terms)
    s = csum(terms)
    mag = math.fsum(abs(t) for t in terms)
    return s, (mag / abs(s) if s else (math.inf if mag else 1.0))


def box_indices(bounds: Sequence[int]):
    """Multi-indices 0 <= y_i <= bounds_i in lexicographic order."""
    return itertools.product(*(range(b + 1) for b in bounds))


def simplex_indices(n: int, total: int, exact: bool = False):
    """Multi-indices of length n with |y| <= total (or == total), lexicographic."""
    def rec(prefix, left, k):
        if k == 1:
            if exact:
                yield prefix + (left,)
            else:
                for v in range(left + 1):
                    yield prefix + (v,)
            return
        for v in range(left + 1):
            yield from rec(prefix + (v,), left - v, k - 1)
    if n == 0:
        if not exact or total == 0:
            yield ()
        return
    yield from rec((), total, n)


@dataclass(frozen=True)
class SeriesSpec:
    """Data of V_n^m(a; b; c; z) together with its termination.

    ``termination`` is ``("b", N)`` when b_1 = q^{-N} and ``("c", (N_1..N_n))``
    when the c-parameters contain q^{-N_i}/z_i for every i.
    """

    a: complex
    b: tuple
    c: tuple
    z: tuple
    termination: tuple = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(complex(x) for x in self.b))
        object.__setattr__(self, "c", tuple(complex(x) for x in self.c))
        object.__setattr__(self, "z", tuple(complex(x) for x in self.z))
        object.__setattr__(self, "a", complex(self.a))
        m = len(self.b) - 2
        if m < 0 or len(self.c) != m + self.n + 2:
            raise DomainError(
                f"need len(b) = m+2 and len(c) = m+n+2, got {len(self.b)}, {len(self.c)}, n={self.n}")
        if self.termination is None:
            raise DomainError("nonterminating series are not supported")
        kind = self.termination[0]
        if kind == "b":
            N = int(self.termination[1])
            object.__setattr__(self, "termination", ("b", N))
        elif kind == "c":
            Ns = tuple(int(x) for x in self.termination[1])
            if len(Ns) != self.n:
                raise DomainError("c-type termination needs one bound per z")
            object.__setattr__(self, "termination", ("c", Ns))
        else:
            raise DomainError(f"unknown termination {kind!r}")

    @property
    def m(self) -> int:
        return len(self.b) - 2

    @property
    def n(self) -> int:
        return len(self.z)

    def validate(self, params: EllipticParams) -> None:
        """Check that the declared termination is present in the data."""
        q = params.q
        kind, N = self.termination
        if kind == "b":
            if N < 0 or abs(self.b[0] * q ** N - 1) > TERMINATION_TOL:
                raise DomainError(f"b_1 is not q^-{N}")
            return
        for i, Ni in enumerate(N):
            if Ni < 0 or not any(abs(cj * self.z[i] * q ** Ni - 1) <= TERMINATION_TOL
                                 for cj in self.c):
                raise DomainError(f"no c_j equals q^-{Ni}/z_{i + 1}")

    def support(self):
        kind, N = self.termination
        if kind == "b":
            return simplex_indices(self.n, N)
        return box_indices(N)

    def is_balanced(self, params: EllipticParams, tol: float = 1e-12) -> bool:
        lhs = complex(math.prod(self.b) * math.prod(self.c) * math.prod(self.z))
        rhs = params.q ** (self.m + 1) * self.a ** (self.m + 2)
        return rel_residual(lhs, rhs) <= tol


def v_term(a: complex, b: Sequence[complex], c: Sequence[complex], z: Sequence[complex],
           y: Sequence[int], params: EllipticParams, omit_c: Sequence[int] = ()) -> complex:
    """Summand of V_n^m at the multi-index y.

    ``omit_c`` lists c-indices whose denominator factor (aq/c_j)_{|y|} is left
    out; callers use it to cancel such a factor analytically.
    """
    if not any(y):
        return 1 + 0j
    P = params
    q = P.q
    n = len(z)
    Y = sum(y)
    t = P.delta_ratio(z, y) * q ** Y
    for i in range(n):
        azi = a * z[i]
        t *= P.theta(azi * q ** (y[i] + Y)) * P.rtheta(azi) * P.poch(azi, Y)
    for bi in b:
        t *= P.poch(bi, Y)
    for j, cj in enumerate(c):
        if j not in omit_c:
            t *= P.rpoch(a * q / cj, Y)
    for i in range(n):
        yi = y[i]
        if yi == 0:
            continue
        zi = z[i]
        for cj in c:
            t *= P.poch(cj * zi, yi)
        for zj in z:
            t *= P.rpoch(q * zi / zj, yi)
        for bj in b:
            t *= P.rpoch(a * q * zi / bj, yi)
    return t


def v_series(spec: SeriesSpec, params: EllipticParams, validate: bool = True) -> complex:
    """Finite sum of V_n^m over the terminating support."""
    return v_series_cond(spec, params, validate)[0]


def v_series_cond(spec: SeriesSpec, params: EllipticParams,
                  validate: bool = True) -> tuple[complex, float]:
    """V_n^m together with the condition number sum|term| / |sum|."""
    if validate:
        spec.validate(params)
    return _summed(v_term(spec.a, spec.b, spec.c, spec.z, y, params) for y in spec.support())


def very_well_poised(a: complex, bs: Sequence[complex], N: int,
                     params: EllipticParams) -> complex:
    """Terminating one-variable series sum_{y<=N} theta(aq^{2y})/theta(a) (a, b)_y/(q, aq/b)_y q^y."""
    return very_well_poised_cond(a, bs, N, params)[0]


def very_well_poised_cond(a, bs, N, params):
    P = params
    q = P.q
    terms = [1 + 0j]
    for y in range(1, N + 1):
        t = P.theta(a * q ** (2 * y)) * P.rtheta(a) * P.poch(a, y) * P.rpoch(q, y) * q ** y
        for bi in bs:
            t *= P.poch(bi, y) * P.rpoch(a * q / bi, y)
        terms.append(t)
    return _summed(terms)


def normalize_scaling(spec: SeriesSpec) -> SeriesSpec:
    """Representative of the scaling orbit a -> ta, c -> tc, z -> z/t with a = 1."""
    t = 1 / spec.a
    return SeriesSpec(1, spec.b, tuple(t * x for x in spec.c), tuple(x / t for x in spec.z),
                      spec.termination)


# ---------------------------------------------------------------- identities


def _pochs(P, xs, k):
    r = 1 + 0j
    for x in xs:
        r *= P.poch(x, k)
    return r


def _rpochs(P, xs, k):
    r = 1 + 0j
    for x in xs:
        r *= P.rpoch(x, k)
    return r


def _ebt(P, d):
    q = P.q
    a, b, c, dd, e, f, N = d["a"], d["b"], d["c"], d["d"], d["e"], d["f"], d["N"]
    g = a ** 3 * q ** (N + 2) / (b * c * dd * e * f)
    lam = q * a * a / (b * c * dd)
    lhs, k1 = very_well_poised_cond(a, [q ** -N, b, c, dd, e, f, g], N, P)
    v, k2 = very_well_poised_cond(lam, [q ** -N, lam * b / a, lam * c / a, lam * dd / a, e, f, g],
                                  N, P)
    rhs = (_pochs(P, [a * q, a * q / (e * f), lam * q / e, lam * q / f], N)
           * _rpochs(P, [lam * q, lam * q / (e * f), a * q / e, a * q / f], N) * v)
    return lhs, rhs, max(k1, k2)


def _ft_jackson(P, d):
    q = P.q
    a, b, c, dd, N = d["a"], d["b"], d["c"], d["d"], d["N"]
    e = a * a * q ** (N + 1) / (b * c * dd)
    lhs, k = very_well_poised_cond(a, [q ** -N, b, c, dd, e], N, P)
    rhs = (_pochs(P, [a * q, a * q / (b * c), a * q / (b * dd), a * q / (c * dd)], N)
           * _rpochs(P, [a * q / b, a * q / c, a * q / dd, a * q / (b * c * dd)], N))
    return lhs, rhs, k


def _nkt_side(P, z, num, den_w, total):
    q = P.q
    terms = []
    for y in simplex_indices(len(z), total, exact=True):
        t = P.delta_ratio(z, y)
        for k, zk in enumerate(z):
            yk = y[k]
            for aj in num:
                t *= P.poch(aj * zk, yk)
            for wj in den_w:
                t *= P.rpoch(wj * zk, yk)
            for zj in z:
                t *= P.rpoch(q * zk / zj, yk)
        terms.append(t)
    return _summed(terms)


def _nkt(P, d):
    w, z, a, N = list(d["w"]), list(d["z"]), list(d["a_list"]), d["N"]
    # solve the balance w_1...w_m = z_1...z_n a_1...a_{m+n} for w_m
    w[-1] = math.prod(z) * math.prod(a) / math.prod(w[:-1])
    lhs, k1 = _nkt_side(P, z, a, w, N)
    rhs, k2 = _nkt_side(P, w, [1 / aj for aj in a], z, N)
    return lhs, rhs, max(k1, k2)


def _rkt_data(P, d):
    """Solve the rkt constraint for e and return all parameters."""
    q = P.q
    a, b, dd = d["a"], d["b"], d["d"]
    w, z, Ns, Ms = list(d["w"]), list(d["z"]), list(d["Nz"]), list(d["Mw"])
    c = d["c"]
    lam = b * c / (a * q)
    e = q ** (sum(Ns) - sum(Ms)) * a / (dd * lam)
    return a, b, c, dd, e, lam, w, z, Ns, Ms


def rkt_sides(P, a, b, c, d, e, w, z, Ns, Ms):
    """Both sides of the V_n^m <-> V_m^n transformation (lam = bc/aq).

    Returns (lhs, rhs, condition number of the worse sum).
    """
    q = P.q
    m, n = len(w), len(z)
    lam = b * c / (a * q)
    Nt, Mt = sum(Ns), sum(Ms)
    lhs_spec = SeriesSpec(
        a, (b, c) + tuple(a * q / wj for wj in w),
        tuple(q ** -Ns[i] / z[i] for i in range(n)) + tuple(q ** Ms[j] * w[j] for j in range(m)) + (d, e),
        tuple(z), ("c", tuple(Ns)))
    lhs, k1 = v_series_cond(lhs_spec, P)
    pref = (c ** (Nt - Mt) * _pochs(P, [lam * q * d, lam * q * e], Mt)
            * _pochs(P, [a * q / (c * d), a * q / (c * e)], Nt)
            * _rpochs(P, [lam * q * d / c, lam * q * e / c], Mt)
            * _rpochs(P, [a * q / d, a * q / e], Nt))
    for j in range(m):
        wj = w[j]
        pref *= (_pochs(P, [lam * q * wj / b, lam * q * wj / c], Ms[j])
                 * _rpochs(P, [lam * q * wj / (b * c), lam * q * wj], Ms[j]))
    for j in range(n):
        zj = z[j]
        pref *= (_pochs(P, [a * q * zj / (b * c), a * q * zj], Ns[j])
                 * _rpochs(P, [a * q * zj / b, a * q * zj / c], Ns[j]))
    if m == 0:
        return lhs, pref, k1
    rhs_spec = SeriesSpec(
        lam, (b, c) + tuple(lam * q / zi for zi in z),
        tuple(q ** -Ms[j] / w[j] for j in range(m)) + tuple(q ** Ns[i] * z[i] for i in range(n))
        + (1 / d, 1 / e),
        tuple(w), ("c", tuple(Ms)))
    v, k2 = v_series_cond(rhs_spec, P)
    return lhs, pref * v, max(k1, k2)


def _rkt(P, d):
    a, b, c, dd, e, lam, w, z, Ns, Ms = _rkt_data(P, d)
    return rkt_sides(P, a, b, c, dd, e, w, z, Ns, Ms)


def _rjs(P, d):
    q = P.q
    a, b, c, dd, z, Ns = d["a"], d["b"], d["c"], d["d"], list(d["z"]), list(d["Nz"])
    Nt = sum(Ns)
    e = a * a * q ** (Nt + 1) / (b * c * dd)
    n = len(z)
    spec = SeriesSpec(a, (b, c), tuple(q ** -Ns[i] / z[i] for i in range(n)) + (dd, e),
                      tuple(z), ("c", tuple(Ns)))
    lhs, k = v_series_cond(spec, P)
    rhs = (c ** Nt * _pochs(P, [a * q / (c * dd), a * q / (c * e)], Nt)
           * _rpochs(P, [a * q / dd, a * q / e], Nt))
    for j in range(n):
        rhs *= (_pochs(P, [a * q * z[j], a * q * z[j] / (b * c)], Ns[j])
                * _rpochs(P, [a * q * z[j] / b, a * q * z[j] / c], Ns[j]))
    return lhs, rhs, k


def _sjs(P, d):
    q = P.q
    a, b, c, dd, x, Ns = d["a"], d["b"], d["c"], d["d"], list(d["x"]), list(d["Nz"])
    n = len(x)
    Nt = sum(Ns)
    e = a * a * q ** (Nt + 1) / (b * c * dd)
    terms = []
    for y in box_indices(Ns):
        Y = sum(y)
        t = (P.delta_ratio(x, y) * q ** Y * P.theta(a * q ** (2 * Y)) * P.rtheta(a)
             * _pochs(P, [a, b, c], Y) * _rpochs(P, [a * q ** (1 + Nt), a * q / b, a * q / c], Y))
        for i in range(n):
            xi, yi = x[i], y[i]
            t *= (P.poch(a * q ** (1 + Nt) / (e * xi), Y - yi) * P.poch(dd / xi, Y)
                  * P.poch(e * xi, yi) * P.rpoch(dd / xi, Y - yi)
                  * P.rpoch(a * q ** (1 + Nt - Ns[i]) / (e * xi), Y)
                  * P.rpoch(a * q * xi / dd, yi))
            for j in range(n):
                t *= P.poch(q ** -Ns[j] * xi / x[j], yi) * P.rpoch(q * xi / x[j], yi)
        terms.append(t)
    lhs, k = _summed(terms)
    rhs = _pochs(P, [a * q, a * q / (b * c)], Nt) * _rpochs(P, [a * q / b, a * q / c], Nt)
    for i in range(n):
        xi = x[i]
        rhs *= (_pochs(P, [a * q * xi / (b * dd), a * q * xi / (c * dd)], Ns[i])
                * _rpochs(P, [a * q * xi / dd, a * q * xi / (b * c * dd)], Ns[i]))
    return lhs, rhs, k


IDENTITIES: dict[str, Callable] = {
    "ebt": _ebt,
    "ft_jackson": _ft_jackson,
    "nkt": _nkt,
    "rkt": _rkt,
    "rjs": _rjs,
    "sjs": _sjs,
}


def identity_sides(ident: str, data: dict,
                   params: EllipticParams) -> tuple[complex, complex, float]:
    """Left side, right side and summation condition number of a named
    identity at constraint-solved data."""
    try:
        f = IDENTITIES[ident]
    except KeyError:
        raise DomainError(f"unknown identity {ident!r}") from None
    return f(params, data)


def sample_identity(ident: str, size: dict, rng: random.Random) -> dict:
    """Draw free parameters for ``ident``; the constrained one is solved later.

    ``size`` holds the discrete data: ``N`` (one-variable and nkt), ``m``/``n``
    (nkt, rkt), ``Nz`` and ``Mw`` (multi-indices).
    """
    d: dict = {k: _rc(rng) for k in ("a", "b", "c", "d", "e", "f")}
    d["N"] = int(size.get("N", 0))
    if ident == "nkt":
        m, n = int(size["m"]), int(size["n"])
        d["w"] = [_rc(rng) for _ in range(m)]
        d["z"] = [_rc(rng) for _ in range(n)]
        d["a_list"] = [_rc(rng) for _ in range(m + n)]
    elif ident in ("rkt", "rjs"):
        Nz = tuple(size["Nz"])
        d["Nz"] = Nz
        d["z"] = [_rc(rng) for _ in Nz]
        Mw = tuple(size.get("Mw", ()))
        d["Mw"] = Mw
        d["w"] = [_rc(rng) for _ in Mw]
    elif ident == "sjs":
        Nz = tuple(size["Nz"])
        d["Nz"] = Nz
        d["x"] = [_rc(rng) for _ in Nz]
    return d


def identity_trial(ident: str, size: dict, rng: random.Random, params: EllipticParams,
                   max_retries: int = 100,
                   limit: float = CONDITION_LIMIT) -> tuple[float, int]:
    """One accepted sample: (|LHS - RHS| / (|LHS| + |RHS|), number of rejections).

    Draws hitting a pole or a cancellation-dominated point are redrawn.
    """
    rejected = 0
    for _attempt in range(max_retries):
        data = sample_identity(ident, size, rng)
        try:
            lhs, rhs, cond = identity_sides(ident, data, params)
        except SingularError:
            rejected += 1
            continue
        if cond <= limit:
            den = abs(lhs) + abs(rhs)
            return (abs(lhs - rhs) / den if den else 0.0), rejected
        rejected += 1
    raise IllConditioned(f"{ident}: no generic sample after {max_retries} retries")


def identity_residual(ident: str, size: dict, seed: int, params: EllipticParams,
                      samples: int = 1, max_retries: int = 100,
                      stats: dict | None = None) -> float:
    """Max of |LHS - RHS| / (|LHS| + |RHS|) over seeded constraint-solved samples.

    Pass a dict as ``stats`` to receive the number of rejected draws.
    """
    rng = random.Random(f"{ident}:{seed}")
    worst = 0.0
    rejected = 0
    for _ in range(samples):
        r, k = identity_trial(ident, size, rng, params, max_retries)
        worst = max(worst, r)
        rejected += k
    if stats is not None:
        stats["rejected"] = rejected
    return worst
