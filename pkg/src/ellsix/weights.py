"""Elliptic weight function Phi and the coefficient families A, B, G, C, D.

Subsets of [N] are represented as sorted tuples of 0-based indices; the
restriction ``z_S`` always keeps ascending index order.
"""
from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

from .core import CapacityError, DomainError, EllipticParams, csum, rel_residual

__all__ = [
    "PERMUTATION_CAP",
    "Subset",
    "subset",
    "complement",
    "restrict",
    "phi",
    "phi_cond",
    "phi_factored_z",
    "phi_factored_w",
    "coeff",
    "coeff_a",
    "coeff_b",
    "coeff_g",
    "coeff_cd",
    "cross_ratio",
    "ordered_partitions",
    "phi_decomposition",
    "PHI_SYMMETRIES",
    "phi_symmetry_sides",
    "phi_symmetry_residual",
    "phi_permutation_residual",
    "phi_factorization_residual",
    "phi_decomposition_residual",
    "domain_wall_sides",
    "domain_wall_residual",
]

PERMUTATION_CAP = 8

Subset = tuple[int, ...]


def subset(members: Iterable[int], N: int) -> Subset:
    s = tuple(sorted(set(int(i) for i in members)))
    if s and (s[0] < 0 or s[-1] >= N):
        raise DomainError(f"subset {s} not contained in [0, {N})")
    return s


def complement(S: Sequence[int], N: int) -> Subset:
    ss = set(S)
    return tuple(i for i in range(N) if i not in ss)


def restrict(z: Sequence[complex], S: Sequence[int]) -> list[complex]:
    return [z[i] for i in S]


def cross_ratio(P: EllipticParams, x: Sequence[complex], y: Sequence[complex],
                num: complex = 1, den: complex = 1) -> complex:
    """prod_{i,j} theta(num * x_i / y_j) / theta(den * x_i / y_j)."""
    r = 1 + 0j
    for xi in x:
        for yj in y:
            u = xi / yj
            r *= P.theta(num * u) * P.rtheta(den * u)
    return r


def phi(w: Sequence[complex], z: Sequence[complex], a: complex,
        params: EllipticParams) -> complex:
    """Symmetrised n!-term sum defining the elliptic weight function."""
    return phi_cond(w, z, a, params)[0]


def phi_cond(w: Sequence[complex], z: Sequence[complex], a: complex,
             params: EllipticParams) -> tuple[complex, float]:
    """Phi together with the condition number sum|term| / |Phi|."""
    n = len(w)
    if len(z) != n:
        raise DomainError("phi needs len(w) == len(z)")
    if n > PERMUTATION_CAP:
        raise CapacityError(f"n = {n} exceeds the permutation cap {PERMUTATION_CAP}")
    if n == 0:
        return 1 + 0j, 1.0
    P = params
    q = P.q
    terms = []
    for sigma in itertools.permutations(range(n)):
        zs = [z[k] for k in sigma]
        t = 1 + 0j
        for i in range(n):
            for j in range(i + 1, n):
                t *= (P.theta(q * zs[i] / zs[j]) * P.theta(w[i] / zs[j])
                      * P.rtheta(zs[i] / zs[j]) * P.rtheta(q * w[i] / zs[j]))
        for j in range(n):
            u = w[j] / zs[j]
            t *= P.theta(a * q ** (-(j + 1)) * u) * P.rtheta(q * u)
        terms.append(t)
    total = csum(terms)
    mag = math.fsum(abs(t) for t in terms)
    return total, (mag / abs(total) if total else (math.inf if mag else 1.0))


def phi_factored_z(w: Sequence[complex], zeta: complex, a: complex,
                   params: EllipticParams) -> complex:
    """Phi(w; z; a) at z_j = q^{j-1} zeta, in product form."""
    P = params
    n = len(w)
    q = P.q
    r = P.poch(q, n) * P.rtheta(q) ** n
    for wj in w:
        r *= P.theta(q ** -n * a * wj / zeta) * P.rtheta(q * wj / zeta)
    return r


def phi_factored_w(omega: complex, z: Sequence[complex], a: complex,
                   params: EllipticParams) -> complex:
    """Phi(w; z; a) at w_j = q^{j-1} omega, in product form."""
    P = params
    n = len(z)
    q = P.q
    r = P.poch(q, n) * P.rtheta(q) ** n
    for zj in z:
        r *= P.theta(a * omega / (q * zj)) * P.rtheta(q ** n * omega / zj)
    return r


def coeff_a(S: Sequence[int], z: Sequence[complex], lam: complex,
            params: EllipticParams) -> complex:
    """A_{S,z}(lam), the norm <f_S(z), e_S(z)>."""
    P = params
    N, m = len(z), len(S)
    Sc = complement(S, N)
    return (P.poch(P.qpow(lam + 2 + N - 2 * m), m) * P.rpoch(P.qpow(lam + 2 - m), m)
            * cross_ratio(P, restrict(z, S), restrict(z, Sc), 1, P.q))


def coeff_b(S: Sequence[int], z: Sequence[complex], lam: complex,
            params: EllipticParams) -> complex:
    """B_{S,z}(lam), the norm in the phi-transformed bases."""
    P = params
    N, m = len(z), len(S)
    Sc = complement(S, N)
    return (P.q ** (m * (N - m)) * P.poch(P.qpow(lam + 1 - m), N - m)
            * P.rpoch(P.qpow(lam + 1), N - m)
            * cross_ratio(P, restrict(z, Sc), restrict(z, S), 1, P.q))


def coeff_g(S: Sequence[int], z: Sequence[complex], lam: complex,
            params: EllipticParams) -> complex:
    """G_{S,z}(lam), the antipode normalisation."""
    P = params
    N, s = len(z), len(S)
    Sc = complement(S, N)
    q = P.q
    return ((-1) ** s * q ** (-(s * (s - 1) // 2)) * P.qpow(-N * lam / 2)
            * P.poch(P.qpow(lam + 1 + s - N), s) * P.poch(P.qpow(lam + 2 + 2 * s - N), N - s)
            * cross_ratio(P, restrict(z, S), restrict(z, Sc), 1, q))


_COEFFS = {"A": coeff_a, "B": coeff_b, "G": coeff_g}


def coeff(kind: str, S: Sequence[int], z: Sequence[complex], lam: complex,
          params: EllipticParams) -> complex:
    try:
        f = _COEFFS[kind]
    except KeyError:
        raise DomainError(f"unknown coefficient {kind!r}") from None
    return f(S, z, lam, params)


def coeff_cd(kind: str, S: Sequence[int], T: Sequence[int], z: Sequence[complex],
             arg: complex, params: EllipticParams) -> complex:
    """Commutation coefficients C_{S,T,z}(lam) (kind "C") or D_{S,T,z}(mu) ("D").

    C expands alpha(z_S) gamma(z_{S^c}) in the basis gamma(z_{T^c}) alpha(z_T),
    D expands beta(z_{S^c}) alpha(z_S) in the basis alpha(z_T) beta(z_{T^c}).
    """
    if len(S) != len(T):
        raise DomainError("C and D need |S| == |T|")
    P = params
    N, m = len(z), len(S)
    Ss, Ts = set(S), set(T)
    TmS = [i for i in T if i not in Ss]
    SmT = [i for i in S if i not in Ts]
    n = len(TmS)
    Tc = complement(T, N)
    cross = cross_ratio(P, restrict(z, T), restrict(z, Tc), P.q, 1)
    thq = P.theta(P.q) ** n
    if kind == "C":
        lam = arg
        return (thq * P.poch(P.qpow(lam + 2 + n - m), m - n)
                * P.rpoch(P.qpow(lam + 2 + N - 2 * m), m) * cross
                * phi(restrict(z, TmS), restrict(z, SmT), P.qpow(lam + 2 + n - m), P))
    if kind == "D":
        mu = arg
        return (thq * P.poch(P.qpow(mu + 2 - m), m) * P.rpoch(P.qpow(-mu + m - N), n)
                * P.rpoch(P.qpow(mu + 2 + N - 2 * m), m) * cross
                * phi(restrict(z, TmS), restrict(z, SmT), P.qpow(-mu + m + n - N), P))
    raise DomainError(f"unknown coefficient {kind!r}")


def ordered_partitions(n: int):
    """All ordered set partitions of range(n) into nonempty blocks."""
    if n == 0:
        yield ()
        return
    for k in range(1, n + 1):
        for labels in itertools.product(range(k), repeat=n):
            if set(labels) != set(range(k)):
                continue
            yield tuple(tuple(i for i in range(n) if labels[i] == b) for b in range(k))


def phi_decomposition(blocks: Sequence[Sequence[int]], w: Sequence[complex],
                      z: Sequence[complex], a: complex, params: EllipticParams,
                      with_condition: bool = False):
    """Right-hand side of the block decomposition of Phi.

    ``blocks`` is an ordered partition S_1, ..., S_K of range(n); the sum runs
    over ordered partitions T_1, ..., T_K with |T_k| = |S_k|.  The optional
    condition covers the outer sum and every inner Phi.
    """
    P = params
    q = P.q
    n = len(w)
    sizes = [len(b) for b in blocks]
    if sorted(i for b in blocks for i in b) != list(range(n)):
        raise DomainError("blocks must partition range(n)")
    terms = []
    cond = 1.0
    for Ts in _set_compositions(tuple(range(n)), sizes):
        t = 1 + 0j
        for k in range(len(blocks)):
            for l in range(k + 1, len(blocks)):
                t *= cross_ratio(P, restrict(w, blocks[k]), restrict(z, Ts[l]), 1, q)
                t *= cross_ratio(P, restrict(z, Ts[k]), restrict(z, Ts[l]), q, 1)
        shift = 0
        for Sb, Tb in zip(blocks, Ts):
            v, k = phi_cond(restrict(w, sorted(Sb)), restrict(z, Tb), q ** (-shift) * a, P)
            t *= v
            cond = max(cond, k)
            shift += len(Sb)
        terms.append(t)
    total = csum(terms)
    if not with_condition:
        return total
    mag = math.fsum(abs(t) for t in terms)
    return total, max(cond, mag / abs(total) if total else (math.inf if mag else 1.0))


def _set_compositions(pool: tuple[int, ...], sizes: Sequence[int]):
    if not sizes:
        if not pool:
            yield ()
        return
    for first in itertools.combinations(pool, sizes[0]):
        rest = tuple(i for i in pool if i not in first)
        for tail in _set_compositions(rest, sizes[1:]):
            yield (first,) + tail


# ---------------------------------------------------------------- residual suites

PHI_SYMMETRIES = ("zw_inversion", "crossing1", "crossing2")


def _phi_pref(w, z, a, P):
    n = len(w)
    return P.q ** -n * a ** n * cross_ratio(P, w, z, 1, P.q)


def phi_symmetry_sides(kind: str, w, z, a, params: EllipticParams,
                       with_condition: bool = False):
    """Both sides of a weight-function symmetry; optionally with the worse
    condition number of the two Phi sums."""
    P = params
    q = P.q
    n = len(w)
    lhs, k1 = phi_cond(w, z, a, P)
    if kind == "zw_inversion":
        v, k2 = phi_cond([1 / x for x in z], [1 / x for x in w], a, P)
        rhs = v
    elif kind == "crossing1":
        v, k2 = phi_cond([1 / x for x in w], [q / x for x in z], q ** (n + 2) / a, P)
        rhs = _phi_pref(w, z, a, P) * v
    elif kind == "crossing2":
        v, k2 = phi_cond(list(z), [q * x for x in w], q ** (n + 2) / a, P)
        rhs = _phi_pref(w, z, a, P) * v
    else:
        raise DomainError(f"unknown symmetry {kind!r}")
    return (lhs, rhs, max(k1, k2)) if with_condition else (lhs, rhs)


def _draw(rng, n):
    from .sampling import rand_complex
    return ([rand_complex(rng) for _ in range(n)], [rand_complex(rng) for _ in range(n)],
            rand_complex(rng))


def _run(key, samples, trial):
    from .sampling import make_rng, retry_generic
    rng = make_rng(*key)
    return max(retry_generic(trial, rng) for _ in range(samples))


def phi_symmetry_residual(kind: str, n: int, seed: int, params: EllipticParams,
                          samples: int = 1) -> float:
    if kind not in PHI_SYMMETRIES:
        raise DomainError(f"unknown symmetry {kind!r}")

    def trial(rng):
        w, z, a = _draw(rng, n)
        return rel_residual(*phi_symmetry_sides(kind, w, z, a, params))

    return _run(("phi-sym", kind, n, seed), samples, trial)


def phi_permutation_residual(n: int, seed: int, params: EllipticParams,
                             samples: int = 1) -> float:
    """Residual of Phi under transpositions of w and of z."""
    def trial(rng):
        w, z, a = _draw(rng, n)
        base = phi(w, z, a, params)
        worst = 0.0
        for i in range(n - 1):
            ws, zs = list(w), list(z)
            ws[i], ws[i + 1] = ws[i + 1], ws[i]
            zs[i], zs[i + 1] = zs[i + 1], zs[i]
            worst = max(worst, rel_residual(base, phi(ws, z, a, params)),
                        rel_residual(base, phi(w, zs, a, params)))
        return worst

    return _run(("phi-perm", n, seed), samples, trial)


def phi_factorization_residual(kind: str, n: int, seed: int, params: EllipticParams,
                               samples: int = 1) -> float:
    """Sum formula against the product form on a geometric progression.

    ``kind`` is "z" (z_j = q^{j-1} zeta) or "w" (w_j = q^{j-1} omega).
    """
    P = params
    q = P.q

    def trial(rng):
        w, z, a = _draw(rng, n)
        base = z[0] if kind == "z" else w[0]
        prog = [base * q ** j for j in range(n)]
        if kind == "z":
            return rel_residual(phi(w, prog, a, P), phi_factored_z(w, base, a, P))
        if kind == "w":
            return rel_residual(phi(prog, z, a, P), phi_factored_w(base, z, a, P))
        raise DomainError(f"unknown factorization {kind!r}")

    return _run(("phi-fact", kind, n, seed), samples, trial)


def phi_decomposition_residual(blocks: Sequence[Sequence[int]], seed: int,
                               params: EllipticParams, samples: int = 1) -> float:
    """Residual of the block decomposition for an ordered partition of range(n)."""
    n = sum(len(b) for b in blocks)

    def trial(rng):
        w, z, a = _draw(rng, n)
        return rel_residual(phi(w, z, a, params), phi_decomposition(blocks, w, z, a, params))

    return _run(("phi-dec", tuple(map(tuple, blocks)), seed), samples, trial)


def domain_wall_sides(kind: str, lam: complex, w, z, params: EllipticParams,
                      with_condition: bool = False):
    """Lattice value against the weight-function closed form.

    "bcgp": <beta(w), gamma(z)> = theta(q)^n / (q^{-lam-n})_n Phi(w; z; q^{-lam});
    "gbc":  <gamma(w), beta(z)> = theta(q)^n / (q^{lam+2-n})_n Phi(w; z; q^{lam+2}).

    With ``with_condition`` the summation condition number of the lattice
    side is appended to the returned pair.
    """
    from .lattice import LatticeBoundary, domain_wall_boundary, partition_function_cond

    P = params
    n = len(w)
    if kind == "bcgp":
        lhs, k1 = partition_function_cond(lam, w, z, domain_wall_boundary(n), P)
        v, k2 = phi_cond(w, z, P.qpow(-lam), P)
        rhs = P.theta(P.q) ** n * P.rpoch(P.qpow(-lam - n), n) * v
    elif kind == "gbc":
        bd = LatticeBoundary((-1,) * n, (1,) * n, (1,) * n, (-1,) * n)
        lhs, k1 = partition_function_cond(lam, w, z, bd, P)
        v, k2 = phi_cond(w, z, P.qpow(lam + 2), P)
        rhs = P.theta(P.q) ** n * P.rpoch(P.qpow(lam + 2 - n), n) * v
    else:
        raise DomainError(f"unknown domain wall identity {kind!r}")
    return (lhs, rhs, max(k1, k2)) if with_condition else (lhs, rhs)


def domain_wall_residual(kind: str, n: int, seed: int, params: EllipticParams,
                         samples: int = 1) -> float:
    from .sampling import rand_lambda

    def trial(rng):
        w, z, _ = _draw(rng, n)
        return rel_residual(*domain_wall_sides(kind, rand_lambda(rng), w, z, params))

    return _run(("dwpf", kind, n, seed), samples, trial)
