"""Theta functions and elliptic Pochhammer symbols.

Everything else in the package is assembled from the handful of kernels
defined here:

    theta(x)   = prod_{j>=0} (1 - p^j x)(1 - p^{j+1}/x)
    (x)_k      = theta(x) theta(qx) ... theta(q^{k-1} x)
    q^lam      = exp(lam * log q)         (one fixed branch of log q)

All arithmetic is double precision complex.  Division by a theta value whose
modulus falls below :data:`SINGULAR_TOL` raises :class:`SingularError`, which
is how the verification suites detect non-generic sample points.  A factor
1 - p^j x within :data:`ZERO_SNAP` of zero is taken to be exactly zero, so
that structural zeros such as (q^{-N})_{N+1} vanish exactly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "EllipticError",
    "DomainError",
    "NumericError",
    "SingularError",
    "CapacityError",
    "SINGULAR_TOL",
    "ZERO_SNAP",
    "EllipticParams",
    "theta",
    "theta_prod",
    "pochhammer",
    "q_power",
    "cap_f",
    "delta_ratio",
    "csum",
    "rel_residual",
]

#: modulus below which a denominator theta value is treated as a pole
SINGULAR_TOL = 1e-8

_TAIL_EPS = 1e-17
#: a product factor 1 - p^j x smaller than this is an exact zero
ZERO_SNAP = 1e-14
_MAX_TERMS = 200


class EllipticError(Exception):
    """Base class for evaluation failures."""


class DomainError(EllipticError, ValueError):
    """Argument outside the domain of the function (e.g. theta(0))."""


class NumericError(EllipticError, ArithmeticError):
    """Overflow or a non-finite intermediate value."""


class SingularError(EllipticError, ZeroDivisionError):
    """A denominator vanishes (to within SINGULAR_TOL)."""


class CapacityError(EllipticError):
    """Problem size beyond an enumeration or permutation cap."""


def _finite(z: complex, what: str) -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NumericError(f"non-finite value in {what}: {z!r}")
    return z


@lru_cache(maxsize=1 << 16)
def _theta(x: complex, p: complex) -> complex:
    if x == 0:
        raise DomainError("theta(0) is undefined")
    ap = abs(p)
    if ap == 0.0:
        return _snap(1 - x)
    # smallest J with |p|^J * max(|x|, 1/|x|) < eps
    big = max(abs(x), 1 / abs(x))
    J = math.ceil((math.log(_TAIL_EPS) - math.log(big)) / math.log(ap))
    J = min(max(J, 1), _MAX_TERMS)
    r = _snap(1 - x) * _snap(1 - p / x)
    pj = p
    for _ in range(1, J + 1):
        r *= _snap(1 - pj * x) * _snap(1 - pj * p / x)
        pj *= p
    return _finite(complex(r), "theta")


def _snap(f: complex) -> complex:
    # arguments such as q^{-N} q^N hit a zero only up to rounding
    return 0j if abs(f) < ZERO_SNAP else f


@dataclass(frozen=True)
class EllipticParams:
    """Nome ``p``, base ``q`` and a fixed branch ``log_q`` of ``log q``.

    The methods are the computational kernel; the module level functions of
    the same names are thin wrappers kept for a functional call style.
    """

    p: complex
    q: complex
    log_q: complex = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        p, q = complex(self.p), complex(self.q)
        if not abs(p) < 1:
            raise DomainError(f"need |p| < 1, got |p| = {abs(p)}")
        if q == 0:
            raise DomainError("q must be nonzero")
        log_q = cmath.log(q) if self.log_q is None else complex(self.log_q)
        if abs(cmath.exp(log_q) - q) > 1e-12 * abs(q):
            raise DomainError("exp(log_q) != q")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "log_q", log_q)

    # -- theta kernel -------------------------------------------------------
    def theta(self, x: complex) -> complex:
        return _theta(complex(x), self.p)

    def theta_prod(self, xs: Iterable[complex]) -> complex:
        r = 1 + 0j
        for x in xs:
            r *= self.theta(x)
        return r

    def rtheta(self, x: complex) -> complex:
        """1/theta(x), raising SingularError near a zero."""
        t = self.theta(x)
        if abs(t) < SINGULAR_TOL:
            raise SingularError(f"theta({complex(x):.6g}) = {t:.3g} in a denominator")
        return 1 / t

    def poch(self, x: complex, k: int) -> complex:
        """Elliptic Pochhammer (x)_k, for any integer k."""
        x = complex(x)
        q = self.q
        if k >= 0:
            r = 1 + 0j
            for j in range(k):
                r *= self.theta(x * q**j)
            return _finite(r, "pochhammer")
        # (x)_k = 1 / (q^k x)_{-k}
        r = 1 + 0j
        for j in range(k, 0):
            r *= self.rtheta(x * q**j)
        return _finite(r, "pochhammer")

    def rpoch(self, x: complex, k: int) -> complex:
        """1/(x)_k.  For negative k this is a plain product and may be zero."""
        return self.poch(x * self.q**k, -k)

    def qpow(self, lam: complex) -> complex:
        try:
            return _finite(cmath.exp(lam * self.log_q), "q_power")
        except OverflowError as exc:
            raise NumericError(f"q^{lam} overflows") from exc

    def cap_f(self, lam: complex) -> complex:
        return self.qpow(-lam / 2) * self.theta(self.qpow(lam + 1))

    def delta_ratio(self, z: Sequence[complex], y: Sequence[int]) -> complex:
        """Delta(z q^y)/Delta(z) for the elliptic Weyl denominator."""
        if not any(y):
            return 1 + 0j
        q = self.q
        r = 1 + 0j
        n = len(z)
        for j in range(n):
            for k in range(j + 1, n):
                u = z[k] / z[j]
                r *= q ** y[j] * self.theta(q ** (y[k] - y[j]) * u) * self.rtheta(u)
        return r


def theta(x: complex, params: EllipticParams) -> complex:
    return params.theta(x)


def theta_prod(xs: Iterable[complex], params: EllipticParams) -> complex:
    return params.theta_prod(xs)


def pochhammer(x: complex, k: int, params: EllipticParams) -> complex:
    return params.poch(x, k)


def q_power(lam: complex, params: EllipticParams) -> complex:
    return params.qpow(lam)


def cap_f(lam: complex, params: EllipticParams) -> complex:
    """F(lam) = q^{-lam/2} theta(q^{lam+1})."""
    return params.cap_f(lam)


def delta_ratio(z: Sequence[complex], y: Sequence[int], params: EllipticParams) -> complex:
    return params.delta_ratio(z, y)


def csum(values: Iterable[complex]) -> complex:
    """Order-independent, correctly rounded complex sum."""
    vals = list(values)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def rel_residual(lhs: complex, rhs: complex, scale: float = 0.0) -> float:
    """|lhs - rhs| / max(|lhs|, |rhs|, scale); 0 when everything vanishes."""
    den = max(abs(lhs), abs(rhs), scale)
    if den == 0.0:
        return 0.0
    return abs(lhs - rhs) / den
