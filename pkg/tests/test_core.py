import cmath
import math

import pytest

from ellsix.core import (SINGULAR_TOL, DomainError, EllipticParams, NumericError, SingularError,
                         cap_f, csum, delta_ratio, pochhammer, q_power, rel_residual, theta,
                         theta_prod)

from .conftest import rc


def test_theta_vanishes_at_one(P):
    assert theta(1, P) == 0
    assert theta(1, EllipticParams(0.4, 0.5)) == 0


def test_theta_trigonometric_limit(P0):
    for x in (0.3, 2.5 + 1j, -0.7j):
        assert theta(x, P0) == pytest.approx(1 - x, abs=1e-15)


def test_theta_truncated_product_reference():
    P = EllipticParams(0.1, 0.5)
    ref = 1.0
    for j in range(60):
        ref *= (1 - 0.1**j * 0.5) * (1 - 0.1 ** (j + 1) / 0.5)
    assert abs(theta(0.5, P) - ref) <= 1e-14


def test_theta_inversion_and_quasi_periodicity(P, rng):
    p = P.p
    for _ in range(50):
        x = rc(rng)
        t = theta(x, P)
        assert rel_residual(theta(1 / x, P), -t / x) < 1e-13
        assert rel_residual(theta(p * x, P), -t / x) < 1e-13


def test_theta_prod_edge_cases(P, rng):
    assert theta_prod([], P) == 1
    x = rc(rng)
    assert theta_prod([x], P) == theta(x, P)
    assert rel_residual(theta_prod([x, 1 / x], P), -theta(x, P) ** 2 / x) < 1e-13


def test_pochhammer_small_lengths(P, rng):
    x = rc(rng)
    assert pochhammer(x, 0, P) == 1
    assert pochhammer(x, 1, P) == theta(x, P)
    assert rel_residual(pochhammer(x, -1, P), 1 / theta(x / P.q, P)) < 1e-14


@pytest.mark.parametrize("k,l", [(2, 3), (-2, 5), (4, -1), (-3, -2), (0, 3)])
def test_pochhammer_splitting(P, rng, k, l):
    x = rc(rng)
    lhs = pochhammer(x, k + l, P)
    rhs = pochhammer(x, k, P) * pochhammer(x * P.q**k, l, P)
    assert rel_residual(lhs, rhs) < 1e-12


def test_pochhammer_structural_zero(P):
    # (q^{-N})_{N+1} contains theta(1)
    q = P.q
    assert pochhammer(q**-3, 4, P) == 0


def test_rpoch_pole_raises(P):
    with pytest.raises(SingularError):
        P.rpoch(P.q**-2, 3)


def test_q_power_values(P):
    q = P.q
    assert q_power(0, P) == 1
    assert abs(q_power(1, P) - q) < 1e-15
    assert abs(q_power(2, P) - q * q) < 1e-15
    lam = 0.3 + 0.1j
    assert abs(q_power(lam, P) - cmath.exp(lam * cmath.log(q))) < 1e-15


def test_q_power_overflow():
    P = EllipticParams(0, 1e-3)
    with pytest.raises(NumericError):
        q_power(-1e6, P)


def test_cap_f(P):
    assert cap_f(-1, P) == 0
    assert abs(cap_f(0, P) - theta(P.q, P)) < 1e-15
    lam = 0.3 + 0.1j
    ref = q_power(-lam / 2, P) * theta(q_power(lam + 1, P), P)
    assert cap_f(lam, P) == ref


def test_delta_ratio(P, rng):
    z = [rc(rng), rc(rng)]
    assert delta_ratio(z, [0, 0], P) == 1
    assert delta_ratio([z[0]], [3], P) == 1
    q = P.q
    ref = q * theta(z[1] / (q * z[0]), P) / theta(z[1] / z[0], P)
    assert rel_residual(delta_ratio(z, [1, 0], P), ref) < 1e-14


def test_params_validation():
    with pytest.raises(DomainError):
        EllipticParams(1.0, 0.5)
    with pytest.raises(DomainError):
        EllipticParams(0.1, 0)
    with pytest.raises(DomainError):
        EllipticParams(0.1, 0.5, log_q=1.0)


def test_explicit_branch_of_log_q():
    q = -0.5 + 1e-300j
    P = EllipticParams(0, q, log_q=cmath.log(0.5) - 1j * math.pi)
    assert abs(P.qpow(0.5) - cmath.exp(0.5 * P.log_q)) < 1e-15


def test_csum_is_order_independent():
    vals = [1e16, 1.0, -1e16, 1j, -1j * 1e-17]
    assert csum(vals) == csum(reversed(vals)) == complex(1.0, 1 - 1e-17)


def test_rel_residual_conventions():
    assert rel_residual(0, 0) == 0.0
    assert rel_residual(1, 1 + 1e-10) == pytest.approx(1e-10 / abs(1 + 1e-10))
    assert rel_residual(1e-20, 0, 1.0) == 1e-20


def test_singular_tolerance_value():
    assert SINGULAR_TOL == 1e-8
