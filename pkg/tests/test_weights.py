import itertools

import pytest

from ellsix.core import DomainError, rel_residual
from ellsix.lattice import domain_wall_pf
from ellsix.weights import (PHI_SYMMETRIES, coeff, coeff_cd, complement, domain_wall_residual,
                            domain_wall_sides, ordered_partitions, phi, phi_cond,
                            phi_decomposition, phi_decomposition_residual, phi_factored_w,
                            phi_factored_z, phi_factorization_residual, phi_permutation_residual,
                            phi_symmetry_residual, phi_symmetry_sides, restrict, subset)

from .conftest import rc


def test_subset_helpers():
    assert subset([2, 0], 3) == (0, 2)
    assert complement((0, 2), 4) == (1, 3)
    assert restrict([10, 11, 12], (0, 2)) == [10, 12]
    with pytest.raises(DomainError):
        subset([3], 3)
    assert subset([1, 1], 3) == (1,)


def test_phi_single_variable(P, rng):
    w, z, a = rc(rng), rc(rng), rc(rng)
    ref = P.theta(a * w / (P.q * z)) / P.theta(P.q * w / z)
    assert rel_residual(phi([w], [z], a, P), ref) < 1e-14


def test_phi_empty_is_one(P):
    assert phi([], [], 0.7, P) == 1


def test_phi_geometric_progressions(P, rng):
    q = P.q
    for n in (2, 3):
        w = [rc(rng) for _ in range(n)]
        zeta, a = rc(rng), rc(rng)
        z = [q**j * zeta for j in range(n)]
        assert rel_residual(phi(w, z, a, P), phi_factored_z(w, zeta, a, P)) < 1e-11
        omega = rc(rng)
        zz = [rc(rng) for _ in range(n)]
        ww = [q**j * omega for j in range(n)]
        assert rel_residual(phi(ww, zz, a, P), phi_factored_w(omega, zz, a, P)) < 1e-11


def test_phi_matches_lattice_at_n2(P, rng):
    lam = 0.23 + 0.31j
    w = [rc(rng) for _ in range(2)]
    z = [rc(rng) for _ in range(2)]
    lhs = domain_wall_pf(lam, w, z, P)
    rhs = P.theta(P.q) ** 2 / P.poch(P.qpow(-lam - 2), 2) * phi(w, z, P.qpow(-lam), P)
    assert rel_residual(lhs, rhs) < 1e-11


def test_phi_cond_matches_phi(P, rng):
    w = [rc(rng) for _ in range(3)]
    z = [rc(rng) for _ in range(3)]
    v, k = phi_cond(w, z, 0.9, P)
    assert v == phi(w, z, 0.9, P)
    assert k >= 1


def test_coefficient_trivial_values(P, rng):
    z = [rc(rng) for _ in range(3)]
    lam = 0.4 + 0.1j
    assert abs(coeff("A", (), z, lam, P) - 1) < 1e-14
    assert abs(coeff("A", (0, 1, 2), z, lam, P) - 1) < 1e-14
    assert abs(coeff("B", (), z, lam, P) - 1) < 1e-14
    with pytest.raises(DomainError):
        coeff("Q", (), z, lam, P)


def test_coeff_c_diagonal(P, rng):
    N = 3
    z = [rc(rng) for _ in range(N)]
    lam = 0.4 + 0.1j
    S = (0, 2)
    m = len(S)
    Sc = complement(S, N)
    ref = P.poch(P.qpow(lam + 2 - m), m) / P.poch(P.qpow(lam + 2 + N - 2 * m), m)
    for i in S:
        for j in Sc:
            ref *= P.theta(P.q * z[i] / z[j]) / P.theta(z[i] / z[j])
    assert rel_residual(coeff_cd("C", S, S, z, lam, P), ref) < 1e-13
    with pytest.raises(DomainError):
        coeff_cd("C", (0,), (0, 1), z, lam, P)


def test_seeded_symmetry_examples(P):
    assert phi_symmetry_residual("zw_inversion", 2, 7, P) <= 1e-10
    assert phi_symmetry_residual("crossing1", 2, 7, P) <= 1e-10
    assert phi_symmetry_residual("crossing2", 1, 7, P) <= 1e-12
    assert phi_permutation_residual(3, 7, P) <= 1e-10


@pytest.mark.parametrize("kind", PHI_SYMMETRIES)
def test_symmetry_sides_generic(P, rng, kind):
    w = [rc(rng) for _ in range(3)]
    z = [rc(rng) for _ in range(3)]
    lhs, rhs, cond = phi_symmetry_sides(kind, w, z, rc(rng), P, with_condition=True)
    assert cond < 1e4
    assert rel_residual(lhs, rhs) <= 1e-10


@pytest.mark.parametrize("kind", ["z", "w"])
def test_factorization_residual(P, kind):
    assert phi_factorization_residual(kind, 3, 5, P) <= 1e-10


def test_ordered_partitions_count():
    # ordered Bell numbers 1, 3, 13
    assert [sum(1 for _ in ordered_partitions(n)) for n in (1, 2, 3)] == [1, 3, 13]


def test_decomposition_examples(P):
    assert phi_decomposition_residual([[0], [1]], 3, P) <= 1e-10
    assert phi_decomposition_residual([[0, 1]], 3, P) == 0.0
    assert phi_decomposition_residual([[0], [1, 2]], 3, P) <= 1e-9


def test_decomposition_rejects_non_partition(P):
    with pytest.raises(DomainError):
        phi_decomposition([[0], [0]], [1.1, 1.2], [0.9, 0.8], 0.7, P)


@pytest.mark.parametrize("kind", ["bcgp", "gbc"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_domain_wall_sides(P, rng, kind, n):
    w = [rc(rng) for _ in range(n)]
    z = [rc(rng) for _ in range(n)]
    lhs, rhs, cond = domain_wall_sides(kind, 0.27 + 0.19j, w, z, P, with_condition=True)
    assert cond < 1e5
    assert rel_residual(lhs, rhs) <= 1e-8


def test_domain_wall_unknown_kind(P):
    with pytest.raises(DomainError):
        domain_wall_sides("xyz", 0.3, [1.1], [0.9], P)
    assert domain_wall_residual("bcgp", 2, 0, P) <= 1e-8
