import itertools

import pytest

from ellsix.core import CapacityError, DomainError, rel_residual
from ellsix.sixj import (MAG_METHODS, METHODS, SixJIndex, Specialization, admissible_indices,
                         check_qdyb, check_unitarity, r6j, r6j_rese, specialization_residuals,
                         subsets, symmetry_residual, vanishes_trivially)

from .conftest import rc


def _vec(rng, n):
    return tuple(rc(rng, 0.7, 1.5) for _ in range(n))


def test_subsets_enumeration():
    assert list(subsets(2)) == [(), (0,), (1,), (0, 1)]
    assert list(subsets(3, 2)) == [(0, 1), (0, 2), (1, 2)]
    assert list(subsets(2, 5)) == []


def test_admissible_indices_respect_parity():
    idx = list(admissible_indices(2, 1))
    assert all(len(S) + len(U) == len(T) + len(V) for S, T, U, V in idx)
    assert len(set(idx)) == len(idx)


def test_index_validation():
    with pytest.raises(DomainError):
        SixJIndex((0,), (), (), (), (0,), (1.0,), 0.3)
    with pytest.raises(DomainError):
        SixJIndex((2,), (), (), (), (1.0,), (1.0,), 0.3)


def test_parity_violation_is_zero(P, rng):
    idx = SixJIndex((0,), (), (), (), _vec(rng, 1), _vec(rng, 1), 0.3)
    for m in METHODS:
        assert r6j(idx, m, P) == 0


@pytest.mark.parametrize("S,T,U,V", list(admissible_indices(1, 1)))
def test_four_methods_agree_at_one_by_one(P, rng, S, T, U, V):
    idx = SixJIndex(S, T, U, V, _vec(rng, 1), _vec(rng, 1), 0.41 + 0.13j)
    vals = [r6j(idx, m, P) for m in ("lattice_oracle", "mcmt", "rat1", "rat2")]
    scale = max(max(abs(v) for v in vals), 1.0)
    assert max(abs(v - vals[0]) for v in vals) / scale < 1e-11


def test_magnitude_variants_agree_with_values(P, rng):
    idx = SixJIndex((0,), (1,), (0,), (0,), _vec(rng, 2), _vec(rng, 1), 0.3 + 0.2j)
    for m, f in MAG_METHODS.items():
        v, mag = f(idx, P)
        assert v == METHODS[m](idx, P)
        assert mag >= abs(v) * (1 - 1e-12)


def test_closed_form_diagonal(P, rng):
    M, N = 2, 2
    w, z = _vec(rng, M), _vec(rng, N)
    lam = 0.3 - 0.2j
    T = (1,)
    idx = SixJIndex(T, T, (), (), w, z, lam)
    nT = len(T)
    ref = (P.poch(P.qpow(lam + 2 + M + N - 2 * nT), nT)
           / P.poch(P.qpow(lam + 2 + M - 2 * nT), nT))
    for i in T:
        for j in range(N):
            ref *= P.theta(w[i] / z[j]) / P.theta(P.q * w[i] / z[j])
    assert rel_residual(r6j_rese(idx, P), ref) < 1e-12
    assert rel_residual(r6j(idx, "mcmt", P), ref) < 1e-11


def test_closed_form_zero_off_support(P, rng):
    idx = SixJIndex((0,), (1,), (0,), (), _vec(rng, 2), _vec(rng, 1), 0.3)
    assert r6j_rese(idx, P) == 0
    with pytest.raises(DomainError):
        r6j_rese(SixJIndex((), (), (0,), (0,), _vec(rng, 1), _vec(rng, 1), 0.3), P)


def test_closed_form_generic(P, rng):
    w, z = _vec(rng, 2), _vec(rng, 1)
    idx = SixJIndex((0,), (0, 1), (0,), (), w, z, 0.2 + 0.3j)
    assert rel_residual(r6j_rese(idx, P), r6j(idx, "mcmt", P)) < 1e-11


def test_oracle_capacity(P, rng):
    idx = SixJIndex((), (), (), (), _vec(rng, 3), _vec(rng, 3), 0.3)
    with pytest.raises(CapacityError):
        r6j(idx, "lattice_oracle", P)


def test_qdyb(P, rng):
    for L, M, N in ((1, 1, 1), (2, 1, 1)):
        res, cond = check_qdyb(_vec(rng, L), _vec(rng, M), _vec(rng, N), 0.35 + 0.1j, P,
                               with_condition=True)
        assert cond < 1e5
        assert res <= 1e-8


@pytest.mark.parametrize("M,N", [(1, 1), (2, 1), (2, 2)])
def test_unitarity(P, rng, M, N):
    res, cond = check_unitarity(_vec(rng, M), _vec(rng, N), 0.35 + 0.1j, P, with_condition=True)
    assert cond < 1e5
    assert res <= 1e-8


def test_unitarity_without_spectral_vectors(P):
    # only S = T = U = V = empty; the single term is 1 * 1
    assert check_unitarity((), (), 0.3, P) == 0.0


@pytest.mark.parametrize("kind", ["op_flip", "antipode_flip", "combined"])
def test_symmetries(P, rng, kind):
    w, z = _vec(rng, 2), _vec(rng, 1)
    lam = 0.22 + 0.17j
    worst = 0.0
    for S, T, U, V in admissible_indices(2, 1):
        worst = max(worst, symmetry_residual(kind, SixJIndex(S, T, U, V, w, z, lam), P,
                                             scale=1.0))
    assert worst <= 1e-9


def test_combined_symmetry_trivial_index(P, rng):
    idx = SixJIndex((0,), (0,), (), (), _vec(rng, 1), (), 0.3)
    assert symmetry_residual("combined", idx, P) <= 1e-12


def test_summation_with_empty_v(P, rng):
    w, z = _vec(rng, 2), _vec(rng, 1)
    for S, T, U, V in admissible_indices(2, 1):
        if V:
            continue
        idx = SixJIndex(S, T, U, V, w, z, 0.3 + 0.1j)
        assert symmetry_residual("vempty_summation", idx, P, scale=1.0) <= 1e-8


def test_unknown_symmetry(P, rng):
    idx = SixJIndex((), (), (), (), (), (), 0.3)
    with pytest.raises(DomainError):
        symmetry_residual("bogus", idx, P)


def test_vanishing_from_cardinalities(P, rng):
    # |V| = 0 < |S minus T| = 1
    idx = SixJIndex((1,), (0,), (), (), _vec(rng, 2), _vec(rng, 1), 0.3)
    assert idx.parity_ok
    assert vanishes_trivially(idx) == (True, "|V| < |S\\T|")
    assert abs(r6j(idx, "mcmt", P)) < 1e-14
    bad = SixJIndex((0,), (), (), (), _vec(rng, 1), (), 0.3)
    assert vanishes_trivially(bad)[1].startswith("parity")


def test_vanishing_count_rule_matches_value(P, rng):
    w, z = _vec(rng, 2), _vec(rng, 2)
    lam = 0.3 + 0.15j
    seen = 0
    for S, T, U, V in admissible_indices(2, 2):
        idx = SixJIndex(S, T, U, V, w, z, lam)
        hit, why = vanishes_trivially(idx)
        if hit:
            seen += 1
            assert why
            assert abs(r6j(idx, "mcmt", P)) < 1e-12
    assert seen > 0


def test_q_coincidence_rule(P, rng):
    q = P.q
    w0 = rc(rng, 0.8, 1.2)
    w = (w0, q * w0)
    z = _vec(rng, 1)
    # (i, j) = (0, 1) lies in T x T^c and in S x S^c: no vanishing claimed
    idx = SixJIndex((0,), (0,), (0,), (0,), w, z, 0.3)
    assert vanishes_trivially(idx, P) == (False, "")
    # (0, 1) in T x T^c but not in S x S^c: the symbol vanishes
    idx = SixJIndex((1,), (0,), (0,), (0,), w, z, 0.3)
    hit, why = vanishes_trivially(idx, P)
    assert hit and "q w_1" in why
    assert abs(r6j(idx, "mcmt", P)) < 1e-12


def test_generic_index_is_nonzero(P, rng):
    idx = SixJIndex((0,), (1,), (0,), (0,), _vec(rng, 2), _vec(rng, 1), 0.3 + 0.1j)
    assert vanishes_trivially(idx, P) == (False, "")
    assert abs(r6j(idx, "mcmt", P)) > 1e-6


def test_specialization_chain(P, rng):
    sp = Specialization(2, 1, 1, rc(rng), (0,), (0,), 2, (rc(rng),), (1,), (rc(rng),), (1,), {})
    res, cond = specialization_residuals(sp, 0.31 + 0.07j, P, with_condition=True)
    assert set(res) == {"ahc", "iri", "rkt_lhs", "rkt"}
    assert cond < 1e5
    assert max(res.values()) <= 1e-8
    assert r6j(sp.build(0.3, P), "specialized_ahc", P, specialization=sp) == pytest.approx(
        r6j(sp.build(0.3, P), "mcmt", P), rel=1e-8, abs=1e-8)
    with pytest.raises(DomainError):
        r6j(sp.build(0.3, P), "specialized_iri", P)
