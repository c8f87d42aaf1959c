import itertools
import random

import pytest

from ellsix.core import DomainError, rel_residual
from ellsix.series import (IDENTITIES, IllConditioned, SeriesSpec, box_indices, identity_residual,
                           identity_sides, identity_trial, normalize_scaling, sample_identity,
                           simplex_indices, v_series, v_series_cond, v_term, very_well_poised)

from .conftest import rc


def test_index_sets():
    assert list(box_indices((1, 2))) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert sorted(simplex_indices(2, 1)) == [(0, 0), (0, 1), (1, 0)]
    assert sorted(simplex_indices(2, 2, exact=True)) == [(0, 2), (1, 1), (2, 0)]


def test_spec_validation(P):
    q = P.q
    with pytest.raises(DomainError):
        SeriesSpec(1.1, (q**-2,), (1.2, 1.3), (0.9,), ("b", 2))
    with pytest.raises(DomainError):
        SeriesSpec(1.1, (q**-2, 1.2), (1.2, 1.3, 1.4), (0.9,), None)
    with pytest.raises(DomainError):
        SeriesSpec(1.1, (q**-2, 1.2), (1.2, 1.3, 1.4), (0.9,), ("c", (1, 2)))
    spec = SeriesSpec(1.1, (q**-2, 1.2), (1.2, 1.3, 1.4), (0.9,), ("b", 3))
    with pytest.raises(DomainError):
        spec.validate(P)


def test_b_termination_at_zero_is_one(P, rng):
    z = (rc(rng), rc(rng))
    spec = SeriesSpec(rc(rng), (1.0, rc(rng), rc(rng)), tuple(rc(rng) for _ in range(5)), z,
                      ("b", 0))
    assert v_series(spec, P) == pytest.approx(1, abs=1e-14)


def test_single_variable_is_very_well_poised(P, rng):
    q = P.q
    N = 3
    a, z = rc(rng), rc(rng)
    b = (q**-N, rc(rng), rc(rng))
    c = tuple(rc(rng) for _ in range(4))
    spec = SeriesSpec(a, b, c, (z,), ("b", N))
    ref = very_well_poised(a * z, list(b) + [cj * z for cj in c], N, P)
    assert rel_residual(v_series(spec, P), ref) < 1e-12


def test_c_termination_two_term_sum(P, rng):
    q = P.q
    z = (rc(rng), rc(rng))
    a = rc(rng)
    b = (rc(rng), rc(rng))
    c = (q**-1 / z[0], rc(rng), q**-0 / z[1], rc(rng))
    spec = SeriesSpec(a, b, c, z, ("c", (1, 0)))
    spec.validate(P)
    ref = v_term(a, b, c, z, (0, 0), P) + v_term(a, b, c, z, (1, 0), P)
    assert rel_residual(v_series(spec, P), ref) < 1e-14
    assert v_term(a, b, c, z, (0, 0), P) == pytest.approx(1, abs=1e-14)


def test_scaling_invariance(P, rng):
    q = P.q
    z = (rc(rng), rc(rng))
    spec = SeriesSpec(rc(rng), (q**-2, rc(rng), rc(rng)), tuple(rc(rng) for _ in range(5)), z,
                      ("b", 2))
    assert rel_residual(v_series(spec, P), v_series(normalize_scaling(spec), P)) < 1e-12


def test_condition_number(P, rng):
    q = P.q
    spec = SeriesSpec(rc(rng), (q**-2, rc(rng), rc(rng)), tuple(rc(rng) for _ in range(4)),
                      (rc(rng),), ("b", 2))
    v, k = v_series_cond(spec, P)
    assert v == v_series(spec, P) and k >= 1


def test_spec_examples(P):
    assert identity_residual("ft_jackson", {"N": 3}, 1, P) <= 1e-10
    assert identity_residual("ebt", {"N": 0}, 5, P) == 0.0
    assert identity_residual("rjs", {"Nz": (2, 1)}, 4, P) <= 1e-9


@pytest.mark.parametrize("ident,size", [
    ("ft_jackson", {"N": 4}),
    ("ebt", {"N": 3}),
    ("rjs", {"Nz": (1, 1, 1)}),
    ("sjs", {"Nz": (3, 2)}),
    ("nkt", {"m": 2, "n": 3, "N": 3}),
    ("rkt", {"Nz": (2, 1), "Mw": (1, 2)}),
])
def test_identities(P, ident, size):
    res, rejected = identity_trial(ident, size, random.Random(11), P)
    assert rejected >= 0
    assert res <= (1e-8 if ident == "rkt" else 1e-9)


def test_ill_conditioned_retry_exhaustion(P):
    with pytest.raises(IllConditioned):
        identity_trial("ft_jackson", {"N": 2}, random.Random(0), P, limit=0.0)


def test_unknown_identity(P):
    with pytest.raises(DomainError):
        identity_sides("nope", {}, P)
    assert set(IDENTITIES) == {"ebt", "ft_jackson", "nkt", "rkt", "rjs", "sjs"}
    assert sample_identity("ebt", {"N": 2}, random.Random(0))["N"] == 2
