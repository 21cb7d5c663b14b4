import itertools

import numpy as np
import pytest

from sixvertex.fbasis import (
    build_F,
    build_N,
    reference_state_factors,
    sqrt_a_minus,
    verify_F_cocycle,
    verify_F_invariants,
    verify_factorization,
)
from sixvertex.permutation import Permutation, random_permutation
from sixvertex.weights import make_weights

from conftest import RHO, points


def test_two_site_normalization(field_trig):
    pts = points(field_trig, 2, 11)
    n = np.diag(build_N(field_trig, pts).to_dense())
    np.testing.assert_allclose(n[:3], 1.0)
    assert n[3] == pytest.approx(1 / sqrt_a_minus(field_trig, pts, 1, 2), rel=1e-14)


def test_reversed_root_is_reciprocal(field_trig):
    pts = points(field_trig, 2, 12)
    assert sqrt_a_minus(field_trig, pts, 2, 1) * sqrt_a_minus(field_trig, pts, 1, 2) == pytest.approx(1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_factorization_all_orderings(weights, n):
    pts = points(weights, n, 20 + n)
    bundle = build_F(weights, pts)
    for imgs in itertools.permutations(range(1, n + 1)):
        assert verify_factorization(weights, pts, Permutation(imgs), bundle=bundle).passed, imgs


def test_factorization_random_orderings_six_sites(field_trig, rng):
    pts = points(field_trig, 6, 5)
    bundle = build_F(field_trig, pts)
    for _ in range(4):
        assert verify_factorization(field_trig, pts, random_permutation(rng, 6), bundle=bundle).passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_F_invariants_and_reference_states(weights, n):
    pts = points(weights, n, 30 + n)
    bundle = build_F(weights, pts)
    assert verify_F_invariants(bundle, weights).passed
    assert reference_state_factors(bundle, weights).passed
    if n >= 3:
        assert verify_F_cocycle(weights, pts).passed


def test_normalization_is_needed_for_asymmetric_weights():
    w = make_weights("generic", RHO, seed=1)
    pts = points(w, 3, 2)
    sigma = Permutation((2, 3, 1))
    assert verify_factorization(w, pts, sigma).passed
    assert not verify_factorization(w, pts, sigma, use_N=False).passed


def test_normalization_is_irrelevant_without_fields():
    w = make_weights("sym-trig", RHO)
    pts = points(w, 3, 2, with_field=False)
    assert verify_factorization(w, pts, Permutation((2, 3, 1)), use_N=False).passed
