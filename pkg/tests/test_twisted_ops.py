import numpy as np
import pytest

from sixvertex.fbasis import build_F
from sixvertex.monodromy import build_monodromy
from sixvertex.tensor_space import relative_residual
from sixvertex.twisted_ops import (
    build_twisted_ops,
    oracle_twist,
    precise_oracle_twist,
    twisted_B,
    twisted_C,
    twisted_D,
    twisted_D_inverse,
    verify_twisted_ops,
    verify_twisted_recurrences,
)

from sixvertex.weights import make_weights, perturbed_weights

from conftest import RHO, points


def test_single_site_twist_is_trivial(weights):
    aux, site = points(weights, 2, 3)
    t = build_monodromy(weights, aux, [site])
    ops = build_twisted_ops(weights, aux, [site])
    for block in "ABCD":
        assert relative_residual(getattr(ops, block), getattr(t, block)) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_closed_forms_match_conjugated_blocks(weights, n):
    pts = points(weights, n + 1, 40 + n)
    assert verify_twisted_ops(weights, pts[0], pts[1:]).passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_recurrences(weights, n):
    pts = points(weights, n + 1, 50 + n)
    assert verify_twisted_recurrences(weights, pts[0], pts[1:]).passed


def test_twisted_D_is_diagonal_and_invertible(field_trig):
    pts = points(field_trig, 4, 7)
    d = twisted_D(field_trig, pts[0], pts[1:]).to_dense()
    assert np.count_nonzero(d - np.diag(np.diag(d))) == 0
    dinv = twisted_D_inverse(field_trig, pts[0], pts[1:]).to_dense()
    np.testing.assert_allclose(d @ dinv, np.eye(8), atol=1e-13)


@pytest.mark.parametrize("form", ["theta", "split"])
def test_two_forms_of_creation_operators(field_trig, form):
    pts = points(field_trig, 4, 8)
    ref_b = twisted_B(field_trig, pts[0], pts[1:])
    ref_c = twisted_C(field_trig, pts[0], pts[1:])
    assert relative_residual(twisted_B(field_trig, pts[0], pts[1:], form=form), ref_b) < 1e-13
    assert relative_residual(twisted_C(field_trig, pts[0], pts[1:], form=form), ref_c) < 1e-13


def test_unknown_form_rejected(field_trig):
    pts = points(field_trig, 3, 8)
    with pytest.raises(ValueError):
        twisted_B(field_trig, pts[0], pts[1:], form="product")


def test_twisted_B_agrees_with_F_conjugation(weights):
    pts = points(weights, 4, 9)
    aux, sites = pts[0], pts[1:]
    bundle = build_F(weights, sites)
    blocks = build_monodromy(weights, aux, sites)
    conj = bundle.curlyF @ blocks.B @ bundle.curlyF_inv
    assert relative_residual(twisted_B(weights, aux, sites), conj) < 1e-11


def test_precise_oracle_agrees_when_well_conditioned(weights):
    pts = points(weights, 4, 10)
    aux, sites = pts[0], pts[1:]
    fast = oracle_twist(build_monodromy(weights, aux, sites), build_F(weights, sites))
    slow = precise_oracle_twist(weights, aux, sites)
    for k in "ABCD":
        assert relative_residual(fast.block(k).to_dense(), slow[k]) < 1e-12


def test_ill_conditioned_oracle_is_escalated():
    # six sites with gauged weights: cond(Fc) ~ 1e11, so the double oracle is off by ~1e-6
    w = make_weights("generic", RHO, seed=2)
    pts = points(w, 7, 2)
    rep = verify_twisted_ops(w, pts[0], pts[1:])
    rec = rep.record("twisted-D")
    assert rec.parameters["oracle"] == "precise"
    assert rec.parameters["double_residual"] > 1e-8
    assert rec.residual < 1e-13
    assert rep.passed


def test_escalation_does_not_hide_wrong_weights():
    w = perturbed_weights(make_weights("generic", RHO, seed=2), "c_plus", 1e-2)
    pts = points(w, 5, 2)
    rep = verify_twisted_ops(w, pts[0], pts[1:])
    assert not rep.passed
    assert any(rec.parameters.get("oracle") == "precise" for rec in rep.failures())
