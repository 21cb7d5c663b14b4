import cmath

import numpy as np
import pytest

from sixvertex.monodromy import (
    act_eigen_formulas,
    bethe_residual,
    build_monodromy,
    build_monodromy_head,
    transfer_commutator,
    verify_block_structure,
    verify_exchange_relations,
)
from sixvertex.tensor_space import relative_residual
from sixvertex.weights import SpectralPoint, make_weights, sym_trig_weights

from conftest import RHO, points


def test_single_site_blocks(field_trig):
    aux, site = points(field_trig, 2, 1)
    t = build_monodromy(field_trig, aux, [site])
    am, bp, bm, cp, cm = field_trig.evaluate(aux, site)
    np.testing.assert_allclose(t.A.to_dense(), np.diag([1, bp]), atol=1e-15)
    np.testing.assert_allclose(t.D.to_dense(), np.diag([bm, am]), atol=1e-15)
    np.testing.assert_allclose(t.B.to_dense(), [[0, 0], [cp, 0]], atol=1e-15)
    np.testing.assert_allclose(t.C.to_dense(), [[0, cm], [0, 0]], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_head_and_tail_recursions_agree(weights, n):
    pts = points(weights, n + 1, n)
    t1 = build_monodromy(weights, pts[0], pts[1:])
    t2 = build_monodromy_head(weights, pts[0], pts[1:])
    for block in "ABCD":
        assert relative_residual(getattr(t1, block), getattr(t2, block)) < 1e-13
    assert verify_block_structure(t1, weights).passed


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exchange_relations(weights, n):
    assert verify_exchange_relations(weights, n, seed=n).passed


@pytest.mark.parametrize("m", [0, 1, 2])
def test_eigen_action(weights, m):
    pts = points(weights, 4 + m, 8)
    rep = act_eigen_formulas(weights, pts[0], pts[1:1 + m], pts[1 + m:])
    assert rep.passed


def test_sym_trig_single_root_closed_form():
    rho = 2.0 + 0.5j
    w = sym_trig_weights(rho)
    xi = 0.9 - 0.2j
    s = cmath.sqrt(rho)
    nu = xi * (1 - s) / (rho - s)
    res = bethe_residual(w, [SpectralPoint(nu)], [SpectralPoint(xi)])
    assert res[0] < 1e-14
    off = bethe_residual(w, [SpectralPoint(nu * 1.01)], [SpectralPoint(xi)])
    assert off[0] > 1e-4


def test_generic_and_polynomial_forms_agree_off_shell(field_trig):
    pts = points(field_trig, 5, 6)
    nus, sites = pts[:2], pts[2:]
    a = bethe_residual(field_trig, nus, sites, "generic")
    b = bethe_residual(field_trig, [SpectralPoint(p.rapidity) for p in nus], sites, "field-trig")
    # both are nonzero here; they vanish together, so only the support is compared
    assert np.all(a > 1e-6) and np.all(b > 1e-6)


@pytest.mark.parametrize("family", ["field-trig", "sym-trig", "generic"])
def test_transfer_matrices_commute(family):
    w = make_weights(family, RHO, seed=2)
    pts = points(w, 5, 3)
    assert transfer_commutator(w, pts[0], pts[1], pts[2:]) < 1e-12
