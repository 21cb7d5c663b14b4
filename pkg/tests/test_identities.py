import numpy as np
import pytest

from sixvertex.errors import OffShellInput
from sixvertex.identities import (
    IdentityContext,
    Phi,
    cramer_phi1,
    g,
    phi,
    phi_term,
    verify_det_recursion,
    verify_H_identity,
    verify_phi_identity,
)
from sixvertex.scalar_product import bethe_solve
from sixvertex.weights import make_weights

from conftest import RHO, points


def _raw(n, seed):
    return [p.rapidity for p in points(make_weights("sym-trig", RHO), n, seed, with_field=False)]


def _context(m, seed, rho=RHO):
    vals = _raw(2 * m, seed)
    return IdentityContext(vals[:m], vals[m:], rho)


def test_single_pair_phi_identity():
    ctx = _context(1, 3)
    mu, xi = ctx.mus[0], ctx.xis[0]
    assert g(0, np.array(ctx.mus), np.array(ctx.xis), RHO) == pytest.approx(1 / (mu * RHO - xi))
    assert Phi(0, np.array(ctx.mus), np.array(ctx.xis)) * phi(mu, xi, RHO) == pytest.approx(1 / (mu * RHO - xi))


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("seed", range(3))
def test_phi_identity(m, seed):
    assert verify_phi_identity(_context(m, 10 * m + seed, rho=2.0)).passed


def test_phi_identity_at_coinciding_sets():
    mus = _raw(3, 4)
    assert verify_phi_identity(IdentityContext(mus, list(mus), RHO)).passed
    # only the diagonal term survives, leaving 1 / (mu_i (rho - 1))
    arr = np.array(mus)
    for i, mu in enumerate(mus):
        assert g(i, arr, arr, RHO) == pytest.approx(1 / (mu * (RHO - 1)), rel=1e-13)


def test_cancelled_term_matches_product_form():
    ctx = _context(3, 12)
    mus, xis = np.array(ctx.mus), np.array(ctx.xis)
    for k in range(3):
        for i in range(3):
            direct = Phi(k, mus, xis) * phi(mus[k], xis[i], RHO)
            assert phi_term(k, i, mus, xis, RHO) == pytest.approx(direct, rel=1e-13)


@pytest.mark.parametrize("m", range(2, 7))
def test_det_recursion(m):
    assert verify_det_recursion(_context(m, m)).passed


def test_det_recursion_rank_one_kernel():
    ctx = _context(2, 5)
    u, v = np.array([1.3, -0.2 + 0.7j]), np.array([0.4j, 2.1])
    table = {(mu, xi): u[i] * v[j] for i, mu in enumerate(ctx.mus) for j, xi in enumerate(ctx.xis)}
    rep = verify_det_recursion(ctx, kernel=lambda mu, xi: table[(mu, xi)])
    assert rep.passed


@pytest.mark.parametrize("m", [2, 3, 4])
def test_cramer_reproduces_first_coefficient(m):
    definition, solved, cond = cramer_phi1(_context(m, 40 + m))
    if cond < 1e8:
        assert solved == pytest.approx(definition, rel=1e-9)


def _on_shell(n, m, seed):
    w = make_weights("field-trig", RHO)
    sites = points(w, n, seed)
    st = bethe_solve(RHO, sites, m, seed=seed)[0]
    return [s.rapidity for s in sites], [s.field for s in sites], st.rapidities


@pytest.mark.parametrize("n,m", [(2, 1), (3, 2), (4, 2)])
def test_H_identity_on_shell(n, m):
    xis, zs, nus = _on_shell(n, m, 3)
    mus = _raw(m, 50)
    for q in range(1, m + 1):
        for i in range(m):
            ps = tuple(range(q - 1))
            assert verify_H_identity(IdentityContext(mus, xis, RHO, nus, zs, i, q, ps)).passed


def test_H_identity_rejects_off_shell():
    xis, zs, nus = _on_shell(3, 2, 4)
    bad = [nus[0] * 1.05, nus[1]]
    with pytest.raises(OffShellInput):
        verify_H_identity(IdentityContext(_raw(2, 9), xis, RHO, bad, zs, 0, 1))


def test_H_identity_residual_grows_with_root_error():
    xis, zs, nus = _on_shell(3, 2, 6)
    mus = _raw(2, 11)
    direction = np.array([0.3 + 0.1j, -0.2 + 0.4j])

    def residual(scale):
        shifted = list(np.array(nus) + scale * direction)
        ctx = IdentityContext(mus, xis, RHO, shifted, zs, 0, 1)
        return verify_H_identity(ctx, enforce_on_shell=False).max_residual()

    small, large = residual(1e-6), residual(1e-5)
    assert large > small
    assert residual(0.0) < 1e-10
