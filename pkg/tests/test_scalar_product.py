import itertools

import numpy as np
import pytest

from sixvertex.errors import NoConvergence, OffShellInput
from sixvertex.scalar_product import (
    ScalarProductInput,
    H_entry,
    bethe_residuals,
    bethe_solve,
    intermediate_G,
    scalar_bilinear,
    scalar_direct,
    scalar_field_factorized,
    slavnov_determinant,
    symmetric_scalar,
)
from sixvertex.dwpf import izergin_determinant, relative_spread
from sixvertex.weights import SpectralPoint, make_weights

from conftest import RHO, points


def _input(w, n, m, seed, with_field=True):
    pts = points(w, n + 2 * m, seed, with_field)
    return ScalarProductInput(tuple(pts[:m]), tuple(pts[m:2 * m]), tuple(pts[2 * m:]), w)


def test_empty_product_is_one(weights):
    inp = _input(weights, 3, 0, 1)
    assert scalar_direct(inp) == pytest.approx(1.0)
    assert scalar_bilinear(inp) == pytest.approx(1.0)


def test_single_site_single_magnon(weights):
    inp = _input(weights, 1, 1, 2)
    (mu,), (nu,), (xi,) = inp.bra_rapidities, inp.ket_rapidities, inp.sites
    expected = weights.c_plus(mu, xi) * weights.c_minus(nu, xi)
    assert scalar_direct(inp) == pytest.approx(expected, rel=1e-13)
    assert scalar_bilinear(inp) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n,m", [(2, 1), (3, 2), (4, 2), (5, 2), (5, 3)])
def test_direct_equals_bilinear(weights, n, m):
    inp = _input(weights, n, m, 10 * n + m)
    assert relative_spread([scalar_direct(inp), scalar_bilinear(inp)]) < 1e-9


@pytest.mark.parametrize("n,m", [(1, 1), (3, 1), (4, 2), (5, 3)])
def test_field_factorized_route(field_trig, n, m):
    inp = _input(field_trig, n, m, 3 * n + m)
    assert relative_spread([scalar_direct(inp), scalar_field_factorized(inp)]) < 1e-9


def test_field_free_factorized_is_symmetric(field_trig):
    inp = _input(field_trig, 4, 2, 5, with_field=False)
    raw = [[p.rapidity for p in ps] for ps in (inp.bra_rapidities, inp.ket_rapidities, inp.sites)]
    assert scalar_field_factorized(inp) == pytest.approx(symmetric_scalar(*raw, RHO), rel=1e-12)


def test_ket_exchange(weights):
    inp = _input(weights, 4, 2, 9)
    k = inp.ket_rapidities
    swapped = ScalarProductInput(inp.bra_rapidities, (k[1], k[0]), inp.sites, weights)
    expected = weights.a_minus(k[1], k[0]) * scalar_direct(inp)
    assert scalar_direct(swapped) == pytest.approx(expected, rel=1e-11)


def _sites(n, seed, rho=RHO):
    return points(make_weights("field-trig", rho), n, seed)


def test_single_magnon_roots_are_complete():
    sites = _sites(3, 4)
    states = bethe_solve(RHO, sites, 1)
    assert len(states) == 3
    for st in states:
        assert st.max_residual < 1e-11


def test_single_site_root_by_inversion():
    rho = 2.0 + 0.3j
    site = SpectralPoint(0.8 + 0.1j, 1.1 - 0.4j)
    # (xi - nu) / (xi - nu rho) = K  =>  nu = xi (1 - K) / (1 - K rho)
    k = site.field / np.sqrt(rho)
    nu = site.rapidity * (1 - k) / (1 - k * rho)
    assert bethe_residuals([nu], [site.rapidity], [site.field], rho).max() < 1e-14
    (st,) = bethe_solve(rho, [site], 1)
    assert st.rapidities[0] == pytest.approx(nu, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_two_magnon_roots(n):
    states = bethe_solve(RHO, _sites(n, n), 2, seed=n)
    assert states
    for st in states:
        assert st.max_residual < 1e-10
        assert abs(st.rapidities[0] - st.rapidities[1]) > 1e-6


def test_roots_are_sorted_and_reproducible():
    a = bethe_solve(RHO, _sites(3, 1), 2, seed=1)
    b = bethe_solve(RHO, _sites(3, 1), 2, seed=1)
    assert [s.rapidities for s in a] == [s.rapidities for s in b]


def test_H_entry_single_magnon():
    sites = _sites(2, 7)
    xis, zs = [s.rapidity for s in sites], [s.field for s in sites]
    mu, nu = 0.7 + 0.2j, -0.4 + 0.9j
    expected = (RHO - 1) / (nu - mu) * (
        zs[0] * zs[1] / RHO - np.prod([(mu - x) / (mu * RHO - x) for x in xis]))
    assert H_entry(mu, [nu], 0, xis, zs, RHO) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n,m", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_slavnov_matches_direct_on_shell(field_trig, n, m):
    sites = _sites(n, 20 + n)
    extra = points(field_trig, 2 * m, 60 + n)
    mus, ket_fields = extra[:m], [p.field for p in extra[m:]]
    for st in bethe_solve(RHO, sites, m, seed=n):
        ket = st.points(ket_fields)
        direct = scalar_direct(ScalarProductInput(tuple(mus), tuple(ket), tuple(sites), field_trig))
        slav = slavnov_determinant(mus, st, sites, RHO, ket_fields)
        assert relative_spread([direct, slav]) < 1e-8


def test_slavnov_near_norm_limit(field_trig):
    sites = _sites(2, 3)
    (st, *_) = bethe_solve(RHO, sites, 1)
    ket_field = 1.2 - 0.3j
    mus = [SpectralPoint(st.rapidities[0] + 1e-5, 0.9 + 0.2j)]
    ket = st.points([ket_field])
    direct = scalar_direct(ScalarProductInput(tuple(mus), tuple(ket), tuple(sites), field_trig))
    slav = slavnov_determinant(mus, st, sites, RHO, [ket_field])
    assert relative_spread([direct, slav]) < 1e-9


def test_slavnov_rejects_off_shell(field_trig):
    sites = _sites(3, 2)
    mus, nus = points(field_trig, 2, 8), points(field_trig, 2, 9)
    with pytest.raises(OffShellInput):
        slavnov_determinant(mus, nus, sites, RHO)


@pytest.mark.parametrize("n,m", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_intermediate_ladder(n, m):
    sites = _sites(n, 30 + n)
    mus = [p.rapidity for p in points(make_weights("sym-trig", RHO), m, 70 + n, with_field=False)]
    st = bethe_solve(RHO, sites, m, seed=n)[0]
    for k in range(m + 1):
        for ps in itertools.combinations(range(n), k):
            definition, ladder = intermediate_G(k, ps, mus, st.rapidities, sites, RHO)
            assert relative_spread([definition, ladder]) < 1e-8


def test_intermediate_endpoints():
    n, m = 3, 2
    sites = _sites(n, 5)
    xis = [s.rapidity for s in sites]
    mus = [p.rapidity for p in points(make_weights("sym-trig", RHO), m, 6, with_field=False)]
    st = bethe_solve(RHO, sites, m, seed=5)[0]
    top, _ = intermediate_G(m, (0, 2), mus, st.rapidities, sites, RHO)
    assert top == pytest.approx(izergin_determinant(st.rapidities, [xis[0], xis[2]], RHO), rel=1e-11)
    bottom, _ = intermediate_G(0, (), mus, st.rapidities, sites, RHO)
    assert bottom == pytest.approx(symmetric_scalar(mus, st.rapidities, xis, RHO), rel=1e-11)


def test_bethe_solver_reports_failure():
    with pytest.raises(NoConvergence):
        bethe_solve(RHO, _sites(3, 2), 3, seed=0, restarts=0)
