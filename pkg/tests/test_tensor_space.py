import numpy as np
import pytest

from sixvertex.errors import DenseCutoffExceeded, EqualSlots, IndexOutOfRange
from sixvertex.permutation import Permutation, cyclic_permutation
from sixvertex.tensor_space import (
    DENSE_CUTOFF,
    SWAP,
    LinearOperator,
    all_down,
    all_up,
    basis_state,
    embed_pair_op,
    embed_site_op,
    kron_all,
    permuted_R,
    product_dense,
    r_embedded,
    relabel,
    relative_residual,
    verify_product_identities,
)

from conftest import points

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)


def test_basis_state_msb_is_site_one():
    vec = basis_state([1, 0, 0])
    assert np.argmax(vec) == 4
    assert np.argmax(all_up(3)) == 0
    assert np.argmax(all_down(3)) == 7


def test_swap_on_outer_sites():
    op = embed_pair_op(SWAP, 1, 3, 3)
    out = op.apply(basis_state([0, 1, 1]))
    np.testing.assert_array_equal(out, basis_state([1, 1, 0]))


@pytest.mark.parametrize("i,j", [(1, 2), (2, 1), (1, 4), (3, 2)])
def test_structured_pair_matches_kron(i, j, rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    n = 4
    structured = embed_pair_op(m, i, j, n)
    # dense reference: move slots (i, j) to the front with explicit permutation matrices
    order = [i, j] + [k for k in range(1, n + 1) if k not in (i, j)]
    full = np.kron(m, np.eye(2 ** (n - 2))).reshape([2] * (2 * n))
    inv = np.argsort([o - 1 for o in order])
    full = full.transpose(list(inv) + [n + k for k in inv]).reshape(2 ** n, 2 ** n)
    np.testing.assert_allclose(structured.to_dense(), full, atol=1e-14)


def test_structured_apply_equals_dense_apply(rng):
    n = 5
    ops = [embed_site_op(SIGMA_MINUS, 2, n), embed_pair_op(rng.normal(size=(4, 4)), 4, 1, n)]
    vec = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    for op in ops:
        np.testing.assert_allclose(op.apply(vec), op.to_dense() @ vec, atol=1e-13)
        np.testing.assert_allclose(op.apply_left(vec), vec @ op.to_dense(), atol=1e-13)


def test_site_op_is_kron():
    op = embed_site_op(SIGMA_MINUS, 2, 3)
    np.testing.assert_array_equal(op.to_dense(), kron_all([np.eye(2), SIGMA_MINUS, np.eye(2)]))


def test_operator_algebra(rng):
    a = LinearOperator.from_dense(rng.normal(size=(8, 8)))
    b = embed_site_op(SIGMA_MINUS, 1, 3)
    np.testing.assert_allclose((a @ b).to_dense(), a.to_dense() @ b.to_dense())
    np.testing.assert_allclose((a + b * 2.0 - a).to_dense(), 2.0 * b.to_dense(), atol=1e-15)


def test_slot_errors():
    with pytest.raises(EqualSlots):
        embed_pair_op(SWAP, 2, 2, 3)
    with pytest.raises(IndexOutOfRange):
        embed_site_op(SIGMA_MINUS, 4, 3)


def test_dense_cutoff():
    with pytest.raises(DenseCutoffExceeded):
        product_dense([], DENSE_CUTOFF + 1)


def test_relabel_moves_slot_to_image():
    sigma = cyclic_permutation(3)
    op = embed_site_op(SIGMA_MINUS, 1, 3)
    moved = relabel(op, sigma)
    expected = embed_site_op(SIGMA_MINUS, sigma(1), 3)
    assert relative_residual(moved, expected) < 1e-15


@pytest.mark.parametrize("images", [(1, 2, 3), (2, 1, 3), (3, 1, 2), (3, 2, 1)])
def test_permuted_R_of_identity_and_beyond(field_trig, images):
    pts = points(field_trig, 3, 4)
    sigma = Permutation(images)
    r = permuted_R(sigma, field_trig, pts)
    assert r.to_dense().shape == (8, 8)
    if images == (2, 1, 3):
        # P_12 Rhat_1 = P_12 P_12 R_12
        assert relative_residual(r, r_embedded(field_trig, 1, 2, pts, 3)) < 1e-14


@pytest.mark.parametrize("n", [2, 3, 4])
def test_product_identities(weights, n):
    assert verify_product_identities(weights, n, seed=n).passed


def test_relative_residual_floor():
    assert relative_residual(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_residual(np.ones(2), np.ones(2) * (1 + 1e-9)) == pytest.approx(1e-9, rel=1e-6)
