"""Factorizing F-matrices.

``F = N * Fc`` where ``Fc`` is the ordered product of left-handed
partial matrices ``Fc_{i,(i+1)..L} = e11_i + e22_i R_{i,(i+1)..L}`` and
``N`` is the diagonal product of pairwise ``1/sqrt(a-)`` factors. The
diagonal twisted R-matrix ``Rc_12 = diag(1, 1, 1, 1/a-(xi_1, xi_2))``
measures how ``N`` transforms under relabelling of the sites.

Square roots of ``a-`` between two labelled sites are fixed once per
unordered pair: the principal root for the increasing order and its
reciprocal for the decreasing one. This keeps ``N^{-1}_sigma N`` exactly
equal to the twisted R-matrix instead of equal up to a sign.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NonInvertible
from .monodromy import build_monodromy
from .permutation import Permutation, adjacent_decomposition, cyclic_permutation, inverse
from .report import VerificationReport
from .tensor_space import (
    E11,
    E21,
    E22,
    LinearOperator,
    _check_dense,
    all_down,
    all_up,
    permuted_R,
    SWAP,
    embed_pair_op,
    perm_rep,
    relative_residual,
)
from .weights import SpectralPoint, WeightSet

TRI_TOL = 1e-11


def _labels_or_default(labels, n):
    return tuple(range(1, n + 1)) if labels is None else tuple(labels)


def sqrt_a_minus(w: WeightSet, points: Sequence[SpectralPoint], la: int, lb: int) -> complex:
    """Branch-consistent ``sqrt(a-(xi_la, xi_lb))`` for site labels ``la != lb``."""
    if la < lb:
        return cmath.sqrt(w.a_minus(points[la - 1], points[lb - 1]))
    return 1.0 / cmath.sqrt(w.a_minus(points[lb - 1], points[la - 1]))


def _down_pairs_diag(n: int, pair_value) -> np.ndarray:
    """Diagonal whose entry is the product of ``pair_value(i, j)`` over slot pairs ``i<j`` both down."""
    diag = np.ones(2 ** n, dtype=complex)
    idx = np.arange(2 ** n)
    bits = [(idx >> (n - 1 - s)) & 1 for s in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            mask = (bits[i] & bits[j]).astype(bool)
            if mask.any():
                diag[mask] *= pair_value(i + 1, j + 1)
    return diag


def build_N(w: WeightSet, points: Sequence[SpectralPoint], labels: Sequence[int] | None = None) -> LinearOperator:
    """Diagonal N-matrix; ``points`` indexed by label, ``labels[k]`` is the label at slot ``k+1``."""
    n = len(points)
    _check_dense(n)
    lab = _labels_or_default(labels, n)
    diag = _down_pairs_diag(n, lambda i, j: 1.0 / sqrt_a_minus(w, points, lab[i - 1], lab[j - 1]))
    return LinearOperator(n, dense=np.diag(diag))


def twisted_R_rep(sigma: Permutation, w: WeightSet, points: Sequence[SpectralPoint]) -> LinearOperator:
    """``Rc^sigma = P^{sigma^-1} Rc-hat^sigma`` with ``Rc-hat_a = P_{a,a+1} Rc_{a,a+1}``.

    Uses the same label-tracking word evaluation as the R-matrix version.
    """
    n = len(points)
    _check_dense(n)
    mat = np.eye(2 ** n, dtype=complex)
    labels = list(range(1, n + 1))
    for a in reversed(adjacent_decomposition(sigma).letters):
        la, lb = labels[a - 1], labels[a]
        local = np.diag([1, 1, 1, 1.0 / w.a_minus(points[la - 1], points[lb - 1])])
        mat = embed_pair_op(SWAP @ local, a, a + 1, n).apply(mat)
        labels[a - 1], labels[a] = lb, la
    return perm_rep(inverse(sigma)) @ LinearOperator(n, dense=mat)


def twisted_R_product(w: WeightSet, pivot: int, others: Sequence[int], points: Sequence[SpectralPoint],
                      hand: str = "left") -> LinearOperator:
    """Left: ``Rc_{p,o_n} ... Rc_{p,o_1}``; right: ``Rc_{o_1,p} ... Rc_{o_n,p}`` (all diagonal)."""
    n = len(points)
    idx = np.arange(2 ** n)
    diag = np.ones(2 ** n, dtype=complex)

    def bit(s):
        return ((idx >> (n - s)) & 1).astype(bool)

    for k in others:
        i, j = (pivot, k) if hand == "left" else (k, pivot)
        diag[bit(i) & bit(j)] *= 1.0 / w.a_minus(points[i - 1], points[j - 1])
    return LinearOperator(n, dense=np.diag(diag))


def partial_F_left(w: WeightSet, points: Sequence[SpectralPoint], i: int) -> np.ndarray:
    """Dense ``Fc_{i,(i+1)..L}`` on all ``L`` sites."""
    rest = list(points[i:])
    if rest:
        blocks = build_monodromy(w, points[i - 1], rest)
        C, D = blocks.C.to_dense(), blocks.D.to_dense()
        local = np.kron(E11, np.eye(2 ** len(rest))) + np.kron(E21, C) + np.kron(E22, D)
    else:
        local = np.eye(2, dtype=complex)
    return np.kron(np.eye(2 ** (i - 1)), local)


def build_curly_F(w: WeightSet, points: Sequence[SpectralPoint]) -> np.ndarray:
    """``Fc_{(L-1)L} Fc_{L-2,(L-1)L} ... Fc_{1,2..L}``."""
    n = len(points)
    _check_dense(n)
    mat = np.eye(2 ** n, dtype=complex)
    for i in range(1, n):
        mat = partial_F_left(w, points, i) @ mat
    return mat


def partial_F_right(w: WeightSet, points: Sequence[SpectralPoint]) -> np.ndarray:
    """``Fc_{1..(L-1),L} = Rc_{L,1..L-1} (e11_L R_{1..L-1,L} + e22_L)``."""
    from .tensor_space import ordered_R_product

    n = len(points)
    r = ordered_R_product(w, n, list(range(1, n)), points, "right").to_dense()
    e11 = np.kron(np.eye(2 ** (n - 1)), E11)
    e22 = np.kron(np.eye(2 ** (n - 1)), E22)
    twist = twisted_R_product(w, n, list(range(1, n)), points, "left").to_dense()
    return twist @ (e11 @ r + e22)


def build_curly_F_right(w: WeightSet, points: Sequence[SpectralPoint]) -> np.ndarray:
    """Recursive right-handed construction ``Rc_{L,1..L-1} Fc_{1..L-1} Rc_{1..L-1,L} Fc_{1..L-1,L}``."""
    n = len(points)
    if n == 1:
        return np.eye(2, dtype=complex)
    inner = np.kron(build_curly_F_right(w, points[:-1]), np.eye(2))
    left = twisted_R_product(w, n, list(range(1, n)), points, "left").to_dense()
    right = twisted_R_product(w, n, list(range(1, n)), points, "right").to_dense()
    return left @ inner @ right @ partial_F_right(w, points)


def _lower_inverse(mat: np.ndarray) -> np.ndarray:
    diag = np.abs(np.diag(mat))
    if diag.min() < 1e-12:
        raise NonInvertible(f"diagonal entry {diag.min():.2e} below 1e-12")
    return scipy.linalg.solve_triangular(mat, np.eye(mat.shape[0], dtype=complex), lower=True)


@dataclass(frozen=True)
class FMatrixBundle:
    N: LinearOperator
    curlyF: LinearOperator
    F: LinearOperator
    F_inv: LinearOperator
    curlyF_inv: LinearOperator
    site_points: tuple[SpectralPoint, ...]
    labels: tuple[int, ...]


def build_F(w: WeightSet, points: Sequence[SpectralPoint], labels: Sequence[int] | None = None) -> FMatrixBundle:
    """F-matrix bundle on the slot sequence ``points`` (with its site labels for the N branch)."""
    n = len(points)
    lab = _labels_or_default(labels, n)
    curly = build_curly_F(w, points)
    N = build_N(w, points if labels is None else _label_view(points, lab), lab if labels is not None else None)
    F = N.to_dense() @ curly
    cinv = _lower_inverse(curly)
    Finv = cinv @ np.diag(1.0 / np.diag(N.to_dense()))
    return FMatrixBundle(
        N=N,
        curlyF=LinearOperator(n, dense=curly),
        F=LinearOperator(n, dense=F),
        F_inv=LinearOperator(n, dense=Finv),
        curlyF_inv=LinearOperator(n, dense=cinv),
        site_points=tuple(points),
        labels=lab,
    )


def _label_view(slot_points, labels):
    """Points indexed by label from a slot-ordered sequence."""
    by_label = [None] * len(labels)
    for p, l in zip(slot_points, labels):
        by_label[l - 1] = p
    return by_label


def permuted_bundle(w: WeightSet, points: Sequence[SpectralPoint], sigma: Permutation) -> FMatrixBundle:
    """``F_{sigma(1..L)}``: built on permuted slots, then relabelled to the original sites."""
    lab = sigma.images
    slot_points = [points[l - 1] for l in lab]
    raw = build_F(w, slot_points, lab)
    p, pinv = perm_rep(sigma), perm_rep(inverse(sigma))
    conj = lambda op: pinv @ op @ p  # noqa: E731
    return FMatrixBundle(
        N=conj(raw.N), curlyF=conj(raw.curlyF), F=conj(raw.F), F_inv=conj(raw.F_inv),
        curlyF_inv=conj(raw.curlyF_inv), site_points=tuple(points), labels=tuple(range(1, len(points) + 1)),
    )


def verify_factorization(w: WeightSet, points: Sequence[SpectralPoint], sigma: Permutation,
                         tol: float = 1e-10, bundle: FMatrixBundle | None = None,
                         use_N: bool = True) -> VerificationReport:
    """``F_sigma R^sigma = F`` and ``Fc_sigma R^sigma = Rc^sigma Fc``.

    ``use_N=False`` drops the N-matrix from the first relation (negative control).
    """
    bundle = bundle or build_F(w, points)
    perm = permuted_bundle(w, points, sigma)
    r_sigma = permuted_R(sigma, w, points)
    report = VerificationReport("factorization")
    lhs_F, rhs_F = (perm.F, bundle.F) if use_N else (perm.curlyF, bundle.curlyF)
    report.add(f"defining[{sigma}]", relative_residual(lhs_F @ r_sigma, rhs_F), tol, sigma=sigma)
    twist = twisted_R_rep(sigma, w, points)
    report.add(f"defining-twisted[{sigma}]",
               relative_residual(perm.curlyF @ r_sigma, twist @ bundle.curlyF), tol, sigma=sigma)
    return report


def verify_F_invariants(bundle: FMatrixBundle, w: WeightSet, tol: float = 1e-11) -> VerificationReport:
    """Lower triangularity, nonzero diagonal, ``F F^-1 = I`` and the right-handed reconstruction."""
    F = bundle.F.to_dense()
    report = VerificationReport("F-invariants")
    scale = float(np.max(np.abs(F)))
    report.add("lower-triangular", float(np.max(np.abs(np.triu(F, 1)), initial=0)) / scale, TRI_TOL)
    report.add("diag-nonzero", 0.0 if np.min(np.abs(np.diag(F))) > 1e-10 else np.inf, 1.0)
    report.add("inverse", relative_residual(F @ bundle.F_inv.to_dense(), np.eye(F.shape[0])), tol)
    right = build_curly_F_right(w, bundle.site_points)
    report.add("right-handed", relative_residual(right, bundle.curlyF.to_dense()), tol)
    return report


def verify_F_cocycle(w: WeightSet, points: Sequence[SpectralPoint], tol: float = 1e-11) -> VerificationReport:
    """Co-cycle relation of partial F-matrices and ``N^{-1}_sigma N = Rc^sigma`` for the two generators."""
    n = len(points)
    if n < 3:
        raise ValueError("co-cycle needs L >= 3")
    report = VerificationReport("F-cocycle")
    idx_all = list(range(1, n))
    lhs = (twisted_R_product(w, n, idx_all, points, "left").to_dense()
           @ np.kron(partial_F_left(w, points[:-1], 1), np.eye(2))
           @ twisted_R_product(w, n, idx_all, points, "right").to_dense()
           @ partial_F_right(w, points))
    # Fc_{2..L-1,L}: right-handed partial on sites 2..L, identity on site 1
    rhs = np.kron(np.eye(2), partial_F_right(w, points[1:])) @ partial_F_left(w, points, 1)
    report.add("cocycle", relative_residual(lhs, rhs), tol, L=n)
    N = build_N(w, points).to_dense()
    for name, sigma in (("sigma12", _s12(n)), ("cyclic", cyclic_permutation(n))):
        Ns = permuted_bundle(w, points, sigma).N.to_dense()
        report.add(f"N-twist[{name}]", relative_residual(np.linalg.inv(Ns) @ N, twisted_R_rep(sigma, w, points)), tol)
    left = twisted_R_product(w, 1, list(range(2, n + 1)), points, "left").to_dense()
    right = twisted_R_product(w, 1, list(range(2, n + 1)), points, "right").to_dense()
    report.add("twisted-R-unitarity", relative_residual(left @ right, np.eye(2 ** n)), tol)
    return report


def _s12(n: int) -> Permutation:
    from .permutation import adjacent_transposition

    return adjacent_transposition(1, n)


def reference_state_factors(bundle: FMatrixBundle, w: WeightSet, tol: float = 1e-11) -> VerificationReport:
    """Action of ``Fc`` and its inverse on the all-up and all-down reference states."""
    pts = bundle.site_points
    n = len(pts)
    Fc, Fci = bundle.curlyF.to_dense(), bundle.curlyF_inv.to_dense()
    up, down = all_up(n), all_down(n)
    fwd = np.prod([w.a_minus(pts[i], pts[j]) for i in range(n) for j in range(i + 1, n)])
    bwd = np.prod([w.a_minus(pts[j], pts[i]) for i in range(n) for j in range(i + 1, n)])
    report = VerificationReport("reference-states")
    report.add("bra1-F", relative_residual(down @ Fc, fwd * down), tol)
    report.add("Finv-ket1", relative_residual(Fci @ down, bwd * down), tol)
    report.add("bra0-F", relative_residual(up @ Fc, up), tol)
    report.add("F-ket0", relative_residual(Fc @ up, up), tol)
    report.add("bra0-Finv", relative_residual(up @ Fci, up), tol)
    report.add("Finv-ket0", relative_residual(Fci @ up, up), tol)
    return report
