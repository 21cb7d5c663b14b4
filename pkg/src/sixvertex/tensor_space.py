"""Operators on ``V^{(x)L}`` with ``V = C^2``.

Basis index bits: site 1 is the most significant bit, spin up is 0.
An operator is stored either densely (``2^L x 2^L``, only for
``L <= DENSE_CUTOFF``) or as a sum of tensor products of per-site 2x2
factors, which can be applied to vectors for larger ``L``.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DenseCutoffExceeded, DimensionMismatch, EqualSlots, IndexOutOfRange, LengthMismatch

DENSE_CUTOFF = 10

UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)
E11 = np.array([[1, 0], [0, 0]], dtype=complex)
E12 = np.array([[0, 1], [0, 0]], dtype=complex)
E21 = np.array([[0, 0], [1, 0]], dtype=complex)
E22 = np.array([[0, 0], [0, 1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def _check_dense(n_sites: int) -> None:
    if n_sites > DENSE_CUTOFF:
        raise DenseCutoffExceeded(f"dense operator on {n_sites} sites exceeds cutoff {DENSE_CUTOFF}")


def basis_state(spins: Sequence[int]) -> np.ndarray:
    """Product state with ``spins[i]`` in {0 (up), 1 (down)} at site ``i+1``."""
    idx = 0
    for s in spins:
        idx = (idx << 1) | int(s)
    vec = np.zeros(2 ** len(spins), dtype=complex)
    vec[idx] = 1.0
    return vec


def all_up(n_sites: int) -> np.ndarray:
    return basis_state([0] * n_sites)


def all_down(n_sites: int) -> np.ndarray:
    return basis_state([1] * n_sites)


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors, np.ones((1, 1), dtype=complex))


class LinearOperator:
    """Dense matrix or structured sum of per-site tensor products.

    Structured form: ``sum_t coefs[t] * factors[t, 0] (x) ... (x) factors[t, L-1]``.
    """

    __slots__ = ("n_sites", "dense", "coefs", "factors")

    def __init__(self, n_sites: int, dense: np.ndarray | None = None,
                 coefs: np.ndarray | None = None, factors: np.ndarray | None = None):
        self.n_sites = n_sites
        self.dense = dense
        self.coefs = coefs
        self.factors = factors
        if dense is not None:
            _check_dense(n_sites)
            if dense.shape != (2 ** n_sites, 2 ** n_sites):
                raise DimensionMismatch(f"dense shape {dense.shape} for {n_sites} sites")

    # construction -------------------------------------------------------
    @classmethod
    def from_dense(cls, mat: np.ndarray) -> "LinearOperator":
        dim = mat.shape[0]
        n = dim.bit_length() - 1
        if 2 ** n != dim or mat.shape != (dim, dim):
            raise DimensionMismatch(f"not a square power-of-two matrix: {mat.shape}")
        return cls(n, dense=np.asarray(mat, dtype=complex))

    @classmethod
    def from_terms(cls, n_sites: int, terms: Sequence[tuple[complex, Sequence[np.ndarray]]]) -> "LinearOperator":
        if not terms:
            return cls(n_sites, coefs=np.zeros(0, complex), factors=np.zeros((0, n_sites, 2, 2), complex))
        coefs = np.array([c for c, _ in terms], dtype=complex)
        factors = np.array([np.asarray(f, dtype=complex) for _, f in terms], dtype=complex)
        if factors.shape[1:] != (n_sites, 2, 2):
            raise DimensionMismatch(f"factor array shape {factors.shape} for {n_sites} sites")
        return cls(n_sites, coefs=coefs, factors=factors)

    @classmethod
    def identity(cls, n_sites: int) -> "LinearOperator":
        return cls.from_terms(n_sites, [(1.0, [I2] * n_sites)])

    @property
    def is_structured(self) -> bool:
        return self.dense is None

    @property
    def n_terms(self) -> int:
        return 0 if self.coefs is None else len(self.coefs)

    # conversion ---------------------------------------------------------
    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        _check_dense(self.n_sites)
        dim = 2 ** self.n_sites
        out = np.zeros((dim, dim), dtype=complex)
        # Batched Kronecker products, chunked so the stack stays near 2**22 entries.
        chunk = max(1, (1 << 22) // (dim * dim))
        for start in range(0, self.n_terms, chunk):
            coefs = self.coefs[start:start + chunk]
            facs = self.factors[start:start + chunk]
            acc = facs[:, 0] * coefs[:, None, None]
            for site in range(1, self.n_sites):
                size = acc.shape[1] * 2
                acc = np.einsum("tab,tcd->tacbd", acc, facs[:, site]).reshape(-1, size, size)
            out += acc.sum(axis=0)
        return out

    def densified(self) -> "LinearOperator":
        return LinearOperator(self.n_sites, dense=self.to_dense())

    # application --------------------------------------------------------
    def apply(self, vec: np.ndarray) -> np.ndarray:
        """``op @ vec`` for a vector or a stack of column vectors."""
        vec = np.asarray(vec, dtype=complex)
        if vec.shape[0] != 2 ** self.n_sites:
            raise DimensionMismatch(f"vector of length {vec.shape[0]} on {self.n_sites} sites")
        if self.dense is not None:
            return self.dense @ vec
        return _apply_terms(self.coefs, self.factors, vec, self.n_sites)

    def apply_left(self, row: np.ndarray) -> np.ndarray:
        """``row @ op`` (bra application)."""
        row = np.asarray(row, dtype=complex)
        if self.dense is not None:
            return row @ self.dense
        return _apply_terms(self.coefs, self.factors.transpose(0, 1, 3, 2), row.T, self.n_sites).T

    def matrix_element(self, bra: np.ndarray, ket: np.ndarray) -> complex:
        return complex(bra @ self.apply(ket))

    # algebra ------------------------------------------------------------
    def _same_size(self, other: "LinearOperator") -> None:
        if other.n_sites != self.n_sites:
            raise DimensionMismatch(f"{self.n_sites} vs {other.n_sites} sites")

    def __matmul__(self, other):
        if not isinstance(other, LinearOperator):
            return self.apply(other)
        self._same_size(other)
        if self.is_structured and other.is_structured:
            coefs = np.multiply.outer(self.coefs, other.coefs).ravel()
            factors = np.einsum("tlab,slbc->tslac", self.factors, other.factors)
            return LinearOperator(self.n_sites, coefs=coefs,
                                  factors=factors.reshape(-1, self.n_sites, 2, 2))
        if other.is_structured:
            return LinearOperator(self.n_sites, dense=other.apply_left(self.dense))
        return LinearOperator(self.n_sites, dense=self.apply(other.dense))

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        self._same_size(other)
        if self.is_structured and other.is_structured:
            return LinearOperator(self.n_sites, coefs=np.concatenate([self.coefs, other.coefs]),
                                  factors=np.concatenate([self.factors, other.factors]))
        return LinearOperator(self.n_sites, dense=self.to_dense() + other.to_dense())

    def __mul__(self, scalar: complex) -> "LinearOperator":
        if self.is_structured:
            return LinearOperator(self.n_sites, coefs=self.coefs * scalar, factors=self.factors)
        return LinearOperator(self.n_sites, dense=self.dense * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "LinearOperator":
        return self * -1.0

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        return self + (-other)

    def __repr__(self) -> str:
        kind = "dense" if self.dense is not None else f"{self.n_terms} terms"
        return f"LinearOperator(n_sites={self.n_sites}, {kind})"


def _apply_terms(coefs: np.ndarray, factors: np.ndarray, vec: np.ndarray, n_sites: int) -> np.ndarray:
    extra = vec.shape[1:]
    shaped = vec.reshape((2,) * n_sites + extra)
    out = np.zeros_like(shaped)
    for c, fac in zip(coefs, factors):
        if c == 0:
            continue
        v = shaped
        for site in range(n_sites):
            f = fac[site]
            if f[0, 1] == 0 and f[1, 0] == 0:
                if f[0, 0] == 1 and f[1, 1] == 1:
                    continue
                diag = np.array([f[0, 0], f[1, 1]]).reshape((1,) * site + (2,) + (1,) * (n_sites - site - 1 + len(extra)))
                v = v * diag
            else:
                v = np.moveaxis(np.tensordot(f, v, axes=([1], [site])), 0, site)
        out = out + c * v
    return out.reshape(vec.shape)


def embed_site_op(m: np.ndarray, site: int, n_sites: int) -> LinearOperator:
    """2x2 matrix acting on ``site`` (1-based), identity elsewhere."""
    if not 1 <= site <= n_sites:
        raise IndexOutOfRange(f"site {site} outside 1..{n_sites}")
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"expected 2x2, got {m.shape}")
    fac = [I2] * n_sites
    fac[site - 1] = m
    return LinearOperator.from_terms(n_sites, [(1.0, fac)])


def embed_pair_op(m: np.ndarray, i: int, j: int, n_sites: int) -> LinearOperator:
    """4x4 matrix whose first tensor slot acts on site ``i`` and second on ``j``.

    Returned in structured form: one term per nonzero matrix entry.
    """
    if i == j:
        raise EqualSlots(f"pair operator needs distinct sites, got {i}")
    for s in (i, j):
        if not 1 <= s <= n_sites:
            raise IndexOutOfRange(f"site {s} outside 1..{n_sites}")
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise DimensionMismatch(f"expected 4x4, got {m.shape}")
    t = m.reshape(2, 2, 2, 2)  # (out_i, out_j, in_i, in_j)
    terms = []
    for a, b, c, d in zip(*np.nonzero(t)):
        fac = [I2] * n_sites
        ei = np.zeros((2, 2), complex)
        ei[a, c] = 1.0
        ej = np.zeros((2, 2), complex)
        ej[b, d] = 1.0
        fac[i - 1], fac[j - 1] = ei, ej
        terms.append((t[a, b, c, d], fac))
    return LinearOperator.from_terms(n_sites, terms)


def product_dense(ops: Sequence[LinearOperator], n_sites: int) -> LinearOperator:
    """Dense product ``ops[0] @ ops[1] @ ... @ ops[-1]``."""
    _check_dense(n_sites)
    mat = np.eye(2 ** n_sites, dtype=complex)
    for op in reversed(ops):
        mat = op.apply(mat)
    return LinearOperator(n_sites, dense=mat)


def relative_residual(x, y, floor: float = 1e-14) -> float:
    """``max|x - y| / max(max|x|, max|y|, floor)`` for arrays or operators."""
    if isinstance(x, LinearOperator):
        x = x.to_dense()
    if isinstance(y, LinearOperator):
        y = y.to_dense()
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    scale = max(float(np.max(np.abs(x), initial=0.0)), float(np.max(np.abs(y), initial=0.0)), floor)
    return float(np.max(np.abs(x - y), initial=0.0) / scale)


# --- R-matrix products and permutation operators ------------------------

from .permutation import (  # noqa: E402
    Permutation,
    adjacent_decomposition,
    inverse,
)
from .report import VerificationReport  # noqa: E402
from .weights import SpectralPoint, WeightSet, r_matrix  # noqa: E402

SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def r_embedded(w: WeightSet, i: int, j: int, points: Sequence[SpectralPoint], n_sites: int,
               labels: Sequence[int] | None = None) -> LinearOperator:
    """``R_ij`` on slots ``(i, j)``; spectral points are looked up by label.

    ``points`` is indexed by site label (1-based); ``labels[k-1]`` is the
    label carried by slot ``k`` (identity if omitted).
    """
    li = labels[i - 1] if labels is not None else i
    lj = labels[j - 1] if labels is not None else j
    return embed_pair_op(r_matrix(w, points[li - 1], points[lj - 1]), i, j, n_sites)


def ordered_R_product(w: WeightSet, pivot: int, others: Sequence[int],
                      points: Sequence[SpectralPoint], hand: str = "left") -> LinearOperator:
    """Left: ``R_{p,o_n} ... R_{p,o_1}``.  Right: ``R_{o_1,p} ... R_{o_n,p}``."""
    n_sites = len(points)
    if len(set(others) | {pivot}) != len(others) + 1:
        raise EqualSlots("indices of an R-product must be distinct")
    if hand == "left":
        ops = [r_embedded(w, pivot, k, points, n_sites) for k in reversed(others)]
    elif hand == "right":
        ops = [r_embedded(w, k, pivot, points, n_sites) for k in others]
    else:
        raise ValueError(f"hand must be 'left' or 'right', got {hand!r}")
    return product_dense(ops, n_sites)


def _swap_rep(n_sites: int):
    return lambda alpha, labels: embed_pair_op(SWAP, alpha, alpha + 1, n_sites)


def perm_rep(sigma: Permutation, n_sites: int | None = None) -> LinearOperator:
    """``P^sigma``: swap operators multiplied along the adjacent word of ``sigma``.

    Satisfies ``X_{sigma(1..L)} = P^{sigma^-1} X_{1..L} P^sigma``.
    """
    n_sites = sigma.size if n_sites is None else n_sites
    if n_sites != sigma.size:
        raise LengthMismatch(f"permutation of {sigma.size} on {n_sites} sites")
    _check_dense(n_sites)
    letters = adjacent_decomposition(sigma).letters
    mat = np.eye(2 ** n_sites, dtype=complex)
    rep = _swap_rep(n_sites)
    for a in reversed(letters):
        mat = rep(a, None).apply(mat)
    return LinearOperator(n_sites, dense=mat)


def rhat_rep(w: WeightSet, points: Sequence[SpectralPoint]):
    """Label-dependent ``Rhat_alpha = P_{alpha,alpha+1} R_{alpha,alpha+1}``."""
    n_sites = len(points)

    def rep(alpha: int, labels: Sequence[int]) -> LinearOperator:
        r = r_matrix(w, points[labels[alpha - 1] - 1], points[labels[alpha] - 1])
        return embed_pair_op(SWAP @ r, alpha, alpha + 1, n_sites)

    return rep


def rhat_word(w: WeightSet, points: Sequence[SpectralPoint], sigma: Permutation) -> LinearOperator:
    n_sites = len(points)
    _check_dense(n_sites)
    rep = rhat_rep(w, points)
    mat = np.eye(2 ** n_sites, dtype=complex)
    labels = tuple(range(1, n_sites + 1))
    for a in reversed(adjacent_decomposition(sigma).letters):
        mat = rep(a, labels).apply(mat)
        lab = list(labels)
        lab[a - 1], lab[a] = lab[a], lab[a - 1]
        labels = tuple(lab)
    return LinearOperator(n_sites, dense=mat)


def permuted_R(sigma: Permutation, w: WeightSet, points: Sequence[SpectralPoint]) -> LinearOperator:
    """``R^sigma = P^{sigma^-1} Rhat^sigma``."""
    if sigma.size != len(points):
        raise LengthMismatch(f"permutation of {sigma.size} with {len(points)} points")
    return perm_rep(inverse(sigma)) @ rhat_word(w, points, sigma)


def relabel(op: LinearOperator, sigma: Permutation) -> LinearOperator:
    """``P^{sigma^-1} X P^sigma``: slot ``i`` of ``X`` moves to site ``sigma(i)``."""
    return perm_rep(inverse(sigma)) @ op @ perm_rep(sigma)


def verify_product_identities(w: WeightSet, n_sites: int, tol: float = 1e-10, seed: int = 0,
                              points: Sequence[SpectralPoint] | None = None) -> VerificationReport:
    """Global unitarity and the co-cycle relation of ordered R-products."""
    from .sampling import sample_points

    if n_sites < 2:
        raise ValueError("need at least two sites")
    if points is None:
        points = sample_points(np.random.default_rng(seed), n_sites, w)
    rest = list(range(2, n_sites + 1))
    report = VerificationReport("product-identities", seed=seed)
    left = ordered_R_product(w, 1, rest, points, "left")
    right = ordered_R_product(w, 1, rest, points, "right")
    report.add("global-unitarity", relative_residual(left @ right, np.eye(2 ** n_sites)), tol, L=n_sites)
    inner = list(range(2, n_sites))
    lhs = ordered_R_product(w, 1, inner, points, "left") @ ordered_R_product(
        w, n_sites, list(range(1, n_sites)), points, "right")
    rhs = ordered_R_product(w, n_sites, inner, points, "right") @ left
    report.add("cocycle", relative_residual(lhs, rhs), tol, L=n_sites)
    return report
