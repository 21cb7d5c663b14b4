"""Monodromy matrix, its A/B/C/D blocks and the Yang-Baxter algebra.

``T_a(mu) = R_{aL}(mu, xi_L) ... R_{a1}(mu, xi_1)`` is split over the
auxiliary space as ``[[A, B], [C, D]]``. Dense blocks are built by
peeling off site 1 (``T = T_{a,2..L} R_{a1}``); a second builder peels
off site L and serves as a cross-check. For large chains the blocks are
applied to vectors without materializing them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularPoint
from .report import VerificationReport
from .sampling import sample_points
from .tensor_space import (
    DENSE_CUTOFF,
    E12,
    E21,
    LinearOperator,
    _check_dense,
    all_down,
    relative_residual,
)
from .weights import SpectralPoint, WeightSet, r_matrix

BLOCKS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class MonodromyBlocks:
    A: LinearOperator
    B: LinearOperator
    C: LinearOperator
    D: LinearOperator
    aux_point: SpectralPoint
    site_points: tuple[SpectralPoint, ...]

    def block(self, name: str) -> LinearOperator:
        return getattr(self, name)

    def transfer(self) -> LinearOperator:
        return self.A + self.D

    def full(self) -> np.ndarray:
        """The ``2^(L+1)`` square monodromy with the auxiliary space first."""
        return np.block([[self.A.to_dense(), self.B.to_dense()], [self.C.to_dense(), self.D.to_dense()]])


def _local_blocks(w: WeightSet, aux: SpectralPoint, site: SpectralPoint):
    am, bp, bm, cp, cm = w.evaluate(aux, site)
    return (np.diag([1.0, bp]).astype(complex), cp * E21, cm * E12, np.diag([bm, am]).astype(complex))


def build_monodromy(w: WeightSet, aux: SpectralPoint, sites: Sequence[SpectralPoint]) -> MonodromyBlocks:
    """Dense blocks via ``T_{a,1..L} = T_{a,2..L} R_{a1}``."""
    n = len(sites)
    _check_dense(n)
    A = D = np.ones((1, 1), complex)
    B = C = np.zeros((1, 1), complex)
    for site in reversed(sites):
        a1, b1, c1, d1 = _local_blocks(w, aux, site)
        A, B, C, D = (
            np.kron(a1, A) + np.kron(c1, B),
            np.kron(b1, A) + np.kron(d1, B),
            np.kron(a1, C) + np.kron(c1, D),
            np.kron(b1, C) + np.kron(d1, D),
        )
    ops = [LinearOperator(n, dense=X) for X in (A, B, C, D)]
    return MonodromyBlocks(*ops, aux_point=aux, site_points=tuple(sites))


def build_monodromy_head(w: WeightSet, aux: SpectralPoint, sites: Sequence[SpectralPoint]) -> MonodromyBlocks:
    """Dense blocks via ``T_{a,1..L} = R_{aL} T_{a,1..L-1}``."""
    n = len(sites)
    _check_dense(n)
    A = D = np.ones((1, 1), complex)
    B = C = np.zeros((1, 1), complex)
    for site in sites:
        aL, bL, cL, dL = _local_blocks(w, aux, site)
        A, B, C, D = (
            np.kron(A, aL) + np.kron(C, bL),
            np.kron(B, aL) + np.kron(D, bL),
            np.kron(A, cL) + np.kron(C, dL),
            np.kron(B, cL) + np.kron(D, dL),
        )
    ops = [LinearOperator(n, dense=X) for X in (A, B, C, D)]
    return MonodromyBlocks(*ops, aux_point=aux, site_points=tuple(sites))


_BLOCK_SPIN = {"A": (0, 0), "B": (0, 1), "C": (1, 0), "D": (1, 1)}  # (aux out, aux in)


def apply_block(w: WeightSet, block: str, aux: SpectralPoint, sites: Sequence[SpectralPoint],
                vec: np.ndarray) -> np.ndarray:
    """Apply one monodromy block to a vector in ``O(L 2^L)`` without building it."""
    n = len(sites)
    out_spin, in_spin = _BLOCK_SPIN[block]
    state = np.zeros((2,) + (2,) * n, dtype=complex)
    state[in_spin] = np.asarray(vec, dtype=complex).reshape((2,) * n)
    for k, site in enumerate(sites, start=1):
        r = r_matrix(w, aux, site).reshape(2, 2, 2, 2)
        moved = np.tensordot(r, state, axes=([2, 3], [0, k]))  # (a', k', rest...)
        state = np.moveaxis(moved, 1, k)
    return state[out_spin].reshape(-1)


def bethe_ket(w: WeightSet, nus: Sequence[SpectralPoint], sites: Sequence[SpectralPoint]) -> np.ndarray:
    """``C(nu_M) ... C(nu_1)|1>``."""
    vec = all_down(len(sites))
    for nu in nus:
        vec = apply_block(w, "C", nu, sites, vec)
    return vec


def bethe_bra(w: WeightSet, mus: Sequence[SpectralPoint], sites: Sequence[SpectralPoint]) -> np.ndarray:
    """``<1|B(mu_1) ... B(mu_M)`` as a row vector."""
    # (<1| B1 ... BM)^T = BM^T ... B1^T |1>; use the transposed R-matrices
    n = len(sites)
    row = all_down(n)
    for mu in reversed(mus):
        row = _apply_block_left(w, "B", mu, sites, row)
    return row


def _apply_block_left(w: WeightSet, block: str, aux: SpectralPoint, sites: Sequence[SpectralPoint],
                      row: np.ndarray) -> np.ndarray:
    n = len(sites)
    out_spin, in_spin = _BLOCK_SPIN[block]
    state = np.zeros((2,) + (2,) * n, dtype=complex)
    state[out_spin] = np.asarray(row, dtype=complex).reshape((2,) * n)
    # row @ R_{aL} ... R_{a1}: apply transposes from R_{aL} down to R_{a1}
    for k in range(n, 0, -1):
        rt = r_matrix(w, aux, sites[k - 1]).T.reshape(2, 2, 2, 2)
        moved = np.tensordot(rt, state, axes=([2, 3], [0, k]))
        state = np.moveaxis(moved, 1, k)
    return state[in_spin].reshape(-1)


# --- structural checks -------------------------------------------------------

def verify_block_structure(blocks: MonodromyBlocks, w: WeightSet, tol: float = 1e-12) -> VerificationReport:
    """Triangularity, zero diagonals, and the closed forms of ``diag(D)`` and the last row of ``D``."""
    report = VerificationReport("block-structure")
    mats = {k: blocks.block(k).to_dense() for k in BLOCKS}
    scale = max(float(np.max(np.abs(m))) for m in mats.values()) or 1.0
    for name in ("A", "C"):
        report.add(f"upper-triangular[{name}]", float(np.max(np.abs(np.tril(mats[name], -1)), initial=0)) / scale, tol)
    for name in ("B", "D"):
        report.add(f"lower-triangular[{name}]", float(np.max(np.abs(np.triu(mats[name], 1)), initial=0)) / scale, tol)
    for name in ("B", "C"):
        report.add(f"zero-diagonal[{name}]", float(np.max(np.abs(np.diag(mats[name])))) / scale, tol)
    expected = np.ones(1, complex)
    corner = 1.0 + 0j
    for site in blocks.site_points:
        am, _, bm, _, _ = w.evaluate(blocks.aux_point, site)
        expected = np.kron(expected, [bm, am])
        corner *= am
    report.add("diag-D", relative_residual(np.diag(mats["D"]), expected), tol)
    last = np.zeros(mats["D"].shape[0], complex)
    last[-1] = corner
    report.add("last-row-D", relative_residual(mats["D"][-1], last), tol)
    return report


def _exchange_residuals(w: WeightSet, mu: SpectralPoint, nu: SpectralPoint, sites) -> dict[str, float]:
    tm, tn = build_monodromy(w, mu, sites), build_monodromy(w, nu, sites)
    Am, Bm, Cm, Dm = (tm.block(k).to_dense() for k in BLOCKS)
    An, Bn, Cn, Dn = (tn.block(k).to_dense() for k in BLOCKS)
    am, bp, bm, cp, cm = w.evaluate(mu, nu)

    def rr(lhs_terms, rhs_terms):
        # scale by the largest single term so that cancelling sides are not compared to round-off
        lhs, rhs = sum(lhs_terms), sum(rhs_terms)
        floor = max(float(np.max(np.abs(t))) for t in (*lhs_terms, *rhs_terms))
        return relative_residual(lhs, rhs, floor=max(floor, 1e-300))

    return {
        "eq6": rr([Am @ Dn, -An @ Dm], [bp / cm * Bn @ Cm, -bm / cm * Cm @ Bn]),
        "eq9": rr([Am @ Cn], [1 / bp * Cn @ Am, -cp / bp * Cm @ An]),
        "eq10": rr([Dn @ Am, -Am @ Dn], [cp / bp * Cm @ Bn, -cm / bp * Cn @ Bm]),
        "eq11": rr([Dm @ An, -Dn @ Am], [bm / cp * Cn @ Bm, -bp / cp * Bm @ Cn]),
        "eq13": rr([Cn @ Cm], [am * Cm @ Cn]),
        "eq14": rr([Dn @ Cm], [am / bp * Cm @ Dn, -cm / bp * Cn @ Dm]),
        "eq15": rr([Cn @ Dm], [am / bm * Dm @ Cn, -cp / bm * Dn @ Cm]),
        "eq16": rr([Dm @ Dn], [Dn @ Dm]),
        "intertwining": _intertwining_residual(w, mu, nu, tm, tn),
    }


def _intertwining_residual(w, mu, nu, tm: MonodromyBlocks, tn: MonodromyBlocks) -> float:
    """``R_ab(mu,nu) T_a(mu) T_b(nu) = T_b(nu) T_a(mu) R_ab(mu,nu)`` on ``a (x) b (x) V``."""
    dim = tm.A.to_dense().shape[0]
    ta = tm.full().reshape(2, dim, 2, dim)
    tb = tn.full().reshape(2, dim, 2, dim)
    eye2 = np.eye(2)
    Ta = np.einsum("avcw,bd->abvcdw", ta, eye2).reshape(4 * dim, 4 * dim)
    Tb = np.einsum("bvdw,ac->abvcdw", tb, eye2).reshape(4 * dim, 4 * dim)
    Rab = np.kron(r_matrix(w, mu, nu), np.eye(dim))
    return relative_residual(Rab @ Ta @ Tb, Tb @ Ta @ Rab)


def verify_exchange_relations(w: WeightSet, n_sites: int, tol: float = 1e-11, seed: int = 0,
                              points: Sequence[SpectralPoint] | None = None) -> VerificationReport:
    """Listed exchange relations and the full intertwining relation at seeded ``(mu, nu)``."""
    if n_sites > 8:
        raise ValueError("exchange relations are checked densely for L <= 8")
    if points is None:
        points = sample_points(np.random.default_rng(seed), n_sites + 2, w)
    mu, nu, sites = points[0], points[1], list(points[2:])
    report = VerificationReport("exchange", seed=seed)
    for name, res in _exchange_residuals(w, mu, nu, sites).items():
        report.add(name, res, tol, L=n_sites)
    return report


# --- eigenvalue actions and Bethe equations --------------------------------

def theta(w: WeightSet, nus: Sequence[SpectralPoint], j: int, k: int) -> complex:
    """``a-(nu_j, nu_k)`` if ``j < k`` else 1 (0-based positions)."""
    return w.a_minus(nus[j], nus[k]) if j < k else 1.0


def act_eigen_formulas(w: WeightSet, lam: SpectralPoint, nus: Sequence[SpectralPoint],
                       sites: Sequence[SpectralPoint], tol: float = 1e-10) -> VerificationReport:
    """Compare ``A(lam)|nu>`` and ``D(lam)|nu>`` with their wanted + unwanted expansions."""
    n = len(sites)
    if n > DENSE_CUTOFF:
        raise ValueError("eigen-action oracle is dense")
    blocks = build_monodromy(w, lam, sites)
    ket = bethe_ket(w, nus, sites)
    m = len(nus)
    wanted_a = np.prod([w.b_plus(lam, s) for s in sites]) * np.prod([1 / w.b_plus(lam, v) for v in nus])
    wanted_d = np.prod([w.a_minus(lam, s) for s in sites]) * np.prod(
        [w.a_minus(v, lam) / w.b_plus(v, lam) for v in nus])
    rhs_a = wanted_a * ket
    rhs_d = wanted_d * ket
    for j in range(m):
        rest = [nus[k] for k in range(m) if k != j]
        unwanted = blocks.C.apply(bethe_ket(w, rest, sites))
        ca = (w.c_plus(lam, nus[j]) / w.b_plus(lam, nus[j])
              * np.prod([w.b_plus(nus[j], s) for s in sites])
              * np.prod([theta(w, nus, j, k) / w.b_plus(nus[j], nus[k]) for k in range(m) if k != j]))
        cd = (w.c_minus(nus[j], lam) / w.b_plus(nus[j], lam)
              * np.prod([w.a_minus(nus[j], s) for s in sites])
              * np.prod([theta(w, nus, k, j) / w.b_plus(nus[k], nus[j]) for k in range(m) if k != j]))
        rhs_a = rhs_a - ca * unwanted
        rhs_d = rhs_d - cd * unwanted
    report = VerificationReport("eigen-action")
    report.add("eigA", relative_residual(blocks.A.apply(ket), rhs_a), tol, M=m, L=n)
    report.add("eigD", relative_residual(blocks.D.apply(ket), rhs_d), tol, M=m, L=n)
    report.values.update(wanted_A=complex(wanted_a), wanted_D=complex(wanted_d))
    return report


def _rel(lhs: complex, rhs: complex) -> float:
    den = abs(lhs) + abs(rhs)
    return abs(lhs - rhs) / den if den > 0 else 0.0


def bethe_sides(w: WeightSet, nus: Sequence[SpectralPoint], sites: Sequence[SpectralPoint], j: int):
    """Both sides of the generic Bethe equation for rapidity ``j``."""
    lhs = 1.0 + 0j
    for k, nk in enumerate(nus):
        if k != j:
            lhs *= w.b_plus(nk, nus[j]) * w.a_minus(nus[j], nk) / w.b_plus(nus[j], nk)
    rhs = 1.0 + 0j
    for s in sites:
        rhs *= w.a_minus(nus[j], s) / w.b_plus(nus[j], s)
    return lhs, rhs


def field_trig_bethe_sides(rho: complex, nus: Sequence[complex], xis: Sequence[complex],
                           zs: Sequence[complex], j: int):
    """Both sides of the polynomial-ratio Bethe equation of the field-trig model."""
    nj = nus[j]
    srho = np.sqrt(complex(rho))
    lhs = np.prod([(x - nj) / (x - nj * rho) for x in xis]) * np.prod(
        [nus[m] - nj * rho for m in range(len(nus)) if m != j])
    rhs = srho ** (-len(xis)) * np.prod(zs) * np.prod([nus[m] * rho - nj for m in range(len(nus)) if m != j])
    return complex(lhs), complex(rhs)


def bethe_residual(w: WeightSet, nus: Sequence[SpectralPoint], sites: Sequence[SpectralPoint],
                   form: str = "generic") -> np.ndarray:
    """Per-rapidity relative mismatch ``|L - R| / (|L| + |R|)``.

    ``form='field-trig'`` evaluates the polynomial-ratio form, which needs
    ``w.anisotropy`` and ignores the rapidity fields.
    """
    out = []
    for j in range(len(nus)):
        if form == "generic":
            lhs, rhs = bethe_sides(w, nus, sites, j)
        elif form == "field-trig":
            if w.anisotropy is None:
                raise ValueError("field-trig form needs an anisotropy")
            lhs, rhs = field_trig_bethe_sides(
                w.anisotropy, [v.rapidity for v in nus], [s.rapidity for s in sites], [s.field for s in sites], j)
        else:
            raise ValueError(f"unknown form {form!r}")
        out.append(_rel(lhs, rhs))
    return np.array(out)


def transfer_commutator(w: WeightSet, l1: SpectralPoint, l2: SpectralPoint, sites) -> float:
    t1 = build_monodromy(w, l1, sites).transfer().to_dense()
    t2 = build_monodromy(w, l2, sites).transfer().to_dense()
    return relative_residual(t1 @ t2, t2 @ t1)


__all__ = [
    "MonodromyBlocks", "build_monodromy", "build_monodromy_head", "apply_block", "bethe_ket", "bethe_bra",
    "verify_block_structure", "verify_exchange_relations", "act_eigen_formulas", "bethe_residual",
    "bethe_sides", "field_trig_bethe_sides", "transfer_commutator", "theta", "SingularPoint",
]
