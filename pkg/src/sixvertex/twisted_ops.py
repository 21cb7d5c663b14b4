"""Explicit twisted monodromy operators in the F-basis.

After conjugation by the factorizing matrix, ``D`` becomes a pure tensor
product, ``C`` and ``B`` become sums of ``L`` tensor-product terms with a
single raising/lowering factor, and ``A`` is a diagonal piece plus
``B D^{-1} C``. The routines here build these closed forms as structured
operators and compare them with the brute-force similarity transform.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fbasis import FMatrixBundle, build_F, build_curly_F
from .monodromy import BLOCKS, MonodromyBlocks, build_monodromy
from .report import VerificationReport
from .tensor_space import E12, E21, LinearOperator, relative_residual
from .weights import SpectralPoint, WeightSet, inv


@dataclass(frozen=True)
class TwistedOps:
    A: LinearOperator
    B: LinearOperator
    C: LinearOperator
    D: LinearOperator
    aux_point: SpectralPoint
    site_points: tuple[SpectralPoint, ...]

    def block(self, name: str) -> LinearOperator:
        return getattr(self, name)


def _diag(a, b) -> np.ndarray:
    return np.diag([a, b]).astype(complex)


def _theta_sites(w: WeightSet, sites, i: int, j: int) -> complex:
    """``a-(xi_i, xi_j)`` if ``i < j`` else 1 (0-based site positions)."""
    return w.a_minus(sites[i], sites[j]) if i < j else 1.0


def twisted_D(w: WeightSet, mu: SpectralPoint, sites: Sequence[SpectralPoint]) -> LinearOperator:
    fac = []
    for s in sites:
        am, _, bm, _, _ = w.evaluate(mu, s)
        fac.append(_diag(bm, am))
    return LinearOperator.from_terms(len(sites), [(1.0, fac)])


def twisted_D_inverse(w: WeightSet, mu: SpectralPoint, sites: Sequence[SpectralPoint]) -> LinearOperator:
    fac = []
    for s in sites:
        am, _, bm, _, _ = w.evaluate(mu, s)
        fac.append(_diag(inv(bm, "b-(mu, xi)"), inv(am, "a-(mu, xi)")))
    return LinearOperator.from_terms(len(sites), [(1.0, fac)])


def _check_form(form: str) -> None:
    if form not in ("theta", "split"):
        raise ValueError(f"form must be 'theta' or 'split', got {form!r}")


def twisted_C(w: WeightSet, mu: SpectralPoint, sites: Sequence[SpectralPoint], form: str = "theta") -> LinearOperator:
    """Sum over ``l`` of ``c-(mu, xi_l)`` times ``e12`` at ``l`` and diagonal factors elsewhere.

    ``form='split'`` writes the factors separately for ``i < l`` and ``i > l``;
    ``form='theta'`` uses the single ordering function. Both give the same operator.
    """
    _check_form(form)
    n = len(sites)
    terms = []
    for l in range(n):
        fac = []
        for i in range(n):
            if i == l:
                fac.append(E12)
                continue
            am, _, bm, _, _ = w.evaluate(mu, sites[i])
            upper = bm * inv(w.b_minus(sites[l], sites[i]), "b-(xi_l, xi_i)")
            if form == "split":
                lower = am if i < l else am / w.a_minus(sites[l], sites[i])
            else:
                lower = am / _theta_sites(w, sites, l, i)
            fac.append(_diag(upper, lower))
        terms.append((w.c_minus(mu, sites[l]), fac))
    return LinearOperator.from_terms(n, terms)


def twisted_B(w: WeightSet, mu: SpectralPoint, sites: Sequence[SpectralPoint], form: str = "theta") -> LinearOperator:
    """Sum over ``l`` of ``c+(mu, xi_l)`` times ``e21`` at ``l`` and diagonal factors elsewhere."""
    _check_form(form)
    n = len(sites)
    terms = []
    for l in range(n):
        fac = []
        for i in range(n):
            if i == l:
                fac.append(E21)
                continue
            am, _, bm, _, _ = w.evaluate(mu, sites[i])
            denom = inv(w.b_minus(sites[i], sites[l]), "b-(xi_i, xi_l)")
            if form == "split":
                lower = am * w.a_minus(sites[i], sites[l]) * denom if i < l else am * denom
            else:
                lower = am * _theta_sites(w, sites, i, l) * denom
            fac.append(_diag(bm, lower))
        terms.append((w.c_plus(mu, sites[l]), fac))
    return LinearOperator.from_terms(n, terms)


def twisted_A(w: WeightSet, mu: SpectralPoint, sites: Sequence[SpectralPoint],
              B: LinearOperator | None = None, C: LinearOperator | None = None) -> LinearOperator:
    n = len(sites)
    base = [_diag(1.0, inv(w.b_minus(s, mu), "b-(xi, mu)")) for s in sites]
    B = twisted_B(w, mu, sites) if B is None else B
    C = twisted_C(w, mu, sites) if C is None else C
    return LinearOperator.from_terms(n, [(1.0, base)]) + B @ twisted_D_inverse(w, mu, sites) @ C


def build_twisted_ops(w: WeightSet, aux: SpectralPoint, sites: Sequence[SpectralPoint]) -> TwistedOps:
    """Structured closed forms of the four twisted operators."""
    B = twisted_B(w, aux, sites)
    C = twisted_C(w, aux, sites)
    return TwistedOps(
        A=twisted_A(w, aux, sites, B, C), B=B, C=C, D=twisted_D(w, aux, sites),
        aux_point=aux, site_points=tuple(sites),
    )


def oracle_twist(blocks: MonodromyBlocks, bundle: FMatrixBundle) -> TwistedOps:
    """Dense ``Fc X Fc^{-1}`` for each block."""
    Fc, Fci = bundle.curlyF.to_dense(), bundle.curlyF_inv.to_dense()
    n = blocks.A.n_sites
    ops = {k: LinearOperator(n, dense=Fc @ blocks.block(k).to_dense() @ Fci) for k in BLOCKS}
    return TwistedOps(**ops, aux_point=blocks.aux_point, site_points=blocks.site_points)


def _ball_monodromy(w: WeightSet, aux: SpectralPoint, sites: Sequence[SpectralPoint]) -> dict[str, np.ndarray]:
    """Monodromy blocks as object arrays of balls, built like ``build_monodromy``."""
    one = np.array([[1]], dtype=object)
    A, B, C, D = one, 0 * one, 0 * one, one
    for site in reversed(sites):
        am, bp, bm, cp, cm = w.precise(aux, site)
        a1 = np.array([[1, 0], [0, bp]], dtype=object)
        b1 = np.array([[0, 0], [cp, 0]], dtype=object)
        c1 = np.array([[0, cm], [0, 0]], dtype=object)
        d1 = np.array([[bm, 0], [0, am]], dtype=object)
        A, B, C, D = (
            np.kron(a1, A) + np.kron(c1, B),
            np.kron(b1, A) + np.kron(d1, B),
            np.kron(a1, C) + np.kron(c1, D),
            np.kron(b1, C) + np.kron(d1, D),
        )
    return {"A": A, "B": B, "C": C, "D": D}


def precise_oracle_twist(w: WeightSet, aux: SpectralPoint, sites: Sequence[SpectralPoint]) -> dict[str, np.ndarray]:
    """``Fc X Fc^{-1}`` in ball arithmetic from precisely evaluated weights.

    The double-precision oracle loses roughly ``cond(Fc)`` relative accuracy
    because the similarity amplifies rounding in the weights themselves;
    evaluating weights and products at ``PRECISE_BITS`` removes that loss.
    """
    from flint import acb_mat

    if w.precise is None:
        raise ValueError(f"weight set {w.label!r} has no precise evaluation")
    n = len(sites)
    dim = 2 ** n
    eye = lambda k: np.eye(k, dtype=int).astype(object)  # noqa: E731
    Fc = acb_mat(eye(dim).tolist())
    for i in range(1, n):
        rest = list(sites[i:])
        blk = _ball_monodromy(w, sites[i - 1], rest)
        local = (np.kron(np.array([[1, 0], [0, 0]], dtype=object), eye(2 ** len(rest)))
                 + np.kron(np.array([[0, 0], [1, 0]], dtype=object), blk["C"])
                 + np.kron(np.array([[0, 0], [0, 1]], dtype=object), blk["D"]))
        Fc = acb_mat(np.kron(eye(2 ** (i - 1)), local).tolist()) * Fc
    Fci = Fc.inv()
    out = {}
    for k, X in _ball_monodromy(w, aux, sites).items():
        conj = Fc * acb_mat(X.tolist()) * Fci
        out[k] = np.array([[complex(conj[r, c]) for c in range(dim)] for r in range(dim)])
    return out


def verify_twisted_ops(w: WeightSet, aux: SpectralPoint, sites: Sequence[SpectralPoint],
                       tol: float = 1e-10, bundle: FMatrixBundle | None = None) -> VerificationReport:
    """Closed forms against the similarity-transform oracle, plus the two forms of ``B`` and ``C``.

    The oracle is evaluated in double precision first. A block that misses
    ``tol`` there is re-checked against ``precise_oracle_twist`` when the
    weights support it; the record then carries both residuals.
    """
    bundle = bundle or build_F(w, sites)
    oracle = oracle_twist(build_monodromy(w, aux, sites), bundle)
    explicit = build_twisted_ops(w, aux, sites)
    report = VerificationReport("twisted")
    n = len(sites)
    precise = None
    for k in BLOCKS:
        res = relative_residual(explicit.block(k), oracle.block(k))
        params = {"L": n, "oracle": "double"}
        if res >= tol and w.precise is not None:
            precise = precise if precise is not None else precise_oracle_twist(w, aux, sites)
            params.update(oracle="precise", double_residual=res)
            res = relative_residual(explicit.block(k), precise[k])
        report.add(f"twisted-{k}", res, tol, **params)
    report.add("theta-form-B", relative_residual(twisted_B(w, aux, sites, "split"), explicit.B), tol, L=n)
    report.add("theta-form-C", relative_residual(twisted_C(w, aux, sites, "split"), explicit.C), tol, L=n)
    return report


def _block1(x11, x12, x21, x22) -> np.ndarray:
    """``[[x11, x12], [x21, x22]]`` over site 1."""
    return (np.kron(np.diag([1, 0]), x11) + np.kron(E12, x12)
            + np.kron(E21, x21) + np.kron(np.diag([0, 1]), x22))


def verify_twisted_recurrences(w: WeightSet, aux: SpectralPoint, sites: Sequence[SpectralPoint],
                               tol: float = 1e-10) -> VerificationReport:
    """Recurrences obtained by splitting off site 1, on the twisted side."""
    n = len(sites)
    if n < 2:
        raise ValueError("recurrences need L >= 2")
    xi1, rest = sites[0], list(sites[1:])
    m = 2 ** (n - 1)
    eye = np.eye(m, dtype=complex)
    full = build_curly_F(w, sites)
    tail = np.kron(np.eye(2), build_curly_F(w, rest))
    ff = full @ np.linalg.inv(tail)
    at_xi = build_twisted_ops(w, xi1, rest)
    at_mu = build_twisted_ops(w, aux, rest)
    Cx, Dx = at_xi.C.to_dense(), at_xi.D.to_dense()
    Am, Bm, Cm, Dm = (at_mu.block(k).to_dense() for k in BLOCKS)
    report = VerificationReport("twisted-recurrences")
    report.add("FF1", relative_residual(ff, _block1(eye, 0 * eye, Cx, Dx)), tol, L=n)
    Dxi = np.linalg.inv(Dx)
    ff_inv = _block1(eye, 0 * eye, -Dxi @ Cx, Dxi)
    report.add("FF2", relative_residual(ff @ ff_inv, np.eye(2 * m)), tol, L=n)

    am, bp, bm, cp, cm = w.evaluate(aux, xi1)
    oracle = oracle_twist(build_monodromy(w, aux, sites), build_F(w, sites))
    tA, tB, tC, tD = (oracle.block(k).to_dense() for k in BLOCKS)
    z = 0 * eye
    expected = {
        "master1b": (tD, _block1(bm * Dm, z, bm * Cx @ Dm + cp * Dx @ Cm, am * Dx @ Dm)),
        "master2b": (tC, _block1(Cm, cm * Dm, Cx @ Cm, cm * Cx @ Dm + bp * Dx @ Cm)),
        "master3b": (tB, _block1(bm * Bm, z, bm * Cx @ Bm + cp * Dx @ Am, am * Dx @ Bm)),
        "master4b": (tA, _block1(Am, cm * Bm, Cx @ Am, cm * Cx @ Bm + bp * Dx @ Am)),
    }
    for name, (lhs, rhs) in expected.items():
        report.add(name, relative_residual(lhs @ ff, rhs), tol, L=n)
    return report


def build_reduced_ops(w: WeightSet, mu: SpectralPoint, points: Sequence[SpectralPoint]) -> tuple[LinearOperator, LinearOperator]:
    """``(B~, C~)`` restricted to the ``M`` selected sites, in the ordering-function form."""
    return twisted_B(w, mu, points), twisted_C(w, mu, points)
