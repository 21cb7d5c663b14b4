"""Rational identities behind the determinant formulas.

* ``g_i = sum_k Phi_k phi(mu_k, xi_i)`` (a partial-fraction identity);
* the row-1 cofactor expansion of ``det[phi(mu_i, xi_j)]`` that follows from
  it by Cramer's rule;
* the Bethe-equation-dependent summation identity that collapses one
  column of the intermediate-function determinant onto Slavnov entries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import LengthMismatch, OffShellInput, SingularPoint
from .report import VerificationReport
from .scalar_product import ON_SHELL_TOL, H_entry, bethe_residuals
from .weights import SING_TOL

Kernel = Callable[[complex, complex], complex]


@dataclass
class IdentityContext:
    """Points at which the identities are evaluated.

    ``mus``/``xis`` feed the first two identities (equal lengths). The
    summation identity also uses ``nus`` (on shell for ``xis``/``zs``),
    the ket index ``i``, the level ``q`` and fixed site indices ``ps``
    (``q - 1`` of them, 0-based).
    """

    mus: Sequence[complex]
    xis: Sequence[complex]
    rho: complex
    nus: Sequence[complex] = ()
    zs: Sequence[complex] = ()
    i: int = 0
    q: int = 1
    ps: Sequence[int] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.mus = np.asarray(self.mus, complex)
        self.xis = np.asarray(self.xis, complex)
        self.nus = np.asarray(self.nus, complex)
        self.zs = np.asarray(self.zs, complex) if len(self.zs) else np.ones(len(self.xis), complex)
        self.rho = complex(self.rho)
        self.ps = tuple(self.ps)


def _rel(lhs: complex, rhs: complex) -> float:
    den = abs(lhs) + abs(rhs)
    return abs(lhs - rhs) / den if den > 0 else 0.0


def _nonzero(value: complex, what: str) -> complex:
    if abs(value) < SING_TOL:
        raise SingularPoint(f"{what} vanishes")
    return value


def phi(mu: complex, xi: complex, rho: complex) -> complex:
    return 1.0 / _nonzero((mu * rho - xi) * (mu - xi), "phi denominator")


def Phi(k: int, mus: np.ndarray, xis: np.ndarray) -> complex:
    others = np.delete(mus, k)
    return complex(np.prod(mus[k] - xis) / _nonzero(np.prod(mus[k] - others), "rapidity difference"))


def g(p: int, mus: np.ndarray, xis: np.ndarray, rho: complex) -> complex:
    others = np.delete(xis, p)
    return complex(np.prod(others * rho - xis[p]) / _nonzero(np.prod(mus * rho - xis[p]), "g denominator"))


def _check_square(ctx: IdentityContext) -> int:
    if len(ctx.mus) != len(ctx.xis):
        raise LengthMismatch("need as many rapidities as sites")
    return len(ctx.mus)


def phi_term(k: int, i: int, mus: np.ndarray, xis: np.ndarray, rho: complex) -> complex:
    """``Phi_k * phi(mu_k, xi_i)`` with the shared factor ``mu_k - xi_i`` cancelled.

    Finite when the two sets coincide, where the uncancelled product is ``0 * inf``.
    """
    num = np.prod(mus[k] - np.delete(xis, i))
    den = np.prod(mus[k] - np.delete(mus, k)) * (mus[k] * rho - xis[i])
    return complex(num / _nonzero(den, "phi-term denominator"))


def verify_phi_identity(ctx: IdentityContext, tol: float = 1e-11) -> VerificationReport:
    m = _check_square(ctx)
    report = VerificationReport("phi-identity")
    mus, xis = np.asarray(ctx.mus), np.asarray(ctx.xis)
    for i in range(m):
        lhs = g(i, mus, xis, ctx.rho)
        rhs = sum(phi_term(k, i, mus, xis, ctx.rho) for k in range(m))
        report.add(f"phi-identity[{i + 1}]", _rel(lhs, rhs), tol, M=m)
    return report


def cofactor_sides(ctx: IdentityContext, kernel: Kernel | None = None) -> tuple[complex, complex]:
    """``det K`` and the row-1 cofactor sum weighted by ``g_p / Phi_1``.

    With a custom ``kernel`` the ``g_p`` are taken as ``sum_k Phi_k K(mu_k, xi_p)``
    so both sides stay consistent with that kernel.
    """
    m = _check_square(ctx)
    kern = kernel if kernel is not None else (lambda a, b: phi(a, b, ctx.rho))
    mat = np.array([[kern(a, b) for b in ctx.xis] for a in ctx.mus], complex)
    phis = [Phi(k, ctx.mus, ctx.xis) for k in range(m)]
    if kernel is None:
        gs = [g(p, ctx.mus, ctx.xis, ctx.rho) for p in range(m)]
    else:
        gs = [sum(phis[k] * mat[k, p] for k in range(m)) for p in range(m)]
    rhs = 0j
    for p in range(m):
        minor = np.delete(np.delete(mat, 0, axis=0), p, axis=1)
        rhs += (-1) ** p * gs[p] * (np.linalg.det(minor) if minor.size else 1.0)
    return complex(np.linalg.det(mat)), complex(rhs / phis[0])


def hadamard_bound(ctx: IdentityContext, kernel: Kernel | None = None) -> float:
    """Product of row norms: an upper bound for ``|det K|``."""
    kern = kernel if kernel is not None else (lambda a, b: phi(a, b, ctx.rho))
    mat = np.array([[kern(a, b) for b in ctx.xis] for a in ctx.mus], complex)
    return float(np.prod(np.linalg.norm(mat, axis=1)))


def verify_det_recursion(ctx: IdentityContext, tol: float = 1e-11, kernel: Kernel | None = None) -> VerificationReport:
    m = _check_square(ctx)
    if m < 2:
        raise ValueError("cofactor recursion needs M >= 2")
    lhs, rhs = cofactor_sides(ctx, kernel)
    report = VerificationReport("det-recursion")
    # a rank-deficient kernel gives 0 = 0 up to round-off, so floor the scale by the Hadamard bound
    scale = max(abs(lhs) + abs(rhs), hadamard_bound(ctx, kernel))
    res = abs(lhs - rhs) / scale if scale > 0 else 0.0
    report.add("det-recursion", res, tol, M=m, kernel="phi" if kernel is None else "custom")
    return report


def cramer_phi1(ctx: IdentityContext) -> tuple[complex, complex, float]:
    """``Phi_1`` by definition and from solving the linear system; plus the condition number."""
    m = _check_square(ctx)
    mat = np.array([[phi(ctx.mus[k], ctx.xis[i], ctx.rho) for k in range(m)] for i in range(m)])
    gs = np.array([g(i, ctx.mus, ctx.xis, ctx.rho) for i in range(m)])
    sol = np.linalg.solve(mat, gs)
    return Phi(0, ctx.mus, ctx.xis), complex(sol[0]), float(np.linalg.cond(mat))


def kappa(l: int, ctx: IdentityContext) -> complex:
    """Coefficient of the ``l``-th fixed-site column (``l < q - 1``, 0-based)."""
    mus, nus, xis, rho = ctx.mus, ctx.nus, ctx.xis, ctx.rho
    xl = xis[ctx.ps[l]]
    n, m = len(xis), len(nus)
    num = (rho - 1) * np.sqrt(rho) ** (n - 2 * m) * np.prod(ctx.zs) * np.prod(nus * rho - xl)
    den = np.prod(mus[ctx.q - 1:] - xl)
    for mm in range(ctx.q - 1):
        if mm != l:
            den *= xis[ctx.ps[mm]] - xl
    return complex(num / _nonzero(den, "kappa denominator"))


def summation_sides(ctx: IdentityContext) -> tuple[complex, complex]:
    """Left and right sides of the Bethe-dependent summation identity."""
    mus, nus, xis, rho = ctx.mus, ctx.nus, ctx.xis, ctx.rho
    n, m, q, i = len(xis), len(nus), ctx.q, ctx.i
    fixed = xis[list(ctx.ps)]
    tail = mus[q - 1:]
    lhs = 0j
    for p in range(n):
        xp = xis[p]
        term = (rho - 1) ** 2 / np.prod(tail * rho - xp) * xp / (nus[i] * rho - xp)
        others = np.delete(xis, p)
        term *= np.prod((others * rho - xp) / (others - xp))
        term *= np.prod(np.delete(nus, i) - xp) / np.prod(fixed * rho - xp)
        lhs += term
    rhs = 0j
    for l in range(q - 1, m):
        den = np.prod(np.delete(tail, l - (q - 1)) - mus[l]) * np.prod(fixed - mus[l])
        rhs += rho ** (n - m) * H_entry(mus[l], nus, i, xis, ctx.zs, rho) / den
    for l in range(q - 1):
        xl = fixed[l]
        rhs += kappa(l, ctx) / ((nus[i] * rho - xl) * (nus[i] - xl))
    return complex(lhs), complex(rhs)


def verify_H_identity(ctx: IdentityContext, tol: float = 1e-10,
                      check_tol: float = ON_SHELL_TOL, enforce_on_shell: bool = True) -> VerificationReport:
    m = len(ctx.nus)
    if not 1 <= ctx.q <= m:
        raise ValueError(f"q must lie in 1..{m}")
    if len(ctx.ps) != ctx.q - 1:
        raise LengthMismatch(f"need {ctx.q - 1} fixed sites, got {len(ctx.ps)}")
    if len(ctx.mus) != m:
        raise LengthMismatch("need as many bra as ket rapidities")
    res = bethe_residuals(list(ctx.nus), list(ctx.xis), list(ctx.zs), ctx.rho)
    if enforce_on_shell and res.max() > check_tol:
        raise OffShellInput(f"ket rapidities are off shell (residual {res.max():.2e})")
    lhs, rhs = summation_sides(ctx)
    report = VerificationReport("H-identity")
    report.add(f"H-identity[q={ctx.q},i={ctx.i + 1}]", _rel(lhs, rhs), tol,
               M=m, L=len(ctx.xis), bethe_residual=float(res.max()))
    return report
