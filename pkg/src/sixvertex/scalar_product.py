"""Scalar products of Bethe-type states.

``S = <1| B(mu_1) ... B(mu_M) C(nu_M) ... C(nu_1) |1>`` is evaluated

* directly, by applying monodromy blocks to vectors;
* as a bilinear sum over ``M``-subsets of sites of type-B and type-C
  domain-wall partition functions;
* for field-trig weights, as a field prefactor times the scalar product
  of the field-free symmetric model built from twisted operators.

When the ket rapidities solve the Bethe equations of the field-trig
model, a Slavnov-type determinant and its intermediate-function ladder
are also available.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dwpf import DwpfInput, dwpf_sum
from .errors import DegenerateRapidities, DenseCutoffExceeded, LengthMismatch, NoConvergence, OffShellInput
from .sampling import annulus
from .monodromy import apply_block, bethe_ket, field_trig_bethe_sides
from .tensor_space import all_down, basis_state
from .twisted_ops import twisted_B, twisted_C
from .weights import SING_TOL, SpectralPoint, WeightSet, sym_trig_weights

VECTOR_CUTOFF = 14
ON_SHELL_TOL = 1e-8
START_ANNULUS = (0.2, 3.0)


@dataclass(frozen=True)
class ScalarProductInput:
    bra_rapidities: tuple[SpectralPoint, ...]
    ket_rapidities: tuple[SpectralPoint, ...]
    sites: tuple[SpectralPoint, ...]
    weights: WeightSet

    def __post_init__(self) -> None:
        for name in ("bra_rapidities", "ket_rapidities", "sites"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(self.bra_rapidities) != len(self.ket_rapidities):
            raise LengthMismatch("bra and ket need the same number of rapidities")
        if self.M > self.L:
            raise LengthMismatch(f"M={self.M} exceeds L={self.L}")

    @property
    def M(self) -> int:
        return len(self.ket_rapidities)

    @property
    def L(self) -> int:
        return len(self.sites)


def scalar_direct(inp: ScalarProductInput) -> complex:
    """Apply ``C`` then ``B`` blocks to ``|1>`` and project on ``<1|``."""
    if inp.L > VECTOR_CUTOFF:
        raise DenseCutoffExceeded(f"L={inp.L} exceeds vector cutoff {VECTOR_CUTOFF}")
    w = inp.weights
    vec = bethe_ket(w, inp.ket_rapidities, inp.sites)
    for mu in reversed(inp.bra_rapidities):
        vec = apply_block(w, "B", mu, inp.sites, vec)
    return complex(all_down(inp.L) @ vec)


def subset_weight(w: WeightSet, bra, ket, sites, subset: Sequence[int]) -> complex:
    """Weight of one site subset in the bilinear sum (off-subset sites only)."""
    out = 1.0 + 0j
    rest = [p for p in range(len(sites)) if p not in subset]
    for m, l in enumerate(subset):
        for p in rest:
            out *= (w.a_minus(bra[m], sites[p]) * w.a_minus(ket[m], sites[p])
                    / (w.b_minus(sites[p], sites[l]) * w.a_minus(sites[l], sites[p])))
    return out


def scalar_bilinear(inp: ScalarProductInput) -> complex:
    """Sum over ``l_1 < ... < l_M`` of subset weight times ``Z^C Z^B`` on the chosen sites."""
    w, m = inp.weights, inp.M
    if m == 0:
        return 1.0 + 0j
    total = 0j
    for subset in itertools.combinations(range(inp.L), m):
        chosen = [inp.sites[l] for l in subset]
        zb = dwpf_sum(w, DwpfInput("B", inp.bra_rapidities, chosen))
        zc = dwpf_sum(w, DwpfInput("C", inp.ket_rapidities, chosen))
        total += subset_weight(w, inp.bra_rapidities, inp.ket_rapidities, inp.sites, subset) * zb * zc
    return complex(total)


def _half_power(value: complex, odd: int) -> complex:
    """``sqrt(value) ** odd`` on the principal branch."""
    return complex(np.sqrt(complex(value)) ** odd)


def field_factor(bra, ket, sites) -> complex:
    """``prod z_l^M / prod_m (x_m y_m)^(L + 1/2 - m)`` with per-factor square roots."""
    m, n = len(ket), len(sites)
    num = np.prod([s.field for s in sites]) ** m
    den = 1.0 + 0j
    for k in range(m):
        odd = 2 * n + 1 - 2 * (k + 1)
        den *= _half_power(bra[k].field, odd) * _half_power(ket[k].field, odd)
    return complex(num / den)


def _raw_points(values: Sequence[complex]) -> list[SpectralPoint]:
    return [SpectralPoint(v) for v in values]


def symmetric_scalar(mus: Sequence[complex], nus: Sequence[complex], xis: Sequence[complex],
                     rho: complex) -> complex:
    """Field-free scalar product from the twisted operators of the symmetric model."""
    n = len(xis)
    if n > VECTOR_CUTOFF:
        raise DenseCutoffExceeded(f"L={n} exceeds vector cutoff {VECTOR_CUTOFF}")
    w = sym_trig_weights(rho)
    sites = _raw_points(xis)
    vec = all_down(n)
    for nu in nus:
        vec = twisted_C(w, SpectralPoint(nu), sites).apply(vec)
    for mu in reversed(list(mus)):
        vec = twisted_B(w, SpectralPoint(mu), sites).apply(vec)
    return complex(all_down(n) @ vec)


def scalar_field_factorized(inp: ScalarProductInput, rho: complex | None = None) -> complex:
    """Field prefactor times the symmetric-model scalar product (field-trig weights)."""
    rho = inp.weights.anisotropy if rho is None else rho
    if rho is None:
        raise ValueError("field factorization needs the anisotropy")
    sym = symmetric_scalar([p.rapidity for p in inp.bra_rapidities], [p.rapidity for p in inp.ket_rapidities],
                           [s.rapidity for s in inp.sites], rho)
    return field_factor(inp.bra_rapidities, inp.ket_rapidities, inp.sites) * sym


# --- Bethe roots ---------------------------------------------------------------

@dataclass(frozen=True)
class BetheState:
    """One on-shell rapidity set with its per-equation residuals."""

    rapidities: tuple[complex, ...]
    residuals: tuple[float, ...]
    sites: tuple[complex, ...]
    fields: tuple[complex, ...]
    rho: complex

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def points(self, fields: Sequence[complex] | None = None) -> list[SpectralPoint]:
        """Rapidities as spectral points; the fields are free (they drop out of the equations)."""
        fields = [1.0] * len(self.rapidities) if fields is None else fields
        return [SpectralPoint(v, f) for v, f in zip(self.rapidities, fields)]


def bethe_residuals(nus: Sequence[complex], xis: Sequence[complex], zs: Sequence[complex],
                    rho: complex) -> np.ndarray:
    out = []
    for j in range(len(nus)):
        lhs, rhs = field_trig_bethe_sides(rho, nus, xis, zs, j)
        den = abs(lhs) + abs(rhs)
        out.append(abs(lhs - rhs) / den if den > 0 else 0.0)
    return np.array(out)


def _cleared(nus: np.ndarray, xis: np.ndarray, k: complex, rho: complex) -> np.ndarray:
    """Bethe equations in ratio form ``lhs / rhs - 1``."""
    m = len(nus)
    out = np.empty(m, complex)
    for j in range(m):
        others = np.delete(nus, j)
        nj = nus[j]
        ratio = np.prod((xis - nj) / (xis - nj * rho)) * np.prod((others - nj * rho) / (others * rho - nj))
        out[j] = ratio / k - 1
    return out


def _newton(x0: np.ndarray, xis: np.ndarray, k: complex, rho: complex,
            max_iter: int = 200, damping: float = 0.5) -> np.ndarray | None:
    x = x0.copy()
    f = _cleared(x, xis, k, rho)
    m = len(x)
    for _ in range(max_iter):
        norm = np.linalg.norm(f)
        if not np.isfinite(norm):
            return None
        if norm < 1e-15:
            return x
        h = 1e-7 * (1 + np.abs(x))
        jac = np.empty((m, m), complex)
        for c in range(m):
            xp, xm = x.copy(), x.copy()
            xp[c] += h[c]
            xm[c] -= h[c]
            jac[:, c] = (_cleared(xp, xis, k, rho) - _cleared(xm, xis, k, rho)) / (2 * h[c])
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        while t > 1e-6:
            trial = x - t * step
            ft = _cleared(trial, xis, k, rho)
            if np.linalg.norm(ft) < norm:
                break
            t *= damping
        else:
            return x
        if np.linalg.norm(t * step) < 1e-15 * (1 + np.max(np.abs(x))):
            return trial
        x, f = trial, ft
    return x


def _accept(nus: np.ndarray, xis: np.ndarray, rho: complex) -> bool:
    for a, b in itertools.combinations(nus, 2):
        if abs(a - b) <= 1e-6:
            return False
    for v in nus:
        if np.min(np.abs(xis - v * rho)) < SING_TOL or np.min(np.abs(xis - v)) < SING_TOL:
            return False
    return True


def _sort_key(v: complex) -> tuple[float, float]:
    return (round(v.real, 12), round(v.imag, 12))


def bethe_solve(rho: complex, sites: Sequence[SpectralPoint], M: int, seed: int = 0,
                restarts: int = 50, tol: float = 1e-10) -> list[BetheState]:
    """On-shell rapidity sets of the field-trig model.

    ``M = 1`` returns every root of the degree-``L`` polynomial obtained by
    clearing denominators; ``M >= 2`` returns the first root set found by
    damped Newton iteration from seeded random starts.
    """
    if M < 1:
        raise ValueError("M must be positive")
    rho = complex(rho)
    xis = np.array([s.rapidity for s in sites], complex)
    zs = np.array([s.field for s in sites], complex)
    k = np.sqrt(rho) ** (-len(xis)) * np.prod(zs)

    def state(nus) -> BetheState:
        nus = sorted((complex(v) for v in nus), key=_sort_key)
        res = bethe_residuals(nus, xis, zs, rho)
        return BetheState(tuple(nus), tuple(float(r) for r in res), tuple(xis), tuple(zs), rho)

    if M == 1:
        poly = np.poly1d([1.0 + 0j])
        lhs = np.poly1d(np.poly(xis)) * (-1) ** len(xis)   # prod(xi_k - nu)
        rhs = np.poly1d(np.poly(xis / rho)) * (-rho) ** len(xis)  # prod(xi_k - nu rho)
        poly = lhs - k * rhs
        out = []
        for root in np.roots(poly.coeffs):
            root = _polish(np.array([root]), xis, k, rho)
            if not _accept(root, xis, rho):
                continue
            st = state(root)
            if st.max_residual < tol:
                out.append(st)
        if not out:
            raise NoConvergence("no admissible single-rapidity root")
        return sorted(out, key=lambda s: _sort_key(s.rapidities[0]))

    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        start = np.array([annulus(rng, *START_ANNULUS) for _ in range(M)])
        sol = _newton(start, xis, k, rho)
        if sol is None or not np.all(np.isfinite(sol)) or not _accept(sol, xis, rho):
            continue
        st = state(sol)
        if st.max_residual < tol:
            return [st]
    raise NoConvergence(f"no Bethe root set for M={M} after {restarts} restarts")


def _polish(x: np.ndarray, xis, k, rho) -> np.ndarray:
    sol = _newton(x, xis, k, rho, max_iter=20)
    return x if sol is None else sol


# --- Slavnov-type determinant ----------------------------------------------------

@dataclass(frozen=True)
class SlavnovMatrix:
    H: np.ndarray
    prefactor: complex
    field_factor: complex = 1.0
    extras: dict = field(default_factory=dict)

    @property
    def value(self) -> complex:
        return complex(self.field_factor * self.prefactor * np.linalg.det(self.H))


def H_entry(mu: complex, nus: Sequence[complex], i: int, xis: Sequence[complex], zs: Sequence[complex],
            rho: complex) -> complex:
    """Slavnov-type matrix entry for ket index ``i`` and bra rapidity ``mu``."""
    nus = np.asarray(nus, complex)
    xis = np.asarray(xis, complex)
    if abs(nus[i] - mu) < SING_TOL:
        raise DegenerateRapidities("bra and ket rapidities coincide")
    others = np.delete(nus, i)
    first = np.sqrt(complex(rho)) ** (-len(xis)) * np.prod(zs) * np.prod(others * rho - mu)
    second = np.prod((mu - xis) / (mu * rho - xis)) * np.prod(others - mu * rho)
    return complex((rho - 1) / (nus[i] - mu) * (first - second))


def slavnov_matrix(mus: Sequence[complex], nus: Sequence[complex], xis: Sequence[complex],
                   zs: Sequence[complex], rho: complex) -> np.ndarray:
    m = len(nus)
    return np.array([[H_entry(mus[j], nus, i, xis, zs, rho) for j in range(m)] for i in range(m)])


def _vandermonde_pair(mus, nus) -> complex:
    out = 1.0 + 0j
    m = len(mus)
    for q in range(m):
        for l in range(q + 1, m):
            d = (mus[l] - mus[q]) * (nus[q] - nus[l])
            if abs(d) < SING_TOL ** 2:
                raise DegenerateRapidities("coincident rapidities")
            out *= d
    return out


def symmetric_slavnov(mus: Sequence[complex], nus: Sequence[complex], xis: Sequence[complex],
                      zs: Sequence[complex], rho: complex) -> SlavnovMatrix:
    """Determinant form of the symmetric-model scalar product with an on-shell ket."""
    m, n = len(nus), len(xis)
    mus = np.asarray(mus, complex)
    nus = np.asarray(nus, complex)
    pref = (np.sqrt(complex(rho)) ** (m * (n - m)) * np.prod(np.sqrt(mus) * np.sqrt(nus))
            / _vandermonde_pair(mus, nus))
    return SlavnovMatrix(slavnov_matrix(mus, nus, xis, zs, rho), complex(pref))


def slavnov_determinant(mus: Sequence[SpectralPoint], bethe: BetheState | Sequence[SpectralPoint],
                        sites: Sequence[SpectralPoint], rho: complex,
                        ket_fields: Sequence[complex] | None = None, check_tol: float = ON_SHELL_TOL) -> complex:
    """On-shell scalar product of the field-trig model in determinant form."""
    if isinstance(bethe, BetheState):
        ket = bethe.points(ket_fields)
    else:
        ket = list(bethe)
    xis = [s.rapidity for s in sites]
    zs = [s.field for s in sites]
    nus = [p.rapidity for p in ket]
    res = bethe_residuals(nus, xis, zs, rho)
    if res.size and res.max() > check_tol:
        raise OffShellInput(f"ket rapidities are off shell (residual {res.max():.2e})")
    core = symmetric_slavnov([p.rapidity for p in mus], nus, xis, zs, rho)
    return field_factor(mus, ket, sites) * core.value


# --- intermediate functions -------------------------------------------------------

def _p_bra(ps: Sequence[int], n: int) -> np.ndarray:
    spins = [1] * n
    for p in ps:
        spins[p] = 0
    return basis_state(spins)


def intermediate_definition(ps: Sequence[int], mus: Sequence[complex], nus: Sequence[complex],
                            xis: Sequence[complex], rho: complex) -> complex:
    """``<p_1..p_k| B(mu_{k+1})..B(mu_M) C(nu_M)..C(nu_1)|1>`` with symmetric twisted operators."""
    k, n = len(ps), len(xis)
    if len(set(ps)) != k:
        return 0j
    w = sym_trig_weights(rho)
    sites = _raw_points(xis)
    vec = all_down(n)
    for nu in nus:
        vec = twisted_C(w, SpectralPoint(nu), sites).apply(vec)
    for mu in reversed(list(mus)[k:]):
        vec = twisted_B(w, SpectralPoint(mu), sites).apply(vec)
    return complex(_p_bra(ps, n) @ vec)


def phi_kernel(nu: complex, xi: complex, rho: complex) -> complex:
    return (rho - 1) / ((nu * rho - xi) * (nu - xi))


def intermediate_ladder(ps: Sequence[int], mus: Sequence[complex], nus: Sequence[complex],
                        xis: Sequence[complex], zs: Sequence[complex], rho: complex) -> complex:
    """Determinant ladder for ``G^{(l)}``, ``l = M - k`` (on-shell ``nus``)."""
    mus = np.asarray(mus, complex)
    nus = np.asarray(nus, complex)
    xis = np.asarray(xis, complex)
    m, n, k = len(nus), len(xis), len(ps)
    l = m - k
    xp = xis[list(ps)]
    if len(set(ps)) != k:
        return 0j
    top = list(range(m - l, m))  # 0-based bra indices entering through H columns
    sign = (-1) ** sum(range(m - l, m))
    num = np.prod(np.sqrt(mus[top])) * np.prod(np.sqrt(xp)) * np.prod(nus[:, None] - xp[None, :])
    den = 1.0 + 0j
    for a, b in itertools.combinations(top, 2):
        den *= mus[b] - mus[a]
    for a, b in itertools.combinations(range(k), 2):
        den *= xp[a] - xp[b]
    den *= np.prod(mus[top][:, None] * rho - xp[None, :])
    ladder_m = sign * num / den
    vdm = 1.0 + 0j
    for a, b in itertools.combinations(range(m), 2):
        vdm *= nus[b] - nus[a]
    pref = np.sqrt(complex(rho)) ** (l * (n - l)) * np.prod(np.sqrt(nus)) / vdm
    mat = np.empty((m, m), complex)
    for i in range(m):
        for j in range(k):
            mat[i, j] = phi_kernel(nus[i], xp[j], rho)
        for j in top:
            mat[i, j] = H_entry(mus[j], nus, i, xis, zs, rho)
    return complex(pref * ladder_m * np.linalg.det(mat))


def intermediate_G(k: int, ps: Sequence[int], mus: Sequence[complex], nus: Sequence[complex],
                   sites: Sequence[SpectralPoint], rho: complex,
                   check_tol: float = ON_SHELL_TOL) -> tuple[complex, complex]:
    """``(definition, ladder)`` for the intermediate function with ``k`` fixed sites."""
    if len(ps) != k:
        raise LengthMismatch(f"expected {k} site indices, got {len(ps)}")
    xis = [s.rapidity for s in sites]
    zs = [s.field for s in sites]
    res = bethe_residuals(list(nus), xis, zs, rho)
    if res.size and res.max() > check_tol:
        raise OffShellInput(f"ket rapidities are off shell (residual {res.max():.2e})")
    return (intermediate_definition(ps, mus, nus, xis, rho),
            intermediate_ladder(ps, mus, nus, xis, zs, rho))
