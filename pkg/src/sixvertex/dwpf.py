"""Domain-wall partition functions of type B and C.

Four independent evaluations are provided:

* ``dwpf_bra_ket``: matrix element of the structured twisted operators on
  ``M`` sites, untwisted by the reference-state factor;
* ``dwpf_recursive``: the site-removal recursion, memoized over site subsets;
* ``dwpf_sum``: the explicit sum over ``S_M``;
* ``dwpf_determinant``: field prefactor times the Izergin determinant
  (field-trig weights only).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateRapidities, LengthMismatch
from .tensor_space import all_down, all_up
from .twisted_ops import twisted_B, twisted_C
from .weights import SING_TOL, SpectralPoint, WeightSet


@dataclass(frozen=True)
class DwpfInput:
    kind: str  # "B" or "C"
    rapidities: tuple[SpectralPoint, ...]
    sites: tuple[SpectralPoint, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("B", "C"):
            raise ValueError(f"kind must be 'B' or 'C', got {self.kind!r}")
        object.__setattr__(self, "rapidities", tuple(self.rapidities))
        object.__setattr__(self, "sites", tuple(self.sites))
        if len(self.rapidities) != len(self.sites):
            raise LengthMismatch(f"{len(self.rapidities)} rapidities for {len(self.sites)} sites")

    @property
    def size(self) -> int:
        return len(self.sites)


def _site_factor(w: WeightSet, sites, kind: str) -> complex:
    """Reference-state factor relating the twisted and plain DWPF."""
    n = len(sites)
    out = 1.0 + 0j
    for i in range(n):
        for j in range(i + 1, n):
            out *= w.a_minus(sites[i], sites[j]) if kind == "B" else w.a_minus(sites[j], sites[i])
    return out


def dwpf_bra_ket_twisted(w: WeightSet, inp: DwpfInput) -> complex:
    """``<1|B~(mu_1)...B~(mu_M)|0>`` or ``<0|C~(nu_M)...C~(nu_1)|1>`` on the ``M`` sites."""
    m = inp.size
    if m == 0:
        return 1.0 + 0j
    if inp.kind == "B":
        vec = all_up(m)
        for mu in reversed(inp.rapidities):
            vec = twisted_B(w, mu, inp.sites).apply(vec)
        return complex(all_down(m) @ vec)
    vec = all_down(m)
    for nu in inp.rapidities:
        vec = twisted_C(w, nu, inp.sites).apply(vec)
    return complex(all_up(m) @ vec)


def dwpf_bra_ket(w: WeightSet, inp: DwpfInput) -> complex:
    """Plain DWPF from the twisted matrix element divided by the reference-state factor."""
    return dwpf_bra_ket_twisted(w, inp) / _site_factor(w, inp.sites, inp.kind)


def _theta(w: WeightSet, sites, s: int, t: int) -> complex:
    return w.a_minus(sites[s], sites[t]) if s < t else 1.0


def dwpf_recursive(w: WeightSet, inp: DwpfInput) -> complex:
    """Remove the first rapidity and one site at each level; memoized on the remaining sites."""
    m = inp.size
    raps, sites, kind = inp.rapidities, inp.sites, inp.kind
    cweight = w.c_plus if kind == "B" else w.c_minus
    cache: dict[int, complex] = {}

    def z(mask: int) -> complex:
        if mask == 0:
            return 1.0 + 0j
        if mask in cache:
            return cache[mask]
        present = [s for s in range(m) if mask >> s & 1]
        k = m - len(present)  # index of the rapidity removed at this level
        lam = raps[k]
        total = 0j
        for q in present:
            term = cweight(lam, sites[q])
            for j in present:
                if j == q:
                    continue
                if kind == "B":
                    term *= w.a_minus(lam, sites[j]) / (w.b_minus(sites[j], sites[q]) * _theta(w, sites, q, j))
                else:
                    term *= w.a_minus(lam, sites[j]) * _theta(w, sites, j, q) / w.b_minus(sites[j], sites[q])
            for mm in range(k + 1, m):
                term *= w.b_minus(raps[mm], sites[q])
            total += term * z(mask & ~(1 << q))
        cache[mask] = total
        return total

    return z((1 << m) - 1)


def _weight_tables(w: WeightSet, raps, sites, kind):
    m = len(sites)
    cw = np.empty((m, m), complex)
    bm_r = np.empty((m, m), complex)
    am_r = np.empty((m, m), complex)
    for i, lam in enumerate(raps):
        for s, site in enumerate(sites):
            am, _, bm, cp, cm = w.evaluate(lam, site)
            cw[i, s] = cp if kind == "B" else cm
            bm_r[i, s] = bm
            am_r[i, s] = am
    bm_s = np.ones((m, m), complex)
    th = np.ones((m, m), complex)
    for s in range(m):
        for t in range(m):
            if s != t:
                bm_s[s, t] = w.b_minus(sites[s], sites[t])
                if s < t:
                    th[s, t] = w.a_minus(sites[s], sites[t])
    return cw, bm_r, am_r, bm_s, th


def dwpf_sum(w: WeightSet, inp: DwpfInput) -> complex:
    """Explicit sum over all assignments of rapidities to sites (``M!`` terms)."""
    m = inp.size
    if m == 0:
        return 1.0 + 0j
    if m > 9:
        raise ValueError("permutation sum limited to M <= 9")
    cw, bm_r, am_r, bm_s, th = _weight_tables(w, inp.rapidities, inp.sites, inp.kind)
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.intp)
    rows = np.arange(m)
    terms = np.prod(cw[rows, perms], axis=1)
    j_idx, k_idx = np.triu_indices(m, 1)
    sj, sk = perms[:, j_idx], perms[:, k_idx]
    pair = bm_r[k_idx, sj] * am_r[j_idx, sk] / bm_s[sk, sj]
    if inp.kind == "B":
        pair = pair / th[sj, sk]
    else:
        pair = pair * th[sk, sj]
    terms = terms * np.prod(pair, axis=1)
    return complex(np.sum(terms))


def izergin_determinant(rapidities: Sequence[complex], sites: Sequence[complex], rho: complex) -> complex:
    """Izergin-type determinant of the symmetric trigonometric model."""
    mu = np.asarray(rapidities, dtype=complex)
    xi = np.asarray(sites, dtype=complex)
    m = len(mu)
    if len(xi) != m:
        raise LengthMismatch(f"{m} rapidities for {len(xi)} sites")
    if m == 0:
        return 1.0 + 0j
    den = 1.0 + 0j
    for p in range(m):
        for q in range(p + 1, m):
            d = (mu[p] - mu[q]) * (xi[q] - xi[p])
            if abs(mu[p] - mu[q]) < SING_TOL or abs(xi[q] - xi[p]) < SING_TOL:
                raise DegenerateRapidities("coincident rapidities or sites")
            den *= d
    diff = mu[:, None] - xi[None, :]
    kernel = (rho - 1) / ((mu[:, None] * rho - xi[None, :]) * diff)
    pref = np.prod(np.sqrt(mu) * np.sqrt(xi)) * np.prod(diff) / den
    return complex(pref * np.linalg.det(kernel))


def field_prefactor(inp: DwpfInput) -> complex:
    """Half-integer powers of site/rapidity field ratios, square roots taken per factor."""
    m = inp.size
    out = 1.0 + 0j
    for i in range(m):
        power = 2 * (m - i) - 1
        site = inp.sites[i] if inp.kind == "B" else inp.sites[m - 1 - i]
        ratio = np.sqrt(site.field) / np.sqrt(inp.rapidities[i].field)
        out *= ratio ** power
    return complex(out)


def dwpf_determinant(inp: DwpfInput, rho: complex) -> complex:
    """Field-trig DWPF in determinant form."""
    return field_prefactor(inp) * izergin_determinant(
        [p.rapidity for p in inp.rapidities], [s.rapidity for s in inp.sites], rho)


ROUTES = ("bra_ket", "recursive", "sum", "determinant")


def dwpf_all_routes(w: WeightSet, inp: DwpfInput, routes: Sequence[str] = ROUTES) -> dict[str, complex]:
    out: dict[str, complex] = {}
    for route in routes:
        if route == "bra_ket":
            out[route] = dwpf_bra_ket(w, inp)
        elif route == "recursive":
            out[route] = dwpf_recursive(w, inp)
        elif route == "sum":
            out[route] = dwpf_sum(w, inp)
        elif route == "determinant":
            if w.label != "field-trig":
                continue
            out[route] = dwpf_determinant(inp, w.anisotropy)
        else:
            raise ValueError(f"unknown route {route!r}")
    return out


def relative_spread(values: Sequence[complex]) -> float:
    vals = np.asarray(list(values), dtype=complex)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    return float(np.max(np.abs(vals[:, None] - vals[None, :])) / scale)
