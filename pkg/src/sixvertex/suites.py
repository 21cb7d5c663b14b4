"""Seeded verification suites and the route benchmark."""
from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dwpf import ROUTES, DwpfInput, dwpf_all_routes, dwpf_determinant, dwpf_sum, relative_spread
from .errors import ConfigError, NoConvergence
from .fbasis import build_F, reference_state_factors, verify_F_cocycle, verify_F_invariants, verify_factorization
from .identities import IdentityContext, verify_det_recursion, verify_H_identity, verify_phi_identity
from .monodromy import act_eigen_formulas, verify_exchange_relations
from .permutation import Permutation, adjacent_transposition, random_permutation, verify_group_relations
from .report import VerificationReport
from .sampling import sample_points
from .scalar_product import (ScalarProductInput, bethe_solve, intermediate_G, scalar_bilinear, scalar_direct,
                             scalar_field_factorized, slavnov_determinant)
from .tensor_space import DENSE_CUTOFF, perm_rep, rhat_rep, verify_product_identities
from .twisted_ops import verify_twisted_ops, verify_twisted_recurrences
from .weights import WeightSet, check_unitarity, check_yang_baxter, make_weights

SUITES = ("unitarity", "yang-baxter", "fbasis", "twisted", "dwpf", "scalar", "bethe", "identities")
FAMILIES = ("field-trig", "sym-trig", "generic")
MAX_L = 14
MAX_M = 8
DENSE_SUITES = ("yang-baxter", "fbasis", "twisted")
THREADS_ENV = "SIXVERTEX_THREADS"

DEFAULT_TOL = {
    "unitarity": 1e-11,
    "yang-baxter": 1e-11,
    "fbasis": 1e-10,
    "twisted": 1e-10,
    "dwpf": 1e-9,
    "scalar": 1e-9,
    "bethe": 1e-8,
    "identities": 1e-10,
}


@dataclass
class SuiteConfig:
    suite: str
    weight_family: str = "field-trig"
    rho: complex = 0.6 + 0.3j
    L: int = 3
    M: int = 1
    seeds: list[int] = field(default_factory=lambda: [0])
    tol: dict[str, float] = field(default_factory=dict)
    output: str | None = None

    def validate(self) -> "SuiteConfig":
        if self.suite not in SUITES + ("all", "benchmark"):
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.weight_family not in FAMILIES:
            raise ConfigError(f"unknown weight family {self.weight_family!r}")
        if not 1 <= self.L <= MAX_L:
            raise ConfigError(f"L must lie in 1..{MAX_L}")
        if self.suite == "benchmark":
            if not 1 <= self.M <= MAX_M:
                raise ConfigError(f"benchmark needs 1 <= M <= {MAX_M}")
        elif not 0 <= self.M <= min(self.L, MAX_M):
            raise ConfigError(f"M must lie in 0..min(L, {MAX_M})")
        if (self.suite in DENSE_SUITES or self.suite == "all") and self.L > DENSE_CUTOFF:
            raise ConfigError(f"suite {self.suite} is dense and needs L <= {DENSE_CUTOFF}")
        if self.suite in ("bethe", "benchmark") and self.weight_family != "field-trig":
            raise ConfigError(f"suite {self.suite} needs field-trig weights")
        if self.suite == "scalar" and (self.L > 12 or self.M > 5):
            raise ConfigError("scalar suite needs L <= 12 and M <= 5")
        if abs(self.rho - 1) < 1e-9 or abs(self.rho) < 1e-9:
            raise ConfigError("rho must differ from 0 and 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        for name, value in self.tol.items():
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"tolerance for {name} must be positive")
        return self

    def to_json(self) -> dict:
        return {"suite": self.suite, "weights": self.weight_family, "rho": [self.rho.real, self.rho.imag],
                "L": self.L, "M": self.M, "seeds": list(self.seeds), "tol": dict(sorted(self.tol.items()))}


def _weights(cfg: SuiteConfig, seed: int) -> WeightSet:
    return make_weights(cfg.weight_family, cfg.rho, seed)


def _unitarity(cfg: SuiteConfig, seed: int) -> VerificationReport:
    w = _weights(cfg, seed)
    p1, p2 = sample_points(np.random.default_rng(seed), 2, w)
    return check_unitarity(w, p1, p2, DEFAULT_TOL["unitarity"])


def _yang_baxter(cfg: SuiteConfig, seed: int) -> VerificationReport:
    w = _weights(cfg, seed)
    tol = DEFAULT_TOL["yang-baxter"]
    pts = sample_points(np.random.default_rng(seed), max(3, cfg.L), w)
    report = check_yang_baxter(w, pts[0], pts[1], pts[2], tol)
    n = cfg.L
    if n >= 2:
        report.extend(verify_group_relations(lambda a, labels: perm_rep(adjacent_transposition(a, n)), n, tol), "P/")
        sites = pts[:n]
        labels = [tuple(p) for p in itertools.islice(itertools.permutations(range(1, n + 1)), 6)]
        report.extend(verify_group_relations(rhat_rep(w, sites), n, tol, label_states=labels), "Rhat/")
        report.extend(verify_product_identities(w, n, 10 * tol, points=sites), "products/")
    return report


def _fbasis(cfg: SuiteConfig, seed: int) -> VerificationReport:
    w = _weights(cfg, seed)
    tol = DEFAULT_TOL["fbasis"]
    n = cfg.L
    rng = np.random.default_rng(seed)
    pts = sample_points(rng, n, w)
    bundle = build_F(w, pts)
    if n <= 5:
        sigmas = [Permutation(tuple(p)) for p in itertools.permutations(range(1, n + 1))]
    else:
        sigmas = [random_permutation(rng, n) for _ in range(50)]
    report = VerificationReport("fbasis")
    for sigma in sigmas:
        sub = verify_factorization(w, pts, sigma, tol, bundle)
        for rec in sub.records:
            name = rec.identifier.replace("defining-twisted", "twisted-factorization").replace(
                "defining", "factorization")
            report.add(name, rec.residual, rec.tolerance, **rec.parameters)
    report.extend(verify_F_invariants(bundle, w, tol))
    if n >= 3:
        report.extend(verify_F_cocycle(w, pts, tol))
    report.extend(reference_state_factors(bundle, w, tol))
    return report


def _twisted(cfg: SuiteConfig, seed: int) -> VerificationReport:
    w = _weights(cfg, seed)
    tol = DEFAULT_TOL["twisted"]
    n = cfg.L
    pts = sample_points(np.random.default_rng(seed), n + 2, w)
    aux, sites = pts[0], pts[2:]
    report = verify_twisted_ops(w, aux, sites, tol)
    if n >= 2:
        report.extend(verify_twisted_recurrences(w, aux, sites, tol))
    if n <= 8:
        report.extend(verify_exchange_relations(w, n, 10 * tol, points=pts), "exchange/")
    m = min(cfg.M, n)
    nus = sample_points(np.random.default_rng(seed + 1), m, w, avoid=pts)
    report.extend(act_eigen_formulas(w, pts[1], nus, sites, tol), "eigen/")
    return report


def _dwpf(cfg: SuiteConfig, seed: int) -> VerificationReport:
    w = _weights(cfg, seed)
    tol = DEFAULT_TOL["dwpf"]
    m = max(cfg.M, 1)
    pts = sample_points(np.random.default_rng(seed), 2 * m, w)
    report = VerificationReport("dwpf")
    routes = ROUTES if m <= 8 else ("bra_ket", "recursive", "determinant")
    for kind in ("B", "C"):
        inp = DwpfInput(kind, pts[:m], pts[m:])
        vals = dwpf_all_routes(w, inp, routes)
        report.add(f"route-spread[{kind}]", relative_spread(vals.values()), tol, M=m, routes=sorted(vals))
        report.values[f"Z{kind}"] = {k: vals[k] for k in sorted(vals)}
        if m == 1:
            base = w.c_plus(pts[0], pts[1]) if kind == "B" else w.c_minus(pts[0], pts[1])
            worst = max(abs(v - base) for v in vals.values()) / abs(base)
            report.add(f"base-case[{kind}]", worst, 1e-14, M=1)
    return report


def _scalar(cfg: SuiteConfig, seed: int) -> VerificationReport:
    w = _weights(cfg, seed)
    tol = DEFAULT_TOL["scalar"]
    n, m = cfg.L, cfg.M
    pts = sample_points(np.random.default_rng(seed), n + 2 * m, w)
    inp = ScalarProductInput(pts[:m], pts[m:2 * m], pts[2 * m:], w)
    vals = {"direct": scalar_direct(inp), "bilinear": scalar_bilinear(inp)}
    if w.label == "field-trig":
        vals["field-factorized"] = scalar_field_factorized(inp)
    report = VerificationReport("scalar")
    report.add("scalar-routes", relative_spread(vals.values()), tol, L=n, M=m, routes=sorted(vals))
    report.values["S"] = vals
    if m >= 2:
        ket = list(inp.ket_rapidities)
        swapped = [ket[1], ket[0]] + ket[2:]
        other = scalar_direct(ScalarProductInput(inp.bra_rapidities, swapped, inp.sites, w))
        expected = w.a_minus(ket[1], ket[0]) * vals["direct"]
        report.add("ket-exchange", relative_spread([other, expected]), tol, L=n, M=m)
    return report


def _bethe(cfg: SuiteConfig, seed: int) -> VerificationReport:
    w = _weights(cfg, seed)
    rho = cfg.rho
    tol = DEFAULT_TOL["bethe"]
    n, m = cfg.L, max(cfg.M, 1)
    rng = np.random.default_rng(seed)
    pts = sample_points(rng, n + 2 * m, w)
    sites, mus, ket_pts = pts[2 * m:], pts[:m], pts[m:2 * m]
    report = VerificationReport("bethe")
    try:
        states = bethe_solve(rho, sites, m, seed=seed)
    except NoConvergence as exc:
        report.add("bethe-solve", float("inf"), 1e-10, L=n, M=m, error=str(exc))
        return report
    ket_fields = [p.field for p in ket_pts]
    for r, st in enumerate(states):
        tag = f"root{r}"
        report.add(f"bethe-residual[{tag}]", st.max_residual, 1e-10, L=n, M=m)
        report.values[f"roots[{tag}]"] = list(st.rapidities)
        ket = st.points(ket_fields)
        direct = scalar_direct(ScalarProductInput(mus, ket, sites, w))
        slav = slavnov_determinant(mus, st, sites, rho, ket_fields)
        report.add(f"slavnov[{tag}]", relative_spread([direct, slav]), tol, L=n, M=m)
        report.values[f"S[{tag}]"] = {"direct": direct, "slavnov": slav}
        if m <= 2:
            worst = 0.0
            mu_r = [p.rapidity for p in mus]
            for k in range(m + 1):
                for ps in itertools.combinations(range(n), k):
                    d, lad = intermediate_G(k, ps, mu_r, st.rapidities, sites, rho)
                    scale = max(abs(d), abs(lad))
                    worst = max(worst, abs(d - lad) / scale if scale > 0 else 0.0)
            report.add(f"ladder[{tag}]", worst, tol, L=n, M=m)
    return report


def _identities(cfg: SuiteConfig, seed: int) -> VerificationReport:
    tol = DEFAULT_TOL["identities"]
    m = max(cfg.M, 1)
    rng = np.random.default_rng(seed)
    w = make_weights("field-trig", cfg.rho)
    pts = sample_points(rng, 2 * m, w, with_field=False)
    ctx = IdentityContext([p.rapidity for p in pts[:m]], [p.rapidity for p in pts[m:]], cfg.rho)
    report = verify_phi_identity(ctx, tol)
    if m >= 2:
        report.extend(verify_det_recursion(ctx, tol))
    n = max(cfg.L, m)
    sites = sample_points(rng, n, w, avoid=pts)
    try:
        st = bethe_solve(cfg.rho, sites, m, seed=seed)[0]
    except NoConvergence as exc:
        report.add("H-identity[bethe]", float("inf"), tol, error=str(exc))
        return report
    mus = [p.rapidity for p in pts[:m]]
    for q in range(1, m + 1):
        ps = tuple(int(v) for v in rng.choice(n, size=q - 1, replace=False))
        for i in range(m):
            hctx = IdentityContext(mus, [s.rapidity for s in sites], cfg.rho, st.rapidities,
                                   [s.field for s in sites], i, q, ps)
            report.extend(verify_H_identity(hctx, tol))
    return report


RUNNERS: dict[str, Callable[[SuiteConfig, int], VerificationReport]] = {
    "unitarity": _unitarity,
    "yang-baxter": _yang_baxter,
    "fbasis": _fbasis,
    "twisted": _twisted,
    "dwpf": _dwpf,
    "scalar": _scalar,
    "bethe": _bethe,
    "identities": _identities,
}


def apply_tolerances(report: VerificationReport, overrides: dict[str, float]) -> None:
    """Override tolerances by full identifier, by bare check name, or by suite name."""
    if not overrides:
        return
    for rec in report.records:
        leaf = rec.identifier.split("/")[-1]
        parts = rec.identifier.split("/")
        for key in (rec.identifier, leaf, leaf.split("[")[0], *parts[:-1]):
            if key in overrides:
                rec.tolerance = float(overrides[key])
                break


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc


def _run_one(suite: str, cfg: SuiteConfig, seed: int) -> tuple[VerificationReport, float]:
    t0 = time.perf_counter()
    rep = RUNNERS[suite](cfg, seed)
    return rep, (time.perf_counter() - t0) * 1e3


def run_suite(cfg: SuiteConfig) -> VerificationReport:
    """Run one suite (or all) over every seed; records are merged in a fixed order."""
    cfg.validate()
    if cfg.suite == "benchmark":
        return run_benchmark(cfg)
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    jobs = [(name, seed) for name in names for seed in cfg.seeds]
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _run_one(job[0], cfg, job[1]), jobs))
    else:
        results = [_run_one(name, cfg, seed) for name, seed in jobs]
    report = VerificationReport(cfg.suite, seed=cfg.seeds[0])
    for (name, seed), (sub, ms) in zip(jobs, results):
        prefix = (f"{name}/" if cfg.suite == "all" else "") + f"seed={seed}/"
        report.extend(sub, prefix)
        report.timings_ms[prefix + "total"] = ms
    report.records.sort(key=lambda rec: rec.identifier)
    apply_tolerances(report, cfg.tol)
    report.values["config"] = cfg.to_json()
    return report


def _best_time(fn, repeats: int) -> tuple[complex, float]:
    best, value = math.inf, 0j
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return value, best * 1e3


def run_benchmark(cfg: SuiteConfig, repeats: int = 3) -> VerificationReport:
    """Sum route against determinant route for ``M = 1..cfg.M`` (field-trig)."""
    cfg.validate()
    w = make_weights("field-trig", cfg.rho)
    seed = cfg.seeds[0]
    report = VerificationReport("benchmark", seed=seed)
    for m in range(1, cfg.M + 1):
        pts = sample_points(np.random.default_rng(seed + m), 2 * m, w)
        inp = DwpfInput("B", pts[:m], pts[m:])
        v_sum, t_sum = _best_time(lambda: dwpf_sum(w, inp), repeats)
        v_det, t_det = _best_time(lambda: dwpf_determinant(inp, cfg.rho), repeats)
        report.add(f"agreement[M={m}]", relative_spread([v_sum, v_det]), 1e-8 if m > 2 else 1e-12, M=m)
        if m == 1:
            base = w.c_plus(pts[0], pts[1])
            report.add("base-case[M=1]", max(abs(v_sum - base), abs(v_det - base)) / abs(base), 1e-14, M=1)
        report.timings_ms[f"sum[M={m}]"] = t_sum
        report.timings_ms[f"determinant[M={m}]"] = t_det
        report.values[f"speedup[M={m}]"] = t_sum / t_det if t_det > 0 else math.inf
        report.values[f"terms[M={m}]"] = math.factorial(m)
    apply_tolerances(report, cfg.tol)
    report.values["config"] = cfg.to_json()
    return report
