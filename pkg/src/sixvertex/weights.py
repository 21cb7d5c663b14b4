"""Six-vertex weights, R-matrix and the local consistency relations.

An R-matrix on ``V (x) V`` with basis order ``(uu, ud, du, dd)`` is

    [[1, 0,  0,  0 ],
     [0, b+, c+, 0 ],
     [0, c-, b-, 0 ],
     [0, 0,  0,  a-]]

where every weight is a function of an ordered pair of spectral points.
The field-dependent trigonometric family carries a rapidity and a field
per point; square roots are taken factor by factor on the principal
branch (``sqrt(mu)*sqrt(xi)``, ``sqrt(z)/sqrt(x)``), which keeps the
weights consistent across all triples of points.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SingularPoint
from .report import VerificationReport

SING_TOL = 1e-9


@dataclass(frozen=True)
class SpectralPoint:
    """A rapidity together with an external field (default 1)."""

    rapidity: complex
    field: complex = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "rapidity", complex(self.rapidity))
        object.__setattr__(self, "field", complex(self.field))
        if abs(self.field) < SING_TOL:
            raise SingularPoint(f"field too close to zero: {self.field}")


WeightFn = Callable[[SpectralPoint, SpectralPoint], complex]
Entries = tuple[complex, complex, complex, complex, complex]


def _guard(value: complex, what: str) -> complex:
    if abs(value) < SING_TOL:
        raise SingularPoint(f"{what} vanishes ({abs(value):.3e})")
    return value


def inv(value: complex, what: str = "denominator") -> complex:
    """Reciprocal that refuses to divide by (numerically) zero."""
    return 1.0 / _guard(value, what)


@dataclass(frozen=True)
class WeightSet:
    """Five weight functions; ``a+`` is normalized to 1.

    ``entries`` optionally evaluates all five weights jointly, returning
    ``(a-, b+, b-, c+, c-)``; it is derived from the individual functions
    when omitted. ``precise``, when present, returns the same five values
    as ``flint.acb`` balls at ``PRECISE_BITS`` of working precision.
    """

    a_minus: WeightFn
    b_plus: WeightFn
    b_minus: WeightFn
    c_plus: WeightFn
    c_minus: WeightFn
    anisotropy: complex | None = None
    label: str = "generic"
    entries: Callable[[SpectralPoint, SpectralPoint], Entries] | None = None
    precise: Callable[[SpectralPoint, SpectralPoint], tuple] | None = None

    def evaluate(self, p1: SpectralPoint, p2: SpectralPoint) -> Entries:
        if self.entries is not None:
            return self.entries(p1, p2)
        return (
            self.a_minus(p1, p2),
            self.b_plus(p1, p2),
            self.b_minus(p1, p2),
            self.c_plus(p1, p2),
            self.c_minus(p1, p2),
        )

    def with_entries(self, fn: Callable[[SpectralPoint, SpectralPoint], Entries], label: str) -> "WeightSet":
        """New weight set whose joint evaluation is ``fn``."""
        return _from_entries(fn, anisotropy=self.anisotropy, label=label)


def _from_entries(fn, anisotropy=None, label="generic", precise=None) -> WeightSet:
    return WeightSet(
        a_minus=lambda p, q: fn(p, q)[0],
        b_plus=lambda p, q: fn(p, q)[1],
        b_minus=lambda p, q: fn(p, q)[2],
        c_plus=lambda p, q: fn(p, q)[3],
        c_minus=lambda p, q: fn(p, q)[4],
        anisotropy=anisotropy,
        label=label,
        entries=fn,
        precise=precise,
    )


PRECISE_BITS = 160


def to_ball(value: complex):
    """Exact ball for a double (or complex) value at ``PRECISE_BITS``."""
    import flint

    flint.ctx.prec = max(flint.ctx.prec, PRECISE_BITS)
    return flint.acb(complex(value))


def _trig_core(rho, mu, x, xi, z, sqrt):
    den = 1 / (mu * rho - xi)
    b = sqrt(rho) * (mu - xi) * den
    c = (rho - 1) * sqrt(z) / sqrt(x) * sqrt(mu) * sqrt(xi) * den
    return (z / x, b / x, b * z, c, c)


def _ball_sqrt(v):
    return v.sqrt()


def field_trig_weights(rho: complex) -> WeightSet:
    """Trigonometric weights with external fields and anisotropy ``rho``."""
    rho = complex(rho)
    if abs(rho - 1) < SING_TOL or abs(rho) < SING_TOL:
        raise SingularPoint("anisotropy must differ from 0 and 1")

    def fn(p1: SpectralPoint, p2: SpectralPoint) -> Entries:
        mu, x = p1.rapidity, p1.field
        xi, z = p2.rapidity, p2.field
        if abs(mu) < SING_TOL or abs(xi) < SING_TOL:
            raise SingularPoint("rapidity too close to zero")
        _guard(mu * rho - xi, "mu*rho - xi")
        return _trig_core(rho, mu, x, xi, z, cmath.sqrt)

    def precise(p1: SpectralPoint, p2: SpectralPoint) -> tuple:
        vals = (p1.rapidity, p1.field, p2.rapidity, p2.field)
        return _trig_core(to_ball(rho), *(to_ball(v) for v in vals), _ball_sqrt)

    return _from_entries(fn, anisotropy=rho, label="field-trig", precise=precise)


def sym_trig_weights(rho: complex) -> WeightSet:
    """Field-free trigonometric weights: ``b+ = b- = b``, ``c+ = c- = c``, ``a- = 1``."""
    rho = complex(rho)
    if abs(rho - 1) < SING_TOL or abs(rho) < SING_TOL:
        raise SingularPoint("anisotropy must differ from 0 and 1")

    def fn(p1: SpectralPoint, p2: SpectralPoint) -> Entries:
        mu, xi = p1.rapidity, p2.rapidity
        if abs(mu) < SING_TOL or abs(xi) < SING_TOL:
            raise SingularPoint("rapidity too close to zero")
        _guard(mu * rho - xi, "mu*rho - xi")
        return _trig_core(rho, mu, 1.0 + 0j, xi, 1.0 + 0j, cmath.sqrt)

    def precise(p1: SpectralPoint, p2: SpectralPoint) -> tuple:
        one = to_ball(1.0)
        return _trig_core(to_ball(rho), to_ball(p1.rapidity), one, to_ball(p2.rapidity), one, _ball_sqrt)

    return _from_entries(fn, anisotropy=rho, label="sym-trig", precise=precise)


def permutation_weights() -> WeightSet:
    """Weights of the permutation operator (``b = 0``, ``c = a- = 1``)."""
    return _from_entries(lambda p, q: (1.0 + 0j, 0j, 0j, 1.0 + 0j, 1.0 + 0j), label="permutation",
                         precise=lambda p, q: tuple(to_ball(v) for v in (1.0, 0.0, 0.0, 1.0, 1.0)))


def gauge_weights(base: WeightSet, gauge: Callable[[SpectralPoint], complex], label: str = "gauged",
                  precise_gauge: Callable[[SpectralPoint], object] | None = None) -> WeightSet:
    """Conjugate the R-matrix by ``K(p1) (x) K(p2)`` with ``K = diag(1, gauge(p))``.

    The result again satisfies unitarity and Yang-Baxter but has
    ``c+ != c-``, which makes it a useful generic test case. A ball-valued
    ``precise_gauge`` carries the precise evaluation of ``base`` over.
    """

    def fn(p1: SpectralPoint, p2: SpectralPoint) -> Entries:
        am, bp, bm, cp, cm = base.evaluate(p1, p2)
        ratio = _guard(gauge(p2), "gauge") / _guard(gauge(p1), "gauge")
        return (am, bp, bm, cp * ratio, cm / ratio)

    def precise(p1: SpectralPoint, p2: SpectralPoint) -> tuple:
        am, bp, bm, cp, cm = base.precise(p1, p2)
        ratio = precise_gauge(p2) / precise_gauge(p1)
        return (am, bp, bm, cp * ratio, cm / ratio)

    has_precise = base.precise is not None and precise_gauge is not None
    return _from_entries(fn, anisotropy=base.anisotropy, label=label,
                         precise=precise if has_precise else None)


def perturbed_weights(base: WeightSet, which: str, delta: complex) -> WeightSet:
    """Add ``delta`` to one weight function (for negative controls)."""
    index = {"a_minus": 0, "b_plus": 1, "b_minus": 2, "c_plus": 3, "c_minus": 4}[which]

    def fn(p1: SpectralPoint, p2: SpectralPoint) -> Entries:
        vals = list(base.evaluate(p1, p2))
        vals[index] += delta
        return tuple(vals)  # type: ignore[return-value]

    def precise(p1: SpectralPoint, p2: SpectralPoint) -> tuple:
        vals = list(base.precise(p1, p2))
        vals[index] += to_ball(delta)
        return tuple(vals)

    return _from_entries(fn, anisotropy=base.anisotropy, label=f"{base.label}+d{which}",
                         precise=precise if base.precise is not None else None)


def random_generic_weights(seed: int) -> WeightSet:
    """Seeded generic weights: field-trig at random anisotropy, randomly gauged."""
    rng = np.random.default_rng(seed)
    while True:
        rho = complex(*rng.uniform(-2, 2, size=2))
        if 0.3 < abs(rho) < 3 and abs(rho - 1) > 0.3:
            break
    alpha, beta = rng.normal(size=2) + 1j * rng.normal(size=2)
    gamma = 0.5 * (rng.normal() + 1j * rng.normal())

    def gauge(p: SpectralPoint) -> complex:
        return cmath.exp(0.5 * alpha * p.rapidity + 0.3 * beta * p.field) * (1 + gamma * p.rapidity)

    def precise_gauge(p: SpectralPoint):
        a, b, g = (to_ball(v) for v in (alpha, beta, gamma))
        mu, x = to_ball(p.rapidity), to_ball(p.field)
        return (a * mu / 2 + 3 * b * x / 10).exp() * (1 + g * mu)

    return gauge_weights(field_trig_weights(rho), gauge, label=f"generic[{seed}]", precise_gauge=precise_gauge)


def make_weights(name: str, rho: complex = 0.6 + 0.3j, seed: int = 0) -> WeightSet:
    """Weight set by name: ``field-trig``, ``sym-trig``, ``permutation`` or ``generic``."""
    if name == "field-trig":
        return field_trig_weights(rho)
    if name == "sym-trig":
        return sym_trig_weights(rho)
    if name == "permutation":
        return permutation_weights()
    if name == "generic":
        return random_generic_weights(seed)
    raise ValueError(f"unknown weight family {name!r}")


def r_matrix(w: WeightSet, p1: SpectralPoint, p2: SpectralPoint) -> np.ndarray:
    """4x4 R-matrix in basis ``(uu, ud, du, dd)``."""
    am, bp, bm, cp, cm = w.evaluate(p1, p2)
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = 1.0
    r[1, 1], r[1, 2] = bp, cp
    r[2, 1], r[2, 2] = cm, bm
    r[3, 3] = am
    return r


def _scalar_residual(lhs: complex, rhs: complex) -> float:
    # relative to the right-hand side, with an absolute floor of 1
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def _matrix_residual(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(np.abs(x - y)) / max(1.0, float(np.max(np.abs(y)))))


_P4 = np.eye(4)[[0, 2, 1, 3]]


def check_unitarity(w: WeightSet, p1: SpectralPoint, p2: SpectralPoint, tol: float = 1e-11) -> VerificationReport:
    """Scalar unitarity relations and ``R12(1,2) R21(2,1) = I``."""
    a12, bp12, bm12, cp12, cm12 = w.evaluate(p1, p2)
    a21, bp21, bm21, cp21, cm21 = w.evaluate(p2, p1)
    rel = {
        "uni1": (bm12 * bp21 + cm12 * cm21, 1.0),
        "uni2": (bm12 * bp21 + cp12 * cp21, 1.0),
        "uni3": (cp12 * bm21 + bm12 * cm21, 0.0),
        "uni4": (cm12 * bp21 + bp12 * cp21, 0.0),
        "uni5": (a12 * a21, 1.0),
    }
    rep = VerificationReport("unitarity")
    for name, (lhs, rhs) in rel.items():
        rep.add(name, _scalar_residual(lhs, rhs), tol)
    r21 = _P4 @ r_matrix(w, p2, p1) @ _P4
    rep.add("uni-matrix", _matrix_residual(r_matrix(w, p1, p2) @ r21, np.eye(4)), tol)
    return rep


def _embed3(r: np.ndarray, slots: tuple[int, int]) -> np.ndarray:
    """Place a two-site 4x4 matrix on two of three sites (order preserved)."""
    t = r.reshape(2, 2, 2, 2)
    eye = np.eye(2)
    if slots == (0, 1):
        full = np.einsum("abcd,ef->abecdf", t, eye)
    elif slots == (1, 2):
        full = np.einsum("ef,abcd->eabfcd", eye, t)
    else:  # (0, 2)
        full = np.einsum("abcd,ef->aebcfd", t, eye)
    return full.reshape(8, 8)


def check_yang_baxter(
    w: WeightSet, p1: SpectralPoint, p2: SpectralPoint, p3: SpectralPoint, tol: float = 1e-11
) -> VerificationReport:
    """``R12 R13 R23 = R23 R13 R12`` as an 8x8 identity plus its scalar relations.

    Eight independent scalar relations are reported; the remaining ones
    follow from these via the ``1 <-> 3`` reflection and unitarity and are
    covered by the matrix check.
    """
    r12, r13, r23 = r_matrix(w, p1, p2), r_matrix(w, p1, p3), r_matrix(w, p2, p3)
    m12, m13, m23 = _embed3(r12, (0, 1)), _embed3(r13, (0, 2)), _embed3(r23, (1, 2))
    lhs, rhs = m12 @ m13 @ m23, m23 @ m13 @ m12
    rep = VerificationReport("yang-baxter")
    rep.add("yb-matrix", _matrix_residual(lhs, rhs), tol)

    a12, bp12, bm12, cp12, cm12 = w.evaluate(p1, p2)
    a13, bp13, bm13, cp13, cm13 = w.evaluate(p1, p3)
    a23, bp23, bm23, cp23, cm23 = w.evaluate(p2, p3)
    rel = {
        "yb1": (cp12 * bm23 + bm12 * cp13 * cm23, cp12 * bm13),
        "yb2": (cm12 * bm23 + bm12 * cm13 * cp23, cm12 * bm13),
        "yb3": (bp12 * cm23 + cp12 * cm13 * bp23, bp13 * cm23),
        "yb4": (bp12 * cp13 * bm23 + cp12 * a13 * cp23, a12 * cp13 * a23),
        "yb5": (bp12 * cm13 * bm23 + cm12 * a13 * cm23, a12 * cm13 * a23),
        "yb6": (bm12 * a13 * cm23 + cp12 * cm13 * bm23, a12 * bm13 * cm23),
        "yb7": (cm12 * cp13 * cm23, cp12 * cm13 * cp23),
        "yb8": (bp12 * cp13 * cm23 + cp12 * a13 * bp23, cp12 * bp13 * a23),
    }
    for name, (l, r) in rel.items():
        rep.add(name, _scalar_residual(l, r), tol)
    return rep
