"""Seeded sampling of spectral points away from weight singularities."""
from __future__ import annotations

import numpy as np

from .errors import SingularPoint
from .weights import SpectralPoint, WeightSet

RAPIDITY_ANNULUS = (0.5, 1.5)
FIELD_ANNULUS = (0.5, 2.0)
MIN_SEPARATION = 1e-3
MIN_WEIGHT = 1e-4


def annulus(rng: np.random.Generator, lo: float, hi: float) -> complex:
    r = rng.uniform(lo, hi)
    phi = rng.uniform(-np.pi, np.pi)
    return complex(r * np.cos(phi), r * np.sin(phi))


def random_point(rng: np.random.Generator, with_field: bool = True) -> SpectralPoint:
    field = annulus(rng, *FIELD_ANNULUS) if with_field else 1.0
    return SpectralPoint(annulus(rng, *RAPIDITY_ANNULUS), field)


def _admissible(w: WeightSet, pts: list[SpectralPoint], new: SpectralPoint) -> bool:
    for p in pts:
        if abs(p.rapidity - new.rapidity) < MIN_SEPARATION:
            return False
        for a, b in ((p, new), (new, p)):
            try:
                vals = w.evaluate(a, b)
            except SingularPoint:
                return False
            # b-weights vanish only at coincident rapidities; keep everything else clear of zero
            if min(abs(v) for v in vals) < MIN_WEIGHT or max(abs(v) for v in vals) > 1e4:
                return False
    return True


def sample_points(
    rng: np.random.Generator,
    n: int,
    w: WeightSet | None = None,
    with_field: bool = True,
    avoid: list[SpectralPoint] = (),
    max_tries: int = 10_000,
) -> list[SpectralPoint]:
    """Draw ``n`` points, rejecting any that make a weight against an earlier point singular."""
    w = w if w is not None and w.label != "permutation" else None
    pts: list[SpectralPoint] = []
    pool = list(avoid)
    tries = 0
    while len(pts) < n:
        tries += 1
        if tries > max_tries:
            raise SingularPoint("could not sample admissible points")
        cand = random_point(rng, with_field)
        if w is None:
            if all(abs(p.rapidity - cand.rapidity) > MIN_SEPARATION for p in pool):
                pts.append(cand)
                pool.append(cand)
            continue
        if _admissible(w, pool, cand):
            pts.append(cand)
            pool.append(cand)
    return pts
