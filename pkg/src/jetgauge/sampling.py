"""Deterministic sample generation: seeded low-discrepancy points in boxes,
stable per-check seed derivation, and random polynomial expression builders.
"""

from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from ._multiindex import context
from .expr import Expr, ExprMap, constant, variable

Box = Sequence[tuple[float, float]]


def derive_seed(master: int, label: str) -> int:
    """Stable sub-seed for a named check; independent of evaluation order."""
    return (master * 0x9E3779B1 + zlib.crc32(label.encode())) % 2**32


def halton_points(box: Box, count: int, seed: int) -> np.ndarray:
    """Scrambled Halton points inside the box, (count, dim)."""
    box = list(box)
    sampler = qmc.Halton(d=len(box), scramble=True, seed=seed)
    unit = sampler.random(count)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return qmc.scale(unit, lo, hi)


def grid_points(box: Box, counts: Sequence[int]) -> np.ndarray:
    """Regular grid over the box, row-major flattened, (prod(counts), dim)."""
    axes = [np.linspace(lo, hi, int(c)) for (lo, hi), c in zip(box, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def random_poly(variables: Sequence[str], degree: int, rng: np.random.Generator,
                scale: float = 1.0) -> Expr:
    """Random polynomial with coefficients drawn uniformly in [-scale, scale],
    monomials in the shared graded order so draws are reproducible."""
    ctx = context(len(variables), degree)
    out: Expr | None = None
    for row in ctx.midx:
        coeff = float(rng.uniform(-scale, scale))
        term: Expr = constant(coeff)
        for name, e in zip(variables, row):
            if e == 1:
                term = term * variable(name)
            elif e >= 2:
                term = term * variable(name) ** int(e)
        out = term if out is None else out + term
    return out


def random_poly_map(variables: Sequence[str], ncomp: int, degree: int,
                    rng: np.random.Generator, scale: float = 1.0) -> ExprMap:
    return ExprMap(variables, [random_poly(variables, degree, rng, scale)
                               for _ in range(ncomp)])
