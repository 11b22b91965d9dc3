"""Jets of smooth maps: truncated Taylor data with composition and inversion.

Public coefficient view is raw derivatives (value, gradient, d^mu f);
Taylor scaling is kept internally because composition and inversion are
cleanest there.  Multi-indices run in the shared graded-lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import series
from ._multiindex import MultiIndexContext, context
from .expr import ExprMap, TaylorMap

ORDER_CAP = 6


class SingularJetError(ArithmeticError):
    """First-order part is numerically singular; no inverse jet exists."""


def _check_order(order: int) -> None:
    if not 0 <= order <= ORDER_CAP:
        raise ValueError(f"jet order must be in [0, {ORDER_CAP}], got {order}")


@dataclass(frozen=True)
class Jet:
    """Jet of a map R^n -> R^m at a base point, truncated at `order`."""

    base: np.ndarray
    order: int
    taylor: np.ndarray  # (m, count) Taylor coefficients

    def __post_init__(self):
        _check_order(self.order)
        if self.taylor.ndim != 2:
            raise ValueError("coefficient table must be 2-d")
        if self.taylor.shape[1] != self.ctx.count:
            raise ValueError("coefficient table does not match the order")

    @property
    def src_dim(self) -> int:
        return len(self.base)

    @property
    def tgt_dim(self) -> int:
        return self.taylor.shape[0]

    @property
    def ctx(self) -> MultiIndexContext:
        return context(len(self.base), self.order)

    @classmethod
    def from_raw(cls, base, order: int, raw: np.ndarray) -> "Jet":
        base = np.asarray(base, dtype=float)
        ctx = context(len(base), order)
        return cls(base, order, np.atleast_2d(np.asarray(raw, dtype=float)) / ctx.factorial)

    @classmethod
    def from_taylor_map(cls, tm: TaylorMap) -> "Jet":
        return cls(tm.base.copy(), tm.order, tm.coeffs.copy())

    def value(self) -> np.ndarray:
        return self.taylor[:, 0].copy()

    def jacobian(self) -> np.ndarray:
        if self.order < 1:
            raise ValueError("order-0 jet has no jacobian")
        return self.taylor[:, 1 : 1 + self.src_dim].copy()

    def raw(self, component: int, mu) -> float:
        """Raw derivative d^mu f_component at the base point."""
        pos = self.ctx.pos(mu)
        return float(self.taylor[component, pos] * self.ctx.factorial[pos])

    def raw_table(self) -> np.ndarray:
        return self.taylor * self.ctx.factorial

    def coeff(self, component: int, mu) -> float:
        return float(self.taylor[component, self.ctx.pos(mu)])

    def truncated(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(self.base, order, series.truncate(self.ctx, self.taylor, order))


def identity_jet(base, order: int) -> Jet:
    base = np.asarray(base, dtype=float)
    ctx = context(len(base), order)
    taylor = np.zeros((len(base), ctx.count))
    taylor[:, 0] = base
    if order >= 1:
        taylor[:, 1 : 1 + len(base)] = np.eye(len(base))
    return Jet(base, order, taylor)


def holonomic_section(m: ExprMap, x, order: int) -> Jet:
    """Jet of the map itself at x: the holonomic (integrable) section."""
    _check_order(order)
    return Jet.from_taylor_map(m.taylor_lift(x, order))


def jet_compose(g: Jet, f: Jet) -> Jet:
    """Jet of g o f; g must be based at the value of f."""
    if g.order != f.order:
        raise ValueError("jet orders differ")
    if g.src_dim != f.tgt_dim:
        raise ValueError("dimension mismatch in composition")
    if not np.allclose(g.base, f.value(), rtol=1e-9, atol=1e-9):
        raise ValueError("outer jet is not based at the inner jet's value")
    devs = f.taylor.copy()
    devs[:, 0] = 0.0
    out = series.substitute(f.ctx, g.ctx, g.taylor, devs)
    return Jet(f.base, f.order, out)


def jet_invert(f: Jet) -> Jet:
    """Inverse jet by fixed-point refinement on truncated series.

    Singularity test: |det J| < 1e-12 * maxnorm(J)^n fails.  The affine
    seed is exact through order 1 and each sweep gains one order, so
    order - 1 sweeps finish the job.
    """
    if f.src_dim != f.tgt_dim:
        raise ValueError("only square jets can be inverted")
    if f.order < 1:
        raise ValueError("inversion needs at least order 1")
    n = f.src_dim
    jac = f.jacobian()
    scale = np.max(np.abs(jac))
    det = np.linalg.det(jac)
    if scale == 0.0 or abs(det) < 1e-12 * scale**n:
        raise SingularJetError(f"jacobian determinant {det} below tolerance")
    ainv = np.linalg.inv(jac)
    z0 = f.value()
    ctx = context(n, f.order)
    ident = identity_jet(z0, f.order).taylor
    g = ident.copy()
    g[:, 0] = f.base
    g[:, 1 : 1 + n] = ainv
    fdev = f.taylor.copy()
    fdev[:, 0] = 0.0
    for _ in range(f.order - 1):
        gdev = g.copy()
        gdev[:, 0] = 0.0
        err = series.substitute(ctx, ctx, f.taylor, gdev) - ident
        g = g - ainv @ err
    return Jet(z0, f.order, g)


# Series-valued linear algebra used by the verification modules.  Matrices
# are (p, p, count) arrays of truncated series over a shared context.

def series_matmul(ctx: MultiIndexContext, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p, q = a.shape[0], a.shape[1]
    r = b.shape[1]
    out = np.zeros((p, r, ctx.count))
    for i in range(p):
        for j in range(r):
            for k in range(q):
                series.mul_acc(ctx, a[i, k], b[k, j], out[i, j])
    return out


def series_mat_solve(ctx: MultiIndexContext, m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve M U = B degree by degree; M's constant block must be regular."""
    m0 = m[:, :, 0]
    u = np.zeros_like(b)
    for deg in range(ctx.order + 1):
        lo = ctx.count_up_to(deg - 1) if deg > 0 else 0
        hi = ctx.count_up_to(deg)
        resid = b - series_matmul(ctx, m, u)
        u[:, :, lo:hi] = np.linalg.solve(m0, resid[:, :, lo:hi].reshape(m.shape[0], -1)).reshape(
            b.shape[0], b.shape[1], hi - lo)
    return u


def series_det(ctx: MultiIndexContext, m: np.ndarray) -> np.ndarray:
    """Determinant of a series matrix by cofactor expansion (small p only)."""
    p = m.shape[0]
    if p == 1:
        return m[0, 0].copy()
    out = series.zeros(ctx)
    for j in range(p):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        term = series.mul(ctx, m[0, j], series_det(ctx, minor))
        out += term if j % 2 == 0 else -term
    return out
