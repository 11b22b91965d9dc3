"""Families of transformations z = f(y, x) and their speed calculus.

A family maps source points y (dimension m) to target points z under
parameters x (dimension n).  The two speed fields attached to a family are

    v(z, x) = (df/dx)(g(z, x), x)          target-variables form
    u(y, x) = (df/dy)^{-1} (df/dx)(y, x)   source-variables form

where g(., x) inverts f(., x).  Every spatial or parameter derivative of a
field defined through f is computed from exact jet lifts of the defining
expressions; finite differences appear only inside eps-family oracles, where
the quantity being checked is itself a variational derivative.

Expression variable conventions (fixed, also documented in the README):
  forward map f      over  y1..ym, x1..xn
  inverse map g      over  z1..zm, x1..xn
  eps family         over  y1..ym, x1..xn, eps     (reduces to f at eps = 0)
  lagrangian w       over  v1..v{m*n}, slot v^k_i at flat index k*n + i
  time-dependent 3D fields (vortex, pressure) over z1, z2, z3, t
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .expr import ExprMap
from .quadrature import gauss_rule, tensor_rule
from .sampling import Box, halton_points

__all__ = [
    "InverseSolveError", "DivergenceNotZero", "CurlNotZero",
    "MotionFamily", "SpeedSample", "generalized_speed", "speed_swap_gap",
    "speed_duality_gap", "CompatibilityReport", "compatibility_residual",
    "Theorem3Report", "theorem3_check", "MassReport",
    "mass_conservation_residual", "ELReport", "el_residual",
    "PairingReport", "el_pairing_check", "divergence_at", "vortex_residual",
    "CurlReport", "curl_parametrization_check", "PressureReport",
    "pressure_recovery", "SwellReport", "swell_family", "swell_rows",
    "random_solenoidal_field", "abc_field", "motion_family_from_dict",
    "load_motion_family",
]

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


class InverseSolveError(RuntimeError):
    """The point inversion of f(., x) failed to converge."""


class DivergenceNotZero(ValueError):
    """A check that needs a divergence-free field got a compressible one."""


class CurlNotZero(ValueError):
    """Gradient reconstruction was asked for a field with nonzero curl."""


def _names(prefix: str, count: int) -> list[str]:
    return [f"{prefix}{k + 1}" for k in range(count)]


def _rename(emap: ExprMap, old: str, new: str, count: int) -> ExprMap:
    """Swap the point-variable prefix by printing and reparsing."""
    text = emap.to_text()
    for k in range(count, 0, -1):
        text = re.sub(rf"\b{old}{k}\b", f"{new}{k}", text)
    variables = [new + name[len(old):] if name.startswith(old) else name
                 for name in emap.variables]
    return ExprMap.parse(text, variables)


def _derivative_blocks(lift, split: int):
    """Dense value/jacobian/raw-hessian arrays of an order-2 lift.

    split is only used by callers to slice the variable axis; the lift itself
    determines the total variable count.
    """
    nv = lift.nin
    val = lift.value()
    jac = lift.coeffs[:, 1:1 + nv].copy()
    d2 = np.zeros((lift.nout, nv, nv))
    ctx = lift.ctx
    for a in range(nv):
        for b in range(a, nv):
            mu = [0] * nv
            mu[a] += 1
            mu[b] += 1
            pos = ctx.pos(tuple(mu))
            raw = lift.coeffs[:, pos] * ctx.factorial[pos]
            d2[:, a, b] = raw
            d2[:, b, a] = raw
    return val, jac, d2


@dataclass(frozen=True)
class SpeedSample:
    z: np.ndarray
    x: np.ndarray
    y: np.ndarray
    v: np.ndarray          # (m, n)
    u: np.ndarray          # (m, n)
    delta: float
    rho: float


class _SpeedState:
    """All first derivatives of v, u and rho at one (z, x) sample.

    Assembled from the order-2 jet of f at (y, x) with y = g(z, x); the
    inverse map enters only through the point y, so every entry is exact.
    """

    def __init__(self, fam: "MotionFamily", z: np.ndarray, x: np.ndarray,
                 y: np.ndarray):
        m = fam.m
        lift = fam.forward.taylor_lift(np.concatenate([y, x]), 2)
        val, jac, d2 = _derivative_blocks(lift, m)
        self.z, self.x, self.y = z, x, y
        self.value = val
        self.fy = jac[:, :m]
        self.fx = jac[:, m:]
        self.fyy = d2[:, :m, :m]
        self.fyx = d2[:, :m, m:]
        self.fxx = d2[:, m:, m:]
        try:
            self.fy_inv = np.linalg.inv(self.fy)
        except np.linalg.LinAlgError as exc:
            raise InverseSolveError("singular source jacobian") from exc
        self.delta = float(np.linalg.det(self.fy))
        self.rho = 1.0 / self.delta
        self.v = self.fx.copy()
        self.u = self.fy_inv @ self.fx
        self.gz = self.fy_inv
        self.gx = -self.u
        # dv_z[k, i, l] = d v^k_i / d z^l,  dv_x[k, i, j] = d v^k_i / d x^j
        self.dv_z = np.einsum("kri,rl->kil", self.fyx, self.gz)
        self.dv_x = self.fxx + np.einsum("kri,rj->kij", self.fyx, self.gx)
        # du_y[k, i, r] = d u^k_i / d y^r,  du_x[k, i, j] = d u^k_i / d x^j
        rhs_y = self.fyx - np.einsum("ksr,si->kri", self.fyy, self.u)
        self.du_y = np.einsum("ka,ari->kir", self.fy_inv, rhs_y)
        rhs_x = self.fxx - np.einsum("ksj,si->kij", self.fyx, self.u)
        self.du_x = np.einsum("ka,aij->kij", self.fy_inv, rhs_x)
        # jacobi's formula for the determinant derivatives
        self.ddelta_y = self.delta * np.einsum("ka,akr->r", self.fy_inv, self.fyy)
        self.ddelta_x = self.delta * np.einsum("ka,aki->i", self.fy_inv, self.fyx)
        self.drho_z = -self.rho ** 2 * (self.ddelta_y @ self.gz)
        self.drho_x = -self.rho ** 2 * (self.ddelta_y @ self.gx + self.ddelta_x)

    def sample(self) -> SpeedSample:
        return SpeedSample(self.z, self.x, self.y, self.v, self.u,
                           self.delta, self.rho)


class MotionFamily:
    """A parametrized family of invertible maps, with optional explicit
    inverse and optional eps-variation family."""

    def __init__(self, m: int, n: int, forward: ExprMap,
                 inverse: ExprMap | None = None,
                 variation: ExprMap | None = None,
                 ybox: Box | None = None, xbox: Box | None = None,
                 zbox: Box | None = None, label: str = "family"):
        if len(forward.variables) != m + n or len(forward) != m:
            raise ValueError("forward map must send y1..ym, x1..xn to m values")
        if inverse is not None and (len(inverse.variables) != m + n
                                    or len(inverse) != m):
            raise ValueError("inverse map must send z1..zm, x1..xn to m values")
        if variation is not None and (len(variation.variables) != m + n + 1
                                      or len(variation) != m):
            raise ValueError("variation map must add a trailing eps variable")
        self.m, self.n = m, n
        self.forward = forward
        self.inverse = inverse
        self.variation = variation
        self.ybox = tuple(tuple(map(float, r)) for r in (ybox or [(-1.0, 1.0)] * m))
        self.xbox = tuple(tuple(map(float, r)) for r in (xbox or [(-1.0, 1.0)] * n))
        self.zbox = tuple(tuple(map(float, r)) for r in (zbox or self.ybox))
        self.label = label
        self._last_solution: np.ndarray | None = None

    @classmethod
    def parse(cls, m: int, n: int, forward: str, inverse: str | None = None,
              variation: str | None = None, **kw) -> "MotionFamily":
        fvars = _names("y", m) + _names("x", n)
        gvars = _names("z", m) + _names("x", n)
        fmap = ExprMap.parse(forward, fvars)
        gmap = ExprMap.parse(inverse, gvars) if inverse else None
        vmap = ExprMap.parse(variation, fvars + ["eps"]) if variation else None
        return cls(m, n, fmap, inverse=gmap, variation=vmap, **kw)

    def forward_value(self, y: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.forward.eval(np.concatenate([y, x]))

    def invert(self, z: np.ndarray, x: np.ndarray,
               seed: np.ndarray | None = None) -> np.ndarray:
        z = np.asarray(z, float)
        x = np.asarray(x, float)
        if self.inverse is not None:
            return self.inverse.eval(np.concatenate([z, x]))
        if seed is None:
            if self._last_solution is not None:
                seed = self._last_solution
            else:
                seed = np.array([0.5 * (lo + hi) for lo, hi in self.ybox])
        y = np.asarray(seed, float).copy()
        for _ in range(NEWTON_MAX_ITER):
            lift = self.forward.taylor_lift(np.concatenate([y, x]), 1)
            resid = lift.value() - z
            if float(np.max(np.abs(resid))) < NEWTON_TOL:
                self._last_solution = y.copy()
                return y
            jac = lift.jacobian()[:, :self.m]
            try:
                step = np.linalg.solve(jac, resid)
            except np.linalg.LinAlgError as exc:
                raise InverseSolveError(
                    f"singular jacobian while inverting {self.label}") from exc
            y = y - step
        raise InverseSolveError(
            f"newton stalled above {NEWTON_TOL} after {NEWTON_MAX_ITER} steps")

    def state(self, z: np.ndarray, x: np.ndarray,
              y0: np.ndarray | None = None) -> _SpeedState:
        z = np.asarray(z, float)
        x = np.asarray(x, float)
        y = np.asarray(y0, float) if y0 is not None else self.invert(z, x)
        return _SpeedState(self, z, x, y)

    def state_at_source(self, y: np.ndarray, x: np.ndarray) -> _SpeedState:
        y = np.asarray(y, float)
        x = np.asarray(x, float)
        return _SpeedState(self, self.forward_value(y, x), x, y)

    def sample_zx(self, count: int, seed: int) -> np.ndarray:
        return halton_points(self.zbox + self.xbox, count, seed)

    def sample_yx(self, count: int, seed: int) -> np.ndarray:
        return halton_points(self.ybox + self.xbox, count, seed)

    def validate(self, count: int = 8, seed: int = 417) -> float:
        """Round-trip gap max |f(g(z, x), x) - z| over low-discrepancy points."""
        worst = 0.0
        for zx in self.sample_zx(count, seed):
            z, x = zx[:self.m], zx[self.m:]
            y = self.invert(z, x)
            worst = max(worst,
                        float(np.max(np.abs(self.forward_value(y, x) - z))))
            self.state(z, x, y0=y)
        return worst

    def swapped(self) -> "MotionFamily":
        """The inverse family: forward and inverse maps exchanged."""
        if self.inverse is None:
            raise ValueError("swapping requires an explicit inverse map")
        fwd = _rename(self.inverse, "z", "y", self.m)
        inv = _rename(self.forward, "y", "z", self.m)
        return MotionFamily(self.m, self.n, fwd, inverse=inv,
                            ybox=self.zbox, xbox=self.xbox, zbox=self.ybox,
                            label=self.label + ":swapped")


def motion_family_from_dict(data: dict) -> MotionFamily:
    box = data.get("box", {})
    return MotionFamily.parse(
        int(data["m"]), int(data["n"]), data["f"],
        inverse=data.get("g"), variation=data.get("variation"),
        ybox=box.get("y"), xbox=box.get("x"), zbox=box.get("z"),
        label=data.get("label", "family"))


def load_motion_family(path: str | Path) -> MotionFamily:
    with open(path, "r", encoding="utf-8") as handle:
        return motion_family_from_dict(json.load(handle))


def generalized_speed(fam: MotionFamily, z: np.ndarray,
                      x: np.ndarray) -> SpeedSample:
    return fam.state(z, x).sample()


def speed_duality_gap(fam: MotionFamily, samples_yx: np.ndarray) -> float:
    """max over samples of |df/dx - (df/dy) u| and |df/dx - v(f(y,x),x)|."""
    worst = 0.0
    for yx in samples_yx:
        y, x = yx[:fam.m], yx[fam.m:]
        st = fam.state_at_source(y, x)
        worst = max(worst, float(np.max(np.abs(st.fx - st.fy @ st.u))))
        image = fam.state(st.value, x)
        worst = max(worst, float(np.max(np.abs(st.fx - image.v))))
    return worst


def speed_swap_gap(fam: MotionFamily, samples: np.ndarray) -> float:
    """Exchanging f and g negates and swaps the two speed forms."""
    swapped = fam.swapped()
    worst = 0.0
    for zx in samples:
        z, x = zx[:fam.m], zx[fam.m:]
        st = fam.state(z, x)
        dual = swapped.state_at_source(z, x)
        worst = max(worst, float(np.max(np.abs(dual.v + st.u))),
                    float(np.max(np.abs(dual.u + st.v))))
    return worst


@dataclass(frozen=True)
class CompatibilityReport:
    v_residual: float
    u_residual: float
    vacuous: bool

    @property
    def max_residual(self) -> float:
        return max(self.v_residual, self.u_residual)


def compatibility_residual(fam: MotionFamily,
                           samples: np.ndarray) -> CompatibilityReport:
    """Parameter-direction curls of v and u corrected by vector brackets.

    The v-form residual is d_i v_j - d_j v_i + [v_i, v_j]; the u-form carries
    the bracket with the opposite sign.  Both vanish identically for any
    well-formed family, so a nonzero value flags a defect, not physics.
    """
    if fam.n < 2:
        return CompatibilityReport(0.0, 0.0, True)
    worst_v = worst_u = 0.0
    for zx in samples:
        st = fam.state(zx[:fam.m], zx[fam.m:])
        for i in range(fam.n):
            for j in range(i + 1, fam.n):
                rv = (st.dv_x[:, j, i] - st.dv_x[:, i, j]
                      + st.dv_z[:, j, :] @ st.v[:, i]
                      - st.dv_z[:, i, :] @ st.v[:, j])
                ru = (st.du_x[:, j, i] - st.du_x[:, i, j]
                      - st.du_y[:, j, :] @ st.u[:, i]
                      + st.du_y[:, i, :] @ st.u[:, j])
                worst_v = max(worst_v, float(np.max(np.abs(rv))))
                worst_u = max(worst_u, float(np.max(np.abs(ru))))
    return CompatibilityReport(worst_v, worst_u, False)


def _variation_blocks(fam: MotionFamily, y: np.ndarray, x: np.ndarray):
    """Raw eps-derivatives of the variation family at eps = 0.

    Returns (df, df_y, df_x): the vertical field delta f = dF/deps and its
    first y- and x-derivatives, read off mixed slots of an order-2 lift.
    """
    if fam.variation is None:
        raise ValueError("family carries no variation map")
    m, n = fam.m, fam.n
    nv = m + n + 1
    lift = fam.variation.taylor_lift(np.concatenate([y, x, [0.0]]), 2)
    ctx = lift.ctx
    mu = [0] * nv
    mu[-1] = 1
    pos = ctx.pos(tuple(mu))
    df = lift.coeffs[:, pos] * ctx.factorial[pos]
    df_y = np.empty((m, m))
    df_x = np.empty((m, n))
    for a in range(m + n):
        mu = [0] * nv
        mu[-1] = 1
        mu[a] += 1
        pos = ctx.pos(tuple(mu))
        raw = lift.coeffs[:, pos] * ctx.factorial[pos]
        if a < m:
            df_y[:, a] = raw
        else:
            df_x[:, a - m] = raw
    return df, df_y, df_x


def _variation_state(fam: MotionFamily, z: np.ndarray, x: np.ndarray,
                     eps: float, seed: np.ndarray):
    """Invert the eps-family at fixed (z, x) and return (v_eps, delta_eps)."""
    m, n = fam.m, fam.n
    y = np.asarray(seed, float).copy()
    point = np.concatenate([y, x, [eps]])
    for _ in range(NEWTON_MAX_ITER):
        lift = fam.variation.taylor_lift(point, 1)
        resid = lift.value() - z
        if float(np.max(np.abs(resid))) < NEWTON_TOL:
            jac = lift.jacobian()
            return jac[:, m:m + n], float(np.linalg.det(jac[:, :m]))
        try:
            y = y - np.linalg.solve(lift.jacobian()[:, :m], resid)
        except np.linalg.LinAlgError as exc:
            raise InverseSolveError("singular eps-family jacobian") from exc
        point = np.concatenate([y, x, [eps]])
    raise InverseSolveError("eps-family inversion stalled")


@dataclass(frozen=True)
class Theorem3Report:
    exact_gap: float       # |(d eta/dx + [v, eta]) - (df/dy)(d xi/dx)|
    fd_gap: float          # one-sided eps quotient against the exact value
    fd_gap_half: float
    base_gap: float        # |variation at eps = 0 - forward map|

    @property
    def ratio(self) -> float:
        return self.fd_gap / self.fd_gap_half if self.fd_gap_half else math.nan


def theorem3_check(fam: MotionFamily, samples: np.ndarray,
                   eps: float = 1e-3) -> Theorem3Report:
    """Two exact routes to delta v, plus an eps-family quotient oracle.

    Route one (target variables): delta v = d eta/dx + [v, eta] with
    eta(z, x) = delta f(g(z, x), x).  Route two (source variables):
    delta v = (df/dy)(d xi/dx) with xi = (df/dy)^{-1} delta f.  The routes
    agree identically; the finite-difference speed of the eps family must
    approach them at first order in eps.
    """
    if fam.variation is None:
        raise ValueError("theorem3_check needs a variation family")
    m = fam.m
    base_gap = exact_gap = 0.0
    fd_gap = {eps: 0.0, eps / 2.0: 0.0}
    for zx in samples:
        z, x = zx[:m], zx[m:]
        st = fam.state(z, x)
        base_gap = max(base_gap, float(np.max(np.abs(
            fam.variation.eval(np.concatenate([st.y, x, [0.0]])) - st.value))))
        df, df_y, df_x = _variation_blocks(fam, st.y, x)
        eta = df
        deta_z = df_y @ st.gz
        deta_x = df_x + df_y @ st.gx
        route1 = (deta_x + deta_z @ st.v
                  - np.einsum("kil,l->ki", st.dv_z, eta))
        xi = st.fy_inv @ df
        dxi_x = st.fy_inv @ (df_x - np.einsum("kri,r->ki", st.fyx, xi))
        route2 = st.fy @ dxi_x
        exact_gap = max(exact_gap, float(np.max(np.abs(route1 - route2))))
        for e in fd_gap:
            v_eps, _ = _variation_state(fam, z, x, e, st.y)
            quotient = (v_eps - st.v) / e
            fd_gap[e] = max(fd_gap[e],
                            float(np.max(np.abs(quotient - route1))))
    return Theorem3Report(exact_gap, fd_gap[eps], fd_gap[eps / 2.0], base_gap)


@dataclass(frozen=True)
class MassReport:
    residual: float
    variation_gap: float
    variation_gap_half: float

    @property
    def ratio(self) -> float:
        return (self.variation_gap / self.variation_gap_half
                if self.variation_gap_half else math.nan)


def mass_conservation_residual(fam: MotionFamily, samples: np.ndarray,
                               eps: float = 1e-3) -> MassReport:
    """d rho/dx^i + d(rho v^k_i)/dz^k = 0, plus the eps-variation of rho.

    The variation oracle checks delta rho = -d(rho eta^k)/dz^k by one-sided
    quotients whenever the family carries a variation map; both eps gaps are
    reported so the caller can confirm first-order decay.
    """
    m = fam.m
    worst = 0.0
    var_gaps = [0.0, 0.0]
    for zx in samples:
        z, x = zx[:m], zx[m:]
        st = fam.state(z, x)
        div_rv = st.drho_z @ st.v + st.rho * np.einsum("kik->i", st.dv_z)
        worst = max(worst, float(np.max(np.abs(st.drho_x + div_rv))))
        if fam.variation is not None:
            df, df_y, _ = _variation_blocks(fam, st.y, x)
            exact = -(st.drho_z @ df + st.rho * np.trace(df_y @ st.gz))
            for slot, e in enumerate((eps, eps / 2.0)):
                _, delta_eps = _variation_state(fam, z, x, e, st.y)
                quotient = (1.0 / delta_eps - st.rho) / e
                var_gaps[slot] = max(var_gaps[slot], abs(quotient - exact))
    return MassReport(worst, var_gaps[0], var_gaps[1])


def _momentum(w: ExprMap, v: np.ndarray, m: int, n: int):
    """Gradient and hessian of the lagrangian in the flattened v slots."""
    if len(w.variables) != m * n or len(w) != 1:
        raise ValueError(f"lagrangian must be scalar over v1..v{m * n}")
    lift = w.taylor_lift(np.asarray(v, float).reshape(m * n), 2)
    grad = lift.jacobian()[0].reshape(m, n)
    hess = np.empty((m * n, m * n))
    ctx = lift.ctx
    for a in range(m * n):
        for b in range(a, m * n):
            mu = [0] * (m * n)
            mu[a] += 1
            mu[b] += 1
            pos = ctx.pos(tuple(mu))
            hess[a, b] = hess[b, a] = lift.coeffs[0, pos] * ctx.factorial[pos]
    return grad, hess


def _el_z(st: _SpeedState, w: ExprMap, m: int, n: int) -> np.ndarray:
    """rho (dV^i_k/dx^i + v^l_i dV^i_k/dz^l) with V = dw/dv at v(z, x)."""
    _, hess = _momentum(w, st.v, m, n)
    h = hess.reshape(m, n, m, n)
    dv_dx = np.einsum("kilp,lpi->k", h, st.dv_x)
    conv = np.einsum("kilp,lpr,ri->k", h, st.dv_z, st.v)
    return st.rho * (dv_dx + conv)


def _el_y(fam: MotionFamily, w: ExprMap, y: np.ndarray,
          x: np.ndarray) -> np.ndarray:
    """dU^i_k/dx^i with U^i_k(y, x) = V^i_k(df/dx(y, x)): the source form."""
    st = fam.state_at_source(y, x)
    _, hess = _momentum(w, st.fx, fam.m, fam.n)
    h = hess.reshape(fam.m, fam.n, fam.m, fam.n)
    return np.einsum("kilp,lpi->k", h, st.fxx)


@dataclass(frozen=True)
class ELReport:
    z_values: np.ndarray     # (M, m) residual at target-variable samples
    y_values: np.ndarray     # (M, m) source-route residual at the preimages
    dual_gap: float          # max |E_Z(f(y,x),x) - rho E_Y(y,x)|

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.z_values))) if self.z_values.size else 0.0


def el_residual(fam: MotionFamily, w: ExprMap,
                samples: np.ndarray) -> ELReport:
    """Euler-Lagrange residual of the action density rho w(v), both forms.

    The target form is evaluated through (z, x)-derivatives at the sample;
    the source form through (y, x)-derivatives at the preimage.  They satisfy
    E_Z(f(y, x), x) = rho(y, x) E_Y(y, x) identically, which is reported as
    the dual gap.
    """
    m = fam.m
    z_vals = np.empty((len(samples), m))
    y_vals = np.empty((len(samples), m))
    dual = 0.0
    for s, zx in enumerate(samples):
        z, x = zx[:m], zx[m:]
        st = fam.state(z, x)
        ez = _el_z(st, w, m, fam.n)
        ey = _el_y(fam, w, st.y, x)
        z_vals[s] = ez
        y_vals[s] = ey
        dual = max(dual, float(np.max(np.abs(ez - st.rho * ey))))
    return ELReport(z_vals, y_vals, dual)


@dataclass(frozen=True)
class PairingReport:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def _smooth_bump(point: np.ndarray, box: Box) -> float:
    out = 1.0
    for value, (lo, hi) in zip(point, box):
        t = (2.0 * float(value) - lo - hi) / (hi - lo)
        if abs(t) >= 1.0:
            return 0.0
        out *= math.exp(1.0 - 1.0 / (1.0 - t * t))
    return out


def _panel_axis(lo: float, hi: float, panels: int,
                order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule: `panels` equal subintervals of `order` each."""
    nodes, weights = [], []
    edges = np.linspace(lo, hi, panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        part, wts = gauss_rule(float(a), float(b), order)
        nodes.extend(part)
        weights.extend(wts)
    return np.asarray(nodes), np.asarray(weights)


def el_pairing_check(fam: MotionFamily, w: ExprMap, support: Box,
                     direction: Sequence[float], nquad: int = 16,
                     panels: int = 4) -> PairingReport:
    """Weak-form equality of the two Euler-Lagrange residuals.

    lhs integrates E_Z against a smooth compactly supported test field eta
    over target-variable quadrature nodes; rhs integrates E_Y against the
    pulled-back variation delta f = eta(f(y, x), x) over source nodes.  The
    support box must sit inside the image of the source box for every
    parameter value, so the change of variables holds with no boundary terms.
    The source grid is panelled: the test field lives on the preimage of the
    support box, a small curved region a single Gauss rule undersamples.
    """
    m = fam.m
    direction = np.asarray(direction, float)
    support = tuple(tuple(map(float, r)) for r in support)

    def eta(z: np.ndarray, x: np.ndarray) -> np.ndarray:
        return direction * (_smooth_bump(z, support)
                            * _smooth_bump(x, fam.xbox))

    znodes, zweights = tensor_rule(support + fam.xbox, nquad)
    lhs = 0.0
    for node, weight in zip(znodes, zweights):
        z, x = node[:m], node[m:]
        st = fam.state(z, x)
        lhs += weight * float(_el_z(st, w, m, fam.n) @ eta(z, x))

    axes = [_panel_axis(lo, hi, panels, max(nquad // 2, 6))
            for lo, hi in fam.ybox]
    axes += [gauss_rule(lo, hi, nquad) for lo, hi in fam.xbox]
    grids = np.meshgrid(*(a[0] for a in axes), indexing="ij")
    ynodes = np.stack([g.ravel() for g in grids], axis=-1)
    yweights = np.ones(len(ynodes))
    for g in np.meshgrid(*(a[1] for a in axes), indexing="ij"):
        yweights *= g.ravel()
    rhs = 0.0
    for node, weight in zip(ynodes, yweights):
        y, x = node[:m], node[m:]
        test = eta(fam.forward_value(y, x), x)
        if np.any(test):
            rhs += weight * float(_el_y(fam, w, y, x) @ test)
    return PairingReport(lhs, rhs)


def _field_state(field: ExprMap, z: np.ndarray, t: float):
    """Order-2 lift of a time-dependent 3D field split into blocks.

    Returns (val, dz, dt, dzz, dzt) with dz[k, l] = d v^k / d z^l,
    dzz[k, l, r] the raw second z-derivatives and dzt[k, l] the mixed ones.
    """
    if len(field.variables) != 4 or len(field) != 3:
        raise ValueError("field must map z1, z2, z3, t to three components")
    lift = field.taylor_lift(np.array([z[0], z[1], z[2], float(t)]), 2)
    val, jac, d2 = _derivative_blocks(lift, 3)
    return val, jac[:, :3], jac[:, 3], d2[:, :3, :3], d2[:, :3, 3]


def _curl(mat: np.ndarray) -> np.ndarray:
    """Curl from a derivative matrix mat[k, l] = d a^k / d z^l."""
    return np.array([mat[2, 1] - mat[1, 2],
                     mat[0, 2] - mat[2, 0],
                     mat[1, 0] - mat[0, 1]])


def divergence_at(field: ExprMap, z: np.ndarray, t: float) -> float:
    _, dz, _, _, _ = _field_state(field, z, t)
    return float(np.trace(dz))


def vortex_residual(field: ExprMap, samples: np.ndarray,
                    enforce_divergence: bool = True,
                    div_tol: float = 1e-8) -> float:
    """Residual of d omega/dt + [v, omega] - (1/2) curl gamma.

    gamma = dv/dt + (v . grad) v is the acceleration, omega = (1/2) curl v.
    The identity holds exactly iff div v = 0; the compressible defect is
    omega div v, so with enforcement off the residual reports that term.
    """
    worst = 0.0
    for zt in samples:
        z, t = zt[:3], float(zt[3])
        val, dz, dt, dzz, dzt = _field_state(field, z, t)
        div = float(np.trace(dz))
        if enforce_divergence and abs(div) > div_tol:
            raise DivergenceNotZero(f"div v = {div:.3e} at z={z}, t={t}")
        omega = 0.5 * _curl(dz)
        domega_t = 0.5 * _curl(dzt)
        domega_z = np.empty((3, 3))
        for r in range(3):
            domega_z[:, r] = 0.5 * _curl(dzz[:, :, r])
        # gamma^k = dv^k/dt + v^l dv^k/dz^l and its z-derivative
        dgamma_z = (dzt + np.einsum("klr,l->kr", dzz, val)
                    + dz @ dz)
        lhs = 0.5 * _curl(dgamma_z)
        rhs = domega_t + domega_z @ val - dz @ omega
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


@dataclass(frozen=True)
class CurlReport:
    divergence: float
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def curl_parametrization_check(theta: ExprMap, box: Box,
                               samples: np.ndarray, nquad: int = 8,
                               seed: int = 90) -> CurlReport:
    """div(curl theta) = 0 at samples, and self-adjointness of curl.

    The pairing integral uses two random polynomial fields damped by the
    canonical boundary bump, so the integrands are polynomial and the
    Gauss rule is exact; the identity <curl a, b> = <a, curl b> then holds
    to roundoff.
    """
    if len(theta.variables) != 3 or len(theta) != 3:
        raise ValueError("theta must map z1, z2, z3 to three components")
    worst_div = 0.0
    for z in samples:
        lift = theta.taylor_lift(np.asarray(z, float), 2)
        _, _, d2 = _derivative_blocks(lift, 3)
        eta_z = np.empty((3, 3))
        for r in range(3):
            eta_z[:, r] = _curl(d2[:, :, r])
        worst_div = max(worst_div, abs(float(np.trace(eta_z))))

    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(2):
        comps = []
        for _ in range(3):
            coeffs = rng.uniform(-1.0, 1.0, size=(2, 2, 2))
            comps.append(_poly_text(coeffs, ("z1", "z2", "z3")))
        bump = " * ".join(
            f"(z{a + 1} - {lo!r})^2 * ({hi!r} - z{a + 1})^2"
            for a, (lo, hi) in enumerate(box))
        text = ", ".join(f"({bump}) * ({comp})" for comp in comps)
        fields.append(ExprMap.parse(text, ["z1", "z2", "z3"]))
    a_field, b_field = fields

    def curl_of(emap: ExprMap, z: np.ndarray) -> np.ndarray:
        lift = emap.taylor_lift(z, 1)
        return _curl(lift.jacobian())

    nodes, weights = tensor_rule(box, nquad)
    lhs = rhs = 0.0
    for node, weight in zip(nodes, weights):
        a_val = a_field.eval(node)
        b_val = b_field.eval(node)
        lhs += weight * float(curl_of(a_field, node) @ b_val)
        rhs += weight * float(a_val @ curl_of(b_field, node))
    return CurlReport(worst_div, lhs, rhs)


def _poly_text(coeffs: np.ndarray, names: Sequence[str]) -> str:
    terms = []
    for index in np.ndindex(*coeffs.shape):
        factors = [repr(float(coeffs[index]))]
        for power, name in zip(index, names):
            factors.extend([name] * power)
        terms.append(" * ".join(factors))
    return " + ".join(terms)


@dataclass(frozen=True)
class PressureReport:
    values: np.ndarray       # lambda at the requested points, first path
    path_gap: float          # disagreement between the two staircase paths
    curl_max: float

    @property
    def max_residual(self) -> float:
        return self.path_gap


def pressure_recovery(field: ExprMap, t: float, points: np.ndarray,
                      base: Sequence[float], nquad: int = 32,
                      curl_tol: float = 1e-8) -> PressureReport:
    """Reconstruct lambda with grad lambda = -gamma by staircase integrals.

    gamma = dv/dt + (v . grad) v must be curl-free at the requested time;
    lambda is integrated from the base point along axis-ordered segments,
    once in order (1, 2, 3) and once in (3, 2, 1), and the two results must
    agree up to quadrature error.
    """
    base = np.asarray(base, float)

    def gamma_at(z: np.ndarray) -> np.ndarray:
        val, dz, dt, _, _ = _field_state(field, z, t)
        return dt + dz @ val

    worst_curl = 0.0
    for z in points:
        val, dz, _, dzz, dzt = _field_state(field, z, t)
        dgamma_z = dzt + np.einsum("klr,l->kr", dzz, val) + dz @ dz
        worst_curl = max(worst_curl, float(np.max(np.abs(_curl(dgamma_z)))))
    if worst_curl > curl_tol:
        raise CurlNotZero(f"max |curl gamma| = {worst_curl:.3e}")

    def staircase(z: np.ndarray, order: Sequence[int]) -> float:
        total = 0.0
        current = base.copy()
        for axis in order:
            lo, hi = float(current[axis]), float(z[axis])
            nodes, weights = gauss_rule(lo, hi, nquad)
            for s, weight in zip(nodes, weights):
                probe = current.copy()
                probe[axis] = s
                total += weight * gamma_at(probe)[axis]
            current[axis] = z[axis]
        return -total

    first = np.array([staircase(z, (0, 1, 2)) for z in points])
    second = np.array([staircase(z, (2, 1, 0)) for z in points])
    gap = float(np.max(np.abs(first - second))) if len(points) else 0.0
    return PressureReport(first, gap, worst_curl)


def random_solenoidal_field(seed: int, degree: int = 2,
                            time_scale: float = 0.3) -> ExprMap:
    """curl of a random polynomial potential in (z, t): divergence-free by
    construction, time-dependent through a polynomial t factor."""
    rng = np.random.default_rng(seed)
    size = (degree + 1,) * 3 + (2,)
    potential = [rng.uniform(-1.0, 1.0, size=size) for _ in range(3)]

    def diff(coeffs: np.ndarray, axis: int) -> np.ndarray:
        out = np.zeros_like(coeffs)
        length = coeffs.shape[axis]
        for power in range(1, length):
            src = [slice(None)] * 4
            dst = [slice(None)] * 4
            src[axis] = power
            dst[axis] = power - 1
            out[tuple(dst)] += power * coeffs[tuple(src)]
        return out

    comps = [
        diff(potential[2], 1) - diff(potential[1], 2),
        diff(potential[0], 2) - diff(potential[2], 0),
        diff(potential[1], 0) - diff(potential[0], 1),
    ]
    scaled = []
    for comp in comps:
        comp = comp.copy()
        comp[..., 1] *= time_scale
        scaled.append(_poly_text(comp, ("z1", "z2", "z3", "t")))
    return ExprMap.parse(", ".join(scaled), ["z1", "z2", "z3", "t"])


def abc_field(a: float = 1.0, b: float = 1.0, c: float = 1.0) -> ExprMap:
    """The classical Beltrami benchmark field, steady and divergence-free."""
    text = (f"{a!r} * sin(z3) + {c!r} * cos(z2), "
            f"{b!r} * sin(z1) + {a!r} * cos(z3), "
            f"{c!r} * sin(z2) + {b!r} * cos(z1)")
    return ExprMap.parse(text, ["z1", "z2", "z3", "t"])


@dataclass(frozen=True)
class SwellReport:
    jacobian_drift: float        # time variation of det d(x,y)/d(a,b)
    jacobian_formula_gap: float  # against 1 - k^2 R^2 (balanced case only)
    circle_gap: float            # | |f - label| - R(b) |
    moving_frame_gap: float      # stationarity after the x - (omega/k) t shift

    @property
    def max_residual(self) -> float:
        return max(self.jacobian_drift, self.circle_gap,
                   self.moving_frame_gap)


def swell_family(R0: float, k: float, omega: float, c: float,
                 decay: float | None = None,
                 ybox: Box | None = None, tmax: float = 6.0,
                 nlabels: int = 24, ntimes: int = 9,
                 seed: int = 311) -> tuple[MotionFamily, SwellReport]:
    """Rolling-wave family x = a + R(b) cos(omega t - phi(a)), phi = k a + c.

    The balanced choice R(b) = R0 exp(-k b) makes the label-space jacobian
    time-independent (equal to 1 - k^2 R^2), trajectories circles of radius
    R(b), and the map stationary in the frame moving at speed omega / k.
    Passing decay != k deliberately breaks the balance: the jacobian then
    oscillates in time and the report shows it.
    """
    if R0 < 0.0 or k <= 0.0:
        raise ValueError("need R0 >= 0 and k > 0")
    rate = k if decay is None else float(decay)
    radius = f"{R0!r} * exp(-{rate!r} * y2)"
    theta = f"{omega!r} * x1 - ({k!r} * y1 + {c!r})"
    fam = MotionFamily.parse(
        2, 1,
        f"y1 + ({radius}) * cos({theta}), y2 + ({radius}) * sin({theta})",
        ybox=ybox or ((-1.0, 1.0), (0.0, 2.0)), xbox=((0.0, tmax),),
        label="swell")

    labels = halton_points(fam.ybox, nlabels, seed)
    times = np.linspace(0.0, tmax, ntimes)
    drift = formula = circle = frame = 0.0
    speed = omega / k
    for a, b in labels:
        rb = R0 * math.exp(-rate * b)
        dets = []
        for t in times:
            st = fam.state_at_source(np.array([a, b]), np.array([t]))
            dets.append(st.delta)
            circle = max(circle, abs(
                math.hypot(st.value[0] - a, st.value[1] - b) - rb))
            shifted = fam.forward_value(np.array([a - speed * t, b]),
                                        np.array([0.0]))
            moving = np.array([st.value[0] - speed * t, st.value[1]])
            frame = max(frame, float(np.max(np.abs(moving - shifted))))
        dets = np.array(dets)
        drift = max(drift, float(np.max(np.abs(dets - dets[0]))))
        if decay is None:
            formula = max(formula, float(np.max(np.abs(
                dets - (1.0 - k * k * rb * rb)))))
    return fam, SwellReport(drift, formula, circle, frame)


def swell_rows(R0: float, k: float, omega: float, c: float,
               labels: Sequence[tuple[float, float]],
               times: Sequence[float]) -> list[tuple[float, ...]]:
    """Trajectory table (t, a, b, x, y, xbar, ybar), one block per label."""
    rows = []
    speed = omega / k
    for a, b in labels:
        a, b = float(a), float(b)
        radius = R0 * math.exp(-k * b)
        phase = k * a + c
        for t in times:
            t = float(t)
            angle = omega * t - phase
            x = a + radius * math.cos(angle)
            y = b + radius * math.sin(angle)
            rows.append((t, a, b, x, y, x - speed * t, y))
    return rows
