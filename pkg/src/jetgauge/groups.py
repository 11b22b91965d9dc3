"""Finite-dimensional Lie groups in a single chart: gauge fields built from
group-valued maps, their curvature, variations, and dual residuals.

Conventions.  Composition m and inverse come as expression maps over chart
coordinates a1..ap, b1..bp.  The left form matrix at a is omega(a) =
(dm(a, b)/db at b = e)^(-1); a body gauge field is A_i = omega(a(x)) d_i a.
Structure constants follow the action convention: [l, m]^tau =
c^tau_{rho sigma} l^rho m^sigma with c read off the chart as

    c^tau_{rho sigma} = d2 m^tau / da^sigma db^rho - d2 m^tau / da^rho db^sigma

at (e, e), which matches the bracket of action generator fields and makes
the curvature of every pulled-back field vanish identically.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from importlib import resources
import numpy as np

from . import series
from ._multiindex import context
from .expr import ExprMap
from .sampling import halton_points

__all__ = [
    "InconsistentGroupLaw", "GridTooCoarse", "NotInjectiveYet", "GroupAction",
    "LieGroupSpec", "Grid", "GaugeField", "CurvatureField", "load_group_spec",
    "maurer_cartan_pullback", "right_pullback", "free_gauge_field", "curvature",
    "group_exp", "variation_body", "variation_space", "variation_body_fd",
    "variation_space_fd", "adjoint_matrix", "el_body_residual",
    "el_space_residual", "linear_gauge_d", "spencer_from_action",
]


class InconsistentGroupLaw(ValueError):
    """Group axioms or the Jacobi identity fail beyond tolerance."""


class GridTooCoarse(ValueError):
    """Finite-difference curvature needs at least five nodes per axis."""


class NotInjectiveYet(ValueError):
    """The action's section map has deficient rank at this jet order."""


@dataclass(frozen=True)
class GroupAction:
    dim: int
    box: tuple[tuple[float, float], ...]
    generators: tuple[ExprMap, ...]   # one map per group parameter


@dataclass(frozen=True)
class LieGroupSpec:
    label: str
    dim: int
    identity: np.ndarray
    box: tuple[tuple[float, float], ...]
    compose: ExprMap
    inverse: ExprMap
    action: GroupAction | None = None

    def mul(self, a, b) -> np.ndarray:
        return self.compose.eval(np.concatenate([a, b]))

    def inv(self, a) -> np.ndarray:
        return self.inverse.eval(np.asarray(a, dtype=float))

    def sample_points(self, count: int, seed: int) -> np.ndarray:
        return halton_points(self.box, count, seed)

    def validate(self, tol: float = 1e-9) -> None:
        e = self.identity
        pts = self.sample_points(8, seed=20210)
        for k, a in enumerate(pts):
            b = pts[(k + 3) % len(pts)]
            c = pts[(k + 5) % len(pts)]
            checks = [
                np.max(np.abs(self.mul(a, e) - a)),
                np.max(np.abs(self.mul(e, a) - a)),
                np.max(np.abs(self.mul(a, self.inv(a)) - e)),
                np.max(np.abs(self.mul(self.inv(a), a) - e)),
                np.max(np.abs(self.mul(a, self.mul(b, c)) - self.mul(self.mul(a, b), c))),
            ]
            worst = max(checks)
            if worst > tol:
                raise InconsistentGroupLaw(
                    f"{self.label}: group axioms violated by {worst:.3e} at sample {k}")

    def structure_constants(self, tol: float = 1e-8) -> np.ndarray:
        p = self.dim
        lift = self.compose.taylor_lift(np.concatenate([self.identity, self.identity]), 2)
        c = np.zeros((p, p, p))
        for tau in range(p):
            for rho in range(p):
                for sigma in range(p):
                    mu1 = _mixed_index(p, sigma, rho)
                    mu2 = _mixed_index(p, rho, sigma)
                    c[tau, rho, sigma] = lift.raw(tau, mu1) - lift.raw(tau, mu2)
        resid = jacobi_residual(c)
        if resid > tol:
            raise InconsistentGroupLaw(
                f"{self.label}: Jacobi residual {resid:.3e} exceeds {tol}")
        return c


def _mixed_index(p: int, a_slot: int, b_slot: int) -> tuple:
    mu = [0] * (2 * p)
    mu[a_slot] += 1
    mu[p + b_slot] += 1
    return tuple(mu)


def bracket(c: np.ndarray, lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return np.einsum("trs,r,s->t", c, lam, mu)


def jacobi_residual(c: np.ndarray) -> float:
    p = c.shape[0]
    eye = np.eye(p)
    worst = 0.0
    for a in range(p):
        for b in range(p):
            for d in range(p):
                total = (bracket(c, bracket(c, eye[a], eye[b]), eye[d])
                         + bracket(c, bracket(c, eye[b], eye[d]), eye[a])
                         + bracket(c, bracket(c, eye[d], eye[a]), eye[b]))
                worst = max(worst, float(np.max(np.abs(total))))
    return worst


def _group_vars(p: int) -> tuple[list[str], list[str]]:
    return [f"a{k + 1}" for k in range(p)], [f"b{k + 1}" for k in range(p)]


def load_group_spec(name: str) -> LieGroupSpec:
    """Load a group chart from JSON: an explicit path, a file in the
    directory named by JETGAUGE_FIXTURES, or a bundled fixture name."""
    if os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        override = os.environ.get("JETGAUGE_FIXTURES")
        candidate = os.path.join(override, f"{name}.json") if override else None
        if candidate and os.path.exists(candidate):
            with open(candidate, encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            text = resources.files("jetgauge.fixtures").joinpath(f"{name}.json").read_text()
            data = json.loads(text)
    return group_spec_from_dict(data)


def group_spec_from_dict(data: dict) -> LieGroupSpec:
    p = int(data["dim"])
    avars, bvars = _group_vars(p)
    compose = ExprMap.parse(data["compose"], avars + bvars)
    inverse = ExprMap.parse(data["inverse"], avars)
    if len(compose) != p or len(inverse) != p:
        raise ValueError("compose/inverse component count must equal dim")
    action = None
    if data.get("action"):
        adata = data["action"]
        nact = int(adata["dim"])
        xvars = [f"x{k + 1}" for k in range(nact)]
        gens = tuple(ExprMap.parse(g, xvars) for g in adata["generators"])
        if len(gens) != p or any(len(g) != nact for g in gens):
            raise ValueError("need one n-component generator per group parameter")
        action = GroupAction(nact, tuple(map(tuple, adata["box"])), gens)
    spec = LieGroupSpec(
        label=data.get("label", "unnamed"),
        dim=p,
        identity=np.asarray(data["identity"], dtype=float),
        box=tuple(map(tuple, data["box"])),
        compose=compose,
        inverse=inverse,
        action=action,
    )
    spec.validate()
    return spec


@dataclass(frozen=True)
class Grid:
    box: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.box)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, c) for (lo, hi), c in zip(self.box, self.counts)]

    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (c - 1) for (lo, hi), c in zip(self.box, self.counts)])


@dataclass(frozen=True)
class GaugeField:
    """Lie-algebra valued one-form sampled on a grid.

    values[s, tau, i] is A^tau_i at node s.  provenance records how the
    field arose; pulled-back and analytic fields keep their source so
    curvature and variations can differentiate exactly.
    """

    spec: LieGroupSpec
    grid: Grid
    values: np.ndarray
    provenance: str                      # "pulled-back" | "free"
    form: str                            # "body" | "space"
    gauging: ExprMap | None = None
    analytic: ExprMap | None = None      # p*n components, (tau, i) tau-major

    def value_at(self, x) -> np.ndarray:
        n = self.grid.dim
        p = self.spec.dim
        if self.gauging is not None:
            return _pullback_at(self.spec, self.gauging, np.asarray(x, float), self.form)[0]
        if self.analytic is not None:
            return self.analytic.eval(x).reshape(p, n)
        raise ValueError("grid-only gauge field cannot be evaluated off its nodes")


@dataclass(frozen=True)
class CurvatureField:
    spec: LieGroupSpec
    nodes: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    values: np.ndarray                   # (M, p, len(pairs)) upper-triangular

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def _left_form_matrix(spec: LieGroupSpec, a: np.ndarray) -> np.ndarray:
    """omega(a)^(-1) actually: returns L(a) = dm/db at (a, e)."""
    p = spec.dim
    lift = spec.compose.taylor_lift(np.concatenate([a, spec.identity]), 1)
    return lift.jacobian()[:, p:]


def _right_translation_matrix(spec: LieGroupSpec, a: np.ndarray) -> np.ndarray:
    """R(a) = dm/d(first slot) at (e, a)."""
    p = spec.dim
    lift = spec.compose.taylor_lift(np.concatenate([spec.identity, a]), 1)
    return lift.jacobian()[:, :p]


def _pullback_at(spec: LieGroupSpec, gauging: ExprMap, x: np.ndarray,
                 form: str) -> tuple[np.ndarray, np.ndarray]:
    """Gauge field value at one point; returns (A (p, n), a-value)."""
    lift = gauging.taylor_lift(x, 1)
    a = lift.value()
    da = lift.jacobian()              # (p, n)
    mat = _left_form_matrix(spec, a) if form == "body" else _right_translation_matrix(spec, a)
    return np.linalg.solve(mat, da), a


def maurer_cartan_pullback(spec: LieGroupSpec, gauging: ExprMap, grid: Grid) -> GaugeField:
    """Body field A = omega(a(x)) da(x) on the grid nodes."""
    nodes = grid.nodes()
    values = np.stack([_pullback_at(spec, gauging, x, "body")[0] for x in nodes])
    return GaugeField(spec, grid, values, "pulled-back", "body", gauging=gauging)


def right_pullback(spec: LieGroupSpec, gauging: ExprMap, grid: Grid) -> GaugeField:
    """Space field B = da(x) a(x)^(-1) on the grid nodes."""
    nodes = grid.nodes()
    values = np.stack([_pullback_at(spec, gauging, x, "space")[0] for x in nodes])
    return GaugeField(spec, grid, values, "pulled-back", "space", gauging=gauging)


def free_gauge_field(spec: LieGroupSpec, components: ExprMap, grid: Grid,
                     form: str = "body") -> GaugeField:
    """Field given directly by p*n expressions over x, (tau, i) tau-major."""
    p, n = spec.dim, grid.dim
    if len(components) != p * n:
        raise ValueError(f"expected {p * n} components, got {len(components)}")
    nodes = grid.nodes()
    values = np.stack([components.eval(x).reshape(p, n) for x in nodes])
    return GaugeField(spec, grid, values, "free", form, analytic=components)


def _gauge_derivatives_at(field: GaugeField, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(A (p,n), dA (p,n,n)) with dA[t,i,j] = d_i A^t_j, exact."""
    spec = field.spec
    p, n = spec.dim, field.grid.dim
    if field.analytic is not None:
        lift = field.analytic.taylor_lift(x, 1)
        a_val = lift.value().reshape(p, n)
        grad = lift.jacobian().reshape(p, n, n)     # [t, j, i] = d_i A^t_j
        return a_val, np.swapaxes(grad, 1, 2)
    if field.gauging is None:
        raise ValueError("no analytic source for exact derivatives")

    lift = field.gauging.taylor_lift(x, 2)
    a = lift.value()
    da = lift.jacobian()                            # (p, n)
    d2a = np.zeros((p, n, n))                       # [t, i, j] = d_ij a^t
    for i in range(n):
        for j in range(n):
            mu = [0] * n
            mu[i] += 1
            mu[j] += 1
            for t in range(p):
                d2a[t, i, j] = lift.raw(t, tuple(mu))

    # The translation matrix is dm in one slot while a(x) occupies the
    # other, so its x-derivative flows through that other slot.
    if field.form == "body":
        base = np.concatenate([a, spec.identity])
        mat_slots = range(p, 2 * p)
        dep_slots = range(0, p)
    else:
        base = np.concatenate([spec.identity, a])
        mat_slots = range(0, p)
        dep_slots = range(p, 2 * p)
    mlift = spec.compose.taylor_lift(base, 2)
    mat = np.zeros((p, p))
    dmat = np.zeros((p, p, p))                      # [t, s, nu] = d(mat[t,s])/da^nu
    for t in range(p):
        for s_i, s in enumerate(mat_slots):
            mu = [0] * (2 * p)
            mu[s] += 1
            mat[t, s_i] = mlift.raw(t, tuple(mu))
            for nu_i, nu in enumerate(dep_slots):
                mu2 = list(mu)
                mu2[nu] += 1
                dmat[t, s_i, nu_i] = mlift.raw(t, tuple(mu2))

    inv = np.linalg.inv(mat)
    aval = inv @ da                                 # (p, n), columns j
    dA = np.zeros((p, n, n))                        # [t, i, j]
    for i in range(n):
        dmat_i = np.einsum("tsn,n->ts", dmat, da[:, i])
        dA[:, i, :] = inv @ d2a[:, i, :] - inv @ dmat_i @ aval
    return aval, dA


def curvature(spec: LieGroupSpec, field: GaugeField) -> CurvatureField:
    """F^t_{ij} = d_i A^t_j - d_j A^t_i - c^t_{rs} A^r_i A^s_j."""
    p, n = spec.dim, field.grid.dim
    c = spec.structure_constants()
    pairs = tuple(itertools.combinations(range(n), 2))

    if field.analytic is not None or field.gauging is not None:
        nodes = field.grid.nodes()
        out = np.zeros((len(nodes), p, len(pairs)))
        for s, x in enumerate(nodes):
            aval, da = _gauge_derivatives_at(field, x)
            for k, (i, j) in enumerate(pairs):
                quad = np.einsum("trs,r,s->t", c, aval[:, i], aval[:, j])
                out[s, :, k] = da[:, i, j] - da[:, j, i] - quad
        return CurvatureField(spec, nodes, pairs, out)

    if any(cnt < 5 for cnt in field.grid.counts):
        raise GridTooCoarse("need at least 5 nodes per axis for 4th-order stencils")
    shape = field.grid.counts
    vals = field.values.reshape(*shape, p, n)
    h = field.grid.spacing()
    stencil = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    interior = tuple(slice(2, cnt - 2) for cnt in shape)
    nodes_grid = field.grid.nodes().reshape(*shape, n)
    nodes = nodes_grid[interior].reshape(-1, n)
    deriv = np.zeros((n,) + vals.shape)              # [i, grid..., t, j]
    for i in range(n):
        acc = np.zeros_like(vals)
        for off, w in zip(range(-2, 3), stencil):
            if w == 0.0:
                continue
            acc += w * np.roll(vals, -off, axis=i)
        deriv[i] = acc / h[i]
    out_full = np.zeros(shape + (p, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        quad = np.einsum("trs,...r,...s->...t", c, vals[..., :, i], vals[..., :, j])
        out_full[..., :, k] = deriv[i][..., :, j] - deriv[j][..., :, i] - quad
    out = out_full[interior].reshape(-1, p, len(pairs))
    return CurvatureField(spec, nodes, pairs, out)


def _translation_jet(spec: LieGroupSpec, a0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """L0[t,s] = dm^t/db^s and D2[t,s,nu] = d2 m^t/da^nu db^s at (a0, e)."""
    p = spec.dim
    mlift = spec.compose.taylor_lift(np.concatenate([a0, spec.identity]), 2)
    L0 = np.zeros((p, p))
    D2 = np.zeros((p, p, p))
    for t in range(p):
        for s in range(p):
            mu = [0] * (2 * p)
            mu[p + s] += 1
            L0[t, s] = mlift.raw(t, tuple(mu))
            for nu in range(p):
                mu2 = list(mu)
                mu2[nu] += 1
                D2[t, s, nu] = mlift.raw(t, tuple(mu2))
    return L0, D2


def group_exp(spec: LieGroupSpec, lam: np.ndarray, eps: float, steps: int = 1) -> np.ndarray:
    """Exponential curve exp(eps*lam) by classical RK4 on a' = L(a) lam.

    One RK4 step keeps the truncation at O(eps^5), far below the
    first-order finite-difference error the callers are measuring.
    """
    lam = np.asarray(lam, dtype=float)
    a = spec.identity.copy()
    h = eps / steps

    def vel(state: np.ndarray) -> np.ndarray:
        return _left_form_matrix(spec, state) @ lam

    for _ in range(steps):
        k1 = vel(a)
        k2 = vel(a + 0.5 * h * k1)
        k3 = vel(a + 0.5 * h * k2)
        k4 = vel(a + h * k3)
        a = a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return a


def _group_exp_series(spec: LieGroupSpec, ctx, lam_series: np.ndarray,
                      eps: float, steps: int = 1) -> np.ndarray:
    """Series-valued exponential: x-jet of exp(eps*lam(x)).

    The translation matrix is expanded to first order around each stage
    value; the stage deviations are O(eps), so the neglected terms enter
    the result at O(eps^3), below the O(eps^5) RK4 floor callers rely on
    only through the finite-difference quotient.
    """
    p = spec.dim
    state = np.zeros((p, ctx.count))
    state[:, 0] = spec.identity
    h = eps / steps

    def vel(st: np.ndarray) -> np.ndarray:
        L0, D2 = _translation_jet(spec, st[:, 0])
        delta = st.copy()
        delta[:, 0] = 0.0
        out = np.zeros_like(st)
        for t in range(p):
            for s in range(p):
                entry = series.const(ctx, L0[t, s])
                for nu in range(p):
                    if D2[t, s, nu] != 0.0:
                        entry = entry + D2[t, s, nu] * delta[nu]
                out[t] += series.mul(ctx, entry, lam_series[s])
        return out

    for _ in range(steps):
        k1 = vel(state)
        k2 = vel(state + 0.5 * h * k1)
        k3 = vel(state + 0.5 * h * k2)
        k4 = vel(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return state


def variation_body(spec: LieGroupSpec, field: GaugeField, lam: ExprMap,
                   samples: np.ndarray) -> np.ndarray:
    """Exact body variation (dlam - [A, lam])^t_i at each sample."""
    c = spec.structure_constants()
    out = np.zeros((len(samples), spec.dim, field.grid.dim))
    for s, x in enumerate(samples):
        lift = lam.taylor_lift(x, 1)
        lam0 = lift.value()
        dlam = lift.jacobian()
        aval = field.value_at(x)
        out[s] = dlam - np.einsum("trs,ri,s->ti", c, aval, lam0)
    return out


def variation_space(spec: LieGroupSpec, field: GaugeField, mu: ExprMap,
                    samples: np.ndarray) -> np.ndarray:
    """Exact space variation (dmu + [B, mu])^t_i at each sample."""
    c = spec.structure_constants()
    out = np.zeros((len(samples), spec.dim, field.grid.dim))
    for s, x in enumerate(samples):
        lift = mu.taylor_lift(x, 1)
        mu0 = lift.value()
        dmu = lift.jacobian()
        bval = field.value_at(x)
        out[s] = dmu + np.einsum("trs,ri,s->ti", c, bval, mu0)
    return out


def _family_pullback_at(spec: LieGroupSpec, gauging: ExprMap, lam: ExprMap,
                        x: np.ndarray, eps: float, side: str) -> np.ndarray:
    """Gauge field of the perturbed gauging at one point.

    side "body": a_eps = m(a(x), exp(eps*lam(x))), left form.
    side "space": a_eps = m(exp(eps*lam(x)), a(x)), right form.
    """
    p = spec.dim
    n = len(gauging.variables)
    ctx1 = context(n, 1)
    a_lift = gauging.taylor_lift(x, 1)
    lam_lift = lam.taylor_lift(x, 1)
    lam_series = lam_lift.coeffs
    exp_series = _group_exp_series(spec, ctx1, lam_series, eps)
    e0 = exp_series[:, 0]
    de = exp_series[:, 1:]                         # (p, n)
    a0 = a_lift.value()
    da = a_lift.jacobian()

    if side == "body":
        base = np.concatenate([a0, e0])
        first, second = da, de
    else:
        base = np.concatenate([e0, a0])
        first, second = de, da
    mlift = spec.compose.taylor_lift(base, 1)
    jac = mlift.jacobian()
    val = mlift.value()
    dval = jac[:, :p] @ first + jac[:, p:] @ second
    mat = _left_form_matrix(spec, val) if side == "body" else _right_translation_matrix(spec, val)
    return np.linalg.solve(mat, dval)


def variation_body_fd(spec: LieGroupSpec, gauging: ExprMap, lam: ExprMap,
                      samples: np.ndarray, eps: float) -> np.ndarray:
    """(A_eps - A)/eps for the right-multiplied family at each sample."""
    out = []
    for x in samples:
        a_eps = _family_pullback_at(spec, gauging, lam, x, eps, "body")
        a_0 = _pullback_at(spec, gauging, x, "body")[0]
        out.append((a_eps - a_0) / eps)
    return np.stack(out)


def variation_space_fd(spec: LieGroupSpec, gauging: ExprMap, mu: ExprMap,
                       samples: np.ndarray, eps: float) -> np.ndarray:
    """(B_eps - B)/eps for the left-multiplied family at each sample."""
    out = []
    for x in samples:
        b_eps = _family_pullback_at(spec, gauging, mu, x, eps, "space")
        b_0 = _pullback_at(spec, gauging, x, "space")[0]
        out.append((b_eps - b_0) / eps)
    return np.stack(out)


def adjoint_matrix(spec: LieGroupSpec, a: np.ndarray) -> np.ndarray:
    """Derivative at the identity of b -> m(m(a, b), inv(a))."""
    p = spec.dim
    a = np.asarray(a, dtype=float)
    ia = spec.inv(a)
    outer = spec.compose.taylor_lift(np.concatenate([a, ia]), 1)
    m_first = outer.jacobian()[:, :p]
    return m_first @ _left_form_matrix(spec, a)


def el_body_residual(spec: LieGroupSpec, field: GaugeField, momentum: ExprMap,
                     samples: np.ndarray) -> np.ndarray:
    """Body Euler-Lagrange residual d_i P^i_t + c^s_{rt} A^r_i P^i_s.

    momentum has p*n components ordered by algebra index t then
    direction i, so component t*n + i holds P^i_t.
    """
    p, n = spec.dim, field.grid.dim
    if len(momentum) != p * n:
        raise ValueError(f"momentum needs {p * n} components")
    c = spec.structure_constants()
    out = np.zeros((len(samples), p))
    for s, x in enumerate(samples):
        lift = momentum.taylor_lift(x, 1)
        pj = lift.jacobian().reshape(p, n, n)       # [t, i, k] = d_k P^i_t
        pv = lift.value().reshape(p, n)
        aval = field.value_at(x)
        div = np.einsum("tii->t", pj)
        out[s] = div + np.einsum("srt,ri,si->t", c, aval, pv)
    return out


def el_space_residual(spec: LieGroupSpec, momentum: ExprMap,
                      samples: np.ndarray) -> np.ndarray:
    """Space Euler-Lagrange residual is a plain divergence d_i P^i_t."""
    p_times_n = len(momentum)
    n = len(momentum.variables)
    p = p_times_n // n
    if p * n != p_times_n or p != spec.dim:
        raise ValueError("momentum shape does not match the group and base")
    out = np.zeros((len(samples), p))
    for s, x in enumerate(samples):
        lift = momentum.taylor_lift(x, 1)
        pj = lift.jacobian().reshape(p, n, n)
        out[s] = np.einsum("tii->t", pj)
    return out


def linear_gauge_d(field: ExprMap, n: int, p: int, r: int,
                   samples: np.ndarray) -> tuple[np.ndarray, tuple[tuple[int, ...], ...]]:
    """Exterior derivative of an algebra-valued r-form, sampled.

    field components are ordered by algebra index t, then by the sorted
    r-subset of directions.  Returns values (M, p, #(r+1)-subsets) and
    the (r+1)-subsets in lexicographic order.
    """
    combos_r = list(itertools.combinations(range(n), r))
    combos_up = tuple(itertools.combinations(range(n), r + 1))
    if len(field) != p * len(combos_r):
        raise ValueError(f"expected {p * len(combos_r)} components for an r={r} form")
    index_r = {K: k for k, K in enumerate(combos_r)}
    out = np.zeros((len(samples), p, len(combos_up)))
    for s, x in enumerate(samples):
        lift = field.taylor_lift(x, 1)
        jac = lift.jacobian()                       # (p*len(combos_r), n)
        for kk, K in enumerate(combos_up):
            for pos in range(r + 1):
                rest = K[:pos] + K[pos + 1:]
                sign = -1.0 if pos % 2 else 1.0
                for t in range(p):
                    out[s, t, kk] += sign * jac[t * len(combos_r) + index_r[rest], K[pos]]
    return out, combos_up


def linear_gauge_dd(field: ExprMap, n: int, p: int, r: int,
                    samples: np.ndarray) -> np.ndarray:
    """d applied twice to an r-form, assembled from second derivatives.

    Expands d(d field) literally; every term is a mixed second partial
    of a field component, so the result vanishes up to roundoff.
    """
    combos_r = list(itertools.combinations(range(n), r))
    combos_2 = tuple(itertools.combinations(range(n), r + 2))
    index_r = {K: k for k, K in enumerate(combos_r)}
    out = np.zeros((len(samples), p, max(len(combos_2), 1)))
    for s, x in enumerate(samples):
        lift = field.taylor_lift(x, 2)
        for kk, L in enumerate(combos_2):
            for u in range(r + 2):
                K = L[:u] + L[u + 1:]
                sign_u = -1.0 if u % 2 else 1.0
                for v in range(r + 1):
                    rest = K[:v] + K[v + 1:]
                    sign_v = -1.0 if v % 2 else 1.0
                    mu = [0] * n
                    mu[L[u]] += 1
                    mu[K[v]] += 1
                    for t in range(p):
                        comp = t * len(combos_r) + index_r[rest]
                        out[s, t, kk] += sign_u * sign_v * lift.raw(comp, tuple(mu))
    return out


def action_bracket_residual(spec: LieGroupSpec, samples: np.ndarray) -> float:
    """Largest gap between generator vector-field brackets and the
    structure constants: [g_rho, g_sigma]^k - c^t_{rho sigma} g^k_t."""
    if spec.action is None:
        raise ValueError(f"group '{spec.label}' carries no action")
    act = spec.action
    n, p = act.dim, spec.dim
    c = spec.structure_constants()
    worst = 0.0
    for x in samples:
        lifts = [g.taylor_lift(x, 1) for g in act.generators]
        vals = np.stack([lf.value() for lf in lifts])        # (p, n)
        jacs = np.stack([lf.jacobian() for lf in lifts])     # (p, n, n)
        for rho in range(p):
            for sigma in range(p):
                lie = jacs[sigma] @ vals[rho] - jacs[rho] @ vals[sigma]
                expect = np.einsum("t,tk->k", c[:, rho, sigma], vals)
                worst = max(worst, float(np.max(np.abs(lie - expect))))
    return worst


@dataclass(frozen=True)
class SpencerActionCheck:
    order: int
    max_mismatch: float
    min_rank: int
    param_dim: int


def spencer_from_action(spec: LieGroupSpec, lam: ExprMap, order: int,
                        samples: np.ndarray, rank_tol: float = 1e-8) -> SpencerActionCheck:
    """Section induced on jets by an action, and its Spencer image.

    The section carries lam(x) to xi^k_mu(x) = lam^tau(x) d_mu g^k_tau(x)
    with g_tau the action generators.  Its Spencer operator contracts the
    generators against dlam alone; both routes are computed and compared.
    Raises NotInjectiveYet when the jet evaluation matrix loses rank.
    """
    if spec.action is None:
        raise ValueError(f"group '{spec.label}' carries no action")
    act = spec.action
    n, p = act.dim, spec.dim
    ctx_hi = context(n, order + 1)
    ctx1 = context(n, 1)
    unit_pos = [ctx1.pos(tuple(int(i == j) for j in range(n))) for i in range(n)]
    rows_q = ctx_hi.count_up_to(order)
    min_rank = p
    worst = 0.0
    for x in samples:
        gen = [g.taylor_lift(x, order + 1) for g in act.generators]
        raw = np.zeros((p, n, ctx_hi.count))
        for tau in range(p):
            for k in range(n):
                for row in range(ctx_hi.count):
                    raw[tau, k, row] = gen[tau].raw(k, tuple(ctx_hi.midx[row]))
        lam_series = lam.taylor_lift(x, 1).coeffs   # (p, n+1), raw = taylor here
        lam0 = lam_series[:, 0]
        dlam = lam_series[:, unit_pos]
        for row in range(rows_q):
            for k in range(n):
                # route one: the section slot as a series in x, lam times
                # generator derivatives multiplied through the kernel
                total = series.zeros(ctx1)
                for tau in range(p):
                    h = np.zeros(ctx1.count)
                    h[0] = raw[tau, k, row]
                    for i in range(n):
                        h[unit_pos[i]] = raw[tau, k, ctx_hi.shifted(row, i)]
                    total = total + series.mul(ctx1, lam_series[tau], h)
                for i in range(n):
                    up = ctx_hi.shifted(row, i)
                    direct = total[unit_pos[i]] - float(lam0 @ raw[:, k, up])
                    # route two: dlam contracted with the generator jets
                    contracted = float(dlam[:, i] @ raw[:, k, row])
                    worst = max(worst, abs(direct - contracted))
        mat = raw[:, :, :rows_q].reshape(p, -1).T   # rows (k, mu), cols tau
        rank = int(np.linalg.matrix_rank(mat, tol=rank_tol))
        min_rank = min(min_rank, rank)
    if min_rank < p:
        raise NotInjectiveYet(
            f"rank {min_rank} < {p} at jet order {order}; raise the order")
    return SpencerActionCheck(order, worst, min_rank, p)
