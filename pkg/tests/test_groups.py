import numpy as np
import pytest

from jetgauge.expr import ExprMap
from jetgauge.groups import (
    GaugeField, Grid, GridTooCoarse, InconsistentGroupLaw, NotInjectiveYet,
    action_bracket_residual, adjoint_matrix, curvature, el_body_residual,
    el_space_residual, free_gauge_field, group_exp, group_spec_from_dict,
    linear_gauge_d, linear_gauge_dd, load_group_spec, maurer_cartan_pullback,
    right_pullback, spencer_from_action, variation_body, variation_body_fd,
    variation_space, variation_space_fd,
)
from jetgauge.sampling import halton_points

AFFINE = load_group_spec("affine")
E2 = load_group_spec("e2")

GAUGING = ExprMap.parse("1 + 0.3*x1 + 0.1*x1*x2, 0.2*x2 - 0.4*x1^2",
                        ["x1", "x2"])
GRID = Grid(((-0.4, 0.6), (-0.5, 0.5)), (6, 6))
SAMPLES = halton_points(((-0.3, 0.5), (-0.4, 0.4)), 12, 7)


def test_bad_group_law_rejected():
    data = {
        "label": "broken", "dim": 2, "identity": [1.0, 0.0],
        "box": [[0.5, 2.0], [-1.0, 1.0]],
        "compose": "a1*b1, a1*b2 + a2 + 0.001",
        "inverse": "1/a1, -a2/a1",
    }
    with pytest.raises(InconsistentGroupLaw):
        group_spec_from_dict(data)


def test_affine_structure_constants():
    c = AFFINE.structure_constants()
    expect = np.zeros((2, 2, 2))
    expect[1, 0, 1] = -1.0
    expect[1, 1, 0] = 1.0
    assert np.max(np.abs(c - expect)) < 1e-12


def test_e2_structure_constants():
    c = E2.structure_constants()
    assert abs(c[2, 0, 1] + 1.0) < 1e-12          # rotation with first shift
    assert abs(c[1, 0, 2] - 1.0) < 1e-12          # rotation with second shift
    assert np.max(np.abs(c + np.swapaxes(c, 1, 2))) < 1e-12


def test_action_brackets_match_structure_constants():
    pts1 = halton_points(AFFINE.action.box, 6, 2)
    assert action_bracket_residual(AFFINE, pts1) < 1e-12
    pts2 = halton_points(E2.action.box, 6, 2)
    assert action_bracket_residual(E2, pts2) < 1e-12


def test_affine_pullback_closed_form():
    # left form of the affine chart is (da1/a1, da2/a1)
    field = maurer_cartan_pullback(AFFINE, GAUGING, GRID)
    for x in SAMPLES[:5]:
        lift = GAUGING.taylor_lift(x, 1)
        a1 = lift.value()[0]
        assert np.max(np.abs(field.value_at(x) - lift.jacobian() / a1)) < 1e-12


def test_affine_right_pullback_closed_form():
    # right form: B1 = da1/a1, B2 = da2 - (a2/a1) da1
    field = right_pullback(AFFINE, GAUGING, GRID)
    for x in SAMPLES[:5]:
        lift = GAUGING.taylor_lift(x, 1)
        a1, a2 = lift.value()
        da = lift.jacobian()
        expect = np.stack([da[0] / a1, da[1] - (a2 / a1) * da[0]])
        assert np.max(np.abs(field.value_at(x) - expect)) < 1e-12


def test_pullback_curvature_vanishes_exact_route():
    for spec, gauging in [
        (AFFINE, GAUGING),
        (E2, ExprMap.parse("0.2*x1 - 0.3*x2^2, sin(x1*x2), 0.5*x2", ["x1", "x2"])),
    ]:
        field = maurer_cartan_pullback(spec, gauging, GRID)
        assert curvature(spec, field).max_abs() < 1e-12


def test_pullback_curvature_vanishes_fd_route():
    grid = Grid(((-0.4, 0.6), (-0.5, 0.5)), (21, 21))
    exact = maurer_cartan_pullback(AFFINE, GAUGING, grid)
    gridonly = GaugeField(AFFINE, grid, exact.values, "pulled-back", "body")
    f = curvature(AFFINE, gridonly)
    assert 0.0 < f.max_abs() < 1e-6               # stencil floor, not exact


def test_fd_route_needs_five_nodes():
    coarse = Grid(((-0.4, 0.6), (-0.5, 0.5)), (4, 6))
    field = GaugeField(AFFINE, coarse, np.zeros((24, 2, 2)), "free", "body")
    with pytest.raises(GridTooCoarse):
        curvature(AFFINE, field)


def test_free_field_curvature_nonzero():
    free = free_gauge_field(AFFINE, ExprMap.parse("x2, 0, 0, x1", ["x1", "x2"]), GRID)
    assert curvature(AFFINE, free).max_abs() > 0.1


def test_variation_anchor_flat_background():
    # at the trivial gauging the body variation reduces to dlam
    flat = maurer_cartan_pullback(AFFINE, ExprMap.parse("1, 0", ["x1", "x2"]), GRID)
    lam = ExprMap.parse("0, x1", ["x1", "x2"])
    v = variation_body(AFFINE, flat, lam, SAMPLES[:1])[0]
    assert np.allclose(v, [[0.0, 0.0], [1.0, 0.0]], atol=1e-14)


LAM = ExprMap.parse("0.3*x1 - 0.2*x2^2, 0.1 + 0.5*x1*x2", ["x1", "x2"])


def test_variation_body_fd_halving():
    field = maurer_cartan_pullback(AFFINE, GAUGING, GRID)
    exact = variation_body(AFFINE, field, LAM, SAMPLES)
    e1 = np.max(np.abs(variation_body_fd(AFFINE, GAUGING, LAM, SAMPLES, 1e-3) - exact))
    e2 = np.max(np.abs(variation_body_fd(AFFINE, GAUGING, LAM, SAMPLES, 5e-4) - exact))
    assert 1.8 < e1 / e2 < 2.2


def test_variation_space_fd_halving():
    field = right_pullback(AFFINE, GAUGING, GRID)
    exact = variation_space(AFFINE, field, LAM, SAMPLES)
    e1 = np.max(np.abs(variation_space_fd(AFFINE, GAUGING, LAM, SAMPLES, 1e-3) - exact))
    e2 = np.max(np.abs(variation_space_fd(AFFINE, GAUGING, LAM, SAMPLES, 5e-4) - exact))
    assert 1.8 < e1 / e2 < 2.2


def test_group_exp_affine_closed_form():
    lam = np.array([0.8, -0.5])
    t = 0.3
    got = group_exp(AFFINE, lam, t, steps=64)
    a1 = np.exp(lam[0] * t)
    a2 = lam[1] * (np.expm1(lam[0] * t)) / lam[0]
    assert np.max(np.abs(got - [a1, a2])) < 1e-10


def test_adjoint_closed_form_and_homomorphism():
    a = np.array([1.7, 0.4])
    assert np.max(np.abs(adjoint_matrix(AFFINE, a) - [[1.0, 0.0], [-0.4, 1.7]])) < 1e-12
    g1 = np.array([0.3, -0.2, 0.5])
    g2 = np.array([0.7, 0.1, -0.3])
    lhs = adjoint_matrix(E2, E2.mul(g1, g2))
    rhs = adjoint_matrix(E2, g1) @ adjoint_matrix(E2, g2)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_adjoint_against_conjugation_quotient():
    a = np.array([0.7, 0.1, -0.3])
    lam = np.array([0.4, -0.7, 0.2])
    t = 1e-6
    conj = E2.mul(E2.mul(a, group_exp(E2, lam, t)), E2.inv(a))
    fd = (conj - E2.identity) / t
    assert np.max(np.abs(fd - adjoint_matrix(E2, a) @ lam)) < 1e-5


MOMENTUM = ExprMap.parse("x1*x2, x2^2, x1 - x2, 0.5*x1^2", ["x1", "x2"])


def test_el_body_residual_hand_values():
    field = maurer_cartan_pullback(AFFINE, GAUGING, GRID)
    r = el_body_residual(AFFINE, field, MOMENTUM, SAMPLES[:4])
    for s, x in enumerate(SAMPLES[:4]):
        av = field.value_at(x)
        x1, x2 = x
        hand1 = 3 * x2 + av[1, 0] * (x1 - x2) + av[1, 1] * 0.5 * x1 ** 2
        hand2 = 1.0 - (av[0, 0] * (x1 - x2) + av[0, 1] * 0.5 * x1 ** 2)
        assert abs(r[s, 0] - hand1) < 1e-13
        assert abs(r[s, 1] - hand2) < 1e-13


def test_el_space_residual_is_divergence():
    r = el_space_residual(AFFINE, MOMENTUM, SAMPLES[:4])
    expect = np.array([[3 * x[1], 1.0] for x in SAMPLES[:4]])
    assert np.max(np.abs(r - expect)) < 1e-13


def test_linear_gauge_d_gradient_and_curl():
    zero_form = ExprMap.parse("sin(x1)*x2, x1^2 - x2", ["x1", "x2"])
    vals, combos = linear_gauge_d(zero_form, 2, 2, 0, SAMPLES[:3])
    assert combos == ((0,), (1,))
    for s, x in enumerate(SAMPLES[:3]):
        x1, x2 = x
        expect = np.array([[np.cos(x1) * x2, np.sin(x1)], [2 * x1, -1.0]])
        assert np.max(np.abs(vals[s] - expect)) < 1e-13

    one_form = ExprMap.parse("sin(x1)*x2, x1*x2^2, exp(x1) - x2, x1^3",
                             ["x1", "x2"])
    vals1, combos1 = linear_gauge_d(one_form, 2, 2, 1, SAMPLES[:3])
    assert combos1 == ((0, 1),)
    for s, x in enumerate(SAMPLES[:3]):
        x1, x2 = x
        expect = np.array([x2 ** 2 - np.sin(x1), 3 * x1 ** 2 + 1.0])
        assert np.max(np.abs(vals1[s][:, 0] - expect)) < 1e-13


def test_linear_gauge_dd_vanishes():
    one_form = ExprMap.parse("sin(x1)*x2, x1*x2^2, exp(x1) - x2, x1^3",
                             ["x1", "x2"])
    assert np.max(np.abs(linear_gauge_dd(one_form, 2, 2, 0, SAMPLES))) < 1e-12


def test_spencer_from_action_affine():
    lam = ExprMap.parse("0.2*x1^2 - 0.1, 0.3*x1", ["x1"])
    pts = halton_points(AFFINE.action.box, 8, 3)
    chk = spencer_from_action(AFFINE, lam, 1, pts)
    assert chk.max_mismatch < 1e-12
    assert chk.min_rank == 2
    with pytest.raises(NotInjectiveYet):
        spencer_from_action(AFFINE, lam, 0, pts)


def test_spencer_from_action_e2_needs_first_order():
    lam = ExprMap.parse("0.1*x1 - 0.2*x2, 0.3, x1*x2", ["x1", "x2"])
    pts = halton_points(E2.action.box, 6, 4)
    chk = spencer_from_action(E2, lam, 1, pts)
    assert chk.max_mismatch < 1e-12
    assert chk.min_rank == 3
    with pytest.raises(NotInjectiveYet):
        spencer_from_action(E2, lam, 0, pts)
