import numpy as np
import pytest

from jetgauge.expr import ExprMap, ParseError, parse_expr, variable
from jetgauge.series import DomainError


def ev(text, **vals):
    names = sorted(vals)
    e = parse_expr(text, names)
    return e.eval({n: vals[n] for n in names})


def test_precedence_and_associativity():
    assert ev("1 - 2 - 3") == -4.0
    assert ev("2*3 + 4/8") == 6.5
    assert ev("12 / 2 / 3") == 2.0
    assert ev("2^3") == 8.0
    assert ev("2*x^2", x=3.0) == 18.0


def test_unary_minus_binds_before_power():
    # the grammar hangs '^' on a factor, so -x^2 reads as (-x)^2
    assert ev("-x^2", x=3.0) == 9.0
    assert ev("-(x^2)", x=3.0) == -9.0
    assert ev("0 - x^2", x=3.0) == -9.0


def test_scientific_notation():
    assert ev("1.5e-3 + 2E2") == 200.0015


def test_functions():
    x = 0.37
    assert abs(ev("sin(x)^2 + cos(x)^2", x=x) - 1.0) < 1e-15
    assert abs(ev("log(exp(x))", x=x) - x) < 1e-15
    assert abs(ev("sqrt(x^2)", x=x) - x) < 1e-15
    assert ev("neg(x)", x=2.0) == -2.0


@pytest.mark.parametrize("bad", [
    "x +",
    "sin(",
    "sin()",
    "foo(x)",
    "(x",
    "x ^ y",
    "2 ** 3",
    "",
])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_expr(bad, ["x", "y"])


def test_undeclared_variable():
    with pytest.raises(ParseError) as err:
        parse_expr("x + z", ["x", "y"])
    assert "z" in str(err.value)


def test_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_expr("x1 +\n  * 3", ["x1"])
    assert err.value.line == 2


@pytest.mark.parametrize("text,vals", [
    ("1/x", {"x": 0.0}),
    ("log(x)", {"x": -1.0}),
    ("sqrt(x)", {"x": -2.0}),
])
def test_eval_domain_errors(text, vals):
    with pytest.raises(DomainError):
        parse_expr(text, list(vals)).eval(vals)


def test_negative_power_only_programmatic():
    # the grammar keeps '^' exponents as unsigned literals
    with pytest.raises(ParseError):
        parse_expr("x^-1", ["x"])
    e = variable("x") ** -1.0
    assert e.eval({"x": 4.0}) == 0.25
    with pytest.raises(DomainError):
        e.eval({"x": 0.0})


def test_print_parse_roundtrip():
    rng = np.random.default_rng(42)
    texts = [
        "x + y*sin(x - 2*y)",
        "-x^2 + (1 - y)^0.5",
        "exp(x/(1 + y^2)) - log(2 + x)",
        "x*y*(x - y)/(3 + x^2)",
    ]
    for text in texts:
        e = parse_expr(text, ["x", "y"])
        back = parse_expr(e.to_text(), ["x", "y"])
        for _ in range(20):
            x, y = rng.uniform(0.1, 0.9, size=2)
            assert abs(e.eval({"x": x, "y": y}) - back.eval({"x": x, "y": y})) < 1e-14


def test_expr_map_eval_and_variables():
    m = ExprMap.parse("x1 + x2, x1*x2", ["x1", "x2"])
    assert len(m) == 2
    assert np.allclose(m.eval([2.0, 3.0]), [5.0, 6.0])
    with pytest.raises(ValueError):
        ExprMap.parse("x1, x2", ["x1", "x1"])


def test_taylor_lift_cube_anchor():
    m = ExprMap.parse("(1 + x)^3", ["x"])
    tm = m.taylor_lift(np.array([0.0]), 3)
    assert np.allclose(tm.coeffs[0], [1.0, 3.0, 3.0, 1.0], atol=1e-14)


def test_taylor_lift_jacobian_matches_fd():
    m = ExprMap.parse("sin(x1*x2), exp(x1) - x2^2", ["x1", "x2"])
    x = np.array([0.4, -0.7])
    jac = m.taylor_lift(x, 1).jacobian()
    h = 1e-6
    for i in range(2):
        dx = np.zeros(2)
        dx[i] = h
        fd = (m.eval(x + dx) - m.eval(x - dx)) / (2 * h)
        assert np.max(np.abs(jac[:, i] - fd)) < 1e-9


def test_taylor_lift_raw_second_derivatives():
    m = ExprMap.parse("x1^2*x2", ["x1", "x2"])
    tm = m.taylor_lift(np.array([3.0, 5.0]), 2)
    assert abs(tm.raw(0, (1, 1)) - 2 * 3.0) < 1e-12      # d2/dx1 dx2 = 2 x1
    assert abs(tm.raw(0, (2, 0)) - 2 * 5.0) < 1e-12      # d2/dx1^2  = 2 x2
