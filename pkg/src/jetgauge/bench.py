"""Benchmark the compiled series kernels against the pure NumPy twin.

Times the two hot entry points (truncated multiply and substitution) on a
few context shapes plus one end-to-end lift, verifies the outputs stay
bitwise equal, and prints a comparison table.  Run as

    python -m jetgauge.bench [--repeat N] [--inner N]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import series
from ._multiindex import context
from . import _series_py as pure_kernel
from .expr import ExprMap

try:
    from . import _series_cy as compiled_kernel  # type: ignore[attr-defined]
except ImportError:
    compiled_kernel = None

SHAPES = ((2, 4), (3, 6), (4, 4), (6, 3))
LIFT_MAP = ExprMap.parse(
    "exp(0.3*x1) * sin(x2 - 0.5*x3^2), "
    "log(2 + x1*x3) - cos(x2)^2, "
    "sqrt(4 + x1^2 + x2^2) * x3",
    ["x1", "x2", "x3"])
LIFT_POINT = np.array([0.4, -0.3, 0.7])
LIFT_ORDER = 6


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _mul_case(kernel, ctx, a, b, inner: int):
    out = np.zeros(ctx.count)

    def run():
        for _ in range(inner):
            out[:] = 0.0
            kernel.mul_acc(ctx.mul_i, ctx.mul_j, ctx.mul_k, a, b, out)
    return run, out


def _subst_case(kernel, ctx, coeffs, devs, pvar, prow, inner: int):
    out = np.zeros((coeffs.shape[0], ctx.count))

    def run():
        for _ in range(inner):
            out[:] = 0.0
            kernel.substitute_acc(ctx.mul_i, ctx.mul_j, ctx.mul_k,
                                  pvar, prow, coeffs, devs, out)
    return run, out


def _with_kernel(kernel, fn):
    saved = series._kernel
    series._kernel = kernel
    try:
        return fn()
    finally:
        series._kernel = saved


def run_bench(repeat: int = 5, inner: int = 200) -> list[dict]:
    kernels = [("pure", pure_kernel)]
    if compiled_kernel is not None:
        kernels.insert(0, ("compiled", compiled_kernel))
    rows = []
    rng = np.random.default_rng(20240)
    for nvars, order in SHAPES:
        ctx = context(nvars, order)
        a = rng.standard_normal(ctx.count)
        b = rng.standard_normal(ctx.count)
        coeffs = rng.standard_normal((3, ctx.count))
        devs = rng.standard_normal((nvars, ctx.count)) * 0.3
        devs[:, 0] = 0.0
        pvar, prow = series._parents(ctx)

        outs, times = {}, {}
        for name, kern in kernels:
            run, out = _mul_case(kern, ctx, a, b, inner)
            times[name] = _best_of(run, repeat) / inner
            outs[name] = out.copy()
        rows.append({"shape": f"n={nvars} q={order}", "op": "mul",
                     "times": times,
                     "equal": _bitwise_equal(outs)})

        outs, times = {}, {}
        for name, kern in kernels:
            run, out = _subst_case(kern, ctx, coeffs, devs, pvar, prow, inner)
            times[name] = _best_of(run, repeat) / inner
            outs[name] = out.copy()
        rows.append({"shape": f"n={nvars} q={order}", "op": "subst",
                     "times": times,
                     "equal": _bitwise_equal(outs)})

    outs, times = {}, {}
    for name, kern in kernels:
        def lift():
            return LIFT_MAP.taylor_lift(LIFT_POINT, LIFT_ORDER).coeffs
        times[name] = _with_kernel(kern, lambda: _best_of(lift, repeat))
        outs[name] = _with_kernel(kern, lift)
    rows.append({"shape": f"n=3 q={LIFT_ORDER}", "op": "lift",
                 "times": times, "equal": _bitwise_equal(outs)})
    return rows


def _bitwise_equal(outs: dict) -> bool:
    vals = list(outs.values())
    return all(np.array_equal(vals[0], v) for v in vals[1:])


def format_table(rows: list[dict]) -> str:
    have_compiled = compiled_kernel is not None
    lines = []
    if have_compiled:
        lines.append(f"{'shape':10s} {'op':6s} {'compiled':>12s} "
                     f"{'pure':>12s} {'speedup':>8s}  bitwise")
    else:
        lines.append(f"{'shape':10s} {'op':6s} {'pure':>12s}  "
                     "(compiled kernel not built)")
    for row in rows:
        t = row["times"]
        if have_compiled:
            ratio = t["pure"] / t["compiled"] if t["compiled"] > 0 else float("inf")
            lines.append(
                f"{row['shape']:10s} {row['op']:6s} {t['compiled']*1e6:10.1f}us "
                f"{t['pure']*1e6:10.1f}us {ratio:7.1f}x  "
                f"{'equal' if row['equal'] else 'DIFFER'}")
        else:
            lines.append(f"{row['shape']:10s} {row['op']:6s} "
                         f"{t['pure']*1e6:10.1f}us")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="jetgauge.bench",
        description="compare the compiled and pure series kernels")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--inner", type=int, default=200,
                        help="kernel calls per timing sample")
    args = parser.parse_args(argv)
    rows = run_bench(repeat=args.repeat, inner=args.inner)
    print(format_table(rows))
    if not all(row["equal"] for row in rows):
        print("kernel outputs differ", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
