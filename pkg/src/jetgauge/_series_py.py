"""Pure NumPy twin of the compiled series kernel.

Accumulation must visit the product table in the same order as the Cython
loop so both kernels produce bitwise-identical coefficients; np.add.at
applies repeated indices in element order, which guarantees that.
"""

from __future__ import annotations

import numpy as np

KERNEL_NAME = "pure"


def mul_acc(ti, tj, tk, a, b, out) -> None:
    """out[k] += a[i] * b[j] over the (i, j, k) product table."""
    np.add.at(out, tk, a[ti] * b[tj])


def substitute_acc(ti, tj, tk, parent_var, parent_row, coeffs, devs, out) -> None:
    """Accumulate a truncated composition.

    coeffs: (ncomp, nin) outer coefficients, constant term included.
    devs:   (nvars_in, nout) deviation series of inner components (zero
            constant term).
    out:    (ncomp, nout) accumulator; receives sum_mu coeffs[:, mu] * prod_k
            devs[k] ** mu_k truncated by the product table.
    """
    nin = coeffs.shape[1]
    nout = out.shape[1]
    mono = np.zeros((nin, nout))
    mono[0, 0] = 1.0
    out[:, 0] += coeffs[:, 0]
    for row in range(1, nin):
        mul_acc(ti, tj, tk, mono[parent_row[row]], devs[parent_var[row]], mono[row])
        out += np.outer(coeffs[:, row], mono[row])
