# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled truncated-series kernels.

Must stay accumulation-order-compatible with _series_py so results are
bitwise identical whichever kernel gets selected at import.
"""

import numpy as np

KERNEL_NAME = "compiled"


def mul_acc(const long[:] ti, const long[:] tj, const long[:] tk,
            const double[:] a, const double[:] b, double[:] out):
    cdef Py_ssize_t t, n = ti.shape[0]
    for t in range(n):
        out[tk[t]] += a[ti[t]] * b[tj[t]]


def substitute_acc(const long[:] ti, const long[:] tj, const long[:] tk,
                   const long[:] parent_var, const long[:] parent_row,
                   const double[:, :] coeffs, const double[:, :] devs,
                   double[:, :] out):
    cdef Py_ssize_t nin = coeffs.shape[1]
    cdef Py_ssize_t ncomp = coeffs.shape[0]
    cdef Py_ssize_t nout = out.shape[1]
    cdef Py_ssize_t ntab = ti.shape[0]
    cdef Py_ssize_t row, c, t
    cdef double w
    mono_arr = np.zeros((nin, nout))
    cdef double[:, :] mono = mono_arr
    cdef const double[:] dev
    mono[0, 0] = 1.0
    for c in range(ncomp):
        out[c, 0] += coeffs[c, 0]
    for row in range(1, nin):
        dev = devs[parent_var[row]]
        for t in range(ntab):
            mono[row, tk[t]] += mono[parent_row[row], ti[t]] * dev[tj[t]]
        for c in range(ncomp):
            w = coeffs[c, row]
            if w != 0.0:
                for t in range(nout):
                    out[c, t] += w * mono[row, t]
