# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled bootstrap kernel (C backend).

Same contract and flag semantics as rdd_kit._kernels_py, with serial
accumulation per replicate and the GIL released across the batch.
"""

from libc.math cimport INFINITY, NAN, fabs

import numpy as np

cimport numpy as cnp

BACKEND = "c"

cdef int _OK = 0
cdef int _TOO_FEW = 1
cdef int _DEGENERATE = 2
cdef int _WEAK_GAP = 3

FLAG_OK = _OK
FLAG_TOO_FEW = _TOO_FEW
FLAG_DEGENERATE = _DEGENERATE
FLAG_WEAK_GAP = _WEAK_GAP


def bootstrap_batch(
    const double[::1] x,
    const double[::1] y,
    const double[::1] t,
    const unsigned char[::1] above,
    const cnp.int64_t[:, ::1] idx,
    bint fuzzy,
    double min_gap,
    double[::1] points,
    int[::1] flags,
):
    """Evaluate the window estimator on every resample row of idx."""
    cdef Py_ssize_t n_rep = idx.shape[0]
    cdef Py_ssize_t m = idx.shape[1]
    cdef Py_ssize_t r, k, j
    cdef double na, nb, sxa, sya, sxb, syb, ta, tb
    cdef double xa_min, xa_max, xb_min, xb_max
    cdef double mxa, mya, mxb, myb, sxxa, sxya, sxxb, sxyb
    cdef double dxa, dya, dxb, dyb, xv, yv
    cdef double slope_a, slope_b, b0a, b0b, numerator, gap, value
    cdef int flag

    if points.shape[0] != n_rep or flags.shape[0] != n_rep:
        raise ValueError("output arrays must have one slot per replicate")

    with nogil:
        for r in range(n_rep):
            na = 0.0
            nb = 0.0
            sxa = 0.0
            sya = 0.0
            sxb = 0.0
            syb = 0.0
            ta = 0.0
            tb = 0.0
            xa_min = INFINITY
            xa_max = -INFINITY
            xb_min = INFINITY
            xb_max = -INFINITY
            for k in range(m):
                j = idx[r, k]
                xv = x[j]
                yv = y[j]
                if above[j]:
                    na += 1.0
                    sxa += xv
                    sya += yv
                    ta += t[j]
                    if xv < xa_min:
                        xa_min = xv
                    if xv > xa_max:
                        xa_max = xv
                else:
                    nb += 1.0
                    sxb += xv
                    syb += yv
                    tb += t[j]
                    if xv < xb_min:
                        xb_min = xv
                    if xv > xb_max:
                        xb_max = xv

            if na < 2.0 or nb < 2.0:
                flags[r] = _TOO_FEW
                points[r] = NAN
                continue
            if xa_min == xa_max or xb_min == xb_max:
                flags[r] = _DEGENERATE
                points[r] = NAN
                continue

            mxa = sxa / na
            mya = sya / na
            mxb = sxb / nb
            myb = syb / nb
            sxxa = 0.0
            sxya = 0.0
            sxxb = 0.0
            sxyb = 0.0
            for k in range(m):
                j = idx[r, k]
                xv = x[j]
                yv = y[j]
                if above[j]:
                    dxa = xv - mxa
                    dya = yv - mya
                    sxxa += dxa * dxa
                    sxya += dxa * dya
                else:
                    dxb = xv - mxb
                    dyb = yv - myb
                    sxxb += dxb * dxb
                    sxyb += dxb * dyb

            slope_a = sxya / sxxa
            slope_b = sxyb / sxxb
            b0a = mya - slope_a * mxa
            b0b = myb - slope_b * mxb
            numerator = b0a - b0b

            if fuzzy:
                gap = ta / na - tb / nb
                if fabs(gap) < min_gap:
                    flags[r] = _WEAK_GAP
                    points[r] = NAN
                    continue
                value = numerator / gap
            else:
                value = numerator

            flags[r] = _OK
            points[r] = value
