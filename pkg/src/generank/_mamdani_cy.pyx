# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch fuzzy-inference kernel.

Mirrors the NumPy fallback float for float; the build disables
floating-point contraction so both backends emit identical bits. The
grid ordinates and output triangles are hoisted into per-call tables
(they do not depend on the gene), and each output class only touches
the grid points where its triangle is positive; every arithmetic
expression and the grid-ascending accumulation order are unchanged, so
the hoisting cannot alter a single bit of the result.
"""

from libc.math cimport fabs

import numpy as np


cdef inline void _member(double x, double a, double b,
                         double *low, double *med, double *high) noexcept nogil:
    cdef double m = 0.5 * (a + b)
    cdef double t
    low[0] = 0.0
    med[0] = 0.0
    high[0] = 0.0
    if x <= a:
        low[0] = 1.0
    elif x < m:
        t = (x - a) / (m - a)
        low[0] = 1.0 - t
        med[0] = t
    elif x < b:
        t = (x - m) / (b - m)
        med[0] = 1.0 - t
        high[0] = t
    else:
        high[0] = 1.0


def mamdani_scores(double[::1] fc, double[::1] var, double[::1] rs,
                   double[::1] params):
    """Score genes by min-AND fuzzy inference with centroid defuzzification.

    Same contract as the NumPy fallback: three per-gene input arrays in
    [0, 1] (outliers clamped and counted) plus the six-anchor parameter
    vector; returns ``(scores, n_clamped)``.
    """
    cdef Py_ssize_t n = fc.shape[0]
    scores_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] scores = scores_arr
    cdef long clamped = 0

    # Goodness tables matching the fallback's rule construction.
    cdef int fc_pts[3]
    cdef int var_pts[3]
    cdef int rs_pts[3]
    cdef int cls_of[7]
    fc_pts[0] = 0; fc_pts[1] = 1; fc_pts[2] = 2
    var_pts[0] = 2; var_pts[1] = 1; var_pts[2] = 0
    rs_pts[0] = 0; rs_pts[1] = 1; rs_pts[2] = 2
    cls_of[0] = 0; cls_of[1] = 0; cls_of[2] = 1; cls_of[3] = 2
    cls_of[4] = 3; cls_of[5] = 4; cls_of[6] = 4

    # Grid ordinates and clipped output triangles, plus each class's
    # support bounds on the grid. tritab entries repeat the exact
    # expression the fallback evaluates per grid point.
    cdef double ygrid[1001]
    cdef double tritab[5][1001]
    cdef Py_ssize_t lo[5]
    cdef Py_ssize_t hi[5]
    cdef double agg[1001]
    cdef double mu_fc[3]
    cdef double mu_var[3]
    cdef double mu_rs[3]
    cdef double h[5]
    cdef double x, fire, tri, num, den, hc, c
    cdef Py_ssize_t g, i, span_lo, span_hi
    cdef int f, v, s, cls

    for i in range(1001):
        ygrid[i] = i / 1000.0
    for cls in range(5):
        lo[cls] = 1001
        hi[cls] = -1
        for i in range(1001):
            tri = 1.0 - fabs(ygrid[i] - cls * 0.25) * 4.0
            tritab[cls][i] = tri
            if tri > 0.0:
                if lo[cls] == 1001:
                    lo[cls] = i
                hi[cls] = i

    for g in range(n):
        x = fc[g]
        if x < 0.0 or x > 1.0:
            clamped += 1
            x = 0.0 if x < 0.0 else 1.0
        _member(x, params[0], params[1], &mu_fc[0], &mu_fc[1], &mu_fc[2])

        x = var[g]
        if x < 0.0 or x > 1.0:
            clamped += 1
            x = 0.0 if x < 0.0 else 1.0
        _member(x, params[2], params[3], &mu_var[0], &mu_var[1], &mu_var[2])

        x = rs[g]
        if x < 0.0 or x > 1.0:
            clamped += 1
            x = 0.0 if x < 0.0 else 1.0
        _member(x, params[4], params[5], &mu_rs[0], &mu_rs[1], &mu_rs[2])

        for cls in range(5):
            h[cls] = 0.0
        for f in range(3):
            for v in range(3):
                for s in range(3):
                    fire = mu_fc[f]
                    if mu_var[v] < fire:
                        fire = mu_var[v]
                    if mu_rs[s] < fire:
                        fire = mu_rs[s]
                    cls = cls_of[fc_pts[f] + var_pts[v] + rs_pts[s]]
                    if fire > h[cls]:
                        h[cls] = fire

        # A class with zero height never raises the aggregate, and the
        # aggregate is zero outside every active class's support, where
        # accumulating contributes exact zeros; both may be skipped.
        span_lo = 1001
        span_hi = -1
        for cls in range(5):
            if h[cls] > 0.0:
                if lo[cls] < span_lo:
                    span_lo = lo[cls]
                if hi[cls] > span_hi:
                    span_hi = hi[cls]

        num = 0.0
        den = 0.0
        if span_hi >= span_lo:
            for i in range(span_lo, span_hi + 1):
                agg[i] = 0.0
            for cls in range(5):
                hc = h[cls]
                if hc == 0.0:
                    continue
                for i in range(lo[cls], hi[cls] + 1):
                    c = tritab[cls][i]
                    if c > hc:
                        c = hc
                    if c > agg[i]:
                        agg[i] = c
            for i in range(span_lo, span_hi + 1):
                num += ygrid[i] * agg[i]
                den += agg[i]
        scores[g] = num / den

    return scores_arr, clamped
