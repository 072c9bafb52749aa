"""Pure-numpy bootstrap kernel (fallback backend).

Mirrors the compiled kernel in rdd_kit._kernels_c: identical flag
semantics and the same centered two-pass least-squares math, so the two
backends agree to floating-point reduction order.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

FLAG_OK = 0
FLAG_TOO_FEW = 1
FLAG_DEGENERATE = 2
FLAG_WEAK_GAP = 3

# gathered scratch matrices are capped around this many elements per chunk
_CHUNK_ELEMENTS = 1 << 19


def _side_stats(xg, yg, w, n):
    """Per-row intercepts of the least-squares line under row weights w."""
    with np.errstate(divide="ignore", invalid="ignore"):
        mx = (xg * w).sum(axis=1) / n
        my = (yg * w).sum(axis=1) / n
        dx = xg - mx[:, None]
        dy = yg - my[:, None]
        sxx = (dx * dx * w).sum(axis=1)
        sxy = (dx * dy * w).sum(axis=1)
        slope = sxy / sxx
        intercept = my - slope * mx
    return intercept, sxx


def bootstrap_batch(x, y, t, above, idx, fuzzy, min_gap, points, flags):
    """Evaluate the window estimator on every resample row of idx.

    x, y, t: float64[m] window columns (x already centered on x0);
    above: uint8[m] side indicator; idx: int64[B, m] resample indices.
    Writes the replicate point into points[B] (nan on failure) and a
    failure flag into flags[B].
    """
    n_rep, m = idx.shape
    chunk = max(1, min(n_rep, _CHUNK_ELEMENTS // max(m, 1)))
    above = above.astype(np.float64)
    for start in range(0, n_rep, chunk):
        rows = idx[start : start + chunk]
        xg = x[rows]
        yg = y[rows]
        wa = above[rows]
        wb = 1.0 - wa
        na = wa.sum(axis=1)
        nb = m - na

        too_few = (na < 2) | (nb < 2)
        inf = np.inf
        xa_min = np.where(wa > 0, xg, inf).min(axis=1)
        xa_max = np.where(wa > 0, xg, -inf).max(axis=1)
        xb_min = np.where(wb > 0, xg, inf).min(axis=1)
        xb_max = np.where(wb > 0, xg, -inf).max(axis=1)
        degenerate = (xa_min == xa_max) | (xb_min == xb_max)

        b0a, _ = _side_stats(xg, yg, wa, na)
        b0b, _ = _side_stats(xg, yg, wb, nb)
        numerator = b0a - b0b

        if fuzzy:
            tg = t[rows]
            with np.errstate(divide="ignore", invalid="ignore"):
                gap = (tg * wa).sum(axis=1) / na - (tg * wb).sum(axis=1) / nb
                weak = np.abs(gap) < min_gap
                value = numerator / gap
        else:
            weak = np.zeros(rows.shape[0], dtype=bool)
            value = numerator

        flag = np.where(
            too_few,
            FLAG_TOO_FEW,
            np.where(degenerate, FLAG_DEGENERATE, np.where(weak, FLAG_WEAK_GAP, FLAG_OK)),
        ).astype(np.int32)
        flags[start : start + chunk] = flag
        points[start : start + chunk] = np.where(flag == FLAG_OK, value, np.nan)
