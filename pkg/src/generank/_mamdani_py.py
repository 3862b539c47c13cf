"""NumPy implementation of the batch fuzzy-inference kernel.

Kept bit-compatible with the compiled extension: the centroid loop
visits the 1001 grid points in the same order and every floating-point
expression mirrors the C code operation for operation, so both backends
produce identical scores.
"""

from __future__ import annotations

import numpy as np

# Rule consequents. Each input is graded low/medium/high (0/1/2); a rule
# maps the summed goodness points of its antecedents to one of five
# output classes (0 = very low .. 4 = very high, peak at class/4). High
# fold change and high rank-sum deviation are good, high variance is bad.
_FC_POINTS = (0, 1, 2)
_VAR_POINTS = (2, 1, 0)
_RS_POINTS = (0, 1, 2)
_CLASS_OF_TOTAL = (0, 0, 1, 2, 3, 4, 4)

RULES = tuple(
    (f, v, s, _CLASS_OF_TOTAL[_FC_POINTS[f] + _VAR_POINTS[v] + _RS_POINTS[s]])
    for f in range(3)
    for v in range(3)
    for s in range(3)
)

GRID_SIZE = 1001


def _memberships(x, alpha, beta):
    """Low/medium/high membership grades under one (alpha, beta) pair.

    Plateaus outside [alpha, beta], linear blends between, medium peak
    at the midpoint; the three grades sum to one everywhere.
    """
    m = 0.5 * (alpha + beta)
    low = np.zeros_like(x)
    med = np.zeros_like(x)
    high = np.zeros_like(x)
    in_low = x <= alpha
    low[in_low] = 1.0
    rising = (~in_low) & (x < m)
    t = (x[rising] - alpha) / (m - alpha)
    low[rising] = 1.0 - t
    med[rising] = t
    falling = (x >= m) & (x < beta)
    t = (x[falling] - m) / (beta - m)
    med[falling] = 1.0 - t
    high[falling] = t
    high[x >= beta] = 1.0
    return low, med, high


def mamdani_scores(fc, var, rs, params):
    """Score genes by min-AND fuzzy inference with centroid defuzzification.

    ``fc``, ``var``, ``rs`` are per-gene inputs in [0, 1] (values outside
    are clamped and counted); ``params`` holds the six anchors
    (alpha_fc, beta_fc, alpha_var, beta_var, alpha_rs, beta_rs).
    Returns ``(scores, n_clamped)``.
    """
    n = fc.shape[0]
    clamped = 0
    graded = []
    for values, base in ((fc, 0), (var, 2), (rs, 4)):
        clamped += int(((values < 0.0) | (values > 1.0)).sum())
        x = np.clip(values, 0.0, 1.0)
        graded.append(_memberships(x, params[base], params[base + 1]))
    mu_fc, mu_var, mu_rs = graded

    # Strongest firing per output class (max over rules, min over parts).
    heights = [np.zeros(n) for _ in range(5)]
    for f, v, s, cls in RULES:
        fire = np.minimum(np.minimum(mu_fc[f], mu_var[v]), mu_rs[s])
        np.maximum(heights[cls], fire, out=heights[cls])

    # Centroid of the clipped-and-merged output triangles, accumulated
    # grid point by grid point exactly like the C loop.
    num = np.zeros(n)
    den = np.zeros(n)
    agg = np.empty(n)
    clipped = np.empty(n)
    for i in range(GRID_SIZE):
        y = i / 1000.0
        agg.fill(0.0)
        for cls in range(5):
            tri = 1.0 - abs(y - cls * 0.25) * 4.0
            if tri <= 0.0:
                continue
            np.minimum(tri, heights[cls], out=clipped)
            np.maximum(agg, clipped, out=agg)
        num += y * agg
        den += agg
    return num / den, clamped
