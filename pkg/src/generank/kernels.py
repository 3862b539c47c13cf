"""Backend dispatch for the batch fuzzy-inference kernel.

The compiled extension is preferred when importable; otherwise the
NumPy fallback takes over. Both produce bit-identical scores, so the
choice only affects speed.
"""

from __future__ import annotations

import numpy as np

from generank import _mamdani_py

try:
    from generank import _mamdani_cy

    _IMPL = _mamdani_cy.mamdani_scores
    BACKEND = "cython"
except ImportError:
    _mamdani_cy = None
    _IMPL = _mamdani_py.mamdani_scores
    BACKEND = "numpy"


def available_backends() -> dict:
    """Importable backend name -> raw kernel callable."""
    impls = {"numpy": _mamdani_py.mamdani_scores}
    if _mamdani_cy is not None:
        impls["cython"] = _mamdani_cy.mamdani_scores
    return impls


def _as_input(name, values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def mamdani_scores(fc, var, rs, params):
    """Validated entry point; returns ``(scores, n_clamped)``.

    ``params`` must hold six values forming three (alpha, beta) pairs
    with ``0 < alpha < beta < 1``.
    """
    fc = _as_input("fc", fc)
    var = _as_input("var", var)
    rs = _as_input("rs", rs)
    if not (fc.shape == var.shape == rs.shape):
        raise ValueError("fc, var and rs must have equal length")
    p = np.ascontiguousarray(params, dtype=np.float64)
    if p.shape != (6,):
        raise ValueError("params must hold exactly six values")
    if not np.isfinite(p).all():
        raise ValueError("params contain non-finite values")
    for k in range(0, 6, 2):
        if not 0.0 < p[k] < p[k + 1] < 1.0:
            raise ValueError("each (alpha, beta) pair needs 0 < alpha < beta < 1")
    scores, clamped = _IMPL(fc, var, rs, p)
    return scores, int(clamped)
