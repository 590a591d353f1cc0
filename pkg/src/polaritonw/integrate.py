"""Adaptive Dormand-Prince 5(4) integration for array-valued ODEs.

Small, deterministic, and happy with complex matrix-valued states; the
systems integrated here are linear, non-stiff five-mode problems, so an
explicit embedded pair with local extrapolation is the right tool.
"""

from __future__ import annotations

import numpy as np

__all__ = ["IntegrationError", "rk45"]

# Dormand-Prince tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights equal the last A row (FSAL); 4th-order weights below.
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    """Adaptive step-size control failed (reported with the failing time)."""


def _error_ratio(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def rk45(rhs, y0, t0: float, t1: float, rtol: float = 1e-9, atol: float = 1e-12,
         t_eval=None, max_step: float = np.inf):
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``t1 >= t0``.

    ``y0`` may be any complex or real ndarray; the local error is controlled
    elementwise against ``atol + rtol * |y|``.  If ``t_eval`` is given
    (sorted, within [t0, t1]), steps land exactly on those times and the
    list of states there is returned; otherwise the state at ``t1`` is
    returned.  Raises :class:`IntegrationError` on step-size underflow.
    """
    if t1 < t0:
        raise ValueError(f"backward integration requested: t1={t1} < t0={t0}")
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")

    y = np.array(y0, dtype=complex)
    t = float(t0)

    out = []
    targets = []
    next_target = None
    if t_eval is not None:
        targets = [float(v) for v in t_eval]
        if any(b < a for a, b in zip(targets, targets[1:])):
            raise ValueError("t_eval must be sorted ascending")
        if targets and (targets[0] < t0 - 1e-12 or targets[-1] > t1 + 1e-12):
            raise ValueError("t_eval must lie within [t0, t1]")
        while targets and targets[0] <= t0:
            out.append(y.copy())
            targets.pop(0)
        if not targets:
            return out
        next_target = targets.pop(0)

    if t1 == t0:
        return y

    h = min(max_step, 0.25 * (t1 - t0))
    k = [None] * 7

    while t < t1:
        bound = t1 if next_target is None else min(t1, next_target)
        h_attempt = min(h, bound - t)
        if h_attempt < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t = {t:.6g}")

        k[0] = rhs(t, y)
        for i in range(1, 7):
            yi = y
            for a, kj in zip(_A[i], k):
                yi = yi + (h_attempt * a) * kj
            k[i] = rhs(t + _C[i] * h_attempt, yi)

        y5 = y
        err = 0.0 * y
        for b5, b4, ki in zip(_B5, _B4, k):
            if b5:
                y5 = y5 + (h_attempt * b5) * ki
            err = err + (h_attempt * (b5 - b4)) * ki

        ratio = _error_ratio(err, y, y5, rtol, atol)
        if ratio <= 1.0:
            t = t + h_attempt
            y = y5
            if next_target is not None and t >= next_target - 1e-14 * max(1.0, abs(t)):
                out.append(y.copy())
                next_target = targets.pop(0) if targets else None
            factor = _MAX_FACTOR if ratio == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * ratio ** -0.2))
            h = min(max_step, h_attempt * factor)
        else:
            h = h_attempt * max(_MIN_FACTOR, _SAFETY * ratio ** -0.2)

    if t_eval is not None:
        return out
    return y
