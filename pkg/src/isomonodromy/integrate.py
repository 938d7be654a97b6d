"""Embedded Dormand-Prince 5(4) integrator for complex array-valued ODEs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StepUnderflowError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = _A[6]
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class Integration:
    y: np.ndarray
    error_estimate: float
    steps: list = field(default_factory=list)
    rejected: int = 0


def dopri45(f, y0, s0: float, s1: float, *, rtol: float, atol: float, max_step=None,
            h0: float | None = None, schedule=None, check=None) -> Integration:
    """Integrate ``dy/ds = f(s, y)`` from ``s0`` to ``s1`` (``s1 > s0``).

    The error of a step is the Frobenius norm of the embedded difference;
    a step is accepted when it is at most ``atol + rtol * max(|y|, |y_new|)``.
    ``max_step(s)`` caps the step length at ``s``.  With ``schedule`` (a list
    of step lengths, e.g. the ``steps`` of a previous run) the step sequence
    is replayed without error control, which makes the result a smooth
    function of the problem data.  ``check(s, y)`` is called after each
    accepted step and may raise.
    """
    y = np.array(y0, dtype=np.complex128)
    span = s1 - s0
    if span <= 0:
        return Integration(y, 0.0)
    if schedule is not None:
        s = s0
        for h in schedule:
            y, _, _ = _step(f, s, y, h)
            s += h
            if check is not None:
                check(s, y)
        return Integration(y, 0.0, list(schedule))

    s = s0
    h = span if h0 is None else min(h0, span)
    total_err = 0.0
    steps = []
    rejected = 0
    h_min = 1e-14 * span
    k1 = None
    while s < s1:
        cap = max_step(s) if max_step is not None else span
        h = min(h, cap, s1 - s)
        if h < h_min and s1 - s > h_min:
            raise StepUnderflowError(f"step size underflow at s={s!r} (h={h:.3g})")
        y_new, err_vec, k_last = _step(f, s, y, h, k1)
        err = _norm(err_vec)
        scale = atol + rtol * max(_norm(y), _norm(y_new))
        ratio = err / scale if scale > 0 else (0.0 if err == 0 else np.inf)
        if ratio <= 1.0:
            last = s1 - s <= h * (1 + 1e-12)
            s = s1 if last else s + h
            y = y_new
            k1 = k_last
            total_err += err
            steps.append(h)
            if check is not None:
                check(s, y)
            factor = MAX_FACTOR if ratio == 0 else min(MAX_FACTOR, SAFETY * ratio ** -0.2)
            h = h * max(factor, 1.0)
        else:
            rejected += 1
            if not np.isfinite(ratio):
                h *= MIN_FACTOR
            else:
                h *= max(MIN_FACTOR, SAFETY * ratio ** -0.2)
    return Integration(y, total_err, steps, rejected)


def _norm(a):
    a = a.ravel()
    return float(np.sqrt(np.vdot(a, a).real))


def _step(f, s, y, h, k1=None):
    shape = y.shape
    K = np.empty((7, y.size), dtype=np.complex128)
    K[0] = (f(s, y) if k1 is None else k1).ravel()
    yf = y.ravel()
    for i in range(1, 7):
        K[i] = f(s + _C[i] * h, (yf + h * (_A[i, :i] @ K[:i])).reshape(shape)).ravel()
    # the seventh stage is evaluated at the fifth-order solution
    y_new = (yf + h * (_B5[:6] @ K[:6])).reshape(shape)
    err = h * (_E @ K)
    return y_new, err, K[6].reshape(shape)
