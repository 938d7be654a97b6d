"""Analytic continuation of fundamental solutions along polygonal paths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOLERANCES, FuchsianSystem, Tolerances, as_matrix
from .errors import (ChartSwitchError, IrregularInfinityError, NumericalFailure,
                     SingularPointError)
from .geometry import PolyPath, WindingRecord, path_clearance, route, winding_record
from .integrate import dopri45

DET_COLLAPSE = 1e-12


@dataclass(frozen=True, eq=False)
class ContinuationResult:
    """Fundamental solution at the end of a path.

    ``schedule`` holds the accepted step lengths, one tuple per integrated
    piece, and can be passed back to replay the same step sequence.
    """

    Y_end: np.ndarray
    error_estimate: float
    steps_taken: int
    winding: WindingRecord
    schedule: tuple = ()


def fuchsian_rhs(system: FuchsianSystem, x: complex) -> np.ndarray:
    """Coefficient matrix sum_j Q_j / (x - t_j)."""
    d = complex(x) - system.poles
    if np.any(d == 0):
        j = int(np.flatnonzero(d == 0)[0]) + 1
        raise SingularPointError(f"x = {x} is the pole t_{j}")
    return np.tensordot(1.0 / d, system.residues, axes=1)


def _check_regular_at_infinity(system, tol):
    defect = float(np.linalg.norm(system.residue_sum()))
    if defect > tol.regularity_tol:
        raise IrregularInfinityError(
            f"sum of residues has norm {defect:.3g} > {tol.regularity_tol:.3g}; "
            "infinity is not a regular point")


def infinity_chart_rhs(system: FuchsianSystem, w: complex,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Coefficient of dY/dw = B(w) Y in the chart x = 1/w.

    B(w) = -sum_j t_j Q_j / (1 - t_j w), which relies on sum_j Q_j = 0.
    """
    _check_regular_at_infinity(system, tol)
    d = 1.0 - system.poles * complex(w)
    if np.any(d == 0):
        raise SingularPointError(f"w = {w} maps to a pole")
    return -np.tensordot(system.poles / d, system.residues, axes=1)


def _det_guard(Y):
    # Hadamard ratio: |det Y| / prod of column norms, in [0, 1]
    cols = np.linalg.norm(Y, axis=0)
    if np.any(cols == 0):
        return 0.0
    return abs(np.linalg.det(Y)) / float(np.prod(cols))


def _check_det(s, Y):
    if not np.all(np.isfinite(Y)):
        raise NumericalFailure("solution became non-finite")
    if _det_guard(Y) < DET_COLLAPSE:
        raise NumericalFailure(f"fundamental solution lost invertibility at s={s:.6g}")


def _transport_segment(poles, residues, a, b, Y, tol, schedule=None):
    D = b - a
    absD = abs(D)
    k = residues.shape[1]
    flat = residues.reshape(residues.shape[0], -1)

    def f(s, Y):
        return ((D / (a + s * D - poles)) @ flat).reshape(k, k) @ Y

    def cap(s):
        return 0.5 * float(np.abs(a + s * D - poles).min()) / absD

    return dopri45(f, Y, 0.0, 1.0, rtol=tol.ode_rel_tol, atol=tol.ode_abs_tol,
                   max_step=cap, schedule=schedule, check=_check_det)


def continue_solution(system: FuchsianSystem, path: PolyPath, Y0,
                      tol: Tolerances = DEFAULT_TOLERANCES, schedule=None) -> ContinuationResult:
    """Transport the solution with value ``Y0`` at ``path.start`` along ``path``."""
    Y = as_matrix(Y0, system.k)
    if _det_guard(Y) < DET_COLLAPSE:
        raise NumericalFailure("initial value is not invertible")
    if path_clearance(path, system.poles) <= 0:
        raise SingularPointError("path passes through a pole")
    err = 0.0
    steps = 0
    record = []
    for i, (a, b) in enumerate(path.segments()):
        replay = None if schedule is None else schedule[i]
        out = _transport_segment(system.poles, system.residues, a, b, Y, tol, replay)
        Y = out.y
        err += out.error_estimate
        steps += len(out.steps)
        record.append(tuple(out.steps))
    return ContinuationResult(Y, err, steps, winding_record(path, system.poles), tuple(record))


def switch_radius(system: FuchsianSystem) -> float:
    """Radius of the circle where the infinity chart hands over to the x chart."""
    return 10.0 * max(1.0, float(np.abs(system.poles).max()))


def solution_at_switch(system: FuchsianSystem, start: complex,
                       tol: Tolerances = DEFAULT_TOLERANCES, schedule=None):
    """Normalised solution at ``start`` (|start| >= max |t_j|) reached radially from infinity."""
    _check_regular_at_infinity(system, tol)
    start = complex(start)
    rmax = float(np.abs(system.poles).max())
    if abs(start) <= rmax:
        raise ChartSwitchError(
            f"chart switch point {start} does not lie outside max |t_j| = {rmax:.6g}")
    w1 = 1.0 / start
    poles, residues = system.poles, system.residues
    wpoles = np.array([1.0 / t for t in poles if t != 0], dtype=np.complex128)

    k = system.k
    flat = residues.reshape(residues.shape[0], -1)

    def f(s, Y):
        return ((-w1 * poles / (1.0 - poles * (s * w1))) @ flat).reshape(k, k) @ Y

    def cap(s):
        if wpoles.size == 0:
            return 1.0
        return 0.5 * float(np.abs(s * w1 - wpoles).min()) / abs(w1)

    return dopri45(f, np.eye(system.k, dtype=np.complex128), 0.0, 1.0,
                   rtol=tol.ode_rel_tol, atol=tol.ode_abs_tol, max_step=cap,
                   schedule=schedule, check=_check_det)


def default_approach(system: FuchsianSystem, target: complex, r_switch: float | None = None,
                     start: complex | None = None) -> PolyPath:
    """Radial approach from the switch circle to ``target``, detouring around poles."""
    R = switch_radius(system) if r_switch is None else r_switch
    target = complex(target)
    if start is None:
        start = R if target == 0 else R * target / abs(target)
    dist = np.abs(system.poles - target)
    if np.any(dist == 0):
        raise SingularPointError(f"target {target} is a pole")
    sep = system.min_separation()
    radius = min(0.1 * sep if np.isfinite(sep) else 0.1, 0.5 * float(dist.min()))
    return PolyPath(route(start, target, system.poles, radius))


def solve_from_infinity(system: FuchsianSystem, target: complex, approach: PolyPath | None = None,
                        tol: Tolerances = DEFAULT_TOLERANCES, r_switch: float | None = None,
                        schedule=None) -> ContinuationResult:
    """Normalised solution (Y = I at infinity) continued to ``target``.

    The infinity chart is integrated along the ray from infinity to the first
    vertex of ``approach``; if that vertex lies inside the switch circle a
    radial segment from the circle is prepended.  The branch obtained is the
    one selected by this composite path.
    """
    _check_regular_at_infinity(system, tol)
    R = switch_radius(system) if r_switch is None else float(r_switch)
    rmax = float(np.abs(system.poles).max())
    if not R > rmax:
        raise ChartSwitchError(
            f"switch radius {R:.6g} leaves no margin over max |t_j| = {rmax:.6g}")
    target = complex(target)
    if approach is None:
        approach = default_approach(system, target, R)
    if abs(approach.end - target) > 1e-12 * max(1.0, abs(target)):
        raise ValueError("approach path does not end at the target")
    start = approach.start
    if abs(start) < R * (1 - 1e-12):
        head = R if start == 0 else R * start / abs(start)
        approach = default_approach(system, start, R, start=head) + approach
    pieces = None if schedule is None else schedule[0]
    inf = solution_at_switch(system, approach.start, tol, pieces)
    rest = None if schedule is None else schedule[1:]
    out = continue_solution(system, approach, inf.y, tol, rest)
    return ContinuationResult(out.Y_end, inf.error_estimate + out.error_estimate,
                              len(inf.steps) + out.steps_taken, out.winding,
                              (tuple(inf.steps),) + out.schedule)
