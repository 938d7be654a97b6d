"""Closed-form systems and solutions used as test oracles.

The four-pole example has poles ``(t, 1, 2, 3)`` and a deformation governed
by a polynomial ``h``.  Its normalised solution is rational in ``x`` for
every ``t`` and ``h``, so its monodromy is trivial, but the residues solve
the Schlesinger system only when ``h`` vanishes identically.  Polynomial
coefficients are given in ascending order: ``h(t) = sum_k c_k t^k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .core import FuchsianSystem
from .errors import SingularPointError
from .geometry import PolyPath, track_argument
from .schlesinger import ParameterizedFamily

FIXED_POLES = (1.0, 2.0, 3.0)
DOMAIN_RADIUS = 0.5


def _coeffs(h):
    c = np.atleast_1d(np.asarray(h if h is not None else [0.0], dtype=np.complex128))
    if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
        raise ValueError("h must be a non-empty sequence of finite coefficients")
    return c


def _check_t(t):
    t = complex(t)
    for p in FIXED_POLES:
        if t == p:
            raise SingularPointError(f"t = {t} coincides with the fixed pole {p:g}")
    return t


def example_system() -> FuchsianSystem:
    """The undeformed four-pole example: poles 0, 1, 2, 3 with diagonal residues."""
    return FuchsianSystem([0, 1, 2, 3], [np.diag([1, 0]), np.diag([-1, 0]),
                                         np.diag([0, 1]), np.diag([0, -1])])


def example_residues(t, h=(0.0,)) -> np.ndarray:
    """Residues at ``(t, 1, 2, 3)`` of the deformed example."""
    t = _check_t(t)
    ht = complex(P.polyval(t, _coeffs(h)))
    Q = np.zeros((4, 2, 2), dtype=np.complex128)
    Q[0] = np.diag([1, 0])
    Q[1] = [[-1, -t * (t - 1) * ht / (t - 3)], [0, 0]]
    Q[2] = [[0, 2 * t * (t - 2) * ht / (t - 3)], [0, 1]]
    Q[3] = [[0, -t * ht], [0, -1]]
    return Q


def example_solution(x, t, h=(0.0,)) -> np.ndarray:
    """Normalised solution of the deformed example at ``x``."""
    t = _check_t(t)
    x = complex(x)
    if x in (t,) + FIXED_POLES:
        raise SingularPointError(f"x = {x} is a pole of the example")
    ht = complex(P.polyval(t, _coeffs(h)))
    return np.array([[(x - t) / (x - 1), -2 * t * (x - t) * ht / ((x - 1) * (x - 3) * (t - 3))],
                     [0, (x - 2) / (x - 3)]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ExampleFamily:
    """The deformed example for a fixed polynomial ``h``.

    Only the first pole moves; it must stay in ``|t| <= 0.5``.
    """

    h: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(complex(c) for c in _coeffs(self.h)))

    def residues(self, t) -> np.ndarray:
        return example_residues(t, self.h)

    def solution(self, x, t) -> np.ndarray:
        return example_solution(x, t, self.h)

    def system(self, t) -> FuchsianSystem:
        return FuchsianSystem([t, *FIXED_POLES], self.residues(t))

    def in_domain(self, poles) -> bool:
        poles = np.asarray(poles)
        return bool(abs(poles[0]) <= DOMAIN_RADIUS and np.array_equal(poles[1:], FIXED_POLES))

    def family(self, h_fd: float = 1e-3) -> ParameterizedFamily:
        return ParameterizedFamily(lambda poles: self.residues(poles[0]), 4, h_fd,
                                   self.in_domain, (1,), f"example family h={list(self.h)}")


def example_family(h=(0.0,), h_fd: float = 1e-3) -> ParameterizedFamily:
    return ExampleFamily(h).family(h_fd)


# ---------------------------------------------------------------------------
# diagonal and scalar oracles
# ---------------------------------------------------------------------------

def diagonal_system(poles, exponents) -> FuchsianSystem:
    """System with residues ``diag(exponents[j])`` at ``poles[j]``.

    ``exponents`` has shape ``(n, k)``; every column must sum to zero for the
    point at infinity to be regular.
    """
    e = np.asarray(exponents, dtype=np.complex128)
    if e.ndim == 1:
        e = e[:, None]
    return FuchsianSystem(poles, np.array([np.diag(row) for row in e]))


def _far_point(poles, x):
    R = 3.0 * max(1.0, float(np.abs(poles).max()), abs(x))
    return R if x == 0 else R * x / abs(x)


def diagonal_solution(poles, exponents, x, approach: PolyPath | None = None) -> np.ndarray:
    """``diag(prod_j (x - t_j)^{e_jm})`` normalised to ``I`` at infinity.

    The branch is fixed by ``approach``, a polyline ending at ``x`` that
    starts at a point at least three times farther out than every pole;
    the argument of each factor is tracked along it.  Without an approach
    the straight segment from such a point on the ray through ``x`` is used.
    """
    poles = np.atleast_1d(np.asarray(poles, dtype=np.complex128))
    e = np.asarray(exponents, dtype=np.complex128)
    if e.ndim == 1:
        e = e[:, None]
    x = complex(x)
    if np.any(poles == x):
        raise SingularPointError(f"x = {x} is a pole")
    if approach is None:
        approach = PolyPath([_far_point(poles, x), x])
    if abs(approach.end - x) > 1e-12 * max(1.0, abs(x)):
        raise ValueError("approach does not end at x")
    start = approach.start
    if abs(start) < 3.0 * float(np.abs(poles).max()) * (1 - 1e-12):
        raise ValueError("approach must start at least three times farther out than every pole")
    # log(x - t_j) minus a common log(start); at the start every factor is on
    # the principal branch of log(1 - t_j/start), and the common part cancels
    # because each column of exponents sums to zero
    logs = np.array([math.log(abs(x - p) / abs(start))
                     + 1j * (np.angle(1 - p / start) + track_argument(approach, p))
                     for p in poles])
    return np.diag(np.exp(logs @ e))


def scalar_system(q, t1=0.0, t2=1.0) -> FuchsianSystem:
    """Scalar system with residues ``q`` at ``t1`` and ``-q`` at ``t2``."""
    return diagonal_system([t1, t2], [[q], [-q]])


def scalar_two_pole(q, t1, t2, x, approach: PolyPath | None = None) -> complex:
    """``((x - t1)/(x - t2))^q`` on the branch equal to 1 at infinity.

    The argument of the ratio is tracked along ``approach`` (see
    :func:`diagonal_solution`); walking once more counterclockwise around
    ``t1`` multiplies the value by ``exp(2 pi i q)``.
    """
    return complex(diagonal_solution([t1, t2], [[q], [-q]], x, approach)[0, 0])


__all__ = [
    "FIXED_POLES", "DOMAIN_RADIUS", "example_system", "example_residues", "example_solution",
    "ExampleFamily", "example_family", "diagonal_system", "diagonal_solution",
    "scalar_system", "scalar_two_pole",
]
