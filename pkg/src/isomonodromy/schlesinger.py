"""Schlesinger deformations: the vector field, its flow and invariant checks.

Along a path ``t(s)`` of pole positions the residues evolve by

    dQ_i/ds = sum_{j != i} [Q_i, Q_j] (dt_j/ds - dt_i/ds) / (t_i - t_j),

which is the chain rule applied to the partials ``dQ_i/dt_j``.  Poles are
confined to pairwise disjoint disks for the whole deformation, so loops drawn
outside those disks stay valid for every state on the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .continuation import continue_solution, solution_at_switch
from .core import (DEFAULT_TOLERANCES, FuchsianSystem, Tolerances, eigenvalues,
                   require_valid, spectral_distance)
from .errors import (ConfinementError, InvalidSystemError, NumericalFailure,
                     ParameterDomainError, SingularConfigurationError)
from .geometry import POLYGON_SIDES, LoopWord, PolyPath, route
from .integrate import dopri45
from .monodromy import (Realization, base_solution, canonical_generators,
                        choose_base_point, monodromy)

# loops drawn around a confinement disk keep this relative gap to its rim
LOOP_MARGIN = 0.05


@dataclass(frozen=True, eq=False)
class SchlesingerState:
    """Pole positions ``t`` and residues ``Q`` (shape ``(n, k, k)``)."""

    t: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.array(self.t, dtype=np.complex128))
        Q = np.array(self.Q, dtype=np.complex128)
        if t.ndim != 1 or Q.ndim != 3 or Q.shape[0] != t.size or Q.shape[1] != Q.shape[2]:
            raise ValueError(f"inconsistent shapes: t {t.shape}, Q {Q.shape}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(Q))):
            raise ValueError("state has non-finite entries")
        t.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "Q", Q)

    @classmethod
    def from_system(cls, system: FuchsianSystem) -> "SchlesingerState":
        return cls(system.poles, system.residues)

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def k(self) -> int:
        return self.Q.shape[1]

    def system(self) -> FuchsianSystem:
        return FuchsianSystem(self.t, self.Q)


def _differences(t):
    """Matrix t_i - t_j, raising if two poles coincide."""
    d = t[:, None] - t[None, :]
    off = ~np.eye(t.size, dtype=bool)
    if np.any(d[off] == 0):
        i, j = np.argwhere((d == 0) & off)[0]
        raise SingularConfigurationError(f"poles {i + 1} and {j + 1} coincide at {t[i]}")
    return d


def _commutators(Q):
    P = np.matmul(Q[:, None], Q[None, :])
    return P - P.swapaxes(0, 1)


def schlesinger_partials(state: SchlesingerState) -> np.ndarray:
    """Grid ``F[i, j] = dQ_i/dt_j`` of shape ``(n, n, k, k)``.

    Off the diagonal ``F[i, j] = [Q_i, Q_j] / (t_i - t_j)``; each row sums
    to zero.
    """
    d = _differences(state.t)
    np.fill_diagonal(d, 1.0)
    F = _commutators(state.Q) / d[:, :, None, None]
    idx = np.arange(state.n)
    F[idx, idx] = 0.0
    F[idx, idx] = -F.sum(axis=1)
    return F


def jacobi_compatibility_defect(state: SchlesingerState) -> float:
    """Largest ``|| D_k F_ij - D_j F_ik ||_F`` over index triples.

    ``D_k`` is the total derivative along the Schlesinger field: explicit
    dependence on ``t_k`` plus ``sum_l dF_ij/dQ_l . F_lk``.  Integrability of
    the field is equivalent to this quantity vanishing; it does so by the
    Jacobi identity.
    """
    t, Q = state.t, state.Q
    n = state.n
    d = _differences(t)
    F = schlesinger_partials(state)
    C = _commutators(Q)
    # DF[i, j, k] = D_k F_ij
    DF = np.zeros((n, n, n) + Q.shape[1:], dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(n):
                inner = (F[i, k] @ Q[j] - Q[j] @ F[i, k]
                         + Q[i] @ F[j, k] - F[j, k] @ Q[i])
                term = inner / d[i, j]
                if k == i:
                    term = term - C[i, j] / d[i, j] ** 2
                elif k == j:
                    term = term + C[i, j] / d[i, j] ** 2
                DF[i, j, k] = term
    for i in range(n):
        DF[i, i] = -DF[i].sum(axis=0)
    defect = DF - DF.swapaxes(1, 2)
    return float(np.sqrt((np.abs(defect) ** 2).sum(axis=(-2, -1))).max())


# ---------------------------------------------------------------------------
# paths and flows
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowPath:
    """Piecewise-linear path of pole configurations inside confinement disks.

    ``samples`` has shape ``(m, n)``: row ``i`` is the configuration at the
    ``i``-th vertex.  Pole ``j`` must stay in the open disk ``j``, and the
    closed disks must be pairwise disjoint.  Disks are convex, so checking
    the vertices confines every segment.
    """

    samples: np.ndarray
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128)
        if samples.ndim == 1:
            samples = samples[None, :]
        centers = np.atleast_1d(np.array(self.centers, dtype=np.complex128))
        radii = np.atleast_1d(np.array(self.radii, dtype=float))
        n = centers.size
        if samples.ndim != 2 or samples.shape[1] != n or radii.shape != (n,):
            raise ValueError(f"inconsistent shapes: samples {samples.shape}, "
                             f"centers {centers.shape}, radii {radii.shape}")
        if not (np.all(np.isfinite(samples)) and np.all(np.isfinite(centers))
                and np.all(np.isfinite(radii)) and np.all(radii > 0)):
            raise ValueError("samples, centers and radii must be finite, radii positive")
        for i in range(n):
            for j in range(i + 1, n):
                if abs(centers[i] - centers[j]) <= radii[i] + radii[j]:
                    raise ConfinementError(
                        f"confinement disks of poles {i + 1} and {j + 1} are not disjoint")
        outside = np.abs(samples - centers) >= radii
        if np.any(outside):
            m, j = np.argwhere(outside)[0]
            raise ConfinementError(
                f"pole {j + 1} leaves its confinement disk at vertex {m}: "
                f"{samples[m, j]} is not within {radii[j]:.6g} of {centers[j]}")
        for a in (samples, centers, radii):
            a.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def confined(cls, samples, pad: float = 0.1) -> "FlowPath":
        """Path with disks fitted around each pole's samples.

        Each disk is centred on the bounding box of that pole's samples and
        enlarged by ``pad`` times the smallest distance between samples of
        different poles.
        """
        samples = np.array(samples, dtype=np.complex128)
        if samples.ndim == 1:
            samples = samples[None, :]
        lo = samples.real.min(axis=0) + 1j * samples.imag.min(axis=0)
        hi = samples.real.max(axis=0) + 1j * samples.imag.max(axis=0)
        centers = (lo + hi) / 2
        extent = np.abs(samples - centers).max(axis=0)
        n = samples.shape[1]
        gap = math.inf
        for i in range(n):
            for j in range(i + 1, n):
                gap = min(gap, float(np.abs(samples[:, i, None] - samples[None, :, j]).min()))
        if not math.isfinite(gap):
            gap = max(1.0, float(np.abs(samples).max()))
        return cls(samples, centers, extent + pad * gap)

    @property
    def n(self) -> int:
        return self.centers.size

    @property
    def start(self) -> np.ndarray:
        return self.samples[0]

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]

    def reversed(self) -> "FlowPath":
        return FlowPath(self.samples[::-1], self.centers, self.radii)

    def contains(self, t) -> bool:
        return bool(np.all(np.abs(np.asarray(t) - self.centers) < self.radii))


@dataclass(frozen=True, eq=False)
class FlowTrace:
    """States of a deformation at the vertices of its path."""

    path: FlowPath
    states: tuple
    steps: tuple = ()
    error_estimate: float = 0.0
    rejected: int = 0

    @property
    def initial(self) -> SchlesingerState:
        return self.states[0]

    @property
    def final(self) -> SchlesingerState:
        return self.states[-1]

    @property
    def first_integral_drift(self) -> float:
        return first_integral_drift(self)

    @property
    def isospectrality_drift(self) -> float:
        return isospectrality_drift(self)


def _flow_field(t0, dt, k):
    n = t0.size

    def f(s, Q):
        t = t0 + s * dt
        d = t[:, None] - t[None, :]
        np.fill_diagonal(d, 1.0)
        w = (dt[None, :] - dt[:, None]) / d
        np.fill_diagonal(w, 0.0)
        return np.einsum("ij,ijab->iab", w, _commutators(Q))

    speed = float(np.abs(dt[:, None] - dt[None, :]).max()) if n > 1 else 0.0

    def cap(s):
        if speed == 0:
            return 1.0
        t = t0 + s * dt
        d = np.abs(t[:, None] - t[None, :])
        np.fill_diagonal(d, np.inf)
        return 0.5 * float(d.min()) / speed

    return f, cap


def _check_finite(s, Q):
    if not np.all(np.isfinite(Q)):
        raise NumericalFailure(f"Schlesinger flow became non-finite at s={s:.6g}")


def schlesinger_flow(state0: SchlesingerState, path: FlowPath,
                     tol: Tolerances = DEFAULT_TOLERANCES, *, project: bool = False) -> FlowTrace:
    """Integrate the Schlesinger field along ``path`` starting from ``state0``.

    With ``project=True`` the last residue is first replaced by minus the sum
    of the others, so the sum starts at exactly zero.
    """
    if path.n != state0.n:
        raise ValueError(f"path moves {path.n} poles, state has {state0.n}")
    scale = max(1.0, float(np.abs(state0.t).max()))
    if np.abs(path.start - state0.t).max() > 1e-12 * scale:
        raise ValueError("initial poles do not match the start of the path")
    Q = np.array(state0.Q)
    if project:
        Q[-1] = -Q[:-1].sum(axis=0)
        state0 = SchlesingerState(state0.t, Q)
    require_valid(state0.system(), tol)
    if not path.contains(state0.t):
        raise ConfinementError("initial poles are not inside their confinement disks")
    states = [state0]
    steps, err, rejected = [], 0.0, 0
    for a, b in zip(path.samples[:-1], path.samples[1:]):
        f, cap = _flow_field(a, b - a, state0.k)
        out = dopri45(f, Q, 0.0, 1.0, rtol=tol.ode_rel_tol, atol=tol.ode_abs_tol,
                      max_step=cap, check=_check_finite)
        Q = out.y
        states.append(SchlesingerState(b, Q))
        steps.append(len(out.steps))
        err += out.error_estimate
        rejected += out.rejected
    return FlowTrace(path, tuple(states), tuple(steps), err, rejected)


def family_trace(family: "ParameterizedFamily", path: FlowPath) -> FlowTrace:
    """Sample a parameterised family at the vertices of ``path``."""
    states = tuple(SchlesingerState(t, family(t)) for t in path.samples)
    return FlowTrace(path, states)


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------

def first_integral_drift(trace: FlowTrace) -> float:
    """max_s || sum_i Q_i(s) - sum_i Q_i(0) ||_F."""
    s0 = trace.states[0].Q.sum(axis=0)
    return max(float(np.linalg.norm(st.Q.sum(axis=0) - s0)) for st in trace.states)


def isospectrality_drift(trace: FlowTrace) -> float:
    """Largest matched distance between residue spectra and the initial ones."""
    first = [eigenvalues(q, f"residue {j + 1}") for j, q in enumerate(trace.states[0].Q)]
    worst = 0.0
    for st in trace.states[1:]:
        for j, q in enumerate(st.Q):
            worst = max(worst, spectral_distance(eigenvalues(q, f"residue {j + 1}"), first[j]))
    return worst


def loop_radii(path: FlowPath) -> np.ndarray:
    """Circuit radii whose 16-gons stay clear of the confinement disks."""
    r = path.radii * (1 + LOOP_MARGIN) / math.cos(math.pi / POLYGON_SIDES)
    n = path.n
    for i in range(n):
        for j in range(i + 1, n):
            if r[i] + r[j] >= abs(path.centers[i] - path.centers[j]):
                raise ConfinementError(
                    f"confinement disks of poles {i + 1} and {j + 1} are too close "
                    "to draw loops between them")
    return r


def outer_radius(path: FlowPath) -> float:
    """Switch radius valid for every configuration in the disks."""
    return 10.0 * max(1.0, float((np.abs(path.centers) + path.radii).max()))


def trace_realization(path: FlowPath, base_point: complex | None = None) -> Realization:
    """One loop realisation valid for every state confined by ``path``."""
    radii = loop_radii(path)
    if base_point is None:
        base_point = choose_base_point(path.centers, radii, outer_radius(path))
    return Realization(complex(base_point), path.centers, radii)


def isomonodromy_check(trace: FlowTrace, words=None, tol: Tolerances = DEFAULT_TOLERANCES,
                       realization: Realization | None = None) -> float:
    """max over words of || M(final) - M(initial) ||_F on shared loops.

    By default the words are the canonical generators of the shared
    realisation.
    """
    if realization is None:
        realization = trace_realization(trace.path)
    if words is None:
        words = canonical_generators(realization)
    words = [w if isinstance(w, LoopWord) else LoopWord.parse(w) for w in words]
    mats = []
    for st in (trace.initial, trace.final):
        if not trace.path.contains(st.t):
            raise ConfinementError("trace state lies outside the confinement disks")
        system = st.system()
        y_base, _ = base_solution(system, realization.base_point, tol)
        mats.append([monodromy(system, w, realization, tol, y_base).matrix for w in words])
    return max((float(np.linalg.norm(b - a)) for a, b in zip(*mats)), default=0.0)


@dataclass(frozen=True)
class ResidualReport:
    """A finite-difference residual at step ``h`` and at ``h/2``.

    ``ratio`` is ``value / value_half``; about 4 for a second-order error.
    """

    h: float
    value: float
    value_half: float

    @property
    def ratio(self) -> float:
        return self.value / self.value_half if self.value_half > 0 else math.inf


def _probe_approach(path: FlowPath, x: complex, R: float) -> PolyPath:
    radii = loop_radii(path)
    for j, (c, r) in enumerate(zip(path.centers, radii)):
        if abs(x - c) <= r:
            raise ConfinementError(
                f"probe point {x} is within the loop clearance of confinement disk {j + 1}")
    start = R if x == 0 else R * x / abs(x)
    return PolyPath(route(start, x, path.centers, radii))


def _flow_to(state: SchlesingerState, target, path: FlowPath, tol) -> SchlesingerState:
    if not path.contains(target):
        raise ConfinementError("finite-difference stencil leaves the confinement disks")
    short = FlowPath(np.array([state.t, target]), path.centers, path.radii)
    return schlesinger_flow(state, short, tol).final


def _normalized_solution(state, approach, R, tol, schedule=None):
    system = state.system()
    head = None if schedule is None else schedule[0]
    inf = solution_at_switch(system, approach.start, tol, head)
    rest = None if schedule is None else schedule[1:]
    out = continue_solution(system, approach, inf.y, tol, rest)
    return out.Y_end, (tuple(inf.steps),) + out.schedule


def auxiliary_system_residual(trace: FlowTrace, probes, h_fd: float = 1e-3,
                              state_index: int = -1,
                              tol: Tolerances = DEFAULT_TOLERANCES) -> ResidualReport:
    """Finite-difference check of dY/dt_j = -Q_j/(x - t_j) Y at probe points.

    ``Y`` is the solution normalised to ``I`` at infinity, continued to each
    probe along a fixed path outside the confinement disks.  The states at
    ``t +- h e_j`` are obtained by short Schlesinger flows from the chosen
    trace state, and every continuation replays the step sequence of the
    central one so that the difference quotient is free of step-selection
    noise.
    """
    path = trace.path
    state = trace.states[state_index]
    R = outer_radius(path)
    probes = [complex(x) for x in np.atleast_1d(probes)]
    approaches = [_probe_approach(path, x, R) for x in probes]
    centre = [_normalized_solution(state, ap, R, tol) for ap in approaches]
    values = []
    for h in (h_fd, h_fd / 2):
        worst = 0.0
        for j in range(state.n):
            e = np.zeros(state.n, dtype=np.complex128)
            e[j] = h
            plus = _flow_to(state, state.t + e, path, tol)
            minus = _flow_to(state, state.t - e, path, tol)
            for x, ap, (Y, sched) in zip(probes, approaches, centre):
                Yp, _ = _normalized_solution(plus, ap, R, tol, sched)
                Ym, _ = _normalized_solution(minus, ap, R, tol, sched)
                dY = (Yp - Ym) / (2 * h)
                res = dY + state.Q[j] @ Y / (x - state.t[j])
                worst = max(worst, float(np.linalg.norm(res)))
        values.append(worst)
    return ResidualReport(h_fd, values[0], values[1])


# ---------------------------------------------------------------------------
# parameterised families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParameterizedFamily:
    """A family ``t -> (Q_1(t), ..., Q_n(t))`` of residues.

    ``domain(t)`` tells whether a configuration may be evaluated; ``moving``
    lists the 1-based indices of the poles that are free parameters.
    """

    callback: Callable
    n: int
    h_fd: float = 1e-3
    domain: Callable | None = None
    moving: tuple | None = None
    name: str = "family"

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.complex128)
        if t.shape != (self.n,):
            raise ValueError(f"expected {self.n} pole positions, got shape {t.shape}")
        if self.domain is not None and not self.domain(t):
            raise ParameterDomainError(f"configuration {t.tolist()} is outside the domain of {self.name}")
        Q = np.asarray(self.callback(t), dtype=np.complex128)
        if Q.ndim != 3 or Q.shape[0] != self.n or Q.shape[1] != Q.shape[2]:
            raise ValueError(f"{self.name} returned residues of shape {Q.shape}")
        return Q


@dataclass(frozen=True, eq=False)
class SchlesingerResidual:
    """Residual ``|| dQ_i/dt_j - F_ij ||_F`` for ``i`` over all poles, ``j`` over ``directions``.

    ``grid_h`` and ``grid_half`` use central differences with steps ``h`` and
    ``h/2``; ``grid`` is their Richardson combination.
    """

    directions: tuple
    h: float
    grid_h: np.ndarray
    grid_half: np.ndarray
    grid: np.ndarray

    @property
    def max(self) -> float:
        return float(self.grid.max())

    @property
    def max_h(self) -> float:
        return float(self.grid_h.max())

    @property
    def max_half(self) -> float:
        return float(self.grid_half.max())


def schlesinger_residual(family: ParameterizedFamily, t, directions=None,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> SchlesingerResidual:
    """How far ``family`` is from solving the Schlesinger system at ``t``."""
    t = np.asarray(t, dtype=np.complex128)
    if directions is None:
        directions = family.moving if family.moving is not None else range(1, family.n + 1)
    directions = tuple(int(j) for j in directions)
    for j in directions:
        if not 1 <= j <= family.n:
            raise ValueError(f"direction {j} out of range for {family.n} poles")

    def evaluate(tt):
        Q = family(tt)
        defect = float(np.linalg.norm(Q.sum(axis=0)))
        if defect > tol.regularity_tol:
            raise InvalidSystemError(
                f"sum of residues is not zero at {tt.tolist()} (defect {defect:.3g})")
        return Q

    Q0 = evaluate(t)
    F = schlesinger_partials(SchlesingerState(t, Q0))
    h = family.h_fd
    n = family.n
    derivs = {}
    for step in (h, h / 2):
        D = np.empty((n, len(directions)) + Q0.shape[1:], dtype=np.complex128)
        for c, j in enumerate(directions):
            e = np.zeros(n, dtype=np.complex128)
            e[j - 1] = step
            D[:, c] = (evaluate(t + e) - evaluate(t - e)) / (2 * step)
        derivs[step] = D
    target = F[:, [j - 1 for j in directions]]
    rich = (4 * derivs[h / 2] - derivs[h]) / 3

    def norms(D):
        return np.sqrt((np.abs(D - target) ** 2).sum(axis=(-2, -1)))

    return SchlesingerResidual(directions, h, norms(derivs[h]), norms(derivs[h / 2]), norms(rich))


__all__ = [
    "SchlesingerState", "FlowPath", "FlowTrace", "ParameterizedFamily", "ResidualReport",
    "SchlesingerResidual", "schlesinger_partials", "schlesinger_flow", "family_trace",
    "first_integral_drift", "isospectrality_drift", "isomonodromy_check",
    "auxiliary_system_residual", "schlesinger_residual", "jacobi_compatibility_defect",
    "trace_realization", "loop_radii", "outer_radius",
]
