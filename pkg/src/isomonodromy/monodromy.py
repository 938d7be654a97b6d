"""Monodromy matrices, representations and local factorization checks.

Conventions
-----------
For a loop ``g`` the continued solution satisfies ``Y_g = Y M_g``.  Walking
loop ``a`` and then loop ``b`` multiplies by ``M_b M_a``, so the group product
``g1 g2`` (``g2`` walked first) satisfies ``M_(g1 g2) = M_g1 M_g2``.  Words
are kept in traversal order; :func:`~isomonodromy.geometry.group_product`
converts a group product into traversal order.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, schur, solve_sylvester
from scipy.linalg.lapack import ztrexc

from .continuation import (continue_solution, solution_at_switch, solve_from_infinity,
                           switch_radius)
from .core import (DEFAULT_TOLERANCES, FuchsianSystem, Tolerances, as_matrix, eigenvalues,
                   require_valid, spectral_data, spectral_distance)
from .errors import BranchCutError, NumericalFailure, RealizationError
from .geometry import (BranchAnchor, LoopWord, _segment_distance, lasso, group_product,
                       realize_loop, track_argument)

CONVENTION = "Y_g = Y M_g; M_(g1 g2) = M_g1 M_g2 with g2 traversed first"

# ---------------------------------------------------------------------------
# matrix logarithm
# ---------------------------------------------------------------------------

_CLUSTER_DELTA = 0.1
_CUT_SNAP = 1e-12
_STRADDLE = 1e-8


def _branch_arg(lam: complex, cut: float) -> tuple:
    """Argument of ``lam`` in (cut - 2 pi, cut] and which side of the cut it is near.

    Side 0 is just clockwise of the cut ray (including on it), side 1 just
    counterclockwise, side 2 far from it.
    """
    phi = cmath.phase(complex(lam) * cmath.exp(-1j * cut))
    if 0 < phi < _CUT_SNAP:
        phi = 0.0
    arg = cut + phi if phi <= 0 else cut + phi - 2 * math.pi
    if -math.pi / 2 < phi <= 0:
        side = 0
    elif 0 < phi < math.pi / 2:
        side = 1
    else:
        side = 2
    return arg, side


def _clusters(lam, cut):
    """Confluent clusters of eigenvalues that never straddle the cut."""
    n = len(lam)
    info = [_branch_arg(v, cut) for v in lam]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(lam[i] - lam[j])
            scale = max(abs(lam[i]), abs(lam[j]))
            if gap > _CLUSTER_DELTA * scale:
                continue
            crosses = {info[i][1], info[j][1]} == {0, 1}
            if crosses:
                if gap <= _STRADDLE * scale:
                    raise BranchCutError(
                        "a defective eigenvalue cluster lies on the branch cut; "
                        "retry with a rotated cut angle")
                continue
            parent[find(i)] = find(j)
    ids = [find(i) for i in range(n)]
    return ids, [a for a, _ in info]


def _log_block(T, cut):
    """Logarithm of an upper triangular block with confluent eigenvalues."""
    m = T.shape[0]
    sigma = np.diag(T).mean()
    log_sigma = math.log(abs(sigma)) + 1j * _branch_arg(sigma, cut)[0]
    if m == 1:
        return np.array([[log_sigma]])
    N = T / sigma - np.eye(m)
    total = np.zeros_like(N)
    power = np.eye(m, dtype=np.complex128)
    quiet = 0
    for p in range(1, 2000):
        power = power @ N
        term = power * ((-1) ** (p + 1) / p)
        total += term
        if np.abs(term).max() <= 1e-17 * max(1.0, np.abs(total).max()):
            quiet += 1
            if quiet >= m + 2:
                break
        else:
            quiet = 0
    else:
        raise NumericalFailure("logarithm series did not converge on a diagonal block")
    return log_sigma * np.eye(m) + total


def matrix_log(M, cut_angle: float = math.pi) -> np.ndarray:
    """Logarithm ``L`` of an invertible matrix with ``expm(L) = M``.

    Eigenvalue logarithms have imaginary parts in ``(cut_angle - 2 pi,
    cut_angle]``; the default is the principal branch.  Computed by a complex
    Schur decomposition, reordering into confluent eigenvalue clusters, a
    series on each diagonal block and the block Parlett recurrence for the
    coupling blocks.
    """
    M = as_matrix(M)
    n = M.shape[0]
    T, Z = schur(M, output="complex")
    lam = np.diag(T)
    if np.any(np.abs(lam) <= 1e-300) or np.abs(lam).min() <= 1e-14 * np.abs(lam).max():
        raise NumericalFailure("matrix_log needs an invertible matrix")
    ids, _ = _clusters(lam, cut_angle)
    # move members of each cluster together, clusters in order of first appearance
    order = list(dict.fromkeys(ids))
    pos = 0
    for c in order:
        for q in range(pos, n):
            if ids[q] != c:
                continue
            if q != pos:
                T, Z, info = ztrexc(T, Z, q + 1, pos + 1)
                if info != 0:
                    raise NumericalFailure(f"Schur reordering failed (info={info})")
                ids.insert(pos, ids.pop(q))
            pos += 1
    bounds = [0]
    for i in range(1, n):
        if ids[i] != ids[i - 1]:
            bounds.append(i)
    bounds.append(n)
    blocks = [slice(bounds[b], bounds[b + 1]) for b in range(len(bounds) - 1)]
    F = np.zeros_like(T)
    for b in blocks:
        F[b, b] = _log_block(T[b, b], cut_angle)
    for j in range(len(blocks)):
        bj = blocks[j]
        for i in range(j - 1, -1, -1):
            bi = blocks[i]
            rhs = F[bi, bi] @ T[bi, bj] - T[bi, bj] @ F[bj, bj]
            for k in range(i + 1, j):
                bk = blocks[k]
                rhs += F[bi, bk] @ T[bk, bj] - T[bi, bk] @ F[bk, bj]
            F[bi, bj] = solve_sylvester(T[bi, bi], -T[bj, bj], rhs)
    return Z @ F @ Z.conj().T


# ---------------------------------------------------------------------------
# loop realizations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Realization:
    """Where and how loops are drawn.

    ``centers`` and ``radii`` give the circuit centre and radius around each
    pole (the pole loci themselves, or confinement disks containing them).
    """

    base_point: complex
    centers: np.ndarray
    radii: np.ndarray

    def path(self, word: LoopWord):
        return realize_loop(word, self.centers, self.base_point, radii=self.radii)


def default_clearance(poles) -> float:
    poles = np.atleast_1d(np.asarray(poles, dtype=np.complex128))
    if poles.size < 2:
        return 0.1 * max(1.0, float(np.abs(poles).max()))
    d = np.abs(poles[:, None] - poles[None, :])
    d[np.diag_indices(poles.size)] = np.inf
    return 0.1 * float(d.min())


def _corridor_margin(centers, radii, base):
    """Worst relative clearance of straight corridors from ``base``."""
    worst = math.inf
    for j, (c, r) in enumerate(zip(centers, radii)):
        entry = c + r * (base - c) / abs(base - c)
        for k, (ck, rk) in enumerate(zip(centers, radii)):
            if k != j:
                worst = min(worst, _segment_distance(base, entry, ck) / rk - 1.0)
    return worst


def angular_order(centers, base_point) -> list:
    """Pole indices (0-based) by decreasing direction angle seen from the base point.

    For straight corridors from a base point outside the convex hull of the
    poles, the product of the generator matrices in this order is the
    identity.
    """
    b = complex(base_point)
    rel = np.angle((np.asarray(centers) - b) / -b)
    return [int(i) for i in np.argsort(-rel, kind="stable")]


def choose_base_point(centers, radii, radius: float, candidates: int = 720) -> complex:
    """Base point on the circle ``|x| = radius`` with clear straight corridors.

    Angles are scanned clockwise from the positive real axis; the first angle
    whose corridors clear every other disk by half a radius and whose
    angular order is the index order wins.  Failing that, the angle with the
    largest corridor margin is used.
    """
    centers = np.asarray(centers, dtype=np.complex128)
    n = centers.size
    best, best_margin = None, -math.inf
    for m in range(candidates):
        b = radius * complex(math.cos(-2 * math.pi * m / candidates),
                             math.sin(-2 * math.pi * m / candidates))
        margin = _corridor_margin(centers, radii, b) if n > 1 else math.inf
        if margin >= 0.5 and angular_order(centers, b) == list(range(n)):
            return b
        if margin > best_margin:
            best, best_margin = b, margin
    return best


def _hurwitz_sort(order):
    """Generator words in index order with the same ordered product.

    ``order`` lists 1-based pole labels whose simple lassos multiply to the
    identity in that order.  Adjacent factors are exchanged with
    ``x y = y (y^-1 x y)`` until the labels are sorted.
    """
    items = [(j, LoopWord.generator(j)) for j in order]
    changed = True
    while changed:
        changed = False
        for i in range(len(items) - 1):
            (lx, x), (ly, y) = items[i], items[i + 1]
            if lx > ly:
                items[i] = (ly, y)
                items[i + 1] = (lx, group_product(y.inverse(), x, y))
                changed = True
    return [w for _, w in items]


def default_realization(system: FuchsianSystem, clearance: float | None = None,
                        base_point: complex | None = None) -> Realization:
    centers = system.poles
    r = default_clearance(centers) if clearance is None else float(clearance)
    radii = np.full(system.n, r)
    if base_point is None:
        base_point = choose_base_point(centers, radii, switch_radius(system))
    return Realization(complex(base_point), centers, radii)


def canonical_generators(realization: Realization) -> list:
    """Generator words whose index-ordered product is the trivial loop."""
    order = angular_order(realization.centers, realization.base_point)
    return _hurwitz_sort([i + 1 for i in order])


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------

def base_solution(system: FuchsianSystem, base_point: complex,
                  tol: Tolerances = DEFAULT_TOLERANCES):
    """Normalised solution at the base point, reached radially from infinity."""
    b = complex(base_point)
    if abs(b) >= switch_radius(system) * (1 - 1e-12):
        out = solution_at_switch(system, b, tol)
        return out.y, out.error_estimate
    out = solve_from_infinity(system, b, tol=tol)
    return out.Y_end, out.error_estimate


@dataclass(frozen=True, eq=False)
class MonodromyResult:
    matrix: np.ndarray
    error_estimate: float
    steps_taken: int


def monodromy(system: FuchsianSystem, word: LoopWord, realization: Realization | None = None,
              tol: Tolerances = DEFAULT_TOLERANCES, y_base=None) -> MonodromyResult:
    """Monodromy matrix of ``word`` with its integration diagnostics."""
    require_valid(system, tol)
    if realization is None:
        realization = default_realization(system)
    path = realization.path(word)
    if y_base is None:
        y_base, base_err = base_solution(system, realization.base_point, tol)
    else:
        base_err = 0.0
    if len(word) == 0:
        return MonodromyResult(np.eye(system.k, dtype=np.complex128), 0.0, 0)
    out = continue_solution(system, path, y_base, tol)
    M = np.linalg.solve(y_base, out.Y_end)
    return MonodromyResult(M, out.error_estimate + base_err, out.steps_taken)


def monodromy_matrix(system: FuchsianSystem, word: LoopWord,
                     realization: Realization | None = None,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """M_g = Y_base^-1 (Y_base continued once around the realised loop)."""
    return monodromy(system, word, realization, tol).matrix


@dataclass(frozen=True, eq=False)
class MonodromyRep:
    generators: np.ndarray
    words: tuple
    realization: Realization
    relation_defect: float
    error_estimates: tuple
    convention: str = CONVENTION

    def product(self) -> np.ndarray:
        out = np.eye(self.generators.shape[1], dtype=np.complex128)
        for m in self.generators:
            out = out @ m
        return out


def monodromy_representation(system: FuchsianSystem, realization: Realization | None = None,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> MonodromyRep:
    """Generator matrices M_1..M_n and the defect of M_1 M_2 ... M_n = I."""
    require_valid(system, tol)
    if realization is None:
        realization = default_realization(system)
    words = canonical_generators(realization)
    y_base, _ = base_solution(system, realization.base_point, tol)
    results = [monodromy(system, w, realization, tol, y_base) for w in words]
    gens = np.array([r.matrix for r in results])
    prod = np.eye(system.k, dtype=np.complex128)
    for m in gens:
        prod = prod @ m
    defect = float(np.linalg.norm(prod - np.eye(system.k)))
    return MonodromyRep(gens, tuple(words), realization, defect,
                        tuple(r.error_estimate for r in results))


def homomorphism_defect(system: FuchsianSystem, w1: LoopWord, w2: LoopWord,
                        realization: Realization | None = None,
                        tol: Tolerances = DEFAULT_TOLERANCES, *, relative: bool = False) -> float:
    """|| M(w1 w2) - M(w1) M(w2) ||_F, where ``w2`` is walked first in ``w1 w2``.

    With ``relative=True`` the defect is divided by
    ``max(1, ||M(w1)||_F ||M(w2)||_F)``, the scale at which rounding in the
    product is committed; long words around poles with large imaginary
    exponents produce entries far beyond 1e8, where an absolute bound is
    below the spacing of doubles.
    """
    require_valid(system, tol)
    if realization is None:
        realization = default_realization(system)
    y_base, _ = base_solution(system, realization.base_point, tol)
    m12 = monodromy(system, group_product(w1, w2), realization, tol, y_base).matrix
    m1 = monodromy(system, w1, realization, tol, y_base).matrix
    m2 = monodromy(system, w2, realization, tol, y_base).matrix
    defect = float(np.linalg.norm(m12 - m1 @ m2))
    if relative:
        defect /= max(1.0, float(np.linalg.norm(m1) * np.linalg.norm(m2)))
    return defect


def local_spectrum_check(system: FuchsianSystem, pole_index: int,
                         realization: Realization | None = None,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Matching distance between spectrum(M_j) and spectrum(exp(2 pi i Q_j))."""
    M = monodromy_matrix(system, LoopWord.generator(pole_index), realization, tol)
    expected = np.exp(2j * np.pi * eigenvalues(system.residues[pole_index - 1]))
    return spectral_distance(eigenvalues(M, "monodromy matrix"), expected)


@dataclass(frozen=True, eq=False)
class LocalFactorizationReport:
    pole_index: int
    A: np.ndarray | None
    single_valued_defect: float | None
    spectra_match_defect: float
    resonant: bool
    skipped: bool
    anchor: BranchAnchor | None = None


def regular_factor_check(system: FuchsianSystem, pole_index: int,
                         realization: Realization | None = None,
                         tol: Tolerances = DEFAULT_TOLERANCES, *,
                         allow_resonant: bool = False,
                         cut_angle: float = math.pi) -> LocalFactorizationReport:
    """Test that Y(x) (x - t_j)^(-A) is single valued around t_j.

    ``A = log(M_j) / (2 pi i)``.  The candidate regular factor is evaluated
    at the circuit entry point before and after one counterclockwise turn,
    with the power taken on the continuously tracked branch of arg(x - t_j).
    Resonant residues are skipped unless ``allow_resonant`` is set.
    """
    require_valid(system, tol)
    if realization is None:
        realization = default_realization(system)
    j = pole_index
    resonant = not spectral_data(system, tol).non_resonant[j - 1]
    corridor, loop = lasso(j, 1, realization.centers, realization.radii,
                           realization.base_point)
    y_base, _ = base_solution(system, realization.base_point, tol)
    before = continue_solution(system, corridor, y_base, tol).Y_end
    after = continue_solution(system, loop, before, tol).Y_end
    M = np.linalg.solve(before, after)
    expected = np.exp(2j * np.pi * eigenvalues(system.residues[j - 1]))
    spectra = spectral_distance(eigenvalues(M, "monodromy matrix"), expected)
    if resonant and not allow_resonant:
        return LocalFactorizationReport(j, None, None, spectra, True, True)
    A = matrix_log(M, cut_angle) / (2j * np.pi)
    t = complex(system.poles[j - 1])
    p = loop.start
    d = p - t
    anchor = BranchAnchor(j, t, p, math.atan2(d.imag, d.real))
    turn = track_argument(loop, t)
    H_before = before @ expm(-anchor.log(p, 0.0) * A)
    H_after = after @ expm(-anchor.log(p, turn) * A)
    defect = float(np.linalg.norm(H_after - H_before))
    return LocalFactorizationReport(j, A, defect, spectra, resonant, False, anchor)


__all__ = [
    "CONVENTION", "LocalFactorizationReport", "MonodromyRep", "MonodromyResult",
    "Realization", "RealizationError", "angular_order", "base_solution",
    "canonical_generators", "choose_base_point", "default_clearance",
    "default_realization", "homomorphism_defect", "local_spectrum_check", "matrix_log",
    "monodromy", "monodromy_matrix", "monodromy_representation", "regular_factor_check",
]
