"""Fuchsian systems, tolerances, validation and spectral data."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidSystemError, NumericalFailure


@dataclass(frozen=True)
class Tolerances:
    regularity_tol: float = 1e-12
    ode_rel_tol: float = 1e-12
    ode_abs_tol: float = 1e-14
    integer_tol: float = 1e-9
    monodromy_tol: float = 1e-7

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"tolerance {name} must be finite and >= 0, got {value!r}")

    def replace(self, **changes) -> "Tolerances":
        return Tolerances(**{**self.__dict__, **changes})


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(a, k=None) -> np.ndarray:
    """Return ``a`` as a square complex128 array, checking shape and finiteness."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if k is not None and m.shape[0] != k:
        raise ValueError(f"expected a {k}x{k} matrix, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FuchsianSystem:
    """dY/dx = sum_j Q_j / (x - t_j) Y.

    Construction only checks shapes and finiteness; regularity at infinity
    and distinctness of the poles are reported by :func:`validate_system`.
    """

    poles: np.ndarray
    residues: np.ndarray

    def __post_init__(self):
        poles = np.atleast_1d(np.asarray(self.poles, dtype=np.complex128))
        residues = np.asarray(self.residues, dtype=np.complex128)
        if poles.ndim != 1:
            raise ValueError("poles must be a flat sequence of complex numbers")
        if residues.ndim != 3 or residues.shape[1] != residues.shape[2]:
            raise ValueError(f"residues must have shape (n, k, k), got {residues.shape}")
        if residues.shape[0] != poles.shape[0]:
            raise ValueError(
                f"{poles.shape[0]} poles but {residues.shape[0]} residue matrices")
        if not (np.all(np.isfinite(poles)) and np.all(np.isfinite(residues))):
            raise ValueError("poles and residues must be finite")
        object.__setattr__(self, "poles", _frozen(poles))
        object.__setattr__(self, "residues", _frozen(residues))

    @property
    def n(self) -> int:
        return self.poles.shape[0]

    @property
    def k(self) -> int:
        return self.residues.shape[1]

    def residue_sum(self) -> np.ndarray:
        return self.residues.sum(axis=0)

    def min_separation(self) -> float:
        if self.n < 2:
            return np.inf
        d = np.abs(self.poles[:, None] - self.poles[None, :])
        d[np.diag_indices(self.n)] = np.inf
        return float(d.min())

    def with_poles(self, poles) -> "FuchsianSystem":
        return FuchsianSystem(poles, self.residues)

    def __eq__(self, other):
        if not isinstance(other, FuchsianSystem):
            return NotImplemented
        return (np.array_equal(self.poles, other.poles)
                and np.array_equal(self.residues, other.residues))

    def __hash__(self):
        return hash((self.poles.tobytes(), self.residues.tobytes()))


def close_residues(poles, residues) -> FuchsianSystem:
    """Build a system whose last residue is replaced by minus the sum of the others."""
    residues = np.array(residues, dtype=np.complex128)
    residues[-1] = -residues[:-1].sum(axis=0)
    return FuchsianSystem(poles, residues)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    measured: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def messages(self):
        return [v.message for v in self.violations]


def validate_system(system: FuchsianSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """Check the invariants of ``system`` and list every violation found."""
    found = []
    if system.n < 1:
        found.append(Violation("no-poles", "n >= 1 violated: system has no poles", 0.0))
    if system.k < 1:
        found.append(Violation("empty-matrix", "k >= 1 violated: empty residue matrices", 0.0))
    if system.n >= 2:
        sep = system.min_separation()
        if not sep > 0:
            found.append(Violation(
                "poles-not-distinct", "poles not pairwise distinct "
                f"(min separation {sep:.17g})", sep))
    if system.n >= 1 and system.k >= 1:
        defect = float(np.linalg.norm(system.residue_sum()))
        if defect > tol.regularity_tol:
            found.append(Violation(
                "residue-sum-nonzero",
                f"sum of residues is not zero (Frobenius defect {defect:.17g})", defect))
    return ValidationReport(tuple(found))


def require_valid(system: FuchsianSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    report = validate_system(system, tol)
    if not report.ok:
        raise InvalidSystemError("; ".join(report.messages()), report.violations)


def cluster_eigenvalues(values, radius):
    """Group values into clusters whose members are chained by gaps <= radius.

    Returns a list of index lists.
    """
    values = np.asarray(values)
    parent = list(range(len(values)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in combinations(range(len(values)), 2):
        if abs(values[i] - values[j]) <= radius:
            parent[find(i)] = find(j)
    groups = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def spectral_distance(a, b) -> float:
    """Optimal-matching distance between two eigenvalue multisets.

    The matching minimises the total distance; the largest matched gap is
    returned.
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise ValueError("multisets must have equal size")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def eigenvalues(m, label="matrix") -> np.ndarray:
    try:
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solver failed for {label}: {exc}") from exc


def resonance_witnesses(values, integer_tol=1e-9, cluster_radius=1e-6):
    """Pairs of distinct eigenvalues whose difference is a nonzero integer.

    Eigenvalues of a defective block are only accurate to roughly the square
    root of machine precision, so nearby values are merged into their cluster
    mean before the integer test.
    """
    values = np.asarray(values)
    radius = max(cluster_radius, integer_tol)
    means = [values[idx].mean() for idx in cluster_eigenvalues(values, radius)]
    witnesses = []
    for a, b in combinations(means, 2):
        d = a - b
        m = np.round(d.real)
        if m != 0 and abs(d - m) <= integer_tol:
            witnesses.append((complex(a), complex(b)))
    return witnesses


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: tuple
    non_resonant: tuple
    resonance_witnesses: tuple = field(default=())


def spectral_data(system: FuchsianSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralData:
    """Eigenvalues and non-resonance flags of every residue.

    ``resonance_witnesses`` holds ``(pole_index, lam_a, lam_b)`` triples with
    1-based pole indices.
    """
    eigs, flags, witnesses = [], [], []
    for j, q in enumerate(system.residues, start=1):
        lam = eigenvalues(q, f"residue at pole {j}")
        w = resonance_witnesses(lam, tol.integer_tol)
        eigs.append(lam)
        flags.append(not w)
        witnesses.extend((j, a, b) for a, b in w)
    return SpectralData(tuple(eigs), tuple(flags), tuple(witnesses))
