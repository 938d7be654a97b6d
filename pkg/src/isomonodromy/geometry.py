"""Polygonal paths, loop words and continuous argument tracking.

Loop words are stored in traversal order: the letters of ``[a, b]`` are
walked left to right, so the loop goes around ``a`` first.  Letters name
poles with 1-based indices and carry an exponent of +1 (counterclockwise
circuit) or -1 (clockwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RealizationError, SingularPointError

POLYGON_SIDES = 16
_HALF_SIDE = math.pi / POLYGON_SIDES  # half the central angle of one polygon side


@dataclass(frozen=True, eq=False)
class PolyPath:
    """Straight segments between consecutive vertices.

    A single vertex is allowed and denotes the constant path at that point.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.vertices, dtype=np.complex128)).copy()
        if v.ndim != 1 or v.size < 1:
            raise ValueError("a path needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise ValueError("path vertices must be finite")
        if v.size > 1 and np.any(v[1:] == v[:-1]):
            raise ValueError("consecutive path vertices must be distinct")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def segment(cls, a, b) -> "PolyPath":
        return cls([a, b])

    @property
    def start(self) -> complex:
        return complex(self.vertices[0])

    @property
    def end(self) -> complex:
        return complex(self.vertices[-1])

    @property
    def closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    @property
    def n_segments(self) -> int:
        return self.vertices.size - 1

    def segments(self):
        v = self.vertices
        return zip(v[:-1], v[1:])

    def length(self) -> float:
        return float(np.abs(np.diff(self.vertices)).sum())

    def reversed(self) -> "PolyPath":
        return PolyPath(self.vertices[::-1])

    def __add__(self, other: "PolyPath") -> "PolyPath":
        if abs(self.end - other.start) > 1e-12 * max(1.0, abs(self.end)):
            raise ValueError("paths do not join: "
                             f"{self.end} != {other.start}")
        return PolyPath(np.concatenate([self.vertices, other.vertices[1:]]))

    def __eq__(self, other):
        return isinstance(other, PolyPath) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())

    def __repr__(self):
        return f"PolyPath({self.vertices.size} vertices, {self.start} -> {self.end})"


@dataclass(frozen=True)
class LoopWord:
    """A word in the big-loop generators, as ``(pole_index, exponent)`` letters."""

    letters: tuple = ()

    def __post_init__(self):
        letters = tuple((int(j), int(e)) for j, e in self.letters)
        for j, e in letters:
            if j < 1:
                raise ValueError(f"pole indices are 1-based, got {j}")
            if e not in (1, -1):
                raise ValueError(f"exponents must be +1 or -1, got {e}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str) -> "LoopWord":
        """Parse comma-separated signed pole indices, e.g. ``"1,-2,1"``."""
        text = text.replace("−", "-").strip()
        if not text:
            return cls(())
        letters = []
        for token in text.split(","):
            value = int(token.strip())
            if value == 0:
                raise ValueError("pole index 0 is not allowed (indices are 1-based)")
            letters.append((abs(value), 1 if value > 0 else -1))
        return cls(tuple(letters))

    @classmethod
    def generator(cls, j: int, exponent: int = 1) -> "LoopWord":
        return cls(((j, exponent),))

    def __str__(self):
        return ",".join(str(j * e) for j, e in self.letters)

    def __len__(self):
        return len(self.letters)

    def __add__(self, other: "LoopWord") -> "LoopWord":
        return LoopWord(self.letters + other.letters)

    def inverse(self) -> "LoopWord":
        return LoopWord(tuple((j, -e) for j, e in reversed(self.letters)))

    def exponent_sums(self, n: int) -> np.ndarray:
        sums = np.zeros(n, dtype=int)
        for j, e in self.letters:
            if j > n:
                raise ValueError(f"pole index {j} out of range for {n} poles")
            sums[j - 1] += e
        return sums


def group_product(*words: LoopWord) -> LoopWord:
    """Traversal-order word for the group product ``w1 w2 ... wm``.

    In the product the rightmost factor is traversed first, which makes
    ``M(w1 w2) = M(w1) M(w2)`` for right-multiplied monodromy.
    """
    out = LoopWord()
    for w in reversed(words):
        out = out + w
    return out


@dataclass(frozen=True)
class BranchAnchor:
    """A point near a pole together with a chosen value of arg(p - t)."""

    pole_index: int
    pole: complex
    anchor_point: complex
    anchor_arg: float

    def __post_init__(self):
        d = self.anchor_point - self.pole
        if abs(d) == 0:
            raise ValueError("anchor point coincides with the pole")
        if abs(np.exp(1j * self.anchor_arg) - d / abs(d)) > 1e-12:
            raise ValueError("anchor_arg is not an argument of anchor_point - pole")

    def log(self, x: complex, turn: float) -> complex:
        """Branch of log(x - pole) reached after an argument change of ``turn``."""
        return math.log(abs(x - self.pole)) + 1j * (self.anchor_arg + turn)


@dataclass(frozen=True)
class WindingRecord:
    """Accumulated change of arg(x - t_j) along a path, per pole, in radians."""

    angles: tuple

    @property
    def turns(self) -> np.ndarray:
        return np.asarray(self.angles) / (2 * math.pi)

    def __add__(self, other: "WindingRecord") -> "WindingRecord":
        return WindingRecord(tuple(a + b for a, b in zip(self.angles, other.angles)))


def _segment_distance(a: complex, b: complex, p: complex) -> float:
    d = b - a
    L2 = d.real * d.real + d.imag * d.imag
    if L2 == 0:
        return abs(p - a)
    s = ((p - a) * d.conjugate()).real / L2
    s = min(1.0, max(0.0, s))
    return abs(p - (a + s * d))


def path_clearance(path: PolyPath, poles) -> float:
    """Minimum distance between the path and any of the poles."""
    poles = np.atleast_1d(np.asarray(poles, dtype=np.complex128))
    if poles.size == 0:
        return math.inf
    v = path.vertices
    if v.size == 1:
        return float(np.abs(poles - v[0]).min())
    a = v[:-1][:, None]
    d = (v[1:] - v[:-1])[:, None]
    p = poles[None, :]
    L2 = np.broadcast_to(np.abs(d) ** 2, (d.shape[0], poles.size))
    num = ((p - a) * d.conj()).real
    # segments too short for |d|^2 to be representable count as points
    s = np.clip(np.divide(num, L2, out=np.zeros_like(num), where=L2 > 0), 0.0, 1.0)
    return float(np.abs(p - (a + s * d)).min())


def track_argument(path: PolyPath, pole: complex) -> float:
    """Total change of a continuous branch of arg(x - pole) along ``path``."""
    pole = complex(pole)
    total = 0.0
    for a, b in path.segments():
        if _segment_distance(a, b, pole) <= 0.0:
            raise SingularPointError(
                f"path segment {a} -> {b} passes through the pole {pole}")
        z = (a - pole).conjugate() * (b - pole)
        total += math.atan2(z.imag, z.real)
    if path.vertices.size == 1 and path.start == pole:
        raise SingularPointError(f"path sits on the pole {pole}")
    return total


def winding_record(path: PolyPath, poles) -> WindingRecord:
    return WindingRecord(tuple(track_argument(path, p) for p in np.atleast_1d(poles)))


def _arc(center, radius, phi0, sweep):
    pieces = max(1, math.ceil(abs(sweep) / (2 * _HALF_SIDE) - 1e-12))
    return [center + radius * np.exp(1j * (phi0 + sweep * i / pieces))
            for i in range(pieces + 1)]


def route(a: complex, b: complex, centers, radii, skip=()) -> list:
    """Vertices of a polyline from ``a`` to ``b`` avoiding every disk.

    The straight segment is kept where it clears the disks ``|x - c_k| < r_k``;
    where it does not, it detours along a polygonal arc around the blocking
    disk on the side of the shorter detour.  Ties go to the side with the
    larger imaginary part.
    """
    a, b = complex(a), complex(b)
    centers = np.atleast_1d(np.asarray(centers, dtype=np.complex128))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape)
    L = abs(b - a)
    if L == 0:
        return [a]
    d = (b - a) / L
    blockers = []
    for k, (c, r) in enumerate(zip(centers, radii)):
        if k in skip:
            continue
        if abs(a - c) < r or abs(b - c) < r:
            raise RealizationError(
                f"endpoint of a corridor lies within clearance of pole {k + 1}", k + 1)
        if _segment_distance(a, b, c) >= r:
            continue
        rel = (c - a) * d.conjugate()
        rho = r / math.cos(_HALF_SIDE)
        half = math.sqrt(max(rho * rho - rel.imag ** 2, 0.0))
        s_in, s_out = max(rel.real - half, 0.0), min(rel.real + half, L)
        blockers.append((s_in, s_out, k, c, rho, rel.imag))
    blockers.sort()
    pts = [a]
    last = 0.0
    for s_in, s_out, k, c, rho, side in blockers:
        if s_in < last:
            raise RealizationError(
                f"detours around neighbouring poles overlap near pole {k + 1}", k + 1)
        p_in, p_out = a + s_in * d, a + s_out * d
        phi_in = math.atan2((p_in - c).imag, (p_in - c).real)
        phi_out = math.atan2((p_out - c).imag, (p_out - c).real)
        ccw = (phi_out - phi_in) % (2 * math.pi)
        cw = ccw - 2 * math.pi
        if abs(side) > 1e-12 * rho:
            # pole on the left of travel: pass it counterclockwise
            sweep = ccw if side > 0 else cw
        else:
            mid_ccw = (c + rho * np.exp(1j * (phi_in + ccw / 2))).imag
            mid_cw = (c + rho * np.exp(1j * (phi_in + cw / 2))).imag
            sweep = ccw if mid_ccw >= mid_cw else cw
        arc = _arc(c, rho, phi_in, sweep)
        arc[0], arc[-1] = p_in, p_out
        pts.extend(arc)
        last = s_out
    pts.append(b)
    out = [pts[0]]
    for p in pts[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def circuit(center: complex, radius: float, entry: complex, exponent: int) -> list:
    """Regular 16-gon through ``entry`` around ``center``, closed at ``entry``."""
    rot = np.exp(2j * math.pi * exponent * np.arange(POLYGON_SIDES + 1) / POLYGON_SIDES)
    pts = list(center + (entry - center) * rot)
    pts[0] = pts[-1] = entry
    return pts


def _check_frame(centers, radii, base):
    n = centers.size
    for i in range(n):
        for j in range(i + 1, n):
            if radii[i] + radii[j] >= abs(centers[i] - centers[j]):
                raise RealizationError(
                    f"clearance disks of poles {i + 1} and {j + 1} overlap", j + 1)
    for k in range(n):
        if abs(base - centers[k]) <= radii[k]:
            raise RealizationError(
                f"base point lies within clearance of pole {k + 1}", k + 1)


def lasso(j: int, exponent: int, centers, radii, base_point: complex):
    """Corridor from the base point to pole ``j`` and the circuit around it.

    Returns ``(corridor, loop)`` where ``corridor`` ends at the circuit entry
    point and ``loop`` is the closed 16-gon starting and ending there.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=np.complex128))
    radii = np.asarray(radii, dtype=float)
    base = complex(base_point)
    if not 1 <= j <= centers.size:
        raise ValueError(f"pole index {j} out of range for {centers.size} poles")
    c, r = centers[j - 1], radii[j - 1]
    u = (base - c) / abs(base - c)
    entry = c + r * u
    corridor = PolyPath(route(base, entry, centers, radii, skip={j - 1}))
    loop = PolyPath(circuit(c, r, entry, exponent))
    for k in range(centers.size):
        if k == j - 1:
            continue
        if min(path_clearance(corridor, centers[k]),
               path_clearance(loop, centers[k])) < radii[k] * (1 - 1e-9):
            raise RealizationError(f"corridor to pole {j} cannot avoid pole {k + 1}", k + 1)
    return corridor, loop


def realize_loop(word: LoopWord, poles, base_point: complex, clearance: float | None = None,
                 radii=None) -> PolyPath:
    """Closed polyline from ``base_point`` realising ``word``.

    Each letter becomes a corridor from the base point towards the named pole,
    a 16-gon circuit of the given radius (counterclockwise for exponent +1)
    and the corridor walked back.  ``radii`` optionally gives a circuit and
    avoidance radius per pole; otherwise every pole uses ``clearance``.
    """
    centers = np.atleast_1d(np.asarray(poles, dtype=np.complex128))
    if radii is None:
        if clearance is None:
            raise ValueError("give either clearance or radii")
        radii = np.full(centers.size, float(clearance))
    radii = np.asarray(radii, dtype=float)
    base = complex(base_point)
    _check_frame(centers, radii, base)
    path = PolyPath([base])
    for j, e in word.letters:
        corridor, loop = lasso(j, e, centers, radii, base)
        letter = corridor + loop + corridor.reversed()
        path = letter if path.vertices.size == 1 else path + letter
    return path
