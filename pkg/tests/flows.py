"""Random confined Schlesinger flows for the invariant tests."""

import numpy as np

from isomonodromy import FlowPath, SchlesingerState
from randsys import random_poles, random_residues


def min_separation(t):
    d = np.abs(t[:, None] - t[None, :])
    d[np.diag_indices(t.size)] = np.inf
    return float(d.min())


def random_flow_setup(rng, n, k):
    """Initial state, disks and two paths with common end points.

    Disks have radius 0.3 times the smallest pole gap around the initial
    poles; each pole moves at most 0.1 times that gap per leg, so a path is
    at most 0.2 times the gap long.
    """
    t0 = random_poles(rng, n, min_sep=0.8)
    Q = random_residues(rng, n, k)
    sep = min_separation(t0)
    centers, radii = t0, np.full(n, 0.3 * sep)

    def step():
        return 0.1 * sep * rng.uniform(0, 1, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n))

    mid_a, mid_b = t0 + step(), t0 + step()
    end = mid_a + step()
    path_a = FlowPath([t0, mid_a, end], centers, radii)
    path_b = FlowPath([t0, mid_b, end], centers, radii)
    return SchlesingerState(t0, Q), path_a, path_b


def probe_points(path):
    """Two probe points well outside every disk."""
    r = float((np.abs(path.centers) + path.radii).max()) + 1.0
    return [r * np.exp(0.3j), r * np.exp(2.2j)]
