import cmath
import math

import numpy as np
import pytest

from isomonodromy import (ExampleFamily, PolyPath, SingularPointError, example_family,
                          example_residues, example_solution, example_system,
                          monodromy_representation, scalar_two_pole, schlesinger_residual,
                          spectral_data, validate_system)
from isomonodromy.continuation import fuchsian_rhs


def test_example_system_data():
    s = example_system()
    assert validate_system(s).ok
    assert list(s.poles) == [0, 1, 2, 3]
    assert np.array_equal(s.residues[2], np.diag([0, 1]))
    assert not any(spectral_data(s).non_resonant)


def test_example_solution_values():
    assert np.array_equal(example_solution(-1, 0, [5.0]), np.diag([0.5, 0.75]))
    assert example_solution(2.5 + 1j, 0, [1, 2, 3])[0, 1] == 0
    assert example_solution(-1, 0.1, [1.0])[0, 1] == pytest.approx(0.22 / -23.2, abs=1e-15)
    assert np.abs(example_solution(1e9, 0.2, [1.0]) - np.eye(2)).max() < 1e-8
    with pytest.raises(SingularPointError):
        example_solution(2.0, 0.1)
    with pytest.raises(SingularPointError):
        example_residues(3.0)


def test_example_residues():
    assert np.array_equal(example_residues(0.2, [0.0]), example_system().residues)
    for t in (0.1, -0.3 + 0.2j, 0.45j):
        assert np.abs(example_residues(t, [1, -2, 0.5]).sum(axis=0)).max() < 1e-15
    assert np.array_equal(example_residues(0, [1.0])[3], [[0, 0], [0, -1]])


@pytest.mark.parametrize("seed", range(3))
def test_example_solution_solves_the_system(seed):
    rng = np.random.default_rng(seed)
    t = 0.3 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
    h = rng.normal(size=3)
    fam = ExampleFamily(h)
    system = fam.system(t)
    for _ in range(5):
        x = 4 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        if np.abs(system.poles - x).min() < 0.2:
            continue
        eps = 1e-5
        dY = (fam.solution(x + eps, t) - fam.solution(x - eps, t)) / (2 * eps)
        assert np.abs(dY - fuchsian_rhs(system, x) @ fam.solution(x, t)).max() < 1e-6


def test_example_monodromy_trivial_for_deformations():
    fam = ExampleFamily([1.0, 1.0])
    rep = monodromy_representation(fam.system(0.3 - 0.2j))
    assert np.abs(rep.generators - np.eye(2)).max() < 1e-8


def test_residual_vanishes_iff_h_zero():
    assert schlesinger_residual(example_family([0.0]), [0, 1, 2, 3]).max <= 1e-6
    assert schlesinger_residual(example_family([1.0]), [0, 1, 2, 3]).max >= 0.1
    assert schlesinger_residual(example_family([0.2, 3.0]), [0, 1, 2, 3]).max >= 0.01
    # with h(0) = 0 the residual at t = 0 vanishes, but not elsewhere
    assert schlesinger_residual(example_family([0.0, 1.0]), [0, 1, 2, 3]).max <= 1e-6
    assert schlesinger_residual(example_family([0.0, 1.0]), [0.2, 1, 2, 3]).max >= 0.1


def test_scalar_two_pole_branches():
    assert scalar_two_pole(0.3, 0, 1, -1) == pytest.approx(2 ** -0.3, abs=1e-15)
    assert scalar_two_pole(0.0, 0, 1, 0.5 + 2j) == 1
    loop = PolyPath([-3, -1, -0.5 - 0.5j, 0.5 - 0.5j, 0.5 + 0.5j, -0.5 + 0.5j, -1])
    ratio = scalar_two_pole(0.3, 0, 1, -1, loop) / scalar_two_pole(0.3, 0, 1, -1)
    assert abs(ratio - cmath.exp(0.6j * math.pi)) < 1e-14
    with pytest.raises(ValueError):
        scalar_two_pole(0.3, 0, 1, -1, PolyPath([-1.5, -1]))
