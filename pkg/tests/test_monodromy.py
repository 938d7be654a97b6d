import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from isomonodromy import (BranchCutError, LoopWord, RealizationError, example_system,
                          homomorphism_defect, local_spectrum_check, matrix_log, monodromy,
                          monodromy_matrix, monodromy_representation, group_product,
                          regular_factor_check, scalar_system)
from isomonodromy.core import FuchsianSystem, spectral_distance
from isomonodromy.monodromy import (Realization, angular_order, canonical_generators,
                                    default_realization)
from randsys import random_system

# ---- matrix logarithm ---------------------------------------------------------


def test_log_identity_and_diagonal():
    assert np.abs(matrix_log(np.eye(3))).max() == 0
    L = matrix_log(np.diag([cmath.exp(0.6j * math.pi), 1]))
    assert np.abs(L - np.diag([0.6j * math.pi, 0])).max() < 1e-10


def test_log_jordan_block():
    L = matrix_log(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert np.abs(L - np.array([[0, 1], [0, 0]])).max() < 1e-10


def test_log_principal_on_negative_axis():
    L = matrix_log(np.diag([-1.0, 2.0]))
    assert abs(L[0, 0] - 1j * math.pi) < 1e-12


def test_jordan_block_on_cut_takes_upper_side():
    J = np.array([[-1.0, 1.0], [0.0, -1.0]])
    L = matrix_log(J)
    assert np.abs(expm(L) - J).max() < 1e-10
    assert abs(L[0, 0] - 1j * math.pi) < 1e-12


def test_cluster_straddling_cut_raises_and_rotation_recovers():
    # eigenvalues -1 +- 1e-9 i sit on both sides of the negative axis
    J = np.array([[-1.0, 1.0], [-1e-18, -1.0]])
    with pytest.raises(BranchCutError):
        matrix_log(J)
    L = matrix_log(J, cut_angle=math.pi / 2)
    assert np.abs(expm(L) - J).max() < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 31 - 1), st.booleans())
def test_exp_log_roundtrip(k, seed, defective):
    rng = np.random.default_rng(seed)
    if defective and k >= 2:
        lam = np.exp(1j * rng.uniform(-2.5, 2.5)) * rng.uniform(0.5, 2)
        T = np.diag(np.full(k, lam)) + np.diag(rng.normal(size=k - 1), 1)
        U, _ = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))
        M = U @ T @ U.conj().T
    else:
        M = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    L = matrix_log(M)
    assert np.linalg.norm(expm(L) - M) <= 1e-10 * max(1.0, np.linalg.norm(M)) * 10
    assert np.all(np.abs(np.linalg.eigvals(L).imag) <= math.pi + 1e-9)


# ---- monodromy ------------------------------------------------------------------


def test_scalar_generators():
    rep = monodromy_representation(scalar_system(0.3, 0, 1))
    m1, m2 = rep.generators[:, 0, 0]
    assert abs(m1 - cmath.exp(0.6j * math.pi)) < 1e-8
    assert abs(m2 - cmath.exp(-0.6j * math.pi)) < 1e-8
    assert rep.relation_defect < 1e-8


def test_scalar_composition():
    s = scalar_system(0.3, 0, 1)
    g = LoopWord.generator(1)
    M = monodromy_matrix(s, group_product(g, g))[0, 0]
    assert abs(M - cmath.exp(1.2j * math.pi)) < 1e-8
    assert homomorphism_defect(s, g, g) < 1e-8
    assert homomorphism_defect(s, g, LoopWord()) < 1e-12
    assert abs(monodromy_matrix(s, g.inverse())[0, 0] - cmath.exp(-0.6j * math.pi)) < 1e-8


def test_example_trivial_monodromy():
    s = example_system()
    rep = monodromy_representation(s)
    assert rep.relation_defect < 1e-8
    assert np.abs(rep.generators - np.eye(2)).max() < 1e-8
    assert homomorphism_defect(s, LoopWord.parse("1,-2"), LoopWord.parse("3,4,4")) < 1e-8
    assert local_spectrum_check(s, 2) < 1e-8


def test_zero_residues():
    s = FuchsianSystem([0, 1, 1j], np.zeros((3, 2, 2)))
    rep = monodromy_representation(s)
    assert np.abs(rep.generators - np.eye(2)).max() < 1e-13


def test_order_convention_on_noncommuting_system():
    rng = np.random.default_rng(3)
    s = random_system(rng, 3, 2)
    real = default_realization(s)
    a, b = LoopWord.generator(1), LoopWord.generator(2)
    ma, mb = (monodromy_matrix(s, w, real) for w in (a, b))
    assert np.linalg.norm(ma @ mb - mb @ ma) > 1e-3  # genuinely noncommuting
    walked = monodromy_matrix(s, a + b, real)  # a first, then b
    assert np.linalg.norm(walked - mb @ ma) < 1e-8
    assert homomorphism_defect(s, a, b, real) < 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_relation_for_random_systems(seed):
    rng = np.random.default_rng(100 + seed)
    s = random_system(rng, int(rng.integers(2, 5)), int(rng.integers(1, 4)))
    rep = monodromy_representation(s)
    assert rep.relation_defect < 1e-7
    for j in range(s.n):
        expected = np.exp(2j * np.pi * np.linalg.eigvals(s.residues[j]))
        assert spectral_distance(np.linalg.eigvals(rep.generators[j]), expected) < 1e-6


def test_canonical_generators_hurwitz_order():
    # base point on the left of a vertical line of poles sees them out of index order
    real = Realization(-20.0, np.array([1j, 0, -1j]), np.full(3, 0.1))
    order = angular_order(real.centers, real.base_point)
    words = canonical_generators(real)
    assert sorted(order) == [0, 1, 2]
    assert all(list(w.exponent_sums(3)) == list(np.eye(3, dtype=int)[i])
               for i, w in enumerate(words))


def test_conjugation_covariance():
    rng = np.random.default_rng(11)
    s = random_system(rng, 3, 2)
    r1 = default_realization(s)
    r2 = default_realization(s, base_point=r1.base_point * cmath.exp(0.7j))
    g = LoopWord.generator(2)
    m1, m2 = monodromy_matrix(s, g, r1), monodromy_matrix(s, g, r2)
    assert np.abs(np.poly(m1) - np.poly(m2)).max() < 1e-7


def test_realization_failure():
    s = scalar_system(0.3, 0, 1)
    with pytest.raises(RealizationError):
        monodromy(s, LoopWord.generator(1), default_realization(s, clearance=0.6))


# ---- local factorisation ----------------------------------------------------------


def test_regular_factor_scalar():
    rep = regular_factor_check(scalar_system(0.3, 0, 1), 1)
    assert not rep.skipped and not rep.resonant
    assert abs(rep.A[0, 0] - 0.3) < 1e-9
    assert rep.single_valued_defect < 1e-7


def test_regular_factor_resonant_example():
    s = example_system()
    skipped = regular_factor_check(s, 3)
    assert skipped.skipped and skipped.resonant and skipped.A is None
    assert skipped.spectra_match_defect < 1e-8
    rep = regular_factor_check(s, 3, allow_resonant=True)
    assert np.abs(rep.A).max() < 1e-8  # M = I although Q = diag(0, 1)
    assert rep.single_valued_defect < 1e-7


def test_regular_factor_random_nonresonant():
    rng = np.random.default_rng(21)
    s = random_system(rng, 3, 2)
    for j in (1, 2, 3):
        rep = regular_factor_check(s, j)
        assert rep.single_valued_defect < 1e-7
        # A and Q_j share exponentials of their spectra
        assert spectral_distance(np.exp(2j * np.pi * np.linalg.eigvals(rep.A)),
                                 np.exp(2j * np.pi * np.linalg.eigvals(s.residues[j - 1]))) < 1e-7
