"""Acceptance criteria 1-9.  Each test records a pass/fail line shown in the summary."""

import math
import subprocess
import sys

import numpy as np
import pytest

from isomonodromy import (FlowPath, LoopWord, SchlesingerState, auxiliary_system_residual,
                          example_family, example_system, family_trace, homomorphism_defect,
                          isomonodromy_check, jacobi_compatibility_defect, monodromy_matrix,
                          monodromy_representation, scalar_system, scalar_two_pole,
                          schlesinger_flow, schlesinger_residual, solve_from_infinity,
                          spectral_data)
from isomonodromy.core import eigenvalues, spectral_distance
from isomonodromy.sysfile import parse_system_file, serialize_system
from flows import probe_points, random_flow_setup
from randsys import random_poles, random_residues, random_system

SUITE_SIZE = 25


def suite_systems():
    rng = np.random.default_rng(20240611)
    systems = []
    for i in range(SUITE_SIZE):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        resonant = k >= 2 and i % 3 == 0
        systems.append(random_system(rng, n, k, resonant))
    return systems


@pytest.fixture(scope="module")
def representations():
    return [(s, monodromy_representation(s)) for s in suite_systems()]


def random_word(rng, n):
    length = int(rng.integers(1, 4))
    return LoopWord(tuple((int(rng.integers(1, n + 1)), int(rng.choice([-1, 1])))
                          for _ in range(length)))


def test_criterion_1_closed_form_continuation(record):
    Y = solve_from_infinity(example_system(), -1.0).Y_end
    err_example = float(np.abs(Y - np.diag([0.5, 0.75])).max())
    y = solve_from_infinity(scalar_system(0.3, 0.0, 1.0), -1.0).Y_end[0, 0]
    err_scalar = max(abs(y - 2 ** -0.3), abs(scalar_two_pole(0.3, 0, 1, -1) - 2 ** -0.3))
    ok = err_example <= 1e-9 and err_scalar <= 1e-9
    record(1, ok, f"example error {err_example:.2e}, scalar error {err_scalar:.2e} (tol 1e-9)")
    assert ok


def test_criterion_2_representation(representations, record):
    rng = np.random.default_rng(5)
    worst_hom, worst_abs, worst_rel = 0.0, 0.0, 0.0
    for system, rep in representations:
        worst_rel = max(worst_rel, rep.relation_defect)
        w1, w2 = random_word(rng, system.n), random_word(rng, system.n)
        worst_hom = max(worst_hom, homomorphism_defect(system, w1, w2, rep.realization,
                                                       relative=True))
        worst_abs = max(worst_abs, homomorphism_defect(system, w1, w2, rep.realization))
    ok = worst_hom <= 1e-7 and worst_rel <= 1e-7
    record(2, ok, f"{SUITE_SIZE} systems: max homomorphism defect {worst_hom:.2e} relative to "
                  f"||M_w1|| ||M_w2|| (absolute {worst_abs:.2e}), max relation defect "
                  f"{worst_rel:.2e} (tol 1e-7)")
    assert ok


def test_criterion_3_scalar_monodromy(record):
    M = monodromy_matrix(scalar_system(0.3, 0.0, 1.0), LoopWord.generator(1))[0, 0]
    err = abs(M - complex(math.cos(0.6 * math.pi), math.sin(0.6 * math.pi)))
    ok = err <= 1e-8
    record(3, ok, f"M_1 = {M.real:.6f}{M.imag:+.6f}i, error {err:.2e} (tol 1e-8)")
    assert ok


def test_criterion_4_local_spectral_law(representations, record):
    worst, worst_resonant, resonant = 0.0, 0.0, 0
    for system, rep in representations:
        flags = spectral_data(system).non_resonant
        for j, M in enumerate(rep.generators):
            expected = np.exp(2j * np.pi * eigenvalues(system.residues[j]))
            d = spectral_distance(eigenvalues(M), expected)
            worst = max(worst, d)
            if not flags[j]:
                resonant += 1
                worst_resonant = max(worst_resonant, d)
    ok = worst <= 1e-6 and resonant > 0
    record(4, ok, f"max spectral mismatch {worst:.2e}; {resonant} resonant residues, "
                  f"max mismatch there {worst_resonant:.2e} (tol 1e-6)")
    assert ok


def flow_cases():
    rng = np.random.default_rng(77)
    cases = []
    for _ in range(SUITE_SIZE):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        cases.append(random_flow_setup(rng, n, k))
    return cases


@pytest.fixture(scope="module")
def flows():
    return [(state, a, b, schlesinger_flow(state, a)) for state, a, b in flow_cases()]


def test_criterion_5_flow_invariants(flows, record):
    fi = iso = rev = ind = 0.0
    for state, path_a, path_b, trace in flows:
        fi = max(fi, trace.first_integral_drift)
        iso = max(iso, trace.isospectrality_drift)
        back = schlesinger_flow(trace.final, path_a.reversed())
        rev = max(rev, float(np.linalg.norm(back.final.Q - state.Q)))
        other = schlesinger_flow(state, path_b)
        ind = max(ind, float(np.linalg.norm(other.final.Q - trace.final.Q)))
    ok = fi <= 1e-10 and iso <= 1e-8 and rev <= 1e-8 and ind <= 1e-7
    record(5, ok, f"{SUITE_SIZE} flows: first integral {fi:.2e} (1e-10), isospectrality "
                  f"{iso:.2e} (1e-8), reversibility {rev:.2e} (1e-8), path independence "
                  f"{ind:.2e} (1e-7)")
    assert ok


def test_criterion_6_isomonodromy_and_auxiliary(flows, record):
    worst_iso, worst_ratio, worst_res = 0.0, math.inf, 0.0
    for state, path_a, _, trace in flows:
        worst_iso = max(worst_iso, isomonodromy_check(trace))
        aux = auxiliary_system_residual(trace, probe_points(path_a))
        worst_ratio = min(worst_ratio, aux.ratio)
        worst_res = max(worst_res, aux.value)
    ok = worst_iso <= 1e-6 and worst_ratio >= 3.5
    record(6, ok, f"{SUITE_SIZE} flows: max isomonodromy deviation {worst_iso:.2e} (1e-6), "
                  f"min residual ratio h/(h/2) {worst_ratio:.3f} (>= 3.5), "
                  f"max residual at h=1e-3 {worst_res:.2e}")
    assert ok


def test_criterion_7_counterexample(record):
    samples = np.array([[0, 1, 2, 3], [-0.5, 1, 2, 3]], dtype=complex)
    fam = example_family([1.0])
    deviation = isomonodromy_check(family_trace(fam, FlowPath.confined(samples)))
    res = schlesinger_residual(fam, [0, 1, 2, 3])
    # row 2 is the residue at x=1, column 1 the moving pole
    q1 = float(res.grid[1, 0])
    zero = schlesinger_residual(example_family([0.0]), [0, 1, 2, 3]).max
    ok = deviation <= 1e-6 and abs(q1 - 1 / 3) <= 1e-4 and zero <= 1e-8
    record(7, ok, f"h=1: isomonodromy deviation {deviation:.2e} (1e-6), residual of "
                  f"dQ/dt at the pole x=1 {q1:.6f} (1/3 +- 1e-4), max over all residues "
                  f"{res.max:.6f}; h=0: max residual {zero:.2e} (1e-8)")
    assert ok


def test_criterion_8_jacobi(record):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        n, k = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        state = SchlesingerState(random_poles(rng, n), random_residues(rng, n, k))
        worst = max(worst, jacobi_compatibility_defect(state))
    ok = worst <= 1e-12
    record(8, ok, f"100 random states: max defect {worst:.2e} (tol 1e-12)")
    assert ok


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "isomonodromy", *args],
                          capture_output=True, check=False).stdout


def test_criterion_9_determinism(record):
    cmd = ("monodromy", "example_sysex", "--word", "1,-2,3")
    first, second = run_cli(*cmd), run_cli(*cmd)
    rng = np.random.default_rng(9)
    mismatches = 0
    for _ in range(100):
        system = random_system(rng, int(rng.integers(1, 6)), int(rng.integers(1, 4)))
        back, _ = parse_system_file(serialize_system(system))
        if not (back == system):
            mismatches += 1
    ok = first == second and len(first) > 0 and mismatches == 0
    record(9, ok, f"CLI documents identical: {first == second} ({len(first)} bytes); "
                  f"round-trip mismatches {mismatches}/100")
    assert ok
