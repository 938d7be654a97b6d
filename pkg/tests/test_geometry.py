import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isomonodromy import LoopWord, PolyPath, RealizationError, SingularPointError, group_product
from isomonodromy.geometry import (circuit, lasso, path_clearance, realize_loop, route,
                                   track_argument, winding_record)

coord = st.floats(-5, 5, allow_nan=False)
point = st.builds(complex, coord, coord)


def test_loopword_parse_and_print():
    w = LoopWord.parse("1,-2,1")
    assert w.letters == ((1, 1), (2, -1), (1, 1))
    assert str(w) == "1,-2,1"
    assert LoopWord.parse("1,−2").letters == ((1, 1), (2, -1))
    assert LoopWord.parse("") == LoopWord()
    with pytest.raises(ValueError):
        LoopWord.parse("0")
    with pytest.raises(ValueError):
        LoopWord(((1, 2),))


def test_inverse_and_exponent_sums():
    w = LoopWord.parse("1,-2,3")
    assert str(w.inverse()) == "-3,2,-1"
    assert list((w + w.inverse()).exponent_sums(3)) == [0, 0, 0]
    assert list(w.exponent_sums(3)) == [1, -1, 1]


def test_group_product_walks_right_factor_first():
    a, b = LoopWord.generator(1), LoopWord.generator(2)
    assert group_product(a, b) == b + a


def test_polypath_basics():
    p = PolyPath([0, 1, 1 + 1j])
    assert p.n_segments == 2 and p.length() == pytest.approx(2.0)
    assert p.reversed().start == 1 + 1j
    q = p + PolyPath([1 + 1j, 2j])
    assert q.n_segments == 3
    with pytest.raises(ValueError):
        PolyPath([0, 0, 1])
    assert PolyPath([3]).n_segments == 0


def test_circuit_winds_once():
    pts = circuit(0.5, 0.2, 0.7, 1)
    path = PolyPath(pts)
    assert path.closed
    assert track_argument(path, 0.5) == pytest.approx(2 * math.pi)
    assert track_argument(PolyPath(circuit(0.5, 0.2, 0.7, -1)), 0.5) == pytest.approx(-2 * math.pi)
    assert track_argument(path, 3.0) == pytest.approx(0.0, abs=1e-12)
    assert path_clearance(path, [0.5]) == pytest.approx(0.2 * math.cos(math.pi / 16))


def test_track_argument_hits_pole():
    with pytest.raises(SingularPointError):
        track_argument(PolyPath([-1, 1]), 0)


@given(st.lists(point, min_size=2, max_size=6, unique=True), point)
def test_track_argument_antisymmetric(vertices, pole):
    try:
        path = PolyPath(vertices)
    except ValueError:
        return
    if path_clearance(path, [pole]) < 1e-6:
        return
    assert track_argument(path.reversed(), pole) == pytest.approx(-track_argument(path, pole),
                                                                  abs=1e-12)


@settings(max_examples=50)
@given(point, point, st.lists(point, min_size=1, max_size=3))
def test_route_clears_disks(a, b, centers):
    r = 0.3
    centers = np.array(centers)
    if len(centers) > 1:
        d = np.abs(centers[:, None] - centers[None, :]) + 10 * np.eye(len(centers))
        if d.min() < 3 * r:
            return
    if np.min(np.abs(centers - a)) < 1.2 * r or np.min(np.abs(centers - b)) < 1.2 * r:
        return
    try:
        pts = route(a, b, centers, r)
    except RealizationError:
        return
    path = PolyPath(pts)
    assert path.start == a and path.end == b
    assert path_clearance(path, centers) >= r * (1 - 1e-9)


def test_lasso_and_loop_winding():
    poles = np.array([0, 1, 2j])
    radii = np.full(3, 0.1)
    corridor, loop = lasso(2, 1, poles, radii, 10 - 3j)
    assert corridor.end == loop.start and loop.closed
    w = winding_record(corridor + loop + corridor.reversed(), poles)
    assert np.allclose(w.turns, [0, 1, 0], atol=1e-12)


def test_realize_loop_word():
    poles = [0, 1, 2j]
    path = realize_loop(LoopWord.parse("1,-3,1"), poles, 10 - 3j, clearance=0.1)
    assert path.closed and path.start == 10 - 3j
    assert np.allclose(winding_record(path, poles).turns, [2, 0, -1], atol=1e-12)
    assert realize_loop(LoopWord(), poles, 10 - 3j, clearance=0.1).n_segments == 0


def test_overlapping_clearance_is_refused():
    with pytest.raises(RealizationError):
        realize_loop(LoopWord.generator(1), [0, 0.1], 10, clearance=0.1)
    with pytest.raises(RealizationError):
        realize_loop(LoopWord.generator(1), [0, 1], 0.05, clearance=0.1)
