import cmath

import numpy as np
import pytest

from conftest import PTS3, chart_III3
from okubo.canonical import build, random_chart
from okubo.core import OkuboSystem
from okubo.oracle import (ClearanceViolated, ContinuationPath, canonical_frame, circle_path, continue_path,
                          extract_connection, frobenius, loop_monodromy)


def rank_one(alpha=0.3 + 0.2j):
    return OkuboSystem((1,), (0.0,), np.array([[alpha]]))


def test_rank_one_series_is_constant():
    fr = frobenius(rank_one(), 0)
    assert np.allclose(fr.coeffs[1:], 0)
    assert abs(fr.value(0.5)[0, 0] - 0.5 ** (0.3 + 0.2j)) < 1e-15


def test_rank_one_loop_multiplier():
    a = 0.3 + 0.2j
    Y = continue_path(rank_one(a), [[1.0]], circle_path(0.0, 0.5))
    assert abs(Y[0, 0] - cmath.exp(2j * np.pi * a)) < 1e-10


def test_continuation_is_reversible(rng):
    s = build(random_chart("III*", 2, rng), PTS3)
    path = ContinuationPath((0.45 - 1j, 3.2 - 0.6j, 3.5 + 0.5j))
    Y0 = np.eye(5, dtype=complex)
    Y1 = continue_path(s, Y0, path)
    assert np.max(np.abs(continue_path(s, Y1, path.reversed()) - Y0)) < 1e-9


def test_continuation_is_linear(rng):
    s = build(random_chart("II*", 2, rng), PTS3)
    path = ContinuationPath((0.45 - 1j, 3.0 - 0.5j))
    a = rng.normal(size=(4, 2)) + 0j
    b = rng.normal(size=(4, 2)) + 0j
    ya, yb, yab = (continue_path(s, y, path) for y in (a, b, 2 * a - 3j * b))
    assert np.max(np.abs(yab - (2 * ya - 3j * yb))) < 1e-10


def test_clearance_enforced(rng):
    s = build(random_chart("III*", 1, rng), PTS3)
    with pytest.raises(ClearanceViolated):
        continue_path(s, np.eye(3), ContinuationPath((-1 + 0j, 1.3 + 0.01j)))


def test_series_residual_and_truncation():
    s = build(chart_III3(), PTS3)
    T = np.diag(np.repeat(s.points, s.partition))
    for j in range(s.r):
        fr = frobenius(s, j)
        x = s.points[j] + 0.2 * cmath.exp(0.7j)
        res = (x * np.eye(3) - T) @ fr.derivative(x) - s.A @ fr.value(x)
        assert np.max(np.abs(res)) < 1e-10
        assert np.max(np.abs(frobenius(s, j, 40).value(x) - frobenius(s, j, 80).value(x))) < 1e-11


def test_connection_independent_of_path_details():
    s = build(chart_III3(), PTS3)
    base = canonical_frame(s).table()
    turned = canonical_frame(s, turn=0.3, handoff_fraction=0.2).table()
    assert base.mismatch(turned) < 1e-8


def test_loops_stable_under_tolerance():
    s = build(chart_III3(), PTS3)
    a = loop_monodromy(s, rtol=1e-10)
    b = loop_monodromy(s, rtol=1e-12)
    assert max(np.max(np.abs(x - y)) for x, y in zip(a, b)) < 1e-7


def test_extract_connection():
    s = build(chart_III3(), PTS3)
    assert np.array_equal(extract_connection(s, 1, 1), np.eye(1))
    C = extract_connection(s, 0, 1)
    assert np.allclose(C, canonical_frame(s).connection(0, 1), atol=1e-12)


def test_single_point_loop():
    a = 0.3 + 0.2j
    (M,) = loop_monodromy(rank_one(a))
    assert abs(M[0, 0] - cmath.exp(2j * np.pi * a)) < 1e-10
