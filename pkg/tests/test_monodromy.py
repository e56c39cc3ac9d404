import warnings

import numpy as np
import pytest

from conftest import PTS2, PTS3, chart_III3
from okubo.canonical import build, random_chart
from okubo.connection import ConnectionTable, IncompleteTable, closed_form
from okubo.monodromy import (DefectiveMatrix, MonodromyTuple, assemble, calibrate_ordering, centralizer_dim,
                             cluster_eigenvalues, multiset_distance, product_relation, rigidity_index,
                             spectrum_mismatch)
from okubo.numerics import e_of
from okubo.oracle import loop_monodromy


def zero_table(partition):
    r = len(partition)
    return ConnectionTable(partition, {(i + 1, j + 1): np.zeros((partition[i], partition[j]))
                                       for i in range(r) for j in range(r) if i != j})


def test_zero_table_gives_diagonal_matrices(rng):
    s = build(random_chart("III*", 2, rng), PTS3)
    mt = assemble(s, zero_table(s.partition))
    for M in mt.matrices:
        assert np.allclose(M, np.diag(np.diag(M)))


def test_incomplete_table_rejected(rng):
    s = build(random_chart("III*", 1, rng), PTS3)
    with pytest.raises(IncompleteTable):
        assemble(s, ConnectionTable(s.partition))


def test_determinants(rng):
    c = random_chart("II*", 3, rng)
    s = build(c, PTS3)
    mt = assemble(s, closed_form(c, PTS3))
    for i, M in enumerate(mt.matrices):
        ex = s.diagonal_block_exponents(i)
        assert abs(np.linalg.det(M) - np.prod([e_of(z) for z in ex])) < 1e-10


def test_III3_matrices_match_loops():
    c = chart_III3()
    s = build(c, PTS3)
    loops = loop_monodromy(s)
    mt = assemble(s, closed_form(c, PTS3))
    for M, L in zip(mt.matrices, loops):
        assert np.max(np.abs(M - L)) < 1e-7


def test_single_point_product():
    mt = MonodromyTuple((np.diag([e_of(0.3 + 0.1j), 1.0]),))
    rep = product_relation(mt)
    assert np.allclose(rep.M_inf @ mt.matrices[0], np.eye(2))
    assert rep.residual < 1e-14


def test_conjugation_covariance(rng):
    c = random_chart("III*", 2, rng)
    s = build(c, PTS3)
    mt = assemble(s, closed_form(c, PTS3))
    G = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    Gi = np.linalg.inv(G)
    moved = MonodromyTuple(tuple(Gi @ M @ G for M in mt.matrices))
    assert np.allclose(moved.M_inf(), Gi @ mt.M_inf() @ G, atol=1e-9)
    assert rigidity_index(moved) == rigidity_index(mt) == 2


def test_rigidity_two_for_constructed_systems(rng):
    for tag, n in [("III*", 1), ("II*", 2), ("II*", 3), ("IV", None), ("IV*", None)]:
        c = random_chart(tag, n, rng)
        pts = PTS2 if tag == "IV" else PTS3
        mt = assemble(build(c, pts), closed_form(c, pts))
        assert rigidity_index(mt) == 2


def test_ordering_is_ascending():
    s = build(chart_III3(), PTS3)
    order, mism = calibrate_ordering(s)
    assert order == "ascending"
    assert mism["ascending"] < 1e-8 < mism["descending"]


def test_M_inf_spectrum(rng):
    for tag, n in [("III*", 2), ("IV*", None), ("IV", None)]:
        c = random_chart(tag, n, rng)
        pts = PTS2 if tag == "IV" else PTS3
        s = build(c, pts)
        mt = assemble(s, closed_form(c, pts))
        assert spectrum_mismatch(mt, s, c) < 1e-8
        assert abs(np.trace(mt.M_inf()) - sum(m * e_of(-r) for m, r in zip(c.multiplicities, c.rho))) < 1e-8


def test_eigen_helpers():
    assert cluster_eigenvalues([1, 1 + 1e-9, 2]) == [(1 + 5e-10, 2), (2, 1)]
    assert multiset_distance([1, 2j], [2j, 1 + 1e-3]) == pytest.approx(1e-3)
    assert multiset_distance([1], [1, 2]) == np.inf
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert centralizer_dim(np.array([[1.0, 1.0], [0.0, 1.0]])) == 4
    assert any(issubclass(x.category, DefectiveMatrix) for x in w)
