import json

import numpy as np
import pytest

from okubo.canonical import build, random_chart
from okubo.core import (MultiplicityMismatch, OkuboSystem, from_residues, multiplicity, residues,
                        spectral, validate)


def test_system_shape_checks():
    with pytest.raises(ValueError):
        OkuboSystem((2, 1), (0, 1), np.eye(2))
    with pytest.raises(ValueError):
        OkuboSystem((1, 1), (0, 0), np.eye(2))
    with pytest.raises(ValueError):
        OkuboSystem((1, 1), (0, 1, 2), np.eye(2))


def test_residues_roundtrip(rng):
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    s = OkuboSystem((2, 2, 1), (0, 1, 2), A)
    res = residues(s)
    assert np.allclose(sum(res), A)
    # each residue lives in the rows of its block
    assert np.count_nonzero(res[0][2:]) == 0
    assert np.allclose(from_residues(s.partition, s.points, res).A, A)


def test_json_roundtrip(rng):
    s = build(random_chart("III*", 2, rng), (0.0, 1.0, 2.0))
    t = OkuboSystem.from_json(json.dumps(json.loads(s.to_json())))
    assert np.array_equal(t.A, s.A)
    assert t.partition == s.partition and t.points == s.points


def test_validate_flags_resonance():
    A = np.diag([0.3, 1.3, 0.7]).astype(complex)
    A[0, 2] = A[2, 0] = 0.1
    s = OkuboSystem((2, 1), (0, 1), A)
    rep = validate(s)
    assert not rep.ok and "differ by a nonzero integer" in rep.violations[0]
    s2 = OkuboSystem((1, 1), (0, 1), np.diag([2.0, 0.4]))
    assert not validate(s2).ok
    s3 = OkuboSystem((1, 1), (0, 1), np.diag([0.03, 0.4]))
    rep3 = validate(s3)
    assert rep3.ok and rep3.warnings


def test_spectral_data_for_canonical_types(rng):
    for tag, n in [("III*", 1), ("II*", 2), ("III*", 2), ("IV", None), ("IV*", None)]:
        chart = random_chart(tag, n, rng)
        s = build(chart)
        sp = spectral(s, chart)
        assert sp.multiplicities == chart.multiplicities
        assert sp.trace_residual < 1e-10


def test_spectral_rejects_wrong_multiplicities(rng):
    chart = random_chart("II*", 2, rng)
    s = build(chart)
    A = np.array(s.A)
    A[-1, 0] += 0.5
    with pytest.raises(MultiplicityMismatch):
        spectral(s.with_A(A), chart)


def test_multiplicity_counts_kernel():
    A = np.diag([1.0, 1.0, 2.0]).astype(complex)
    assert multiplicity(A, 1.0) == 2
    assert multiplicity(A, 3.0) == 0
