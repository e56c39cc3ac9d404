import cmath
import math

import numpy as np
import pytest
from scipy.special import gamma as sp_gamma

from okubo.numerics import (BranchConvention, PoleAtNonPositiveInteger, SingularMatrix, ZeroBase,
                            cgamma, cpow, e_of, mat_inv, mat_solve, numeric_rank)


def test_e_of_is_periodic_and_multiplicative():
    for mu in (0.3 + 0.1j, -1.7, 2.25 - 0.4j):
        assert abs(e_of(mu + 1) - e_of(mu)) < 1e-14
        assert abs(e_of(mu) * e_of(-mu) - 1) < 1e-14
    assert abs(e_of(0.5) + 1) < 1e-15


def test_gamma_matches_scipy(rng):
    z = rng.uniform(-6, 6, 200) + 1j * rng.uniform(-4, 4, 200)
    for x in z:
        ref = sp_gamma(x)
        assert abs(cgamma(x) - ref) <= 1e-12 * abs(ref)


def test_gamma_integer_values():
    for k in range(1, 15):
        assert abs(cgamma(k) - math.factorial(k - 1)) <= 1e-13 * math.factorial(k - 1)
    assert abs(cgamma(0.5) - math.sqrt(math.pi)) < 1e-14


def test_gamma_poles_raise():
    for k in range(0, 5):
        with pytest.raises(PoleAtNonPositiveInteger):
            cgamma(-k)
    # close to but not at a pole is fine
    assert abs(cgamma(-2 + 1e-6)) > 1e5


def test_cpow_uses_the_assigned_argument():
    assert abs(cpow(-1.0, 0.5, math.pi) - 1j) < 1e-15
    assert abs(cpow(-1.0, 0.5, -math.pi) + 1j) < 1e-15
    with pytest.raises(ZeroBase):
        cpow(0, 0.3, 0.0)


def test_branch_convention_signs():
    br = BranchConvention.from_points((0.0, 1.0, 2.0), {(1, 2): -1, (1, 3): -1, (2, 3): -1})
    assert br.arg(2, 1) == 0.0
    assert br.arg(1, 2) == -math.pi
    assert br.signs == {(1, 2): -1, (1, 3): -1, (2, 3): -1}
    default = BranchConvention.from_points((0.0, 1.0, 2.0))
    assert default.arg(1, 3) == math.pi
    # power and ratio consistency
    mu = 0.37 - 0.2j
    assert abs(br.pow(1, 2, mu) - cmath.exp(mu * complex(0, -math.pi))) < 1e-15
    assert abs(br.ratio_pow(1, 3, 2, 3, mu) - br.pow(1, 3, mu) / br.pow(2, 3, mu)) < 1e-15
    with pytest.raises(ValueError):
        BranchConvention.from_points((0.0, 1.0), {(1, 2): 2})


def test_linear_algebra_helpers(rng):
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    b = rng.normal(size=(5, 2)) + 0j
    assert np.allclose(a @ mat_solve(a, b), b, atol=1e-12)
    assert np.allclose(mat_inv(a) @ a, np.eye(5), atol=1e-12)
    with pytest.raises(SingularMatrix):
        mat_solve(np.zeros((2, 2)), np.eye(2))
    low = rng.normal(size=(6, 1)) @ rng.normal(size=(1, 6))
    assert numeric_rank(low) == 1
    assert numeric_rank(np.zeros((3, 3))) == 0
    assert numeric_rank(a) == 5
