import numpy as np
import pytest

from okubo.canonical import build, random_chart
from okubo.core import OkuboSystem, spectral, validate
from okubo.katz import (DegenerateRhoPlusC, KatzStep, KernelConditionViolated, RankExceedsOne, add,
                        factor_xi_eta, katz_apply, residual_stack, to_II_star, to_III_star, to_IV_star)


def _param(rng):
    return complex(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6))


def test_add_shifts_diagonal_blocks(rng):
    s = build(random_chart("III*", 2, rng))
    t = add(s, [0.5, 0, -1j])
    d = np.diag(t.A - s.A)
    assert np.allclose(d, [0.5, 0.5, 0, 0, -1j])
    assert np.count_nonzero(t.A - s.A - np.diag(d)) == 0


def test_step_json_roundtrip():
    step = KatzStep(2, 0.3 - 0.1j, -0.2 + 0.5j)
    assert KatzStep.from_dict(step.to_dict()) == step


def test_zero_residual_gives_zero_factors():
    A = np.diag([0.3, 0.7]).astype(complex)
    s = OkuboSystem((1, 1), (0, 1), A)
    xe = factor_xi_eta(s, 1, 0.7)
    assert np.all(xe.xi[2] == 0) and np.all(xe.eta[2] == 0)


def test_rank_one_factor_reconstructs_residual(rng):
    c = random_chart("III*", 2, rng)
    step, _, _ = to_II_star(c, _param(rng))
    s = build(c)
    M = residual_stack(s, 1, step.rho)
    xe = factor_xi_eta(s, 1, step.rho)
    col = np.concatenate([xe.xi[2], xe.xi[3]])
    row = np.concatenate([xe.eta[2], xe.eta[3]], axis=1)
    assert np.max(np.abs(col @ row - M)) < 1e-10 * max(1, np.max(np.abs(M)))
    # default normalization: largest |eta| entry is one
    assert abs(np.max(np.abs(row)) - 1) < 1e-14


def test_II_star_step_factors(rng):
    # the eta_3 = 1 normalization of the III* -> II* step
    for n in (2, 3):
        c = random_chart("III*", n, rng)
        step, _, norm = to_II_star(c, _param(rng))
        xe = factor_xi_eta(build(c), 1, step.rho, norm)
        r1, r2 = c.rho
        al, be = c.alpha, c.beta
        s = r1 + r2
        xi2 = [(r2 - r1) * np.prod([be[k] - r1 for k in range(n) if k != i]) / np.prod([r2 - x for x in al])
               for i in range(n)]
        eta2 = [np.prod([be[j] + x - s for x in al]) / np.prod([be[j] - be[k] for k in range(n) if k != j])
                for j in range(n)]
        assert np.allclose(xe.xi[2].ravel(), xi2, rtol=1e-10)
        assert np.allclose(xe.eta[2].ravel(), eta2, rtol=1e-10)
        assert abs(xe.eta[3][0, 0] - 1) < 1e-14
        printed_xi3 = np.prod([b - r1 for b in be]) / np.prod([r2 - x for x in al])
        # the factor rho_1 - rho_2 is needed
        assert abs(xe.xi[3][0, 0] - (r1 - r2) * printed_xi3) < 1e-10 * abs(printed_xi3)
        assert abs(xe.xi[3][0, 0] - printed_xi3) > 1e-3


def test_rank_two_residual_rejected(rng):
    s = build(random_chart("III*", 2, rng))
    with pytest.raises(RankExceedsOne):
        factor_xi_eta(s, 1, 0.123 + 0.456j)


def test_kernel_and_degenerate_checks(rng):
    c = random_chart("III*", 2, rng)
    s = build(c)
    with pytest.raises(DegenerateRhoPlusC):
        katz_apply(s, KatzStep(1, 0.2, -0.2))
    with pytest.raises(KernelConditionViolated):
        katz_apply(s, KatzStep(1, -c.alpha[0], c.rho[1]))


def _chain(chart, steps, rng):
    s = build(chart)
    for fn in steps:
        step, chart, norm = fn(chart, _param(rng))
        s, bmap = katz_apply(s, step, norm, chart)
        assert bmap.new_index == sum(bmap.old_partition[:step.k])
    return s, chart


def test_chains_reproduce_canonical_forms(rng):
    for steps in ([to_II_star], [to_II_star, to_III_star], [to_II_star, to_III_star, to_II_star],
                  [to_II_star, to_III_star, to_II_star, to_III_star]):
        s, chart = _chain(random_chart("III*", 1, rng), steps, rng)
        ref = build(chart)
        assert np.max(np.abs(s.A - ref.A)) < 1e-10 * max(1, np.max(np.abs(ref.A)))
        assert chart.fuchs_residual() < 1e-12
        assert validate(s, chart).ok
        spectral(s, chart)


def test_IV_star_from_III_star_5(rng):
    s, chart = _chain(random_chart("III*", 2, rng), [to_IV_star], rng)
    ref = build(chart)
    assert np.max(np.abs(s.A - ref.A)) < 1e-10 * max(1, np.max(np.abs(ref.A)))


def test_diagonal_blocks_after_step(rng):
    c = random_chart("II*", 2, rng)
    s = build(c)
    step = KatzStep(2, _param(rng), c.rho[1])
    t, bmap = katz_apply(s, step)
    shift = step.rho + step.c
    assert np.allclose(np.diag(t.A)[:2], np.array(c.alpha) - shift)
    assert np.allclose(np.diag(t.A)[2:4], list(c.beta) + [step.rho])
    assert np.isclose(t.A[-1, -1], c.gamma[0] - shift)
    assert t.partition == (2, 2, 1) and bmap.k == 2
