"""Closed-form connection coefficients, the Katz recurrence and symmetry completion.

Connection coefficients ``C_ij`` are defined by ``Psi_j = Psi_i C_ij + H_ij``
near ``t_i`` for the canonical solution matrix ``Psi``.  Blocks are keyed by
1-based pairs ``(i, j)`` with ``i != j``.

Every printed closed form is kept twice in :data:`REGISTRY`: a literal
transcription and, where the literal one disagrees with the numerical
oracle, a corrected variant together with a list of the corrections made.
All formula-side powers of ``t_i - t_j`` go through a
:class:`~okubo.numerics.BranchConvention`; :func:`calibrated_branch` gives
the one that matches the oracle for real points ``t_1 < t_2 < t_3``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .canonical import DEFAULT_POINTS, DEFAULT_POINTS_IV, ExponentChart, h_tensor
from .numerics import BranchConvention, PoleAtNonPositiveInteger, cgamma, e_of
from .serialize import mat_from_json, mat_to_json

GammaPole = PoleAtNonPositiveInteger


class IncompleteTable(ValueError):
    pass


class ZeroConjugatorEntry(ZeroDivisionError):
    pass


def calibrated_branch(points) -> BranchConvention:
    """Branch convention matching the oracle's paths for real ``t_1 < t_2 < ...``."""
    signs = {(i, j): -1 for i in range(1, len(points) + 1) for j in range(i + 1, len(points) + 1)}
    return BranchConvention.from_points(points, signs)


def calibrate_branch(chart: ExponentChart | None = None, points=None, seed: int = 0):
    """Pick the sign assignment for ``arg(t_i - t_j)``, ``i < j``, that best matches the oracle.

    All eight assignments are tried on one (III*)_3 instance (drawn from
    ``seed`` unless ``chart`` is given) against the corrected closed forms.
    Returns ``(signs, mismatches)`` where ``mismatches`` maps each
    assignment to its largest relative entry error.
    """
    from itertools import product as iproduct

    from .canonical import build, random_chart
    from .oracle import canonical_frame
    if chart is None:
        chart = random_chart("III*", 1, np.random.default_rng(seed))
    points = tuple(points) if points is not None else (-0.4, 1.3, 2.5)
    truth = canonical_frame(build(chart, points)).table()
    pairs = [(1, 2), (1, 3), (2, 3)]
    mism = {}
    for combo in iproduct((-1, 1), repeat=3):
        signs = dict(zip(pairs, combo))
        cf = closed_form(chart, points, BranchConvention.from_points(points, signs))
        mism[combo] = cf.mismatch(truth)
    best = min(mism, key=mism.get)
    return dict(zip(pairs, best)), mism


def default_points(chart: ExponentChart):
    return DEFAULT_POINTS_IV if chart.type_tag == "IV" else DEFAULT_POINTS


# --- tables ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConnectionTable:
    """Blocks ``C_ij`` (``n_i x n_j``) for ``i != j``; unknown entries are NaN."""

    partition: tuple[int, ...]
    blocks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        part = tuple(int(p) for p in self.partition)
        object.__setattr__(self, "partition", part)
        r = len(part)
        blocks = {}
        for i in range(1, r + 1):
            for j in range(1, r + 1):
                if i == j:
                    continue
                b = self.blocks.get((i, j))
                if b is None:
                    b = np.full((part[i - 1], part[j - 1]), np.nan, dtype=complex)
                b = np.array(b, dtype=complex)
                if b.shape != (part[i - 1], part[j - 1]):
                    raise ValueError(f"block ({i},{j}) has shape {b.shape}, expected "
                                     f"{(part[i - 1], part[j - 1])}")
                blocks[(i, j)] = b
        object.__setattr__(self, "blocks", blocks)

    @property
    def r(self) -> int:
        return len(self.partition)

    def __getitem__(self, key) -> np.ndarray:
        return self.blocks[key]

    def is_complete(self) -> bool:
        return all(np.all(np.isfinite(b)) for b in self.blocks.values())

    def require_complete(self) -> "ConnectionTable":
        if not self.is_complete():
            missing = [k for k, b in self.blocks.items() if not np.all(np.isfinite(b))]
            raise IncompleteTable(f"blocks with unknown entries: {missing}")
        return self

    def mismatch(self, other, rel: bool = True) -> float:
        """Largest entrywise ``|a - b| / max(1, |b|)`` against ``other`` (a table or dict).

        NaN entries count as infinite mismatch.
        """
        worst = 0.0
        for key, a in self.blocks.items():
            b = np.asarray(other[key], dtype=complex)
            d = np.abs(a - b)
            if rel:
                d = d / np.maximum(1.0, np.abs(b))
            d = np.where(np.isfinite(d), d, np.inf)
            worst = max(worst, float(np.max(d)) if d.size else 0.0)
        return worst

    def to_dict(self) -> dict:
        return {
            "partition": list(self.partition),
            "blocks": {f"{i},{j}": mat_to_json(b) for (i, j), b in sorted(self.blocks.items())},
            "provenance": {f"{i},{j}": v for (i, j), v in sorted(self.provenance.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConnectionTable":
        def key(s):
            i, j = s.split(",")
            return int(i), int(j)
        return cls(tuple(d["partition"]),
                   {key(k): mat_from_json(v) for k, v in d["blocks"].items()},
                   {key(k): v for k, v in d.get("provenance", {}).items()})

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --- small helpers ----------------------------------------------------------

def _prod(xs) -> complex:
    out = 1 + 0j
    for x in xs:
        out *= x
    return out


def _gprod(xs) -> complex:
    return _prod(cgamma(x) for x in xs)


def _others(m: int, skip: int):
    """0-based indices in ``range(m)`` other than ``skip`` (0-based)."""
    return [k for k in range(m) if k != skip]


G = cgamma
E = e_of


# --- II* and III* -------------------------------------------------------------
# Formulas take (chart, branch, i, j) with 1-based entry indices.  Blocks of
# II*_{2n}: |alpha| = n, |beta| = n - 1; III*_{2n+1}: |alpha| = |beta| = n.

def _unpack(ch):
    a, b, g = ch.alpha, ch.beta, ch.gamma[0]
    r1, r2 = ch.rho
    return a, b, g, r1, r2, r1 + r2


def _is_II(ch) -> bool:
    return ch.type_tag == "II*"


def _inv_target_alpha(ch, x):
    # 1/Gamma(1+rho_1-x)[Gamma(1+rho_2-x)] for a target alpha exponent
    r1, r2 = ch.rho
    return 1 / (G(1 + r1 - x) * G(1 + r2 - x)) if _is_II(ch) else 1 / G(1 + r1 - x)


def _inv_source_alpha(ch, x):
    r1, r2 = ch.rho
    return 1 / (G(x - r1) * G(x - r2)) if _is_II(ch) else 1 / G(x - r1)


def _inv_target_beta(ch, x):
    return 1 if _is_II(ch) else 1 / G(1 + ch.rho[0] - x)


def _inv_source_beta(ch, x):
    return 1 if _is_II(ch) else 1 / G(x - ch.rho[0])


def _two_star_sign(ch, literal_even: bool) -> int:
    # printed signs: (-1)^(n-1) for II* C12, (-1)^n elsewhere
    n = ch.n
    return (-1) ** (n - 1) if literal_even else (-1) ** n


def cII_C12(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    ai, bj = a[i - 1], b[j - 1]
    return (-E(0.5 * (S - ai - bj - g)) * br.pow(1, 2, S - ai - g) / br.pow(2, 1, S - bj - g)
            * br.ratio_pow(1, 3, 2, 3, S - ai - bj)
            * G(-ai) * G(bj + 1) * _inv_target_alpha(ch, ai) * _inv_source_beta(ch, bj)
            * _gprod(bj - b[k] for k in _others(len(b), j - 1))
            / _gprod(bj + a[k] - S for k in _others(len(a), i - 1))
            * _gprod(1 + a[k] - ai for k in _others(len(a), i - 1))
            / _gprod(1 + S - ai - b[k] for k in _others(len(b), j - 1)))


def cII_C13(ch, br, i, j=1):
    a, b, g, r1, r2, S = _unpack(ch)
    ai, b1 = a[i - 1], b[0]
    return (-E(0.5 * (S - ai - b1 - g)) * br.pow(1, 3, S - ai - b1) / br.pow(3, 1, S - b1 - g)
            * br.ratio_pow(1, 2, 3, 2, S - ai - g)
            * G(g + 1) * G(-ai) * _inv_target_alpha(ch, ai)
            * _gprod(1 + a[k] - ai for k in _others(len(a), i - 1))
            / _gprod(1 + S - ai - bk for bk in b))


def cII_C23(ch, br, i, j=1):
    a, b, g, r1, r2, S = _unpack(ch)
    bi, a1 = b[i - 1], a[0]
    return (-E(0.5 * (S - a1 - bi - g)) * br.pow(2, 3, S - a1 - bi) / br.pow(3, 2, S - a1 - g)
            * br.ratio_pow(2, 1, 3, 1, S - bi - g)
            * G(g + 1) * G(-bi) * _inv_target_beta(ch, bi)
            * _gprod(1 + b[k] - bi for k in _others(len(b), i - 1))
            / _gprod(1 + S - ak - bi for ak in a))


def cII_C21(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    bi, aj = b[i - 1], a[j - 1]
    return (-E(-0.5 * (S - aj - bi - g)) * br.pow(2, 1, S - bi - g) / br.pow(1, 2, S - aj - g)
            * br.ratio_pow(2, 3, 1, 3, S - aj - bi)
            * G(aj + 1) * G(-bi) * _inv_source_alpha(ch, aj) * _inv_target_beta(ch, bi)
            * _gprod(1 + b[k] - bi for k in _others(len(b), i - 1))
            / _gprod(1 + S - bi - a[k] for k in _others(len(a), j - 1))
            * _gprod(aj - a[k] for k in _others(len(a), j - 1))
            / _gprod(aj + b[k] - S for k in _others(len(b), i - 1)))


def cII_C31(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    aj, b1 = a[j - 1], b[0]
    return (E(-0.5 * (S - aj - b1 - g)) * br.pow(3, 1, S - b1 - g) / br.pow(1, 3, S - aj - b1)
            * br.ratio_pow(3, 2, 1, 2, S - aj - g)
            * G(-g) * G(aj + 1) * _inv_source_alpha(ch, aj)
            * _gprod(aj - a[k] for k in _others(len(a), j - 1))
            / _gprod(aj + bk - S for bk in b))


def cII_C32(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    bj, a1 = b[j - 1], a[0]
    return (E(-0.5 * (S - a1 - bj - g)) * br.pow(3, 2, S - a1 - g) / br.pow(2, 3, S - a1 - bj)
            * br.ratio_pow(3, 1, 2, 1, S - bj - g)
            * G(-g) * G(bj + 1) * _inv_source_beta(ch, bj)
            * _gprod(bj - b[k] for k in _others(len(b), j - 1))
            / _gprod(ak + bj - S for ak in a))


# literal transcriptions, II*_{2n}

def lII_C12(ch, br, i, j):
    return -_two_star_sign(ch, True) * cII_C12(ch, br, i, j)


def lII_C13(ch, br, i, j=1):
    a, b, g, r1, r2, S = _unpack(ch)
    return -_two_star_sign(ch, False) * cII_C13(ch, br, i, j) / (S - a[i - 1] - b[0])


def lII_C23(ch, br, i, j=1):
    a, b, g, r1, r2, S = _unpack(ch)
    return -_two_star_sign(ch, False) * cII_C23(ch, br, i, j) / (S - a[0] - b[i - 1])


def lII_C21(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    n = ch.n
    bi, aj, ai = b[i - 1], a[j - 1], a[i - 1]
    if j > len(b):
        # the printed display uses beta_j with j running over the alpha range
        return complex("nan")
    bj = b[j - 1]
    return (_two_star_sign(ch, False) * E(-0.5 * (aj + bi + g - S))
            * br.pow(2, 1, S - bi - g) / br.pow(1, 2, S - aj - g)
            * br.ratio_pow(2, 3, 1, 3, S - ai - bj)
            * G(aj + 1) * G(-bi) / (G(1 + r1 - bj) * G(1 + r2 - bj))
            * _gprod(b[k] - bi + 1 for k in _others(n - 1, i - 1))
            / _gprod(1 + S - bi - a[k] for k in _others(n, j - 1))
            * _gprod(aj - a[k] for k in _others(n, j - 1))
            / _gprod(aj + b[k] - S for k in _others(n - 1, i - 1)))


def lII_C31(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    aj, b1 = a[j - 1], b[0]
    # printed factor (rho1+rho2-alpha_i-beta_1) has a free i; bound to the row index
    ai = a[i - 1]
    return (_two_star_sign(ch, False) * E(0.5 * (S - aj - b1 - g))
            * br.pow(3, 1, S - aj - b1) / br.pow(1, 3, S - b1 - g)
            * br.ratio_pow(3, 2, 1, 2, S - aj - g) * (S - ai - b1)
            * G(-g) * G(aj + 1) * _inv_source_alpha(ch, aj)
            * _gprod(aj - a[k] for k in _others(len(a), j - 1))
            / _gprod(aj + bk - S for bk in b))


def lII_C32(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    bj, a1 = b[j - 1], a[0]
    return (_two_star_sign(ch, False) * E(0.5 * (S - a1 - bj - g))
            * br.pow(3, 2, S - a1 - g) / br.pow(2, 3, S - a1 - bj)
            * br.ratio_pow(3, 1, 2, 1, S - bj - g) * (S - a1 - bj)
            * G(-g) * G(bj + 1)
            * _gprod(bj - b[k] for k in _others(len(b), j - 1))
            / _gprod(ak + bj - S for ak in a))


# literal transcriptions, III*_{2n+1}

def lIII_C12(ch, br, i, j):
    return -_two_star_sign(ch, False) * cII_C12(ch, br, i, j)


def lIII_C13(ch, br, i, j=1):
    return -_two_star_sign(ch, False) * cII_C13(ch, br, i, j)


def lIII_C23(ch, br, i, j=1):
    return -_two_star_sign(ch, False) * cII_C23(ch, br, i, j)


def lIII_C21(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    n = ch.n
    bi, aj, ai, bj = b[i - 1], a[j - 1], a[i - 1], b[j - 1]
    return (_two_star_sign(ch, False) * E(-0.5 * (S - aj - bi - g))
            * br.pow(2, 1, bi + g - S) / br.pow(1, 3, S - ai - bj)
            * br.ratio_pow(2, 3, 1, 2, S - aj - g)
            * G(aj + 1) * G(-bi) / (G(aj - r1) * G(1 + r1 - bi))
            * _gprod(1 + b[k] - bj for k in _others(n, i - 1))
            / _gprod(1 + S - bi - a[k] for k in _others(n, j - 1))
            * _gprod(aj - a[k] for k in _others(n, j - 1))
            / _gprod(aj + b[k] - S for k in _others(n, i - 1)))


def lIII_C31(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    aj, b1 = a[j - 1], b[0]
    return (_two_star_sign(ch, False) * E(0.5 * (S - aj - b1 - g))
            * br.pow(3, 1, S - aj - b1) / br.pow(1, 3, S - b1 - g)
            * br.ratio_pow(3, 2, 1, 2, S - aj - g)
            * G(-g) * G(aj + 1) / G(aj - r1)
            * _gprod(aj - a[k] for k in _others(len(a), j - 1))
            / _gprod(aj + bk - S for bk in b))


def lIII_C32(ch, br, i, j):
    a, b, g, r1, r2, S = _unpack(ch)
    bj, a1 = b[j - 1], a[0]
    bi = b[i - 1]
    return (_two_star_sign(ch, False) * E(0.5 * (S - a1 - bi - g))
            * br.pow(3, 2, S - a1 - g) / br.pow(2, 3, S - a1 - bi)
            * br.ratio_pow(3, 1, 2, 1, S - bi - g)
            * G(-g) * G(bj + 1) / G(bj - r1)
            * _gprod(bj - b[k] for k in _others(len(b), j - 1))
            / _gprod(ak + bj - S for ak in a))


# --- IV -------------------------------------------------------------------------

def _iv(ch):
    return ch.alpha, ch.beta, ch.rho, sum(ch.rho)


def _IV_C12(ch, br, i, j, literal):
    a, b, r, R = _iv(ch)
    bj, bo = b[j - 1], b[2 - j]
    if i <= 3:
        ai = a[i - 1]
        pref = E(-0.5 * (ai + bj)) if literal else -E(-0.5 * r[2])
        keep = _others(3, i - 1) if literal else _others(4, i - 1)
        return (pref * br.pow(2, 1, r[2] - ai) / br.pow(1, 2, r[2] - bj)
                * G(-ai) * G(bj + 1) / _gprod(1 + rk - ai for rk in r)
                * G(bj - bo) * _gprod(1 + a[k] - ai for k in keep)
                / (_gprod(bj + a[k] + a[3] - R for k in _others(3, i - 1))
                   * G(1 + R - ai - a[3] - bo)))
    a4 = a[3]
    pref = E(-0.5 * (a4 + bj)) if literal else -E(-0.5 * r[2])
    return (pref / _prod(a[0] + a[k] + bj - R for k in (1, 2))
            * br.pow(2, 1, r[2] - a4) / br.pow(1, 2, r[2] - bj)
            * G(-a4) * G(bj + 1) / _gprod(1 + rk - a4 for rk in r)
            * G(bj - bo) * _gprod(1 + a[k] - a4 for k in (0, 1, 2))
            / (_gprod(bj + a[k] + a[0] - R for k in (1, 2)) * G(1 + R - a[0] - a4 - bo)))


def _IV_C21(ch, br, i, j, literal):
    a, b, r, R = _iv(ch)
    bi, bo = b[i - 1], b[2 - i]
    if j <= 3:
        aj, pivot, pref = a[j - 1], a[3], 1.0
        rest = _others(3, j - 1)
    else:
        # image of column 1 under alpha_1 <-> alpha_4 and the D_14 conjugation
        aj, pivot = a[3], a[0]
        pref = _prod(a[0] + a[k] + bi - R for k in (1, 2))
        rest = [1, 2]
    phase = E(0.5 * (aj + pivot + bi - 2 * r[2])) if literal else E(0.5 * (aj + bi - pivot))
    if literal and j == 4:
        # printed powers keep alpha_4 in place of the swapped alpha_1
        pw = br.pow(2, 1, a[3] - bi) / br.pow(1, 2, 0.0)
    else:
        pw = br.pow(2, 1, pivot - bi) / br.pow(1, 2, pivot - aj)
    return (-pref * phase * pw
            * G(-bi) * G(aj + 1) / _gprod(aj - rk for rk in r)
            * _gprod(aj - x for m, x in enumerate(a) if m != (j - 1 if j <= 3 else 3))
            * G(1 + bo - bi)
            / (G(aj + pivot + bo - R) * _gprod(1 + R - a[k] - bi - pivot for k in rest)))


def cIV_C12(ch, br, i, j):
    return _IV_C12(ch, br, i, j, False)


def lIV_C12(ch, br, i, j):
    return _IV_C12(ch, br, i, j, True)


def cIV_C21(ch, br, i, j):
    return _IV_C21(ch, br, i, j, False)


def lIV_C21(ch, br, i, j):
    return _IV_C21(ch, br, i, j, True)


# --- IV* ------------------------------------------------------------------------

def _ivs(ch):
    a, b, g = ch.alpha, ch.beta, ch.gamma
    r1, r2 = ch.rho
    return a, b, g, r1, r2, r1 + r2, 2 * r1 + r2


def _H(ch, i, j, k):
    return h_tensor(ch)[i - 1, j - 1, k - 1]


def _IVs_C12(ch, br, i, j, literal):
    a, b, g, r1, r2, S, W = _ivs(ch)
    ai, bj, ao, bo = a[i - 1], b[j - 1], a[2 - i], b[2 - j]
    pref = E(0.5 * (W - ai - bj - g[0] - g[1])) if literal else -E(0.5 * (S - ai - bj - g[0]))
    return (pref * br.pow(1, 2, S - ai - g[0]) / br.pow(2, 1, S - bj - g[0])
            * br.ratio_pow(1, 3, 2, 3, S - ai - bj)
            * G(-ai) * G(bj + 1) / (G(1 + r1 - ai) * G(bj - r1))
            * G(bj - bo) * G(1 + ao - ai) / (G(ao + bj + g[1] - W) * G(1 + W - ai - bo - g[1])))


def _IVs_C13(ch, br, i, j, literal):
    a, b, g, r1, r2, S, W = _ivs(ch)
    ai, gj, ao, go = a[i - 1], g[j - 1], a[2 - i], g[2 - j]
    if j == 2:
        pre = (_prod(_H(ch, k, 2, j) for k in (1, 2) if k != i)
               * _prod(_H(ch, i, 2, k) for k in (1, 2) if k != j))
    else:
        pre = 1 if literal else -1
    phase = E(0.5 * (W - ai - b[0] - g[0] - g[1])) if literal else E(0.5 * (S - ai - b[0] - gj))
    return (pre * phase * br.pow(1, 3, S - ai - b[0]) / br.pow(3, 1, S - b[0] - gj)
            * br.ratio_pow(1, 2, 3, 2, S - ai - gj)
            * G(gj + 1) * G(-ai) / (G(1 + r1 - ai) * G(gj - r1))
            * G(gj - go) * G(1 + ao - ai)
            / (G(1 + ao + b[1] + gj - W) * G(1 + W - ai - b[1] - go)))


def _IVs_C23(ch, br, i, j, literal):
    a, b, g, r1, r2, S, W = _ivs(ch)
    bi, gj, bo, go = b[i - 1], g[j - 1], b[2 - i], g[2 - j]
    pre = 1
    if j == 2:
        pre = (_prod(_H(ch, 2, k, j) for k in (1, 2) if k != i)
               * _prod(_H(ch, 2, i, k) for k in (1, 2) if k != j))
    sign = 1 if literal else -1
    return (sign * pre * E(0.5 * (S - a[0] - bi - gj))
            * br.pow(2, 3, S - a[0] - bi) / br.pow(3, 2, S - a[0] - gj)
            * br.ratio_pow(2, 1, 3, 1, S - bi - gj)
            * G(gj + 1) * G(-bi) / (G(1 + r1 - bi) * G(gj - r1))
            * G(gj - go) * G(1 + bo - bi)
            / (G(1 + a[1] + bo + gj - W) * G(1 + W - a[1] - bi - go)))


def _IVs_C21(ch, br, i, j, literal):
    a, b, g, r1, r2, S, W = _ivs(ch)
    bi, aj, bo, ao = b[i - 1], a[j - 1], b[2 - i], a[2 - j]
    if literal:
        ai, bj = a[i - 1], b[j - 1]
        head = (E(0.5 * (W - ai - bj - g[0] - g[1]))
                * br.pow(1, 2, S - aj - g[0]) / br.pow(2, 1, S - bi - g[0])
                * br.ratio_pow(1, 3, 2, 3, S - ai - bj))
    else:
        head = (-E(-0.5 * (S - aj - bi - g[0]))
                * br.pow(2, 1, S - bi - g[0]) / br.pow(1, 2, S - aj - g[0])
                * br.ratio_pow(2, 3, 1, 3, S - aj - bi))
    return (head * G(aj + 1) * G(-bi) / (G(1 + r1 - bi) * G(aj - r1))
            * G(aj - ao) * G(1 + bo - bi) / (G(aj + bo + g[1] - W) * G(1 + W - ao - bi - g[1])))


def _IVs_C31(ch, br, i, j, literal):
    a, b, g, r1, r2, S, W = _ivs(ch)
    gi, aj, go, ao = g[i - 1], a[j - 1], g[2 - i], a[2 - j]
    pre = 1
    if i == 2:
        pre = 1 / (_prod(_H(ch, j, 2, k) for k in (1, 2) if k != i)
                   * _prod(_H(ch, k, 2, i) for k in (1, 2) if k != j))
        if not literal:
            pre = -pre
    if literal:
        head = (E(0.5 * (W - aj - b[0] - gi - g[1]))
                * br.pow(1, 3, S - aj - b[0]) / br.pow(3, 1, b[0] + gi - S)
                * br.ratio_pow(1, 2, 3, 2, S - aj - gi))
        gdiff = G(1 + gi - go)
    else:
        head = (E(-0.5 * (S - aj - b[0] - gi))
                * br.pow(3, 1, S - b[0] - gi) / br.pow(1, 3, S - aj - b[0])
                * br.ratio_pow(3, 2, 1, 2, S - aj - gi))
        gdiff = G(1 + go - gi)
    return (pre * head * G(-gi) * G(1 + aj) / (G(1 + r1 - gi) * G(aj - r1))
            * G(aj - ao) * gdiff / (G(aj + b[1] + go - W) * G(W - ao - b[1] - gi)))


def _IVs_C32(ch, br, i, j, literal):
    a, b, g, r1, r2, S, W = _ivs(ch)
    gi, bj, go, bo = g[i - 1], b[j - 1], g[2 - i], b[2 - j]
    pre = 1
    if i == 2:
        if literal:
            # second product printed over k != i
            pre = 1 / (_prod(_H(ch, 2, j, k) for k in (1, 2) if k != i)
                       * _prod(_H(ch, 2, k, i) for k in (1, 2) if k != i))
        else:
            pre = 1 / (_prod(_H(ch, 2, j, k) for k in (1, 2) if k != i)
                       * _prod(_H(ch, 2, k, i) for k in (1, 2) if k != j))
    if literal:
        head = (E(0.5 * (W - a[0] - bj - g[0] - g[1]))
                * br.pow(2, 3, S - a[0] - bj) / br.pow(3, 2, a[0] + gi - S)
                * br.ratio_pow(2, 1, 3, 1, S - bj - gi))
        tail = G(1 + gi - go) / (G(a[1] + bj + go - W) * G(S - a[1] - bo - gi))
    else:
        head = (E(-0.5 * (S - a[0] - bj - gi))
                * br.pow(3, 2, S - a[0] - gi) / br.pow(2, 3, S - a[0] - bj)
                * br.ratio_pow(3, 1, 2, 1, S - bj - gi))
        tail = G(1 + go - gi) / (G(a[1] + bj + go - W) * G(W - a[1] - bo - gi))
    return pre * head * G(-gi) * G(1 + bj) / (G(1 + r1 - gi) * G(bj - r1)) * G(bj - bo) * tail


def _bind(fn, literal):
    def f(ch, br, i, j):
        return fn(ch, br, i, j, literal)
    f.__name__ = f"{fn.__name__}_{'literal' if literal else 'corrected'}"
    return f


# --- registry -------------------------------------------------------------------

@dataclass(frozen=True)
class FormulaEntry:
    type_tag: str
    block: tuple[int, int]
    literal: Callable
    corrected: Callable | None
    corrections: tuple[str, ...] = ()

    def variant(self, which: str) -> Callable:
        if which == "literal" or self.corrected is None:
            return self.literal
        return self.corrected

    def variant_name(self, which: str) -> str:
        if which == "literal" or self.corrected is None:
            return "literal"
        return "corrected"


def _entry(tag, blk, lit, cor, *notes):
    return FormulaEntry(tag, blk, lit, cor, tuple(notes))


REGISTRY: dict[tuple[str, tuple[int, int]], FormulaEntry] = {}
for _e in (
    _entry("II*", (1, 2), lII_C12, cII_C12,
           "overall sign is -1 for every n (printed (-1)^(n-1))"),
    _entry("II*", (1, 3), lII_C13, cII_C13,
           "overall sign is -1 (printed (-1)^n)",
           "drop the factor (rho1+rho2-alpha_i-beta_1)^(-1)"),
    _entry("II*", (2, 3), lII_C23, cII_C23,
           "overall sign is -1 (printed (-1)^n)",
           "drop the factor (rho1+rho2-alpha_1-beta_i)^(-1)"),
    _entry("II*", (2, 1), lII_C21, cII_C21,
           "overall sign is -1 (printed (-1)^n)",
           "cross-ratio exponent rho1+rho2-alpha_j-beta_i (printed alpha_i, beta_j)",
           "Gamma(alpha_j-rho_1)Gamma(alpha_j-rho_2) in the denominator (printed Gamma(1+rho_k-beta_j))"),
    _entry("II*", (3, 1), lII_C31, cII_C31,
           "overall sign is +1 (printed (-1)^n)",
           "phase e(-(rho1+rho2-alpha_j-beta_1-gamma)/2) (printed with +)",
           "exponents of (t3-t1) and (t1-t3) exchanged",
           "drop the factor (rho1+rho2-alpha_i-beta_1) with free index i"),
    _entry("II*", (3, 2), lII_C32, cII_C32,
           "overall sign is +1 (printed (-1)^n)",
           "phase e(-(rho1+rho2-alpha_1-beta_j-gamma)/2) (printed with +)",
           "drop the factor (rho1+rho2-alpha_1-beta_j)"),
    _entry("III*", (1, 2), lIII_C12, cII_C12, "overall sign is -1 for every n (printed (-1)^n)"),
    _entry("III*", (1, 3), lIII_C13, cII_C13, "overall sign is -1 for every n (printed (-1)^n)"),
    _entry("III*", (2, 3), lIII_C23, cII_C23, "overall sign is -1 for every n (printed (-1)^n)"),
    _entry("III*", (2, 1), lIII_C21, cII_C21,
           "overall sign is -1 for every n (printed (-1)^n)",
           "powers (t2-t1)^(rho1+rho2-beta_i-gamma)/(t1-t2)^(rho1+rho2-alpha_j-gamma) "
           "((t2-t3)/(t1-t3))^(rho1+rho2-alpha_j-beta_i) (printed with (t1-t3), (t1-t2) bases)",
           "Gamma(1+beta_k-beta_i) (printed beta_j)"),
    _entry("III*", (3, 1), lIII_C31, cII_C31,
           "overall sign is +1 (printed (-1)^n)",
           "phase e(-(rho1+rho2-alpha_j-beta_1-gamma)/2) (printed with +)",
           "exponents of (t3-t1) and (t1-t3) exchanged"),
    _entry("III*", (3, 2), lIII_C32, cII_C32,
           "overall sign is +1 (printed (-1)^n)",
           "phase e(-(rho1+rho2-alpha_1-beta_j-gamma)/2) (printed with +)",
           "beta_i in the phase and powers is beta_j"),
    _entry("IV", (1, 2), lIV_C12, cIV_C12,
           "prefactor -e(-rho_3/2) (printed e(-(alpha_i+beta_j)/2))",
           "rows 1-3: product Gamma(1+alpha_k-alpha_i) runs over all k != i up to 4",
           "row 4: free index i in Gamma(1+alpha_k-alpha_i) read as 4"),
    _entry("IV", (2, 1), lIV_C21, cIV_C21,
           "phase e((alpha_j+beta_i-alpha_4)/2) (printed e((alpha_j+alpha_4+beta_i-2rho_3)/2))",
           "column 4: free index j read as the alpha_1 <-> alpha_4 image of column 1, beta_j as beta_i"),
    _entry("IV*", (1, 2), _bind(_IVs_C12, True), _bind(_IVs_C12, False),
           "phase -e((rho1+rho2-alpha_i-beta_j-gamma_1)/2) (printed e((2rho1+rho2-alpha_i-beta_j-gamma_1-gamma_2)/2))"),
    _entry("IV*", (1, 3), _bind(_IVs_C13, True), _bind(_IVs_C13, False),
           "phase e((rho1+rho2-alpha_i-beta_1-gamma_j)/2) (printed e((2rho1+rho2-alpha_i-beta_1-gamma_1-gamma_2)/2))",
           "column 1 carries an extra sign -1"),
    _entry("IV*", (2, 3), _bind(_IVs_C23, True), _bind(_IVs_C23, False),
           "overall sign -1"),
    _entry("IV*", (2, 1), _bind(_IVs_C21, True), _bind(_IVs_C21, False),
           "phase -e(-(rho1+rho2-alpha_j-beta_i-gamma_1)/2) with alpha_j, beta_i (printed alpha_i, beta_j)",
           "bases (t2-t1)/(t1-t2) exchanged and cross ratio ((t2-t3)/(t1-t3))^(rho1+rho2-alpha_j-beta_i)"),
    _entry("IV*", (3, 1), _bind(_IVs_C31, True), _bind(_IVs_C31, False),
           "phase e(-(rho1+rho2-alpha_j-beta_1-gamma_i)/2)",
           "powers (t3-t1)^(rho1+rho2-beta_1-gamma_i)/(t1-t3)^(rho1+rho2-alpha_j-beta_1) "
           "((t3-t2)/(t1-t2))^(rho1+rho2-alpha_j-gamma_i)",
           "Gamma(1+gamma_k-gamma_i) (printed Gamma(1+gamma_i-gamma_k))",
           "row 2 h-prefactor carries an extra sign -1"),
    _entry("IV*", (3, 2), _bind(_IVs_C32, True), _bind(_IVs_C32, False),
           "phase e(-(rho1+rho2-alpha_1-beta_j-gamma_i)/2)",
           "powers (t3-t2)^(rho1+rho2-alpha_1-gamma_i)/(t2-t3)^(rho1+rho2-alpha_1-beta_j) "
           "((t3-t1)/(t2-t1))^(rho1+rho2-beta_j-gamma_i)",
           "Gamma(1+gamma_k-gamma_i) (printed Gamma(1+gamma_i-gamma_k))",
           "last Gamma is Gamma(2rho1+rho2-alpha_2-beta_k-gamma_i): 2rho1+rho2 and no 1+ shift",
           "row 2 h-prefactor: second product over k != j (printed k != i)"),
):
    REGISTRY[(_e.type_tag, _e.block)] = _e
del _e


def family(tag: str) -> str:
    return "III*" if tag == "III*3" else tag


def registry_entries(type_tag: str) -> list[FormulaEntry]:
    fam = family(type_tag)
    return [e for (t, _), e in sorted(REGISTRY.items()) if t == fam]


def closed_form(chart: ExponentChart, points=None, branch: BranchConvention | None = None,
                variant: str = "corrected") -> ConnectionTable:
    """All printed blocks for the chart's type, entry by entry.

    ``variant`` is ``"corrected"`` (default) or ``"literal"``.  For type IV
    only ``C_12`` and ``C_21`` exist.  Entries that cannot be evaluated
    (a literal formula with an out-of-range index, a Gamma pole) are NaN.
    """
    if variant not in ("literal", "corrected"):
        raise ValueError(f"unknown variant {variant!r}")
    points = tuple(points) if points is not None else default_points(chart)
    br = branch or calibrated_branch(points)
    part = chart.partition
    blocks, prov = {}, {}
    for entry in registry_entries(chart.type_tag):
        i, j = entry.block
        fn = entry.variant(variant)
        m = np.empty((part[i - 1], part[j - 1]), dtype=complex)
        for p in range(m.shape[0]):
            for q in range(m.shape[1]):
                try:
                    m[p, q] = fn(chart, br, p + 1, q + 1)
                except (PoleAtNonPositiveInteger, ZeroDivisionError, IndexError):
                    m[p, q] = complex("nan")
        blocks[(i, j)] = m
        prov[(i, j)] = entry.variant_name(variant)
    return ConnectionTable(part, blocks, prov)


def closed_form_II_star(n, chart, points=None, branch=None, variant="corrected"):
    _expect(chart, "II*", n)
    return closed_form(chart, points, branch, variant)


def closed_form_III_star(n, chart, points=None, branch=None, variant="corrected"):
    _expect(chart, "III*", n)
    return closed_form(chart, points, branch, variant)


def closed_form_IV(chart, points=None, branch=None, variant="corrected"):
    _expect(chart, "IV", None)
    return closed_form(chart, points, branch, variant)


def closed_form_IV_star(chart, points=None, branch=None, variant="corrected"):
    _expect(chart, "IV*", None)
    return closed_form(chart, points, branch, variant)


def _expect(chart, tag, n):
    if family(chart.type_tag) != tag or (n is not None and chart.n != n):
        raise ValueError(f"chart is {chart.type_tag} n={chart.n}, expected {tag} n={n}")


# --- seed --------------------------------------------------------------------------

def seed_III3_coeffs(chart: ExponentChart, points=None, branch=None,
                     variant: str = "corrected") -> ConnectionTable:
    """The two printed (III*)_3 coefficients ``(C_12)_11`` and ``(C_13)_1``.

    The literal variant keeps the printed exponent ``beta_1+gamma-rho_1-rho_2``
    of ``(t_2-t_1)`` and ``(t_3-t_1)`` in the denominators; the corrected one
    flips its sign (the printed version fails the scaling ``t -> lambda t``).
    """
    if family(chart.type_tag) != "III*" or chart.n != 1:
        raise ValueError("seed coefficients need a III* chart with n = 1")
    points = tuple(points) if points is not None else DEFAULT_POINTS
    br = branch or calibrated_branch(points)
    a, b, g = chart.alpha[0], chart.beta[0], chart.gamma[0]
    r1, r2 = chart.rho
    S = r1 + r2
    den = (b + g - S) if variant == "literal" else (S - b - g)
    c12 = (-E(0.5 * (S - a - b - g)) * br.pow(1, 2, S - a - g) / br.pow(2, 1, den)
           * br.ratio_pow(1, 3, 2, 3, S - a - b)
           * G(-a) * G(b + 1) / (G(1 + r1 - a) * G(b - r1)))
    c13 = (-E(0.5 * (S - a - b - g)) / (g - r1) * br.pow(1, 3, S - a - b) / br.pow(3, 1, den)
           * br.ratio_pow(1, 2, 3, 2, S - a - g)
           * G(-a) * G(g + 1) / (G(1 + r1 - a) * G(g - r1)))
    return ConnectionTable((1, 1, 1), {(1, 2): [[c12]], (1, 3): [[c13]]},
                           {(1, 2): variant, (1, 3): variant})


# --- Katz recurrence ------------------------------------------------------------------

def recurrence_step(table: ConnectionTable, step, exponents, points, branch=None,
                    phase_sign: int = 1, variant: str = "corrected") -> ConnectionTable:
    """Connection coefficients after one ``add o mc o add`` step.

    ``exponents[i]`` are the diagonal entries of ``A_ii`` of the old system
    (1-based block ``i`` at position ``i - 1``).  Returns a table on the new
    partition (block ``k`` grown by one at its end) in which the blocks
    ``C_ij`` (``i, j != k``), the first ``n_k`` rows of ``C_kj`` and the first
    ``n_k`` columns of ``C_ik`` are filled; the new row and column are NaN.
    ``phase_sign`` flips every ``e(+-(rho+c)/2)`` factor.  The literal
    variant keeps the printed leading minus sign on the new-row term
    ``C_(k1)j``; the corrected one drops it.
    """
    row_sign = -1 if variant == "literal" else 1
    k = step.k
    mu = complex(step.rho) + complex(step.c)
    rho, c = complex(step.rho), complex(step.c)
    br = branch or calibrated_branch(points)
    ex = [np.asarray(e, dtype=complex) for e in exponents]
    old = table.partition
    new = list(old)
    new[k - 1] += 1
    blocks = {}

    def left(i):
        return np.array([G(mu - x) / G(-x) for x in ex[i - 1]])

    def right(j):
        return np.array([G(x - mu + 1) / G(x + 1) for x in ex[j - 1]])

    def ph(positive: bool):
        return E((0.5 if positive else -0.5) * phase_sign * mu)

    r = len(old)
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            if i == j:
                continue
            shape = (new[i - 1], new[j - 1])
            out = np.full(shape, np.nan, dtype=complex)
            C = table[(i, j)]
            if i != k and j != k:
                f = br.ratio_pow(i, k, j, k, mu) * ph(i < j)
                out[:, :] = f * left(i)[:, None] * C * right(j)[None, :]
            elif j == k:
                f = br.pow(i, k, mu) * ph(i < k)
                rk = np.array([G(x - rho) / G(x + c) for x in ex[k - 1]])
                out[:, :old[k - 1]] = f * left(i)[:, None] * C * rk[None, :]
            else:
                f = row_sign * ph(k < j) * br.pow(j, k, -mu)
                lk = np.array([G(1 + rho - x) / G(1 - x - c) for x in ex[k - 1]])
                out[:old[k - 1], :] = f * lk[:, None] * C * right(j)[None, :]
            blocks[(i, j)] = out
    return ConnectionTable(tuple(new), blocks, {key: "recurrence" for key in blocks})


# --- symmetry ----------------------------------------------------------------------------

FAMILY_BLOCK = {"alpha": 1, "beta": 2, "gamma": 3}


@dataclass(frozen=True)
class SymmetryAction:
    """Exchange of two exponents of one family (1-based), ``sigma^{kind}_{ij}``."""

    kind: str
    i: int
    j: int

    def apply(self, chart: ExponentChart) -> ExponentChart:
        if self.i == self.j:
            return chart
        return chart.swap(self.kind, self.i, self.j)

    def conjugator(self, chart: ExponentChart) -> np.ndarray:
        """``D`` with ``A(chart) = D A(sigma chart) D^{-1}`` for the canonical form."""
        part = chart.partition
        n = sum(part)
        offs = np.concatenate([[0], np.cumsum(part)]).astype(int)
        blk = FAMILY_BLOCK[self.kind]
        P = np.eye(n, dtype=complex)
        if self.i != self.j:
            p, q = offs[blk - 1] + self.i - 1, offs[blk - 1] + self.j - 1
            P[[p, q]] = P[[q, p]]
        tag = family(chart.type_tag)
        pair = tuple(sorted((self.i, self.j)))
        if tag == "IV" and self.kind == "alpha" and pair == (1, 4):
            return np.diag(_d14(chart)) @ P
        if tag == "IV*" and self.kind == "gamma" and pair == (1, 2):
            h = h_tensor(chart)
            d = [h[0, 0, 0] * h[0, 1, 0], h[1, 0, 0] * h[1, 1, 0],
                 -h[0, 0, 0] * h[1, 0, 0], -h[0, 1, 0] * h[1, 1, 0],
                 h[0, 0, 0] * h[0, 1, 0] * h[1, 0, 0] * h[1, 1, 0], 1.0]
            return np.diag(d) @ P
        if tag == "IV" and self.kind == "alpha" and 4 in pair and pair != (1, 4):
            raise ValueError("alpha_4 is only exchanged with alpha_1")
        return P


def _d14(chart: ExponentChart, literal: bool = False) -> np.ndarray:
    """Diagonal of the alpha_1 <-> alpha_4 conjugator for type IV.

    Entries 2 and 3 are ``-prod_k(alpha_1+alpha_2+beta_k-R)`` and
    ``-prod_k(alpha_1+alpha_3+beta_k-R)``; ``literal=True`` exchanges them
    as printed, which breaks ``A = D A(sigma) D^{-1}`` (the connection
    entries read off from row and column 4 are unaffected).
    """
    a, b, r = chart.alpha, chart.beta, chart.rho
    R = sum(r)
    p12 = _prod(a[0] + a[1] + bk - R for bk in b)
    p13 = _prod(a[0] + a[2] + bk - R for bk in b)
    return np.array([
        p12 * p13, *((-p13, -p12) if literal else (-p12, -p13)), 1.0,
        _prod(a[0] + a[k] + b[0] - R for k in (1, 2)),
        _prod(a[0] + a[k] + b[1] - R for k in (1, 2)),
    ], dtype=complex)


def conjugate_table(table: ConnectionTable, D: np.ndarray) -> ConnectionTable:
    """``C_ij -> D_i C_ij D_j^{-1}`` for block-diagonal ``D``."""
    offs = np.concatenate([[0], np.cumsum(table.partition)]).astype(int)
    blocks = {}
    for (i, j), C in table.blocks.items():
        Di = D[offs[i - 1]:offs[i], offs[i - 1]:offs[i]]
        Dj = D[offs[j - 1]:offs[j], offs[j - 1]:offs[j]]
        if np.any(np.abs(np.diag(Dj @ Dj.conj().T)) == 0):
            raise ZeroConjugatorEntry(f"conjugator block {j} is singular")
        # NaN entries stay confined to the rows/columns they came from
        blocks[(i, j)] = _nan_matmul(_nan_matmul(Di, C), np.linalg.inv(Dj))
    return ConnectionTable(table.partition, blocks, dict(table.provenance))


def _nan_matmul(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=complex)
    for p in range(a.shape[0]):
        for q in range(b.shape[1]):
            s = 0j
            for m in range(a.shape[1]):
                if a[p, m] != 0 and b[m, q] != 0:
                    s += a[p, m] * b[m, q]
            out[p, q] = s
    return out


def compose_actions(chart: ExponentChart, actions) -> tuple[ExponentChart, np.ndarray]:
    """Apply ``actions`` in order; return the final chart and the total conjugator."""
    n = sum(chart.partition)
    D = np.eye(n, dtype=complex)
    cur = chart
    for act in actions:
        D = D @ act.conjugator(cur)
        cur = act.apply(cur)
    return cur, D


def symmetry_complete(partial: Callable[[ExponentChart], ConnectionTable], chart: ExponentChart,
                      actions_for: Callable | None = None) -> ConnectionTable:
    """Fill unknown entries using exponent exchanges.

    ``partial(chart)`` returns a table with some entries known.  For every
    unknown entry ``(C_ab)_pq`` the exchanges from ``actions_for`` (default:
    move ``p`` and ``q`` to position 1 of their families, using ``alpha_1 <->
    alpha_4`` for type IV) give a chart ``sigma(chart)`` and a conjugator
    ``D`` with ``C = D_a sigma(C) D_b^{-1}``; the entry is read off from
    ``partial(sigma(chart))``.
    """
    base = partial(chart)
    actions_for = actions_for or default_actions
    blocks = {key: b.copy() for key, b in base.blocks.items()}
    cache = {}
    for (a, b), C in base.blocks.items():
        for p in range(C.shape[0]):
            for q in range(C.shape[1]):
                if np.isfinite(C[p, q]):
                    continue
                acts = tuple(actions_for(chart, a, p + 1, b, q + 1))
                if acts not in cache:
                    sc, D = compose_actions(chart, acts)
                    cache[acts] = conjugate_table(partial(sc), D)
                blocks[(a, b)][p, q] = cache[acts][(a, b)][p, q]
    prov = {key: "symmetry" for key in blocks}
    return ConnectionTable(base.partition, blocks, prov)


def _kind_of_block(chart, blk):
    return {1: "alpha", 2: "beta", 3: "gamma"}[blk]


def default_actions(chart: ExponentChart, a: int, p: int, b: int, q: int):
    acts = []
    for blk, idx in ((a, p), (b, q)):
        if idx != 1:
            acts.append(SymmetryAction(_kind_of_block(chart, blk), 1, idx))
    return acts


# --- chain telescoping -----------------------------------------------------------------

def _source_chart(chart: ExponentChart):
    """Invert one chain renaming: returns (source chart, step, ``to_*`` function)."""
    from .katz import to_II_star, to_III_star, to_IV_star
    tag = family(chart.type_tag)
    if tag == "II*":
        n = chart.n
        a, b, g = chart.alpha, chart.beta, chart.gamma[0]
        r1, r2 = chart.rho
        par = -r1
        shift = par + a[-1]
        src = ExponentChart("III*", n - 1, tuple(a[:-1]), tuple(x + shift for x in b),
                            (g + shift,), (r2, a[-1]))
        step, _, _ = to_II_star(src, par)
        return src, step
    if tag == "III*":
        n = chart.n
        a, b, g = chart.alpha, chart.beta, chart.gamma[0]
        r1, r2 = chart.rho
        par = -r1
        shift = par + b[-1]
        src = ExponentChart("II*", n, tuple(x + shift for x in a), tuple(b[:-1]),
                            (g + shift,), (r2, b[-1]))
        step, _, _ = to_III_star(src, par)
        return src, step
    if tag == "IV*":
        a, b, g = chart.alpha, chart.beta, chart.gamma
        r1, r2 = chart.rho
        par = -r1
        shift = par + g[1]
        src = ExponentChart("III*", 2, tuple(x + shift for x in a), tuple(x + shift for x in b),
                            (g[0],), (g[1], r2))
        step, _, _ = to_IV_star(src, par)
        return src, step
    raise ValueError(f"no chain for type {chart.type_tag}")


def chain_table(chart: ExponentChart, points=None, branch=None, phase_sign: int = 1,
                variant: str = "corrected", seed_blocks: Callable | None = None) -> ConnectionTable:
    """Connection table obtained by telescoping the Katz recurrence from (III*)_3.

    The (III*)_3 table takes ``(C_12)_11`` and ``(C_13)_1`` from the printed
    seed (corrected); its other four scalars come from ``seed_blocks``
    (default: the corrected closed forms at n = 1).  At each step the new
    row and column of the grown block are filled by exchanging the new
    exponent with exponent 1 of the same family and re-running the chain
    at the exchanged chart.  No ODE is solved.
    """
    points = tuple(points) if points is not None else DEFAULT_POINTS
    br = branch or calibrated_branch(points)
    seed_blocks = seed_blocks or (lambda ch: closed_form(ch, points, br))
    memo = {}

    def grown(ch):
        src, step = _source_chart(ch)
        return recurrence_step(table(src), step, src.local, points, br, phase_sign, variant)

    def table(ch):
        key = ch.to_json()
        if key in memo:
            return memo[key]
        if family(ch.type_tag) == "III*" and ch.n == 1:
            seed = seed_III3_coeffs(ch, points, br)
            blocks = dict(seed_blocks(ch).blocks)
            blocks[(1, 2)] = seed[(1, 2)]
            blocks[(1, 3)] = seed[(1, 3)]
            out = ConnectionTable((1, 1, 1), blocks, {k: "seed" for k in blocks})
        else:
            k = _source_chart(ch)[1].k
            act = SymmetryAction(_kind_of_block(ch, k), 1, ch.partition[k - 1])
            out = symmetry_complete(grown, ch, lambda *_: [act])
        memo[key] = out
        return out

    return table(chart)
