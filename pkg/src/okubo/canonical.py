"""Exponent charts and the canonical Okubo matrices of types II*, III*, IV, IV*.

A chart names the nontrivial local exponents ``alpha`` (block 1),
``beta`` (block 2), ``gamma`` (block 3) and the eigenvalues ``rho`` of
``A``.  Type tags are ``"II*"`` (rank 2n), ``"III*"`` (rank 2n+1),
``"IV"``, ``"IV*"`` (rank 6) and ``"III*3"`` (the rank-3 seed, same
shape as ``"III*"`` with n = 1).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import OkuboSystem
from .serialize import cx_to_json, vec_from_json

TYPES = ("II*", "III*", "IV", "IV*", "III*3")
DEFAULT_POINTS = (0.0, 1.0, 2.0)
DEFAULT_POINTS_IV = (0.0, 1.0)
CONFLUENCE_TOL = 1e-8


class ConfluentExponents(ValueError):
    pass


class DegenerateDenominator(ValueError):
    pass


def type_shape(type_tag: str, n: int | None = None):
    """Return ``(partition, multiplicities, (|alpha|, |beta|, |gamma|, |rho|))``."""
    if type_tag == "III*3":
        type_tag, n = "III*", 1
    if type_tag == "II*":
        if n is None or n < 2:
            raise ValueError("II* needs n >= 2")
        return (n, n - 1, 1), (n, n), (n, n - 1, 1, 2)
    if type_tag == "III*":
        if n is None or n < 1:
            raise ValueError("III* needs n >= 1")
        return (n, n, 1), (n + 1, n), (n, n, 1, 2)
    if type_tag == "IV":
        return (4, 2), (2, 2, 2), (4, 2, 0, 3)
    if type_tag == "IV*":
        return (2, 2, 2), (4, 2), (2, 2, 2, 2)
    raise ValueError(f"unknown type {type_tag!r}; expected one of {TYPES}")


@dataclass(frozen=True)
class ExponentChart:
    type_tag: str
    n: int | None
    alpha: tuple[complex, ...]
    beta: tuple[complex, ...]
    gamma: tuple[complex, ...]
    rho: tuple[complex, ...]

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "rho"):
            object.__setattr__(self, name, tuple(complex(z) for z in getattr(self, name)))
        if self.type_tag in ("IV", "IV*"):
            object.__setattr__(self, "n", None)
        if self.type_tag == "III*3":
            object.__setattr__(self, "n", 1)
        sizes = type_shape(self.type_tag, self.n)[2]
        got = (len(self.alpha), len(self.beta), len(self.gamma), len(self.rho))
        if got != sizes:
            raise ValueError(f"{self.type_tag} chart needs (|alpha|,|beta|,|gamma|,|rho|) = {sizes}, got {got}")

    @property
    def partition(self) -> tuple[int, ...]:
        return type_shape(self.type_tag, self.n)[0]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return type_shape(self.type_tag, self.n)[1]

    @property
    def level(self) -> int:
        """Rank label l of the superscript convention (size of the system)."""
        return sum(self.partition)

    @property
    def local(self) -> tuple[tuple[complex, ...], ...]:
        blocks = (self.alpha, self.beta, self.gamma)
        return blocks[: len(self.partition)]

    def global_sum(self) -> complex:
        return sum(m * r for m, r in zip(self.multiplicities, self.rho))

    def fuchs_residual(self) -> float:
        return abs(sum(self.alpha) + sum(self.beta) + sum(self.gamma) - self.global_sum())

    def close_fuchs(self) -> "ExponentChart":
        """Return a copy with the last rho solved from the Fuchs relation."""
        m = self.multiplicities
        head = sum(mi * r for mi, r in zip(m[:-1], self.rho[:-1]))
        last = (sum(self.alpha) + sum(self.beta) + sum(self.gamma) - head) / m[-1]
        return replace(self, rho=self.rho[:-1] + (last,))

    def swap(self, which: str, i: int, j: int) -> "ExponentChart":
        """Exchange two exponents of one family (1-based indices)."""
        vals = list(getattr(self, which))
        vals[i - 1], vals[j - 1] = vals[j - 1], vals[i - 1]
        return replace(self, **{which: tuple(vals)})

    def to_dict(self) -> dict:
        d = {"type": self.type_tag}
        if self.n is not None:
            d["n"] = self.n
        for name in ("alpha", "beta", "gamma", "rho"):
            d[name] = [cx_to_json(z) for z in getattr(self, name)]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentChart":
        tag = d["type"]
        n = d.get("n")
        if tag == "III*3":
            n = 1
        return cls(
            tag,
            n,
            tuple(vec_from_json(d.get("alpha", []))),
            tuple(vec_from_json(d.get("beta", []))),
            tuple(vec_from_json(d.get("gamma", []))),
            tuple(vec_from_json(d.get("rho", []))),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def h_tensor(chart: ExponentChart) -> np.ndarray:
    """``h[i, j, k] = alpha_i + beta_j + gamma_k - 2 rho_1 - rho_2`` (0-based)."""
    a, b, g, r = chart.alpha, chart.beta, chart.gamma, chart.rho
    h = np.empty((2, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                h[i, j, k] = a[i] + b[j] + g[k] - 2 * r[0] - r[1]
    return h


def genericity_forms(chart: ExponentChart) -> list[complex]:
    """Affine combinations of exponents that must stay away from the integers.

    Covers the non-resonance assumption and every Gamma argument and
    denominator in the connection formulas for the chart's type.
    """
    a, b, g, r = chart.alpha, chart.beta, chart.gamma, chart.rho
    forms: list[complex] = []
    fam = [x for x in (a, b, g) if x]
    for xs in fam:
        forms += list(xs)
        forms += [xs[i] - xs[j] for i in range(len(xs)) for j in range(i)]
        forms += [x - rr for x in xs for rr in r]
    forms += [r[i] - r[j] for i in range(len(r)) for j in range(i)]
    if chart.type_tag in ("II*", "III*", "III*3"):
        s = r[0] + r[1]
        forms += [x + y - s for x in a for y in b]
        forms += [x + g[0] - s for x in a] + [y + g[0] - s for y in b]
    elif chart.type_tag == "IV":
        s = sum(r)
        forms += [a[i] + a[k] + y - s for i in range(4) for k in range(i) for y in b]
    elif chart.type_tag == "IV*":
        forms += list(h_tensor(chart).ravel())
        forms += [x + y + z - r[0] - r[1] for x in a for y in b for z in g]
    return forms


def is_generic(chart: ExponentChart, margin: float = 0.05) -> bool:
    return all(abs(f - round(f.real)) >= margin for f in genericity_forms(chart))


def random_chart(type_tag: str, n: int | None, rng: np.random.Generator, *,
                 margin: float = 0.05, radius: float = 0.8, bound: float = 1.0,
                 extra_check=None, max_tries: int = 100000) -> ExponentChart:
    """Draw a generic chart; all exponents complex with modulus <= ``bound``.

    The last rho is solved from the Fuchs relation.  ``extra_check`` is an
    optional predicate on the candidate chart (used to keep Katz-chain
    intermediates generic as well).
    """
    sizes = type_shape(type_tag, n)[2]
    for _ in range(max_tries):
        draw = []
        for size in sizes:
            rad = radius * np.sqrt(rng.uniform(0, 1, size))
            ang = rng.uniform(0, 2 * math.pi, size)
            draw.append(tuple(rad * np.exp(1j * ang)))
        chart = ExponentChart(type_tag, n, *draw).close_fuchs()
        if any(abs(z) > bound for z in chart.rho):
            continue
        if not is_generic(chart, margin):
            continue
        if extra_check is not None and not extra_check(chart):
            continue
        return chart
    raise RuntimeError(f"no generic {type_tag} chart found in {max_tries} draws")


def _prod(xs) -> complex:
    out = 1.0 + 0j
    for x in xs:
        out *= x
    return out


def _check_distinct(xs: Sequence[complex], name: str) -> None:
    for i in range(len(xs)):
        for j in range(i):
            if abs(xs[i] - xs[j]) < CONFLUENCE_TOL:
                raise ConfluentExponents(f"{name}_{j + 1} and {name}_{i + 1} coincide")


def _assemble(blocks: list[list[np.ndarray]]) -> np.ndarray:
    return np.block([[np.atleast_2d(np.asarray(b, dtype=complex)) for b in row] for row in blocks])


def build_III3(chart: ExponentChart, points=DEFAULT_POINTS) -> OkuboSystem:
    """The rank-3 seed: the middle convolution of a rank-one Euler system,
    conjugated so that the third column carries ones."""
    a1, b1, g = chart.alpha[0], chart.beta[0], chart.gamma[0]
    r1, r2 = chart.rho
    s = r1 + r2 - a1 - b1
    if abs(s) < CONFLUENCE_TOL:
        raise DegenerateDenominator("rho_1 + rho_2 - alpha_1 - beta_1 vanishes")
    A = np.array([
        [a1, b1 - r1, 1.0],
        [a1 - r1, b1, 1.0],
        [(a1 - r1) * s, (b1 - r1) * s, g],
    ], dtype=complex)
    return OkuboSystem((1, 1, 1), points, A)


def build_III3_literal(chart: ExponentChart, points=DEFAULT_POINTS) -> OkuboSystem:
    """The seed exactly as printed, with the third row divided by
    ``rho_1 + rho_2 - alpha_1 - beta_1``; kept for comparison only, its
    spectrum does not match the partition table."""
    a1, b1, g = chart.alpha[0], chart.beta[0], chart.gamma[0]
    r1, r2 = chart.rho
    s = r1 + r2 - a1 - b1
    A = np.array([
        [a1, b1 - r1, 1.0],
        [a1 - r1, b1, 1.0],
        [(a1 - r1) / s, (b1 - r1) / s, g],
    ], dtype=complex)
    return OkuboSystem((1, 1, 1), points, A)


def build_II_star(n: int, chart: ExponentChart, points=DEFAULT_POINTS) -> OkuboSystem:
    al, be, g = chart.alpha, chart.beta, chart.gamma[0]
    r1, r2 = chart.rho
    s = r1 + r2
    _check_distinct(al, "alpha")
    _check_distinct(be, "beta")
    A12 = np.array([[_prod(be[j] + al[k] - s for k in range(n) if k != i)
                     / _prod(be[j] - be[k] for k in range(n - 1) if k != j)
                     for j in range(n - 1)] for i in range(n)])
    A21 = np.array([[(al[j] - r1) * (al[j] - r2)
                     * _prod(al[j] + be[k] - s for k in range(n - 1) if k != i)
                     / _prod(al[j] - al[k] for k in range(n) if k != j)
                     for j in range(n)] for i in range(n - 1)])
    A31 = np.array([[-(al[j] - r1) * (al[j] - r2)
                     * _prod(al[j] + be[k] - s for k in range(n - 1))
                     / _prod(al[j] - al[k] for k in range(n) if k != j)
                     for j in range(n)]])
    A32 = np.array([[-_prod(be[j] + al[k] - s for k in range(n))
                     / _prod(be[j] - be[k] for k in range(n - 1) if k != j)
                     for j in range(n - 1)]])
    A = _assemble([
        [np.diag(al), A12, np.ones((n, 1))],
        [A21, np.diag(be), np.ones((n - 1, 1))],
        [A31, A32, [[g]]],
    ])
    return OkuboSystem((n, n - 1, 1), points, A)


def build_III_star(n: int, chart: ExponentChart, points=DEFAULT_POINTS) -> OkuboSystem:
    al, be, g = chart.alpha, chart.beta, chart.gamma[0]
    r1, r2 = chart.rho
    s = r1 + r2
    _check_distinct(al, "alpha")
    _check_distinct(be, "beta")
    A12 = np.array([[(be[j] - r1) * _prod(be[j] + al[k] - s for k in range(n) if k != i)
                     / _prod(be[j] - be[k] for k in range(n) if k != j)
                     for j in range(n)] for i in range(n)])
    A21 = np.array([[(al[j] - r1) * _prod(al[j] + be[k] - s for k in range(n) if k != i)
                     / _prod(al[j] - al[k] for k in range(n) if k != j)
                     for j in range(n)] for i in range(n)])
    A31 = np.array([[-(al[j] - r1) * _prod(al[j] + be[k] - s for k in range(n))
                     / _prod(al[j] - al[k] for k in range(n) if k != j)
                     for j in range(n)]])
    A32 = np.array([[-(be[j] - r1) * _prod(be[j] + al[k] - s for k in range(n))
                     / _prod(be[j] - be[k] for k in range(n) if k != j)
                     for j in range(n)]])
    A = _assemble([
        [np.diag(al), A12, np.ones((n, 1))],
        [A21, np.diag(be), np.ones((n, 1))],
        [A31, A32, [[g]]],
    ])
    return OkuboSystem((n, n, 1), points, A)


def build_IV(chart: ExponentChart, points=DEFAULT_POINTS_IV) -> OkuboSystem:
    al, be, r = chart.alpha, chart.beta, chart.rho
    s = sum(r)
    _check_distinct(al, "alpha")
    _check_distinct(be, "beta")
    A12 = np.zeros((4, 2), dtype=complex)
    for j in range(2):
        den = _prod(be[j] - be[k] for k in range(2) if k != j)
        for i in range(3):
            A12[i, j] = _prod(al[k] + al[3] + be[j] - s for k in range(3) if k != i) / den
        A12[3, j] = 1.0 / den
    A21 = np.zeros((2, 4), dtype=complex)
    for i in range(2):
        for j in range(3):
            A21[i, j] = (_prod(al[j] - rk for rk in r)
                         * _prod(al[j] + al[3] + be[k] - s for k in range(2) if k != i)
                         / _prod(al[j] - al[k] for k in range(4) if k != j))
        # the printed entry leaves j free; j = 4 is the reading with the right spectrum
        A21[i, 3] = (_prod(al[3] - rk for rk in r)
                     * _prod(al[k] + al[3] + be[l] - s for k in range(3) for l in range(2) if l != i)
                     / _prod(al[3] - al[k] for k in range(3)))
    A = _assemble([[np.diag(al), A12], [A21, np.diag(be)]])
    return OkuboSystem((4, 2), points, A)


def IV_star_scaling(chart: ExponentChart) -> np.ndarray:
    """Diagonal of ``D = diag(a_1, a_2, b_1, b_2, c_1, c_2)``."""
    r1 = chart.rho[0]
    out = []
    for xs in (chart.alpha, chart.beta, chart.gamma):
        for j in range(2):
            out.append((xs[j] - r1) / (xs[j] - xs[1 - j]))
    return np.array(out, dtype=complex)


def IV_star_h_matrix(chart: ExponentChart) -> np.ndarray:
    h = h_tensor(chart)

    def H(i, j, k):
        return h[i - 1, j - 1, k - 1]

    a, b, g = chart.alpha, chart.beta, chart.gamma
    return np.array([
        [a[0], 0, H(2, 1, 2), H(2, 2, 2), 1, H(2, 1, 2) * H(2, 2, 2)],
        [0, a[1], H(1, 1, 2), H(1, 2, 2), 1, H(1, 1, 2) * H(1, 2, 2)],
        [H(1, 2, 2), H(2, 2, 2), b[0], 0, 1, -H(1, 2, 2) * H(2, 2, 2)],
        [H(1, 1, 2), H(2, 1, 2), 0, b[1], 1, -H(1, 1, 2) * H(2, 1, 2)],
        [-H(1, 1, 2) * H(1, 2, 2), -H(2, 1, 2) * H(2, 2, 2),
         -H(1, 1, 2) * H(2, 1, 2), -H(1, 2, 2) * H(2, 2, 2), g[0], 0],
        [-1, -1, 1, 1, 0, g[1]],
    ], dtype=complex)


def build_IV_star(chart: ExponentChart, points=DEFAULT_POINTS) -> OkuboSystem:
    """Off-diagonal part of the h-matrix right-multiplied by D; the diagonal
    keeps the exponents themselves."""
    for name in ("alpha", "beta", "gamma"):
        _check_distinct(getattr(chart, name), name)
    H = IV_star_h_matrix(chart)
    diag = np.diag(np.diag(H))
    A = diag + (H - diag) @ np.diag(IV_star_scaling(chart))
    return OkuboSystem((2, 2, 2), points, A)


def build(chart: ExponentChart, points=None) -> OkuboSystem:
    """Dispatch on the chart's type tag."""
    tag = chart.type_tag
    if tag == "III*3":
        return build_III3(chart, points or DEFAULT_POINTS)
    if tag == "II*":
        return build_II_star(chart.n, chart, points or DEFAULT_POINTS)
    if tag == "III*":
        return build_III_star(chart.n, chart, points or DEFAULT_POINTS)
    if tag == "IV":
        return build_IV(chart, points or DEFAULT_POINTS_IV)
    if tag == "IV*":
        return build_IV_star(chart, points or DEFAULT_POINTS)
    raise ValueError(f"unknown type {tag!r}")
