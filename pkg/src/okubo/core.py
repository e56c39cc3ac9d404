"""Okubo systems ``(x - T) Y' = A Y`` and their standing checks.

An :class:`OkuboSystem` carries the block partition ``(n_1, ..., n_r)``,
the finite singular points ``t_1, ..., t_r`` and the ``n x n`` matrix
``A``.  Residues of the equivalent Schlesinger system
``Y' = sum_k A_k / (x - t_k) Y`` are the block rows of ``A``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .numerics import numeric_rank
from .serialize import cx_to_json, mat_from_json, mat_to_json, vec_from_json

INTEGER_TOL = 1e-8
RESONANCE_MARGIN = 0.05
POINT_TOL = 1e-9
RANK_TOL = 1e-8


class MultiplicityMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OkuboSystem:
    partition: tuple[int, ...]
    points: tuple[complex, ...]
    A: np.ndarray

    def __post_init__(self):
        part = tuple(int(p) for p in self.partition)
        pts = tuple(complex(t) for t in self.points)
        A = np.array(self.A, dtype=complex)
        A.setflags(write=False)
        object.__setattr__(self, "partition", part)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "A", A)
        if any(p <= 0 for p in part):
            raise ValueError(f"block sizes must be positive: {part}")
        if len(pts) != len(part):
            raise ValueError(f"{len(part)} blocks but {len(pts)} points")
        n = sum(part)
        if A.shape != (n, n):
            raise ValueError(f"A has shape {A.shape}, partition needs {(n, n)}")
        for i in range(len(pts)):
            for j in range(i):
                if abs(pts[i] - pts[j]) < POINT_TOL:
                    raise ValueError(f"points t_{j + 1} and t_{i + 1} coincide")

    @property
    def n(self) -> int:
        return int(sum(self.partition))

    @property
    def r(self) -> int:
        return len(self.partition)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(o) for o in np.concatenate([[0], np.cumsum(self.partition)]))

    def block_slice(self, k: int) -> slice:
        """Index range of block ``k`` (0-based)."""
        o = self.offsets
        return slice(o[k], o[k + 1])

    def block(self, i: int, j: int) -> np.ndarray:
        return self.A[self.block_slice(i), self.block_slice(j)]

    def T(self) -> np.ndarray:
        return np.concatenate([np.full(nk, t) for nk, t in zip(self.partition, self.points)])

    def diagonal_block_exponents(self, k: int) -> np.ndarray:
        blk = self.block(k, k)
        if np.count_nonzero(blk - np.diag(np.diag(blk))) == 0:
            return np.diag(blk).copy()
        return np.linalg.eigvals(blk)

    def with_A(self, A) -> "OkuboSystem":
        return OkuboSystem(self.partition, self.points, A)

    def with_points(self, points) -> "OkuboSystem":
        return OkuboSystem(self.partition, points, self.A)

    def to_dict(self) -> dict:
        return {
            "partition": list(self.partition),
            "points": [cx_to_json(t) for t in self.points],
            "A": mat_to_json(self.A),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OkuboSystem":
        return cls(tuple(d["partition"]), tuple(vec_from_json(d["points"])), mat_from_json(d["A"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "OkuboSystem":
        return cls.from_dict(json.loads(s))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    fuchs_residual: float | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class SpectralData:
    local_exponents: tuple[tuple[complex, ...], ...]
    global_exponents: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    trace_residual: float


def _dist_to_int(z: complex) -> float:
    return abs(z - round(z.real))


def validate(system: OkuboSystem, chart=None, *, margin: float = RESONANCE_MARGIN) -> ValidationReport:
    """Check non-resonance of the diagonal blocks and, given a chart, the Fuchs relation.

    Exponent differences that are nonzero integers, or exponents that are
    integers (within ``INTEGER_TOL``), are violations; those within
    ``margin`` of such values are warnings.
    """
    rep = ValidationReport()
    for k in range(system.r):
        ex = system.diagonal_block_exponents(k)
        for a in range(len(ex)):
            d = _dist_to_int(ex[a])
            if d <= INTEGER_TOL:
                rep.violations.append(f"block {k + 1}: exponent {ex[a]:.6g} is an integer")
            elif d < margin:
                rep.warnings.append(f"block {k + 1}: exponent {ex[a]:.6g} within {margin} of an integer")
            for b in range(a + 1, len(ex)):
                diff = ex[a] - ex[b]
                d = _dist_to_int(diff)
                if d <= INTEGER_TOL and abs(diff) > INTEGER_TOL:
                    rep.violations.append(
                        f"block {k + 1}: exponents {a + 1},{b + 1} differ by a nonzero integer"
                    )
                elif d < margin and abs(diff) > INTEGER_TOL:
                    rep.warnings.append(f"block {k + 1}: exponents {a + 1},{b + 1} nearly resonant")
    if chart is not None:
        rep.fuchs_residual = chart.fuchs_residual()
        tr = abs(np.trace(system.A) - chart.global_sum())
        if tr > 1e-10 * max(1.0, float(np.max(np.abs(system.A)))):
            rep.violations.append(f"trace(A) differs from sum of m_i rho_i by {tr:.3g}")
        if rep.fuchs_residual > 1e-10:
            rep.violations.append(f"Fuchs relation residual {rep.fuchs_residual:.3g}")
    return rep


def residues(system: OkuboSystem) -> list[np.ndarray]:
    """Schlesinger residues ``A_k``: block row ``k`` of ``A``, zero elsewhere."""
    out = []
    for k in range(system.r):
        Ak = np.zeros_like(system.A)
        s = system.block_slice(k)
        Ak[s, :] = system.A[s, :]
        out.append(Ak)
    return out


def from_residues(partition, points, res) -> OkuboSystem:
    """Rebuild the Okubo system from residue matrices."""
    return OkuboSystem(tuple(partition), tuple(points), np.sum(np.array(res), axis=0))


def multiplicity(A: np.ndarray, rho: complex, rel_tol: float = RANK_TOL) -> int:
    n = A.shape[0]
    scale = float(np.max(np.sum(np.abs(A), axis=1)))
    return n - numeric_rank(A - rho * np.eye(n), rel_tol=rel_tol, scale=max(scale, 1.0))


def spectral(system: OkuboSystem, expected) -> SpectralData:
    """Local and global exponents, with multiplicities checked against ``expected``.

    ``expected`` is an exponent chart; its type fixes the partition pair
    ``(n_i), (m_i)``.  Raises :class:`MultiplicityMismatch` on any
    disagreement.
    """
    rep = validate(system)
    if not rep.ok:
        raise ValueError("; ".join(rep.violations))
    part = tuple(expected.partition)
    if part != system.partition:
        raise MultiplicityMismatch(f"partition {system.partition} but type needs {part}")
    rhos = tuple(expected.rho)
    mults = tuple(multiplicity(system.A, rho) for rho in rhos)
    if mults != tuple(expected.multiplicities):
        raise MultiplicityMismatch(f"multiplicities {mults}, expected {tuple(expected.multiplicities)}")
    local = tuple(tuple(complex(z) for z in system.diagonal_block_exponents(k)) for k in range(system.r))
    trace_res = abs(np.trace(system.A) - sum(m * rho for m, rho in zip(mults, rhos)))
    return SpectralData(local, rhos, mults, float(trace_res))
