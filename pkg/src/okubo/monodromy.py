"""Monodromy matrices assembled from connection coefficients.

For the canonical solution matrix ``Psi``, continuation around ``t_i``
gives ``gamma_i . Psi = Psi M_i`` where ``M_i`` is the identity except in
the rows of block ``i``, which read
``((e(A_ii) - 1) C_i1, ..., e(A_ii), ..., (e(A_ii) - 1) C_ir)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .connection import ConnectionTable, IncompleteTable
from .core import OkuboSystem
from .numerics import e_of
from .serialize import mat_to_json

# A positive loop enclosing all finite points, composed from the base point,
# equals M_1 M_2 ... M_r (checked against the oracle by calibrate_ordering).
PRODUCT_ORDER = "ascending"
EIG_TOL = 1e-6


class DefectiveMatrix(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class MonodromyTuple:
    matrices: tuple[np.ndarray, ...]
    ordering: str = PRODUCT_ORDER

    @property
    def r(self) -> int:
        return len(self.matrices)

    @property
    def n(self) -> int:
        return self.matrices[0].shape[0]

    def ordered_product(self, ordering: str | None = None) -> np.ndarray:
        ms = list(self.matrices)
        if (ordering or self.ordering) == "descending":
            ms = ms[::-1]
        out = np.eye(self.n, dtype=complex)
        for M in ms:
            out = out @ M
        return out

    def M_inf(self) -> np.ndarray:
        return np.linalg.inv(self.ordered_product())

    def to_dict(self) -> dict:
        return {"ordering": self.ordering, "M": [mat_to_json(M) for M in self.matrices]}


def assemble(system: OkuboSystem, table: ConnectionTable) -> MonodromyTuple:
    """Monodromy matrices from a complete connection table."""
    if not table.is_complete():
        table.require_complete()
    if tuple(table.partition) != system.partition:
        raise IncompleteTable(f"table partition {table.partition} but system has {system.partition}")
    n = system.n
    out = []
    for i in range(system.r):
        ex = system.diagonal_block_exponents(i)
        blk = system.block(i, i)
        if np.count_nonzero(blk - np.diag(np.diag(blk))):
            raise ValueError(f"diagonal block {i + 1} is not diagonal")
        ei = e_of(ex) if np.ndim(ex) == 0 else np.array([e_of(z) for z in ex])
        M = np.eye(n, dtype=complex)
        si = system.block_slice(i)
        M[si, si] = np.diag(ei)
        for j in range(system.r):
            if j != i:
                M[si, system.block_slice(j)] = (ei - 1)[:, None] * table[(i + 1, j + 1)]
        out.append(M)
    return MonodromyTuple(tuple(out))


@dataclass(frozen=True)
class ProductReport:
    M_inf: np.ndarray
    residual: float
    ordering: str


def product_relation(mt: MonodromyTuple) -> ProductReport:
    """``M_inf`` with ``gamma_inf gamma_1 ... gamma_r = 1`` and the residual of the relation."""
    P = mt.ordered_product()
    Minf = np.linalg.inv(P)
    res = float(np.max(np.sum(np.abs(P @ Minf - np.eye(mt.n)), axis=1)))
    return ProductReport(Minf, res, mt.ordering)


def calibrate_ordering(system: OkuboSystem, result=None) -> tuple[str, dict]:
    """Compare a numerically continued loop around all points with both products.

    Returns the matching ordering and the mismatch of each candidate.
    """
    from .oracle import canonical_frame, loop_monodromy, loop_transition
    res = result or canonical_frame(system)
    mt = MonodromyTuple(tuple(loop_monodromy(system, result=res)))
    pts = np.array(system.points, dtype=complex)
    center = complex(np.mean(pts))
    spread = max(1.0, float(np.max(np.abs(pts - center))))
    big = loop_transition(system, res.p0, res.Psi, center, 1.6 * spread)
    mism = {o: float(np.max(np.abs(big - mt.ordered_product(o)))) for o in ("ascending", "descending")}
    return min(mism, key=mism.get), mism


def cluster_eigenvalues(vals, tol: float = EIG_TOL) -> list[tuple[complex, int]]:
    """Group eigenvalues closer than ``tol``; returns (mean, multiplicity) pairs."""
    groups: list[list[complex]] = []
    for v in sorted(np.asarray(vals, dtype=complex), key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(np.mean(g) - v) < tol:
                g.append(v)
                break
        else:
            groups.append([v])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def centralizer_dim(M: np.ndarray, tol: float = EIG_TOL) -> int:
    """Sum of squared eigenvalue multiplicities; warns if ``M`` looks defective."""
    n = M.shape[0]
    dim = 0
    for lam, m in cluster_eigenvalues(np.linalg.eigvals(M), tol):
        geo = n - np.linalg.matrix_rank(M - lam * np.eye(n), tol=max(tol, 1e-8) * max(1.0, np.linalg.norm(M)))
        if geo < m:
            warnings.warn(f"eigenvalue {lam:.4g} has geometric multiplicity {geo} < {m}", DefectiveMatrix)
        dim += m * m
    return dim


def rigidity_index(mt: MonodromyTuple, tol: float = EIG_TOL) -> int:
    """``(1 - r) n^2 + sum dim Z(M)`` over ``M_1, ..., M_r, M_inf``."""
    mats = list(mt.matrices) + [mt.M_inf()]
    return (1 - mt.r) * mt.n ** 2 + sum(centralizer_dim(M, tol) for M in mats)


def multiset_distance(a, b) -> float:
    """Largest distance in an optimal matching of two equal-size multisets."""
    from scipy.optimize import linear_sum_assignment
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return float("inf")
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c])) if len(r) else 0.0


def expected_spectra(system: OkuboSystem, chart) -> list[np.ndarray]:
    """Predicted eigenvalues of ``M_1, ..., M_r, M_inf``."""
    out = []
    for i in range(system.r):
        ex = system.diagonal_block_exponents(i)
        out.append(np.concatenate([[e_of(z) for z in ex], np.ones(system.n - len(ex))]))
    inf = []
    for m, rho in zip(chart.multiplicities, chart.rho):
        inf += [e_of(-rho)] * m
    out.append(np.array(inf))
    return out


def spectrum_mismatch(mt: MonodromyTuple, system: OkuboSystem, chart) -> float:
    mats = list(mt.matrices) + [mt.M_inf()]
    return max(multiset_distance(np.linalg.eigvals(M), ev)
               for M, ev in zip(mats, expected_spectra(system, chart)))
