"""Addition and the composite ``add o mc o add`` on Okubo systems.

The composite operation with parameters ``(k, c, rho)`` maps an Okubo
system of type ``(n_1, ..., n_r)`` to one of type
``(n_1, ..., n_k + 1, ..., n_r)`` whenever the residual matrices
``A_ij - rho delta_ij - A_ik (A_kk - rho)^{-1} A_kj`` (``i, j != k``) have
joint rank one.
The extra index is placed at the end of block ``k``.

Chart renamings for the II*/III*/IV* chains live here as well, so that a
chain of steps can be compared with the canonical constructors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .canonical import ExponentChart
from .core import OkuboSystem
from .numerics import mat_solve, numeric_rank

KERNEL_TOL = 1e-8
RANK_TOL = 1e-8


class KernelConditionViolated(ValueError):
    """``A_kk + c`` or ``A_kk - rho`` is singular."""


class RankExceedsOne(ValueError):
    pass


class DegenerateRhoPlusC(ValueError):
    pass


@dataclass(frozen=True)
class KatzStep:
    """``add_(0..rho..0) o mc_(-rho-c) o add_(0..c..0)`` acting on block ``k`` (1-based)."""

    k: int
    c: complex
    rho: complex

    def to_dict(self) -> dict:
        return {"k": self.k, "c": [complex(self.c).real, complex(self.c).imag],
                "rho": [complex(self.rho).real, complex(self.rho).imag]}

    @classmethod
    def from_dict(cls, d: dict) -> "KatzStep":
        from .serialize import cx_from_json
        return cls(int(d["k"]), cx_from_json(d["c"]), cx_from_json(d["rho"]))


@dataclass(frozen=True)
class XiEta:
    """Rank-one factors ``xi[i] (n_i x 1)`` and ``eta[j] (1 x n_j)``, keyed by 1-based block."""

    k: int
    xi: dict = field(default_factory=dict)
    eta: dict = field(default_factory=dict)

    def product(self, i: int, j: int) -> np.ndarray:
        return self.xi[i] @ self.eta[j]


@dataclass(frozen=True)
class BlockMap:
    """Where the old indices went and which position is new (all 0-based)."""

    old_partition: tuple[int, ...]
    new_partition: tuple[int, ...]
    k: int
    new_index: int
    old_to_new: tuple[int, ...]
    chart: ExponentChart | None = None

    def to_dict(self) -> dict:
        return {
            "old_partition": list(self.old_partition),
            "new_partition": list(self.new_partition),
            "k": self.k,
            "new_index": self.new_index,
            "old_to_new": list(self.old_to_new),
            "chart": None if self.chart is None else self.chart.to_dict(),
        }


def add(system: OkuboSystem, shifts) -> OkuboSystem:
    """Shift each diagonal block ``A_ii`` by ``shifts[i]`` times the identity."""
    shifts = [complex(s) for s in shifts]
    if len(shifts) != system.r:
        raise ValueError(f"need {system.r} shifts, got {len(shifts)}")
    A = np.array(system.A)
    for i, s in enumerate(shifts):
        sl = system.block_slice(i)
        A[sl, sl] += s * np.eye(system.partition[i])
    return system.with_A(A)


def _check_kernels(system: OkuboSystem, step: KatzStep) -> np.ndarray:
    k0 = step.k - 1
    if not 0 <= k0 < system.r:
        raise ValueError(f"block index {step.k} out of range 1..{system.r}")
    if abs(step.rho + step.c) < KERNEL_TOL:
        raise DegenerateRhoPlusC("rho + c vanishes")
    Akk = system.block(k0, k0)
    nk = Akk.shape[0]
    scale = max(1.0, float(np.max(np.abs(Akk))))
    for shift, name in ((step.c, "A_kk + c"), (-step.rho, "A_kk - rho")):
        if numeric_rank(Akk + shift * np.eye(nk), rel_tol=KERNEL_TOL, scale=scale) < nk:
            raise KernelConditionViolated(f"{name} has a kernel")
    return Akk


def residual_stack(system: OkuboSystem, k: int, rho: complex) -> np.ndarray:
    """``M = A_ij - rho delta_ij - A_ik (A_kk - rho)^{-1} A_kj`` for ``i, j != k``.

    This is the Schur complement of ``A_kk - rho`` in ``A - rho``; its rank
    is the growth of block ``k``.  Rows and columns run over the indices
    outside block ``k`` in their original order.
    """
    k0 = k - 1
    sk = system.block_slice(k0)
    rest = np.r_[0:sk.start, sk.stop:system.n]
    A = system.A
    Akk = A[sk, sk] - rho * np.eye(sk.stop - sk.start)
    return A[np.ix_(rest, rest)] - rho * np.eye(len(rest)) - A[np.ix_(rest, np.arange(sk.start, sk.stop))] @ mat_solve(
        Akk, A[np.ix_(np.arange(sk.start, sk.stop), rest)])


def factor_xi_eta(system: OkuboSystem, k: int, rho: complex, normalize=None) -> XiEta:
    """Rank-one factorization ``xi_i eta_j`` of the residual matrices.

    ``normalize`` is ``(j, l, value)``: entry ``l`` (0-based) of ``eta_j``
    is set to ``value``.  By default the largest-magnitude entry of the
    stacked ``eta`` is set to one.
    """
    M = residual_stack(system, k, rho)
    blocks = [b for b in range(1, system.r + 1) if b != k]
    sizes = [system.partition[b - 1] for b in blocks]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    scale = max(1.0, float(np.max(np.sum(np.abs(system.A), axis=1))))
    rank = numeric_rank(M, rel_tol=RANK_TOL, scale=scale)
    if rank > 1:
        raise RankExceedsOne(f"residual matrices have joint rank {rank}")
    if rank == 0:
        xi = {b: np.zeros((sizes[m], 1), dtype=complex) for m, b in enumerate(blocks)}
        eta = {b: np.zeros((1, sizes[m]), dtype=complex) for m, b in enumerate(blocks)}
        return XiEta(k, xi, eta)
    # the cross through the largest entry determines a rank-one matrix
    p, q = np.unravel_index(np.argmax(np.abs(M)), M.shape)
    col = M[:, q].copy()
    row = M[p, :] / M[p, q]
    if normalize is not None:
        jb, l, value = normalize
        m = blocks.index(jb)
        pos = offs[m] + l
        if abs(row[pos]) < RANK_TOL * np.max(np.abs(row)):
            raise ValueError(f"cannot normalize eta_{jb}[{l}]: entry vanishes")
        lam = complex(value) / row[pos]
    else:
        lam = 1.0 / row[np.argmax(np.abs(row))]
    row = row * lam
    col = col / lam
    xi = {b: col[offs[m]:offs[m + 1]].reshape(-1, 1) for m, b in enumerate(blocks)}
    eta = {b: row[offs[m]:offs[m + 1]].reshape(1, -1) for m, b in enumerate(blocks)}
    return XiEta(k, xi, eta)


def katz_apply(system: OkuboSystem, step: KatzStep, normalize=None,
               chart: ExponentChart | None = None) -> tuple[OkuboSystem, BlockMap]:
    """Apply the composite Katz operation and assemble the new Okubo matrix.

    Only the case where the block grows by exactly one is supported.
    """
    Akk = _check_kernels(system, step)
    n = system.n
    k0 = step.k - 1
    rho, c = complex(step.rho), complex(step.c)
    kernel = n - numeric_rank(system.A - rho * np.eye(n), rel_tol=RANK_TOL,
                              scale=max(1.0, float(np.max(np.sum(np.abs(system.A), axis=1)))))
    growth = n - kernel - system.partition[k0]
    if growth != 1:
        raise RankExceedsOne(f"block {step.k} would grow by {growth}, only 1 is supported")
    xe = factor_xi_eta(system, step.k, rho, normalize)

    nk = system.partition[k0]
    right = (Akk + c * np.eye(nk)) @ np.linalg.inv(Akk - rho * np.eye(nk))
    sk = system.block_slice(k0)
    new_index = sk.stop
    old_to_new = tuple(i if i < new_index else i + 1 for i in range(n))
    B = np.zeros((n + 1, n + 1), dtype=complex)
    idx = np.array(old_to_new)
    for i in range(system.r):
        si = system.block_slice(i)
        ri = idx[si]
        for j in range(system.r):
            sj = system.block_slice(j)
            cj = idx[sj]
            blk = system.block(i, j)
            if i == k0:
                B[np.ix_(ri, cj)] = blk
            elif j == k0:
                B[np.ix_(ri, cj)] = blk @ right
            elif i == j:
                B[np.ix_(ri, cj)] = blk - (rho + c) * np.eye(system.partition[i])
            else:
                B[np.ix_(ri, cj)] = blk
        if i != k0:
            B[ri, new_index] = (rho + c) * xe.xi[i + 1][:, 0]
            B[new_index, ri] = xe.eta[i + 1][0, :]
    B[new_index, new_index] = rho
    new_part = list(system.partition)
    new_part[k0] += 1
    out = OkuboSystem(tuple(new_part), system.points, B)
    bmap = BlockMap(system.partition, tuple(new_part), step.k, new_index, old_to_new, chart)
    return out, bmap


# --- chain renamings -------------------------------------------------------

def to_II_star(chart: ExponentChart, a: complex) -> tuple[KatzStep, ExponentChart, tuple]:
    """III*_{2n-1} -> II*_{2n} with the free parameter ``a``.

    Returns the step, the renamed chart and the eta normalization that
    reproduces the canonical form.
    """
    if chart.type_tag not in ("III*", "III*3"):
        raise ValueError("source chart must be of type III*")
    n = chart.n + 1
    r1, r2 = chart.rho
    shift = a + r2
    new = ExponentChart(
        "II*", n,
        tuple(chart.alpha) + (r2,),
        tuple(b - shift for b in chart.beta),
        (chart.gamma[0] - shift,),
        (-a, r1),
    )
    return KatzStep(1, a, r2), new, (3, 0, 1.0)


def to_III_star(chart: ExponentChart, b: complex) -> tuple[KatzStep, ExponentChart, tuple]:
    """II*_{2n} -> III*_{2n+1} with the free parameter ``b``."""
    if chart.type_tag != "II*":
        raise ValueError("source chart must be of type II*")
    n = chart.n
    r1, r2 = chart.rho
    shift = b + r2
    new = ExponentChart(
        "III*", n,
        tuple(x - shift for x in chart.alpha),
        tuple(chart.beta) + (r2,),
        (chart.gamma[0] - shift,),
        (-b, r1),
    )
    return KatzStep(2, b, r2), new, (3, 0, 1.0)


def to_IV_star(chart: ExponentChart, c: complex) -> tuple[KatzStep, ExponentChart, tuple]:
    """III*_5 -> IV*_6 with the free parameter ``c``."""
    if chart.type_tag != "III*" or chart.n != 2:
        raise ValueError("source chart must be of type III* with n = 2")
    r1, r2 = chart.rho
    shift = c + r1
    new = ExponentChart(
        "IV*", None,
        tuple(x - shift for x in chart.alpha),
        tuple(x - shift for x in chart.beta),
        (chart.gamma[0], r1),
        (-c, r2),
    )
    a1 = (new.alpha[0] - new.rho[0]) / (new.alpha[0] - new.alpha[1])
    return KatzStep(3, c, r1), new, (1, 0, -a1)
