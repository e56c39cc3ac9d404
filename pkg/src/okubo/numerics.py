"""Complex scalar and matrix primitives.

Complex scalars are plain Python ``complex`` values and matrices are
``numpy`` arrays of dtype ``complex128``.  The Gamma function is a
Lanczos approximation (g = 7, nine coefficients) with the reflection
formula on the left half plane.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = [
    "PoleAtNonPositiveInteger",
    "ZeroBase",
    "SingularMatrix",
    "IllConditioned",
    "BranchConvention",
    "e_of",
    "cgamma",
    "cpow",
    "mat_mul",
    "mat_inv",
    "mat_solve",
    "numeric_rank",
]

POLE_TOL = 1e-12
COND_LIMIT = 1e12

# Lanczos coefficients for g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class PoleAtNonPositiveInteger(ValueError):
    """Gamma evaluated at (or within tolerance of) 0, -1, -2, ..."""


class ZeroBase(ValueError):
    pass


class SingularMatrix(np.linalg.LinAlgError):
    pass


class IllConditioned(RuntimeWarning):
    pass


def e_of(mu: complex) -> complex:
    """Return ``exp(2*pi*i*mu)``."""
    # reduce the real part first so that e_of(mu + 1) == e_of(mu) to rounding
    mu = complex(mu)
    re = mu.real - math.floor(mu.real)
    return cmath.exp(2j * math.pi * complex(re, mu.imag))


def _near_pole(z: complex) -> bool:
    return z.real <= POLE_TOL and abs(z - round(z.real)) <= POLE_TOL


def _lanczos_log(z: complex) -> complex:
    # log Gamma(z) for Re z >= 1/2
    z = z - 1.0
    x = _LANCZOS_P[0]
    for k in range(1, len(_LANCZOS_P)):
        x += _LANCZOS_P[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def cgamma(z: complex) -> complex:
    """Gamma function of a complex argument.

    Relative accuracy is about 1e-13 on |z| <= 50.  Raises
    :class:`PoleAtNonPositiveInteger` at the poles.
    """
    z = complex(z)
    if _near_pole(z):
        raise PoleAtNonPositiveInteger(f"Gamma pole at {z}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return math.pi / (cmath.sin(math.pi * z) * cmath.exp(_lanczos_log(1.0 - z)))
    return cmath.exp(_lanczos_log(z))


def cpow(base: complex, exponent: complex, assigned_arg: float) -> complex:
    """``base**exponent`` on the branch where ``arg(base) = assigned_arg``.

    The argument is taken as given; it is not reduced or recomputed.
    """
    base = complex(base)
    if base == 0:
        raise ZeroBase("power of zero base is not defined here")
    log_b = complex(math.log(abs(base)), assigned_arg)
    return cmath.exp(complex(exponent) * log_b)


@dataclass(frozen=True)
class BranchConvention:
    """Arguments assigned to the differences ``t_i - t_j`` (1-based indices).

    ``args[(i, j)]`` is the argument used for ``(t_i - t_j)**mu``.  The
    default for real points ``t_1 < t_2 < ...`` is 0 when ``i > j`` and
    ``+pi`` when ``i < j``; ``signs[(i, j)]`` (``i < j``) flips the latter
    to ``-pi``.
    """

    points: tuple[complex, ...]
    args: Mapping[tuple[int, int], float] = field(default_factory=dict)

    @classmethod
    def from_points(cls, points, signs: Mapping[tuple[int, int], int] | None = None):
        pts = tuple(complex(p) for p in points)
        signs = dict(signs or {})
        args = {}
        r = len(pts)
        for i in range(1, r + 1):
            for j in range(1, i):
                a = cmath.phase(pts[i - 1] - pts[j - 1])
                s = signs.get((j, i), 1)
                if s not in (1, -1):
                    raise ValueError(f"branch sign must be +1 or -1, got {s}")
                args[(i, j)] = a
                # arg(t_j - t_i) = arg(t_i - t_j) +- pi
                args[(j, i)] = a + s * math.pi
        return cls(pts, args)

    @property
    def signs(self) -> dict[tuple[int, int], int]:
        out = {}
        for (i, j), a in self.args.items():
            if i < j:
                out[(i, j)] = 1 if a - self.args[(j, i)] > 0 else -1
        return out

    def arg(self, i: int, j: int) -> float:
        return self.args[(i, j)]

    def diff(self, i: int, j: int) -> complex:
        return self.points[i - 1] - self.points[j - 1]

    def pow(self, i: int, j: int, mu: complex) -> complex:
        """``(t_i - t_j)**mu`` on the recorded branch."""
        return cpow(self.diff(i, j), mu, self.args[(i, j)])

    def ratio_pow(self, i: int, j: int, k: int, l: int, mu: complex) -> complex:
        """``((t_i - t_j) / (t_k - t_l))**mu`` as a ratio of recorded powers."""
        return self.pow(i, j, mu) / self.pow(k, l, mu)


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def mat_mul(a, b) -> np.ndarray:
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"non-conformable shapes {a.shape} and {b.shape}")
    return a @ b


def _check_condition(a: np.ndarray) -> None:
    if not np.all(np.isfinite(a)):
        raise SingularMatrix("matrix has non-finite entries")
    cond = np.linalg.cond(a, p=np.inf) if a.size else 1.0
    if not np.isfinite(cond):
        raise SingularMatrix("matrix is singular")
    if cond > COND_LIMIT:
        warnings.warn(f"condition number {cond:.3g} exceeds {COND_LIMIT:.0e}", IllConditioned, stacklevel=3)


def mat_solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting (LAPACK gesv)."""
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[0] != a.shape[1] or a.shape[1] != b.shape[0]:
        raise ValueError(f"non-conformable shapes {a.shape} and {b.shape}")
    _check_condition(a)
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc


def mat_inv(a) -> np.ndarray:
    a = _as_matrix(a)
    return mat_solve(a, np.eye(a.shape[0], dtype=complex))


def numeric_rank(a, rel_tol: float = 1e-8, scale: float | None = None) -> int:
    """Rank by Gaussian elimination with complete pivoting.

    Pivots smaller than ``rel_tol * scale`` count as zero; ``scale``
    defaults to the infinity norm of ``a``.
    """
    m = np.array(_as_matrix(a), dtype=complex)
    if m.size == 0:
        return 0
    if scale is None:
        scale = float(np.max(np.sum(np.abs(m), axis=1)))
    if scale == 0.0:
        return 0
    thr = rel_tol * scale
    rank = 0
    rows, cols = m.shape
    for step in range(min(rows, cols)):
        sub = np.abs(m[step:, step:])
        p, q = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[p, q] <= thr:
            break
        p += step
        q += step
        m[[step, p], :] = m[[p, step], :]
        m[:, [step, q]] = m[:, [q, step]]
        piv = m[step, step]
        m[step + 1:, step:] -= np.outer(m[step + 1:, step] / piv, m[step, step:])
        rank += 1
    return rank
