"""Numerical ground truth for connection coefficients and monodromy.

Local solutions come from Frobenius series at each singular point; they
are carried between points by adaptive Runge-Kutta integration along
polylines that keep clear of the singularities.

Path convention
---------------
All paths run through a base point ``p0`` placed off the line of the
singular points (below it by default, ``side = -1``).  The local frame at
``t_k`` is evaluated at the handoff point ``z_k = t_k + 0.25 d_k u_k``,
where ``d_k`` is the distance to the nearest other singular point and
``u_k`` the unit vector from ``t_k`` towards ``p0``; the branch of
``(x - t_k)^lambda`` there is the principal one.  ``z_k`` is joined to
``p0`` by a straight segment and the loop ``gamma_k`` is: segment to
``z_k``, one positive turn on the circle ``|x - t_k| = 0.25 d_k``,
segment back.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import OkuboSystem, residues

SERIES_ORDER = 60
HANDOFF_FRACTION = 0.25
SERIES_FRACTION = 0.3
DIVISOR_TOL = 1e-10
DEFAULT_RTOL = 1e-12
STEP_FRACTION = 0.25


class ResonanceDivisor(ArithmeticError):
    pass


class ClearanceViolated(ValueError):
    pass


class StepUnderflow(RuntimeError):
    pass


class FrameIllConditioned(np.linalg.LinAlgError):
    pass


class TestPointDisagreement(RuntimeError):
    __test__ = False


@dataclass(frozen=True, eq=False)
class Fuchsian:
    """``Y' = sum_k R_k / (x - t_k) Y``; the common ground for continuation."""

    points: tuple[complex, ...]
    residues: tuple[np.ndarray, ...]

    @classmethod
    def of(cls, system) -> "Fuchsian":
        if isinstance(system, Fuchsian):
            return system
        return cls(tuple(system.points), tuple(residues(system)))

    @property
    def n(self) -> int:
        return self.residues[0].shape[0]

    def coefficient(self, x: complex) -> np.ndarray:
        out = np.zeros_like(self.residues[0])
        for t, R in zip(self.points, self.residues):
            out += R / (x - t)
        return out


def _min_dist(points, k: int) -> float:
    # a single point has no natural scale; use 1 as continue_path does
    return min((abs(points[k] - points[m]) for m in range(len(points)) if m != k), default=1.0)


# ---------------------------------------------------------------- local frames


@dataclass(frozen=True, eq=False)
class LocalFrame:
    """Frobenius data at ``t_j``.

    ``coeffs[m]`` is the ``n x n`` matrix of m-th series coefficients; the
    first ``n_sing`` columns have exponents ``exponents[:n_sing]`` (they
    form ``Psi_j``), the remaining columns are holomorphic (exponent 0).
    When the diagonal block is not diagonal, ``mix`` recombines the
    singular columns: ``Psi_j = G(s) s^Lambda mix``.
    """

    base: int
    center: complex
    order: int
    radius: float
    exponents: np.ndarray
    n_sing: int
    coeffs: np.ndarray
    mix: np.ndarray | None = None

    def _powers(self, x: complex, arg: float | None):
        s = complex(x) - self.center
        if arg is None:
            arg = cmath.phase(s)
        log_s = complex(math.log(abs(s)), arg)
        return s, log_s

    def series(self, x: complex) -> np.ndarray:
        s = complex(x) - self.center
        acc = self.coeffs[-1].copy()
        for m in range(self.order - 1, -1, -1):
            acc = acc * s + self.coeffs[m]
        return acc

    def value(self, x: complex, arg: float | None = None) -> np.ndarray:
        """Frame ``[Psi_j | H](x)`` with ``arg(x - t_j) = arg`` (principal if None)."""
        _, log_s = self._powers(x, arg)
        vals = self.series(x) * np.exp(self.exponents * log_s)[None, :]
        if self.mix is not None:
            vals[:, : self.n_sing] = vals[:, : self.n_sing] @ self.mix
        return vals

    def derivative(self, x: complex, arg: float | None = None) -> np.ndarray:
        s, log_s = self._powers(x, arg)
        m = np.arange(self.order + 1)
        # d/ds of sum_m f_m s^(lam + m)
        dcoef = self.coeffs * (m[:, None, None] + self.exponents[None, None, :])
        acc = dcoef[-1].copy()
        for k in range(self.order - 1, -1, -1):
            acc = acc * s + dcoef[k]
        vals = acc * np.exp((self.exponents - 1) * log_s)[None, :]
        if self.mix is not None:
            vals[:, : self.n_sing] = vals[:, : self.n_sing] @ self.mix
        return vals


def frobenius(system: OkuboSystem, j: int, N: int = SERIES_ORDER) -> LocalFrame:
    """Series solutions of ``(x - T) Y' = A Y`` at ``t_j`` (``j`` 0-based).

    Singular columns start from the unit vectors of block ``j``
    (``F_j(t_j) = (0, I, 0)^t``); holomorphic columns start from the unit
    vectors outside block ``j`` completed into the kernel of the residue.
    """
    A = np.asarray(system.A, dtype=complex)
    n = system.n
    sj = system.block_slice(j)
    nj = system.partition[j]
    tj = system.points[j]
    T = system.T()
    off = np.ones(n, dtype=bool)
    off[sj] = False
    Ajj = A[sj, sj]
    Aj_off = A[sj][:, off]
    mix = None
    if np.count_nonzero(Ajj - np.diag(np.diag(Ajj))) == 0:
        lam_sing = np.diag(Ajj).copy()
        V = np.eye(nj, dtype=complex)
        Vinv = V
    else:
        lam_sing, V = np.linalg.eig(Ajj)
        Vinv = np.linalg.inv(V)
        mix = Vinv
    lam = np.concatenate([lam_sing, np.zeros(n - nj, dtype=complex)])

    F0 = np.zeros((n, n), dtype=complex)
    F0[sj, :nj] = V
    # holomorphic columns: unit vectors off block j, block j from A_jj v_j = -A_j,off v_off
    F0[off, nj:] = np.eye(n - nj)
    if n > nj:
        F0[sj, nj:] = -np.linalg.solve(Ajj, Aj_off)
    dt = (tj - T)[off]

    coeffs = np.empty((N + 1, n, n), dtype=complex)
    coeffs[0] = F0
    for m in range(N):
        Fm = coeffs[m]
        nxt = np.zeros((n, n), dtype=complex)
        rhs = (A @ Fm - Fm * (lam + m)[None, :])[off]
        div = dt[:, None] * (lam + m + 1)[None, :]
        if div.size and np.min(np.abs(div)) < DIVISOR_TOL:
            raise ResonanceDivisor(f"zero divisor at order {m + 1} around t_{j + 1}")
        nxt[off] = rhs / div
        # block-j rows: (A_jj - (lam+m+1)) f_j = -A_j,off f_off, solved in the eigenbasis
        w = Vinv @ (-(Aj_off @ nxt[off]))
        d = lam_sing[:, None] - (lam + m + 1)[None, :]
        if np.min(np.abs(d)) < DIVISOR_TOL:
            raise ResonanceDivisor(f"resonant block divisor at order {m + 1} around t_{j + 1}")
        nxt[sj] = V @ (w / d)
        coeffs[m + 1] = nxt
    radius = SERIES_FRACTION * _min_dist(system.points, j)
    return LocalFrame(j, tj, N, radius, lam, nj, coeffs, mix)


def frobenius_fuchsian(fs: Fuchsian, j: int, N: int = SERIES_ORDER) -> LocalFrame:
    """Generic Frobenius frame of a Schlesinger system at ``t_j``.

    Columns follow the eigenvectors of the residue ``R_j``; eigenvalue
    differences must not be nonzero integers.
    """
    Rj = fs.residues[j]
    n = fs.n
    lam, V = np.linalg.eig(Rj)
    order = np.argsort(np.abs(lam) < 1e-12, kind="stable")
    lam, V = lam[order], V[:, order]
    lam = np.where(np.abs(lam) < 1e-12, 0, lam)
    tj = fs.points[j]
    B = np.zeros((N + 1, n, n), dtype=complex)
    for k, (t, R) in enumerate(zip(fs.points, fs.residues)):
        if k == j:
            continue
        delta = tj - t
        for p in range(1, N + 1):
            B[p] += R * ((-1) ** (p - 1) / delta**p)
    coeffs = np.zeros((N + 1, n, n), dtype=complex)
    coeffs[0] = V
    eye = np.eye(n)
    for m in range(1, N + 1):
        rhs = sum(B[p] @ coeffs[m - p] for p in range(1, m + 1))
        for c in range(n):
            M = (lam[c] + m) * eye - Rj
            coeffs[m][:, c] = np.linalg.solve(M, rhs[:, c])
    n_sing = int(np.sum(np.abs(lam) >= 1e-12))
    radius = SERIES_FRACTION * _min_dist(fs.points, j)
    return LocalFrame(j, tj, N, radius, lam, n_sing, coeffs)


# ---------------------------------------------------------------- continuation


@dataclass(frozen=True)
class ContinuationPath:
    waypoints: tuple[complex, ...]
    loop_base: complex | None = None

    def clearance(self, points) -> float:
        best = math.inf
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            for t in points:
                best = min(best, _segment_distance(t, a, b))
        return best

    def reversed(self) -> "ContinuationPath":
        return ContinuationPath(tuple(reversed(self.waypoints)), self.loop_base)

    def winding(self, t: complex) -> float:
        """Total change of ``arg(x - t)`` along the path, in turns."""
        total = 0.0
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            total += cmath.phase((b - t) / (a - t))
        return total / (2 * math.pi)


def _segment_distance(t: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(t - a)
    u = ((t - a) * d.conjugate()).real / abs(d) ** 2
    u = min(1.0, max(0.0, u))
    return abs(t - (a + u * d))


def circle_path(center: complex, start: complex, segments: int = 64) -> ContinuationPath:
    """Closed polygon through ``start`` turning once positively around ``center``."""
    r = abs(start - center)
    phi0 = cmath.phase(start - center)
    pts = [center + r * cmath.exp(1j * (phi0 + 2 * math.pi * k / segments)) for k in range(segments)]
    pts.append(start)
    return ContinuationPath(tuple(pts), loop_base=start)


@dataclass
class ContinuationInfo:
    nfev: int = 0
    pieces: int = 0
    error_estimate: float | None = None


def _integrate_segment(fs: Fuchsian, Y: np.ndarray, a: complex, b: complex,
                       rtol: float, info: ContinuationInfo) -> np.ndarray:
    n = fs.n
    cols = Y.shape[1]
    pts = np.array(fs.points)
    R = np.array(fs.residues)
    # pieces along which the distance to the singular set changes little
    pos = a
    while True:
        dist = float(np.min(np.abs(pts - pos)))
        if dist < 1e-12:
            raise ClearanceViolated(f"path passes through a singular point near {pos}")
        remaining = abs(b - pos)
        step = 0.5 * dist
        end = b if remaining <= step else pos + (b - pos) / remaining * step
        length = abs(end - pos)
        if length == 0:
            break
        dmin = min(dist, _min_segment_clearance(pts, pos, end))
        delta = end - pos

        def rhs(tau, y, pos=pos, delta=delta):
            x = pos + tau * delta
            Ym = y.reshape(n, cols)
            w = 1.0 / (x - pts)
            C = np.tensordot(w, R, axes=1)
            return (delta * (C @ Ym)).ravel()

        sol = solve_ivp(rhs, (0.0, 1.0), Y.ravel(), method="DOP853", rtol=rtol,
                        atol=rtol * 1e-3 * max(1.0, float(np.max(np.abs(Y)))),
                        max_step=STEP_FRACTION * dmin / length)
        if not sol.success:
            raise StepUnderflow(sol.message)
        info.nfev += sol.nfev
        info.pieces += 1
        Y = sol.y[:, -1].reshape(n, cols)
        pos = end
        if end == b:
            break
    return Y


def _min_segment_clearance(pts, a, b) -> float:
    return min(_segment_distance(complex(t), a, b) for t in pts)


def continue_path(system, Y0, path: ContinuationPath, *, rtol: float = DEFAULT_RTOL,
                  min_clearance: float | None = None, estimate_error: bool = False,
                  info: ContinuationInfo | None = None) -> np.ndarray:
    """Analytically continue the solution matrix ``Y0`` (given at the first
    waypoint) along ``path``; returns its value at the last waypoint.

    With ``estimate_error`` the run is repeated at ``100 * rtol`` and the
    difference is stored in ``info.error_estimate``.
    """
    fs = Fuchsian.of(system)
    Y = np.array(Y0, dtype=complex)
    if Y.ndim == 1:
        Y = Y[:, None]
    if min_clearance is None:
        pts = fs.points
        pair = min(abs(pts[i] - pts[j]) for i in range(len(pts)) for j in range(i)) if len(pts) > 1 else 1.0
        min_clearance = 0.1 * pair
    if path.clearance(fs.points) < min_clearance:
        raise ClearanceViolated(f"path clearance {path.clearance(fs.points):.3g} < {min_clearance:.3g}")
    info = info if info is not None else ContinuationInfo()
    Y1 = Y
    for a, b in zip(path.waypoints[:-1], path.waypoints[1:]):
        Y1 = _integrate_segment(fs, Y1, a, b, rtol, info)
    if estimate_error:
        Y2 = Y
        scratch = ContinuationInfo()
        for a, b in zip(path.waypoints[:-1], path.waypoints[1:]):
            Y2 = _integrate_segment(fs, Y2, a, b, rtol * 100, scratch)
        info.error_estimate = float(np.max(np.abs(Y1 - Y2)))
    return Y1


# ---------------------------------------------------------------- canonical data


@dataclass(frozen=True)
class PathConvention:
    """Placement of the base point; ``side = -1`` puts it below the points."""

    side: int = -1
    depth: float = 2.0
    handoff: float = HANDOFF_FRACTION

    def base_point(self, points) -> complex:
        pts = np.array(points, dtype=complex)
        center = complex(np.mean(pts))
        spread = max(1.0, float(np.max(np.abs(pts - center))))
        return center + self.side * 1j * self.depth * spread

    def handoff_point(self, points, k: int, fraction: float | None = None, turn: float = 0.0) -> complex:
        p0 = self.base_point(points)
        u = (p0 - points[k]) / abs(p0 - points[k]) * cmath.exp(1j * turn)
        f = self.handoff if fraction is None else fraction
        return points[k] + f * _min_dist(points, k) * u


@dataclass
class OracleResult:
    """Canonical solution matrix at ``p0`` with the transition data needed
    for connection coefficients and monodromy."""

    system: OkuboSystem
    convention: PathConvention
    p0: complex
    frames: list[LocalFrame]
    handoffs: list[complex]
    W: list[np.ndarray]  # local frame k continued to p0
    Psi: np.ndarray
    rtol: float
    nfev: int = 0
    loops: dict[int, np.ndarray] = field(default_factory=dict)

    def connection(self, i: int, j: int) -> np.ndarray:
        """``C_ij`` (0-based block indices)."""
        sys = self.system
        sj = sys.block_slice(j)
        coef = np.linalg.solve(self.W[i], self.Psi[:, sj])
        return coef[: sys.partition[i], :]

    def connection_table(self) -> dict[tuple[int, int], np.ndarray]:
        r = self.system.r
        return {(i, j): self.connection(i, j) for i in range(r) for j in range(r) if i != j}

    def table(self):
        """The connection table with 1-based block keys."""
        from .connection import ConnectionTable
        blocks = {(i + 1, j + 1): C for (i, j), C in self.connection_table().items()}
        return ConnectionTable(self.system.partition, blocks, {k: "oracle" for k in blocks})


def canonical_frame(system: OkuboSystem, convention: PathConvention | None = None, *,
                    N: int = SERIES_ORDER, rtol: float = DEFAULT_RTOL,
                    handoff_fraction: float | None = None, turn: float = 0.0) -> OracleResult:
    """Build the canonical solution matrix ``Psi(p0)`` by continuing each
    local frame from its handoff point to ``p0``."""
    conv = convention or PathConvention()
    pts = system.points
    p0 = conv.base_point(pts)
    frames, handoffs, W = [], [], []
    info = ContinuationInfo()
    for k in range(system.r):
        fr = frobenius(system, k, N)
        z = conv.handoff_point(pts, k, handoff_fraction, turn)
        Phi = fr.value(z)
        cond = np.linalg.cond(Phi)
        if not np.isfinite(cond) or cond > 1e10:
            raise FrameIllConditioned(f"frame at t_{k + 1} has condition {cond:.3g}")
        path = ContinuationPath((z, p0))
        W.append(continue_path(system, Phi, path, rtol=rtol, info=info))
        frames.append(fr)
        handoffs.append(z)
    Psi = np.hstack([W[k][:, : system.partition[k]] for k in range(system.r)])
    return OracleResult(system, conv, p0, frames, handoffs, W, Psi, rtol, info.nfev)


def extract_connection(system: OkuboSystem, i: int, j: int,
                       convention: PathConvention | None = None, *,
                       rtol: float = DEFAULT_RTOL, check_tol: float = 1e-8) -> np.ndarray:
    """``C_ij`` from ``Psi_j = Psi_i C_ij + H_ij`` (0-based blocks).

    The decomposition is repeated at a second test point inside the disk
    at ``t_i``; the two must agree to ``check_tol``.
    """
    if i == j:
        return np.eye(system.partition[i], dtype=complex)
    res = canonical_frame(system, convention, rtol=rtol)
    C1 = res.connection(i, j)
    # second test point: same disk, smaller radius and rotated; reached from the first handoff
    fr = res.frames[i]
    z1 = res.handoffs[i]
    z2 = system.points[i] + 0.6 * (z1 - system.points[i]) * cmath.exp(0.4j)
    # arg(z2 - t_i) continues arg(z1 - t_i) without crossing the cut
    arg2 = cmath.phase(z1 - system.points[i]) + 0.4
    Psi_j_at_z2 = continue_path(system, res.Psi[:, system.block_slice(j)],
                                ContinuationPath((res.p0, z1, z2)), rtol=rtol)
    coef = np.linalg.solve(fr.value(z2, arg2), Psi_j_at_z2)
    C2 = coef[: system.partition[i], :]
    scale = max(1.0, float(np.max(np.abs(C1))))
    if np.max(np.abs(C1 - C2)) > check_tol * scale:
        raise TestPointDisagreement(f"test points disagree by {np.max(np.abs(C1 - C2)):.3g}")
    return C1


def loop_monodromy(system: OkuboSystem, convention: PathConvention | None = None, *,
                   rtol: float = DEFAULT_RTOL, result: OracleResult | None = None,
                   segments: int = 48) -> list[np.ndarray]:
    """Monodromy matrices ``M_i`` with ``gamma_i . Psi = Psi M_i``.

    Each loop is integrated numerically: the local frame at ``t_i`` is
    carried once around the circle through its handoff point.
    """
    res = result or canonical_frame(system, convention, rtol=rtol)
    Ms = []
    for i in range(system.r):
        z = res.handoffs[i]
        Phi = res.frames[i].value(z)
        around = continue_path(system, Phi, circle_path(system.points[i], z, segments), rtol=rtol)
        res.loops[i] = around
        # Psi(p0) = W_i c  =>  after the loop, Psi -> W_i Phi^{-1} around c
        c = np.linalg.solve(res.W[i], res.Psi)
        after = res.W[i] @ np.linalg.solve(Phi, around @ c)
        Ms.append(np.linalg.solve(res.Psi, after))
    return Ms


def loop_transition(system, base: complex, Y0: np.ndarray, target: complex,
                    radius: float, *, rtol: float = DEFAULT_RTOL, segments: int = 48) -> np.ndarray:
    """Monodromy of the fundamental matrix ``Y0`` at ``base`` along the loop:
    straight to ``target + radius * u``, one positive turn, straight back."""
    u = (base - target) / abs(base - target)
    z = target + radius * u
    Yz = continue_path(system, Y0, ContinuationPath((base, z)), rtol=rtol)
    Yl = continue_path(system, Yz, circle_path(target, z, segments), rtol=rtol)
    Yb = continue_path(system, Yl, ContinuationPath((z, base)), rtol=rtol)
    return np.linalg.solve(Y0, Yb)
