"""Brute-force reference computations.

None of this touches Christoffel symbols or the linear ODE of the rolling
kernel. Points and vectors are stepped directly in ambient space by
projections, which is first order in the step but structurally independent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DomainError, DriftError, GridError
from .geometry import Chart, ChartCurve
from .rolling import TimeGrid, TraceSample

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleConfig:
    step: float = 1e-3
    fd_step: float = tol.FD_STEP
    fd_hess_step: float = tol.FD_HESS_STEP
    max_drift: float = 1e-8

    def __post_init__(self):
        for name in ("step", "fd_step", "fd_hess_step", "max_drift"):
            if not getattr(self, name) > 0:
                raise ValueError(f"OracleConfig.{name} must be positive")

    def grid(self, start: float, stop: float) -> TimeGrid:
        """Uniform grid from ``start`` with spacing as close to ``step`` as fits."""
        steps = max(2, int(round((stop - start) / self.step)))
        return TimeGrid(start, stop, steps)


def fd_derivatives(chart: Chart, x, fd_step: float = tol.FD_STEP, hess_step: float = tol.FD_HESS_STEP):
    """Central-difference jacobian and (symmetrized) hessian of ``chart.eval`` at ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    scale = max(1.0, float(np.linalg.norm(x)))
    h1 = fd_step * scale
    h2 = hess_step * scale
    reach = 2.0 * max(h1, h2)
    for i in range(n):
        for sign in (-1.0, 1.0):
            probe = x.copy()
            probe[i] += sign * reach
            if not chart.contains(probe):
                raise DomainError(f"{x.tolist()} is within {reach:.1e} of the boundary of {chart.name!r}")

    f = lambda y: np.asarray(chart.eval(y), dtype=float)  # noqa: E731
    eye = np.eye(n)
    jac = np.stack([(f(x + h1 * eye[i]) - f(x - h1 * eye[i])) / (2.0 * h1) for i in range(n)], axis=-1)

    f0 = f(x)
    hess = np.empty(f0.shape + (n, n))
    for j in range(n):
        dj = h2 * eye[j]
        hess[:, j, j] = (f(x + dj) - 2.0 * f0 + f(x - dj)) / h2 ** 2
        for k in range(j + 1, n):
            dk = h2 * eye[k]
            val = (f(x + dj + dk) - f(x + dj - dk) - f(x - dj + dk) + f(x - dj - dk)) / (4.0 * h2 ** 2)
            hess[:, j, k] = val
            hess[:, k, j] = val
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return jac, hess


def _points_and_frames(chart: Chart, curve: ChartCurve, ts):
    cs, _, _ = curve.sample(ts)
    cs = cs.reshape(len(ts), -1)
    pts = np.array([chart.eval(c) for c in cs], dtype=float)
    if chart.jacobian is not None:
        frames = np.array([chart.jacobian(c) for c in cs], dtype=float)
    else:
        frames = np.array([fd_derivatives(chart, c)[0] for c in cs])
    return pts, frames


def _check_grid(grid: TimeGrid, s: float):
    if abs(grid.start - s) > 1e-12 * max(1.0, abs(s)):
        raise GridError(f"oracle grid must start at s={s}, starts at {grid.start}")


def develop_direct(chart: Chart, curve: ChartCurve, x0_coords, s: float, grid: TimeGrid,
                   config: OracleConfig = OracleConfig()) -> list:
    """Carry a point of ``H_s`` along the rolling tangent space by projection steps.

    Each step moves ``x_k`` to the point of ``H_{t_{k+1}}`` whose displacement
    is orthogonal to the tangent space at ``t_k``.
    """
    _check_grid(grid, s)
    ts = grid.nodes
    pts, frames = _points_and_frames(chart, curve, ts)
    lam = np.asarray(x0_coords, dtype=float)
    x = pts[0] + frames[0] @ lam
    out = [TraceSample(s=float(ts[0]), coords=lam.copy(), ambient=x.copy())]
    for k in range(len(ts) - 1):
        e0, e1 = frames[k], frames[k + 1]
        lam = -np.linalg.solve(e0.T @ e1, e0.T @ (pts[k + 1] - x))
        x = pts[k + 1] + e1 @ lam
        offset = x - pts[k + 1]
        gram = e1.T @ e1
        drift = np.linalg.norm(offset - e1 @ np.linalg.solve(gram, e1.T @ offset))
        if drift > config.max_drift * max(1.0, float(np.linalg.norm(offset))):
            raise DriftError(f"point left the affine tangent plane at t={ts[k + 1]} (drift {drift:.3e})")
        out.append(TraceSample(s=float(ts[k + 1]), coords=lam, ambient=x))
    return out


def transport_direct(chart: Chart, curve: ChartCurve, v0_coords, s: float, grid: TimeGrid,
                     config: OracleConfig = OracleConfig(), rank_tol: float = tol.RANK_TOL) -> list:
    """Parallel transport by project-then-renormalize steps."""
    _check_grid(grid, s)
    ts = grid.nodes
    _, frames = _points_and_frames(chart, curve, ts)
    w = np.asarray(v0_coords, dtype=float)
    v = frames[0] @ w
    norm = float(np.linalg.norm(v))
    out = [TraceSample(s=float(ts[0]), coords=w.copy(), ambient=v.copy())]
    worst = 0.0
    for k in range(1, len(ts)):
        e = frames[k]
        w = np.linalg.solve(e.T @ e, e.T @ v)
        proj = e @ w
        pn = float(np.linalg.norm(proj))
        if pn <= rank_tol:
            raise DriftError(f"projection collapsed at t={ts[k]}")
        worst = max(worst, abs(norm - pn))
        ratio = norm / pn
        v = proj * ratio
        w = w * ratio
        out.append(TraceSample(s=float(ts[k]), coords=w, ambient=v))
    log.debug("transport_direct: largest norm loss before rescaling %.3e", worst)
    return out
