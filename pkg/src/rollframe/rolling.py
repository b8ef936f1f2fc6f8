"""Rolling the affine tangent space along a curve.

The frame coordinates ``lam`` of a point carried by the rolling tangent
space satisfy ``lam' + b + B lam = 0`` (``mu' + B mu = 0`` for tangent
vectors). We integrate the fundamental solution ``X' = -B X`` with RK4 and
read everything else off it:

    A(t, s) = X(t) X(s)^-1
    a(t, s) = -X(t) (F(t) - F(s)),   F(t) = int_{t_0}^t X^-1 b

so the rolling map sends ``gamma(s) + E(s) lam`` to
``gamma(t) + E(t) (A lam + a)`` and parallel transport sends ``E(s) v`` to
``E(t) A v``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import tolerances as tol
from .errors import (
    DegenerateTraceError,
    GridError,
    NotClosedError,
    SingularSolutionError,
)
from .geometry import (
    Chart,
    ChartCurve,
    FrameBatch,
    christoffel_from,
    frames_along,
    require_regular,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``start = t_0 < ... < t_N = stop``."""

    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise GridError(f"a grid needs at least 2 steps, got {self.steps}")
        if not self.stop > self.start:
            raise GridError(f"grid must be increasing: [{self.start}, {self.stop}]")

    @classmethod
    def from_nodes(cls, nodes: Sequence[float]) -> "TimeGrid":
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 3:
            raise GridError("a grid needs at least 3 nodes")
        steps = np.diff(nodes)
        h = (nodes[-1] - nodes[0]) / (len(nodes) - 1)
        if np.any(steps <= 0) or np.max(np.abs(steps - h)) > 1e-12 * max(abs(h), 1.0) * len(nodes):
            raise GridError("grid nodes must be strictly increasing and uniformly spaced")
        return cls(float(nodes[0]), float(nodes[-1]), len(nodes) - 1)

    @property
    def h(self) -> float:
        return (self.stop - self.start) / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps + 1)

    def contains(self, t: float, slack: float = 1e-12) -> bool:
        pad = slack * max(1.0, abs(self.start), abs(self.stop))
        return self.start - pad <= t <= self.stop + pad


@dataclass(frozen=True)
class TraceSample:
    """A development point or vector in the frame of one tangent space.

    For points ``ambient = gamma(t) + E(t) @ coords``; for vectors
    ``ambient = E(t) @ coords``.
    """

    s: float
    coords: np.ndarray
    ambient: np.ndarray


@dataclass(frozen=True)
class TangentField:
    """Tangent field along a curve, given by its frame coefficients ``w(s)``.

    Without ``d1`` the derivative is a central difference with ``fd_step``.
    """

    coeffs: Callable
    d1: Optional[Callable] = None
    fd_step: float = 1e-5

    @classmethod
    def from_samples(cls, grid: TimeGrid, values) -> "TangentField":
        from scipy.interpolate import CubicHermiteSpline

        values = np.asarray(values, dtype=float)
        slopes = np.gradient(values, grid.h, axis=0, edge_order=2)
        spline = CubicHermiteSpline(grid.nodes, values, slopes, axis=0)
        return cls(coeffs=spline, d1=spline.derivative(), fd_step=grid.h)

    def value(self, s: float) -> np.ndarray:
        return np.asarray(self.coeffs(s), dtype=float)

    def derivative(self, s: float) -> np.ndarray:
        if self.d1 is not None:
            return np.asarray(self.d1(s), dtype=float)
        h = self.fd_step * max(1.0, abs(s))
        return (self.value(s + h) - self.value(s - h)) / (2.0 * h)


@dataclass(frozen=True)
class RollingSolution:
    """Sampled fundamental solution on one grid, with ``X(t_0) = I``."""

    chart: Chart
    curve: ChartCurve
    grid: TimeGrid
    x_samples: np.ndarray
    b_samples: np.ndarray
    frames: FrameBatch = field(repr=False)
    x_dot: np.ndarray = field(repr=False)
    f_samples: np.ndarray = field(repr=False)
    f_dot: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.x_samples.shape[-1]

    def _locate(self, ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        for t in ts:
            if not self.grid.contains(t):
                raise GridError(f"t={t} outside solution span [{self.grid.start}, {self.grid.stop}]")
        u = (ts - self.grid.start) / self.grid.h
        k = np.clip(np.floor(u).astype(int), 0, self.grid.steps - 1)
        theta = np.clip(u - k, 0.0, 1.0)
        # snap to nodes so node queries return stored samples exactly
        near = np.abs(u - np.rint(u)) < 1e-9
        k = np.where(near & (np.rint(u) == self.grid.steps), self.grid.steps - 1, k)
        theta = np.where(near, np.rint(u) - k, theta)
        return ts, k, theta

    def state(self, ts):
        """``X(t)`` and ``F(t)`` by cubic Hermite interpolation on the ODE slopes."""
        ts, k, th = self._locate(ts)
        h = self.grid.h
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th ** 2 * (3 - 2 * th)
        h11 = th ** 2 * (th - 1)
        w = lambda c: c[:, None, None]  # noqa: E731
        x = (w(h00) * self.x_samples[k] + w(h10 * h) * self.x_dot[k]
             + w(h01) * self.x_samples[k + 1] + w(h11 * h) * self.x_dot[k + 1])
        v = lambda c: c[:, None]  # noqa: E731
        f = (v(h00) * self.f_samples[k] + v(h10 * h) * self.f_dot[k]
             + v(h01) * self.f_samples[k + 1] + v(h11 * h) * self.f_dot[k + 1])
        return x, f

    def frame_at(self, t: float):
        """``(gamma(t), E(t))``; reuses node samples when ``t`` is a node."""
        u = (t - self.grid.start) / self.grid.h
        j = int(np.rint(u))
        if abs(u - j) < 1e-9 and 0 <= j <= self.grid.steps:
            return self.frames.point[j], self.frames.frame[j]
        if not self.grid.contains(t):
            raise GridError(f"t={t} outside solution span [{self.grid.start}, {self.grid.stop}]")
        fb = frames_along(self.chart, self.curve, [t])
        return fb.point[0], fb.frame[0]


def _check_conditioning(xs: np.ndarray, times) -> None:
    cond = np.linalg.cond(xs)
    bad = ~np.isfinite(cond) | (cond > tol.COND_MAX)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SingularSolutionError(f"fundamental solution is singular near t={times[k]} (cond={cond[k]:.3e})")


def fundamental_solution(chart: Chart, curve: ChartCurve, grid: TimeGrid,
                         rank_tol: float = tol.RANK_TOL) -> RollingSolution:
    """Integrate ``X' = -B X``, ``X(t_0) = I`` with classical RK4 on ``grid``.

    ``B`` is evaluated at nodes and midpoints. Alongside ``X`` we accumulate
    ``F = int X^-1 b`` with Simpson's rule per step, using a Hermite
    midpoint value of ``X``.
    """
    pad = 1e-12 * max(1.0, abs(curve.t_min), abs(curve.t_max))
    if grid.start < curve.t_min - pad or grid.stop > curve.t_max + pad:
        raise GridError(f"grid [{grid.start}, {grid.stop}] exceeds curve interval {tuple(curve.interval)}")

    n_steps, h = grid.steps, grid.h
    fine = frames_along(chart, curve, np.linspace(grid.start, grid.stop, 2 * n_steps + 1))
    require_regular(fine, rank_tol)
    bm = fine.b_matrix
    bv = fine.b_vector
    n = bm.shape[-1]

    xs = np.empty((n_steps + 1, n, n))
    xs[0] = np.eye(n)
    x = xs[0]
    for k in range(n_steps):
        b0, bh, b1 = bm[2 * k], bm[2 * k + 1], bm[2 * k + 2]
        k1 = -b0 @ x
        k2 = -bh @ (x + 0.5 * h * k1)
        k3 = -bh @ (x + 0.5 * h * k2)
        k4 = -b1 @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xs[k + 1] = x

    nodes = fine.times[::2]
    _check_conditioning(xs, nodes)
    b_nodes = bv[::2]
    x_dot = -bm[::2] @ xs
    x_mid = 0.5 * (xs[:-1] + xs[1:]) + (h / 8.0) * (x_dot[:-1] - x_dot[1:])
    _check_conditioning(x_mid, fine.times[1::2])

    g_nodes = np.linalg.solve(xs, b_nodes[..., None])[..., 0]
    g_mid = np.linalg.solve(x_mid, bv[1::2][..., None])[..., 0]
    fs = np.zeros((n_steps + 1, n))
    fs[1:] = np.cumsum((h / 6.0) * (g_nodes[:-1] + 4.0 * g_mid + g_nodes[1:]), axis=0)

    node_frames = FrameBatch(**{
        name: getattr(fine, name)[::2] for name in fine.__dataclass_fields__
    })
    return RollingSolution(
        chart=chart, curve=curve, grid=grid,
        x_samples=xs, b_samples=b_nodes, frames=node_frames,
        x_dot=x_dot, f_samples=fs, f_dot=g_nodes,
    )


def solve_segment(chart: Chart, curve: ChartCurve, t0: float, t1: float, steps: int) -> RollingSolution:
    """Fresh fundamental solution on ``[min(t0, t1), max(t0, t1)]``."""
    lo, hi = min(t0, t1), max(t0, t1)
    return fundamental_solution(chart, curve, TimeGrid(lo, hi, steps))


def rolling_coeffs(sol: RollingSolution, t: float, s: float):
    """``(A(t, s), a(t, s))`` so that frame coordinates map as ``lam -> A lam + a``."""
    x, f = sol.state([t, s])
    a_mat = np.linalg.solve(x[1].T, x[0].T).T
    shift = -x[0] @ (f[0] - f[1])
    return a_mat, shift


def apply_rolling(sol: RollingSolution, t: float, s: float, lam) -> TraceSample:
    """Image under the rolling map of the point ``gamma(s) + E(s) lam``."""
    a_mat, shift = rolling_coeffs(sol, t, s)
    coords = a_mat @ np.asarray(lam, dtype=float) + shift
    point, frame = sol.frame_at(t)
    return TraceSample(s=float(s), coords=coords, ambient=point + frame @ coords)


def apply_transport(sol: RollingSolution, t: float, s: float, v_coords) -> TraceSample:
    """Parallel transport of the tangent vector ``E(s) v`` to time ``t``."""
    a_mat, _ = rolling_coeffs(sol, t, s)
    coords = a_mat @ np.asarray(v_coords, dtype=float)
    _, frame = sol.frame_at(t)
    return TraceSample(s=float(s), coords=coords, ambient=frame @ coords)


def _trace_coords(sol: RollingSolution, t: float, svals: np.ndarray):
    x, f = sol.state(np.concatenate([[t], svals]))
    return x[0], x[1:], f[0], f[1:]


def trace_curve(sol: RollingSolution, t: float, s_grid: TimeGrid) -> list:
    """Imprint of the curve on the fixed plane ``H_t``: ``Phi(t, s)(gamma(s))``."""
    svals = s_grid.nodes
    xt, _, ft, fs = _trace_coords(sol, t, svals)
    coords = -(ft[None, :] - fs) @ xt.T
    point, frame = sol.frame_at(t)
    return [TraceSample(s=float(s), coords=c, ambient=point + frame @ c) for s, c in zip(svals, coords)]


def trace_vector_field(sol: RollingSolution, t: float, field: TangentField, s_grid: TimeGrid) -> list:
    """Imprint of a tangent field on ``T_t``: ``P(t, s)(v(s))``."""
    svals = s_grid.nodes
    xt, xs, _, _ = _trace_coords(sol, t, svals)
    ws = np.array([field.value(s) for s in svals], dtype=float)
    coords = np.linalg.solve(xs, ws[..., None])[..., 0] @ xt.T
    _, frame = sol.frame_at(t)
    return [TraceSample(s=float(s), coords=c, ambient=frame @ c) for s, c in zip(svals, coords)]


def covariant_derivative(chart: Chart, curve: ChartCurve, field: TangentField, t: float) -> TraceSample:
    """Covariant derivative ``w'_i + Gamma^i_kl c'_k w_l`` of a tangent field at ``t``."""
    fb = frames_along(chart, curve, [t])
    require_regular(fb)
    gam = christoffel_from(fb.frame, fb.hess, fb.gram_inv)[0]
    w = field.value(t)
    coords = field.derivative(t) + np.einsum("ikl,k,l->i", gam, fb.coords_d1[0], w)
    return TraceSample(s=float(t), coords=coords, ambient=fb.frame[0] @ coords)


def trace_derivative_check(sol: RollingSolution, t: float, field: TangentField, s: float, h: float):
    """Compare the derivative of the trace field with the transported covariant derivative.

    Returns ``(lhs, rhs, gap)``: ``lhs`` is the central difference of the
    trace field at ``s``, ``rhs = P(t, s)(Dv/ds)``, and ``gap`` is the
    length of ``lhs - rhs`` as a tangent vector at ``t``.
    """
    for q in (s - h, s + h):
        if not sol.grid.contains(q):
            raise GridError(f"s +/- h = {q} leaves the solution span")
    plus = apply_transport(sol, t, s + h, field.value(s + h)).coords
    minus = apply_transport(sol, t, s - h, field.value(s - h)).coords
    lhs = (plus - minus) / (2.0 * h)
    cov = covariant_derivative(sol.chart, sol.curve, field, s)
    rhs = apply_transport(sol, t, s, cov.coords).coords
    _, frame = sol.frame_at(t)
    gap = float(np.linalg.norm(frame @ (lhs - rhs)))
    return lhs, rhs, gap


def trace_length(samples: Sequence[TraceSample]) -> float:
    pts = np.array([p.ambient for p in samples])
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def straightness(samples: Sequence[TraceSample], straight_tol: float = tol.STRAIGHT_TOL,
                 rank_tol: float = tol.RANK_TOL):
    """Largest distance from the least-squares line, relative to trace length."""
    if len(samples) < 3:
        raise DegenerateTraceError(f"straightness needs at least 3 samples, got {len(samples)}")
    pts = np.array([p.ambient for p in samples])
    length = trace_length(samples)
    if length <= rank_tol:
        raise DegenerateTraceError(f"trace has length {length:.3e}")
    centred = pts - pts.mean(axis=0)
    direction = np.linalg.svd(centred, full_matrices=False)[2][0]
    offsets = centred - np.outer(centred @ direction, direction)
    dev = float(np.linalg.norm(offsets, axis=1).max() / length)
    return dev, dev <= straight_tol


def fit_circle(samples: Sequence[TraceSample]):
    """Algebraic circle fit in the best-fit plane of the sample points.

    Returns ``(center, radius, rms)`` with ``center`` in ambient
    coordinates and ``rms`` the RMS radial residual.
    """
    pts = np.array([p.ambient for p in samples])
    mean = pts.mean(axis=0)
    basis = np.linalg.svd(pts - mean, full_matrices=False)[2][:2]
    xy = (pts - mean) @ basis.T
    design = np.column_stack([xy, np.ones(len(xy))])
    rhs = (xy ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    c2 = sol[:2] / 2.0
    radius = float(np.sqrt(sol[2] + c2 @ c2))
    rms = float(np.sqrt(np.mean((np.linalg.norm(xy - c2, axis=1) - radius) ** 2)))
    return mean + c2 @ basis, radius, rms


def orthonormalizer(gram: np.ndarray) -> np.ndarray:
    """Upper-triangular ``L^T`` with ``gram = L L^T``: maps frame to orthonormal coordinates."""
    return np.linalg.cholesky(gram).T


def holonomy(sol: RollingSolution, s_start: float, s_end: float, lin_tol: float = tol.LIN_TOL):
    """Parallel transport around a closed loop in a metric-orthonormal frame.

    The orthonormal frame is Gram-Schmidt applied to ``(e_1, ..., e_n)`` at
    the base point. For ``n = 2`` the rotation angle is returned in
    ``(-pi, pi]``, counterclockwise positive; otherwise the angle is None.
    """
    p0, e0 = sol.frame_at(s_start)
    p1, e1 = sol.frame_at(s_end)
    scale = max(1.0, float(np.linalg.norm(p0)))
    if np.linalg.norm(p1 - p0) > lin_tol * scale:
        raise NotClosedError(f"curve does not close: |gamma(end) - gamma(start)| = {np.linalg.norm(p1 - p0):.3e}")
    if np.linalg.norm(e1 - e0) > lin_tol * max(1.0, float(np.linalg.norm(e0))):
        raise NotClosedError("frames at the loop endpoints differ")
    a_mat, _ = rolling_coeffs(sol, s_end, s_start)
    lt = orthonormalizer(e0.T @ e0)
    mat = lt @ a_mat @ np.linalg.inv(lt)
    angle = None
    if mat.shape == (2, 2):
        angle = float(np.arctan2(mat[1, 0], mat[0, 0]))
        if angle <= -np.pi + 1e-12:
            angle = float(np.pi)
    return mat, angle


def wrap_angle(x: float) -> float:
    """Representative of ``x`` modulo ``2 pi`` in ``(-pi, pi]``."""
    y = -((np.pi - x) % (2.0 * np.pi)) + np.pi
    return float(y)


def angle_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))
