"""Chart algebra on embedded submanifolds.

A chart is a parametrization ``psi: U -> R^nu`` of an ``n``-dimensional
submanifold. Everything here is evaluated pointwise from the chart's first
and second derivatives; no finite differencing of frames is ever done.

Array conventions: ``jacobian`` has shape ``(nu, n)`` with columns
``d_i psi``; ``hessian`` has shape ``(nu, n, n)`` with ``[:, j, k] =
d_j d_k psi``; Christoffel arrays are indexed ``[i, j, k]`` for
``Gamma^i_{jk}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import tolerances as tol
from .errors import (
    DegenerateCurveError,
    DomainError,
    IntervalError,
    RankError,
    SingularMetricError,
)


def _always(x):
    x = np.asarray(x, dtype=float)
    return np.ones(x.shape[:-1], dtype=bool) if x.ndim > 1 else True


@dataclass(frozen=True)
class Chart:
    """Parametrization of a submanifold with (optional) analytic derivatives.

    ``jacobian`` and ``hessian`` may be left as ``None``; central
    differences of ``eval`` are used instead. With ``vectorized=True`` the
    callables accept stacked inputs of shape ``(..., n)``.
    """

    dim_domain: int
    dim_ambient: int
    eval: Callable
    jacobian: Optional[Callable] = None
    hessian: Optional[Callable] = None
    domain_guard: Callable = _always
    vectorized: bool = False
    name: str = "chart"

    @property
    def analytic(self) -> bool:
        return self.jacobian is not None and self.hessian is not None

    def contains(self, x) -> bool:
        return bool(np.all(self.domain_guard(np.asarray(x, dtype=float))))


@dataclass(frozen=True)
class ChartCurve:
    """Coordinate curve ``c: [t_min, t_max] -> U`` with two derivatives."""

    interval: tuple
    eval: Callable
    d1: Callable
    d2: Callable
    vectorized: bool = False
    name: str = "curve"

    @property
    def t_min(self) -> float:
        return float(self.interval[0])

    @property
    def t_max(self) -> float:
        return float(self.interval[1])

    def sample(self, ts):
        """Return ``(c, c', c'')`` stacked over the times ``ts``."""
        ts = np.asarray(ts, dtype=float)
        if self.vectorized:
            return (np.asarray(self.eval(ts), dtype=float),
                    np.asarray(self.d1(ts), dtype=float),
                    np.asarray(self.d2(ts), dtype=float))
        c = np.array([self.eval(t) for t in ts], dtype=float)
        d1 = np.array([self.d1(t) for t in ts], dtype=float)
        d2 = np.array([self.d2(t) for t in ts], dtype=float)
        return c, d1, d2


@dataclass(frozen=True)
class FrameData:
    """Frame quantities along a curve at one time.

    ``frame`` columns are ``e_i = d_i psi(c(t))``; ``frame_conn[i, j] =
    <e_i, e_j'>``; ``b_matrix = gram_inv @ frame_conn``; ``b_vector =
    gram_inv @ frame.T @ gamma'``.
    """

    time: float
    point: np.ndarray
    velocity: np.ndarray
    frame: np.ndarray
    gram: np.ndarray
    gram_inv: np.ndarray
    frame_conn: np.ndarray
    b_matrix: np.ndarray
    b_vector: np.ndarray


@dataclass(frozen=True)
class FrameBatch:
    """The same quantities as :class:`FrameData`, stacked along axis 0."""

    times: np.ndarray
    coords: np.ndarray
    coords_d1: np.ndarray
    coords_d2: np.ndarray
    point: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    frame: np.ndarray
    hess: np.ndarray
    gram: np.ndarray
    gram_inv: np.ndarray
    frame_conn: np.ndarray
    b_matrix: np.ndarray
    b_vector: np.ndarray = field(repr=False)

    def at(self, k: int) -> FrameData:
        return FrameData(
            time=float(self.times[k]),
            point=self.point[k],
            velocity=self.velocity[k],
            frame=self.frame[k],
            gram=self.gram[k],
            gram_inv=self.gram_inv[k],
            frame_conn=self.frame_conn[k],
            b_matrix=self.b_matrix[k],
            b_vector=self.b_vector[k],
        )


# ---------------------------------------------------------------------------
# chart evaluation


def _guard_batch(chart: Chart, xs: np.ndarray) -> np.ndarray:
    if chart.vectorized:
        return np.broadcast_to(np.asarray(chart.domain_guard(xs), dtype=bool), xs.shape[:-1])
    return np.array([bool(chart.domain_guard(x)) for x in xs], dtype=bool)


def _derivatives_batch(chart: Chart, xs: np.ndarray):
    """Points, jacobians and hessians for stacked coordinates ``(m, n)``."""
    ok = _guard_batch(chart, xs)
    if not np.all(ok):
        bad = xs[np.argmin(ok)]
        raise DomainError(f"point {bad.tolist()} outside the domain of chart {chart.name!r}")
    if chart.analytic and chart.vectorized:
        pts = np.asarray(chart.eval(xs), dtype=float)
        jac = np.asarray(chart.jacobian(xs), dtype=float)
        hess = np.asarray(chart.hessian(xs), dtype=float)
        return pts, jac, hess
    if chart.analytic:
        pts = np.array([chart.eval(x) for x in xs], dtype=float)
        jac = np.array([chart.jacobian(x) for x in xs], dtype=float)
        hess = np.array([chart.hessian(x) for x in xs], dtype=float)
        return pts, jac, hess
    from .oracle import fd_derivatives

    pts = np.array([chart.eval(x) for x in xs], dtype=float)
    pairs = [fd_derivatives(chart, x) for x in xs]
    jac = np.array([p[0] for p in pairs])
    hess = np.array([p[1] for p in pairs])
    return pts, jac, hess


def chart_derivatives(chart: Chart, x: Sequence[float], rank_tol: float = tol.RANK_TOL):
    """Return ``(psi(x), D psi(x), d d psi(x))``.

    Raises DomainError outside the chart and RankError when the jacobian's
    smallest singular value is at most ``rank_tol``.
    """
    x = np.asarray(x, dtype=float)
    pts, jac, hess = _derivatives_batch(chart, x[None, :])
    smin = np.linalg.svd(jac[0], compute_uv=False)[-1]
    if smin <= rank_tol:
        raise RankError(f"jacobian of {chart.name!r} is rank deficient at {x.tolist()} (sigma_min={smin:.3e})")
    return pts[0], jac[0], hess[0]


def _invert_grams(gram: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(gram)
    if not np.all(np.isfinite(cond)) or np.any(cond > tol.COND_MAX):
        raise SingularMetricError(f"metric is numerically singular (cond={np.max(cond):.3e})")
    return np.linalg.inv(gram)


def metric_tensor(chart: Chart, x: Sequence[float]):
    """Metric ``g_ij = <d_i psi, d_j psi>`` and its inverse at ``x``."""
    _, jac, _ = _derivatives_batch(chart, np.asarray(x, dtype=float)[None, :])
    g = jac[0].T @ jac[0]
    return g, _invert_grams(g[None])[0]


def christoffel_from(jac: np.ndarray, hess: np.ndarray, gram_inv: np.ndarray) -> np.ndarray:
    """``Gamma^i_jk = sum_l g^il <d_l psi, d_j d_k psi>``, batched over a leading axis."""
    proj = np.einsum("...al,...ajk->...ljk", jac, hess)
    return np.einsum("...il,...ljk->...ijk", gram_inv, proj)


def christoffel(chart: Chart, x: Sequence[float]) -> np.ndarray:
    """Christoffel symbols of the second kind, shape ``(n, n, n)``."""
    _, jac, hess = _derivatives_batch(chart, np.asarray(x, dtype=float)[None, :])
    ginv = _invert_grams(np.einsum("...ai,...aj->...ij", jac, jac))
    return christoffel_from(jac, hess, ginv)[0]


# ---------------------------------------------------------------------------
# frames along a curve


def frames_along(chart: Chart, curve: ChartCurve, ts) -> FrameBatch:
    """Evaluate every frame quantity at the times ``ts`` in one pass."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    c, dc, ddc = curve.sample(ts)
    c = c.reshape(len(ts), -1)
    dc = dc.reshape(len(ts), -1)
    ddc = ddc.reshape(len(ts), -1)
    pts, jac, hess = _derivatives_batch(chart, c)
    gram = np.einsum("mai,maj->mij", jac, jac)
    gram_inv = _invert_grams(gram)
    # e_j' = sum_k (d_k d_j psi) c'_k
    de = np.einsum("majk,mk->maj", hess, dc)
    frame_conn = np.einsum("mai,maj->mij", jac, de)
    vel = np.einsum("mai,mi->ma", jac, dc)
    acc = np.einsum("mai,mi->ma", jac, ddc) + np.einsum("majk,mj,mk->ma", hess, dc, dc)
    b_matrix = gram_inv @ frame_conn
    b_vector = np.einsum("mij,maj,ma->mi", gram_inv, jac, vel)
    return FrameBatch(
        times=ts, coords=c, coords_d1=dc, coords_d2=ddc,
        point=pts, velocity=vel, acceleration=acc,
        frame=jac, hess=hess, gram=gram, gram_inv=gram_inv,
        frame_conn=frame_conn, b_matrix=b_matrix, b_vector=b_vector,
    )


def frame_data(chart: Chart, curve: ChartCurve, t: float) -> FrameData:
    """Frame, Gram matrix, frame connection and the rolling coefficients at ``t``."""
    _check_in_interval(curve, t)
    return frames_along(chart, curve, [t]).at(0)


def _check_in_interval(curve: ChartCurve, *ts, slack: float = 1e-12):
    lo, hi = curve.t_min, curve.t_max
    pad = slack * max(1.0, abs(lo), abs(hi))
    for t in ts:
        if not (lo - pad <= t <= hi + pad):
            raise IntervalError(f"t={t} outside curve interval [{lo}, {hi}]")


# ---------------------------------------------------------------------------
# ambient-space quantities


def curvature_vector(gamma_d1, gamma_d2, rank_tol: float = tol.RANK_TOL) -> np.ndarray:
    """Curvature vector ``|g'|^-2 (g'' - <g'', g'> |g'|^-2 g')`` of an ambient curve."""
    d1 = np.asarray(gamma_d1, dtype=float)
    d2 = np.asarray(gamma_d2, dtype=float)
    sq = float(d1 @ d1)
    if np.sqrt(sq) <= rank_tol:
        raise DegenerateCurveError("velocity vanishes; curvature vector undefined")
    return (d2 - (d2 @ d1) / sq * d1) / sq


def project_tangent(frame: FrameData, u) -> np.ndarray:
    """Orthogonal projection of an ambient vector onto the tangent space of ``frame``."""
    e = frame.frame
    return e @ (frame.gram_inv @ (e.T @ np.asarray(u, dtype=float)))


def curve_length(chart: Chart, curve: ChartCurve, a: float, b: float, quad_steps: int = 256) -> float:
    """Composite Simpson estimate of the length of ``psi o c`` over ``[a, b]``.

    ``quad_steps`` is the number of Simpson panels; each panel also uses its
    midpoint, so ``2 * quad_steps + 1`` speed evaluations are made.
    """
    if quad_steps < 1:
        raise IntervalError("quad_steps must be >= 1")
    if a > b:
        raise IntervalError(f"reversed interval [{a}, {b}]")
    _check_in_interval(curve, a, b)
    ts = np.linspace(a, b, 2 * quad_steps + 1)
    c, dc, _ = curve.sample(ts)
    _, jac, _ = _derivatives_batch(chart, c.reshape(len(ts), -1))
    speed = np.linalg.norm(np.einsum("mai,mi->ma", jac, dc.reshape(len(ts), -1)), axis=1)
    h = (b - a) / quad_steps
    return float(h / 6.0 * (speed[0:-1:2] + 4.0 * speed[1::2] + speed[2::2]).sum())


def geodesic_residual(chart: Chart, curve: ChartCurve, t: float, rank_tol: float = tol.RANK_TOL):
    """Return ``(general, arclength)`` geodesic residuals in coordinates.

    ``arclength`` is ``c'' + Gamma(c', c')``, which vanishes only for
    constant-speed geodesics. ``general`` removes its metric projection on
    ``c'`` and vanishes for every regular parametrization of a geodesic.
    """
    _check_in_interval(curve, t)
    general, arclength = geodesic_residuals_along(chart, curve, [t], rank_tol)
    return general[0], arclength[0]


def geodesic_residuals_along(chart: Chart, curve: ChartCurve, ts, rank_tol: float = tol.RANK_TOL):
    """Stacked version of :func:`geodesic_residual` over the times ``ts``."""
    fb = frames_along(chart, curve, ts)
    dc, ddc, g = fb.coords_d1, fb.coords_d2, fb.gram
    speed_sq = np.einsum("mi,mij,mj->m", dc, g, dc)
    if np.any(np.sqrt(np.maximum(speed_sq, 0.0)) <= rank_tol):
        k = int(np.argmin(speed_sq))
        raise DegenerateCurveError(f"curve is not regular at t={fb.times[k]}")
    gam = christoffel_from(fb.frame, fb.hess, fb.gram_inv)
    arclength = ddc + np.einsum("mjlk,ml,mk->mj", gam, dc, dc)
    along = np.einsum("mi,mij,mj->m", dc, g, arclength) / speed_sq
    return arclength - along[:, None] * dc, arclength


def require_regular(fb: FrameBatch, rank_tol: float = tol.RANK_TOL) -> None:
    speed = np.linalg.norm(fb.velocity, axis=1)
    if np.any(speed <= rank_tol):
        k = int(np.argmin(speed))
        raise DegenerateCurveError(f"curve is not regular at t={fb.times[k]} (|gamma'|={speed[k]:.3e})")
