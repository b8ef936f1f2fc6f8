"""Execute the tasks of an experiment config."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericalError, RollframeError
from ..geometry import geodesic_residuals_along
from ..oracle import OracleConfig, develop_direct, transport_direct
from ..rolling import (
    TimeGrid,
    TraceSample,
    apply_rolling,
    apply_transport,
    fit_circle,
    fundamental_solution,
    holonomy,
    straightness,
    trace_curve,
    trace_length,
)
from ..zoo import make_chart, make_curve
from .config import ExperimentConfig, TaskSpec

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class ResultRecord:
    task_id: str
    task_type: str
    s: np.ndarray
    coords: np.ndarray
    ambient: np.ndarray
    summaries: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        for key, value in self.summaries.items():
            if isinstance(value, bool):
                continue
            if not math.isfinite(float(value)):
                raise NumericalError(f"task {self.task_id}: summary {key} is not finite ({value})")

    @classmethod
    def from_samples(cls, task: TaskSpec, samples, summaries) -> "ResultRecord":
        return cls(
            task_id=task.id,
            task_type=task.type,
            s=np.array([p.s for p in samples], dtype=float),
            coords=np.array([p.coords for p in samples], dtype=float),
            ambient=np.array([p.ambient for p in samples], dtype=float),
            summaries=summaries,
        )

    @property
    def dims(self):
        return self.coords.shape[1], self.ambient.shape[1]


class TaskError(RollframeError):
    """A module error raised while running one task."""

    def __init__(self, task_id: str, cause: RollframeError):
        super().__init__(f"task {task_id!r}: {cause}")
        self.task_id = task_id
        self.cause = cause
        self.kind = cause.kind


class _Context:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.tol = config.tolerances
        self.entry = make_chart(config.manifold, config.manifold_params)
        self.curve = make_curve(self.entry, config.curve_kind, config.curve_params, config.interval)
        self.grid = TimeGrid(self.curve.t_min, self.curve.t_max, config.steps)
        self._sol = None

    @property
    def solution(self):
        if self._sol is None:
            self._sol = fundamental_solution(self.entry.chart, self.curve, self.grid, rank_tol=self.tol["rank_tol"])
        return self._sol

    def vector(self, task: TaskSpec, key: str, default):
        n = self.entry.chart.dim_domain
        v = np.asarray(task.get(key, default), dtype=float)
        if v.shape != (n,):
            raise NumericalError(f"{key} needs {n} components, got {v.size}")
        return v


def _transport_samples(sol, s: float, v0) -> list:
    out = []
    for t in sol.grid.nodes:
        p = apply_transport(sol, t, s, v0)
        out.append(TraceSample(s=float(t), coords=p.coords, ambient=p.ambient))
    return out


def _run_trace(ctx: _Context, task: TaskSpec) -> ResultRecord:
    sol = ctx.solution
    t = float(task.get("t", ctx.grid.start))
    samples = trace_curve(sol, t, ctx.grid)
    dev, is_line = straightness(samples, ctx.tol["straight_tol"], ctx.tol["rank_tol"])
    summaries = {"straightness_deviation": dev, "is_line": bool(is_line), "trace_length": trace_length(samples)}
    if not is_line:
        _, radius, rms = fit_circle(samples)
        summaries.update(circle_radius=radius, circle_rms=rms)
    return ResultRecord.from_samples(task, samples, summaries)


def _run_transport(ctx: _Context, task: TaskSpec) -> ResultRecord:
    sol = ctx.solution
    s = float(task.get("s", ctx.grid.start))
    v0 = ctx.vector(task, "v0", [1.0] + [0.0] * (ctx.entry.chart.dim_domain - 1))
    samples = _transport_samples(sol, s, v0)
    _, frame = sol.frame_at(s)
    norm0 = float(np.linalg.norm(frame @ v0))
    drift = max(abs(np.linalg.norm(p.ambient) - norm0) for p in samples) / norm0
    return ResultRecord.from_samples(task, samples, {"norm_drift_max": drift})


def _run_geodesic_check(ctx: _Context, task: TaskSpec) -> ResultRecord:
    sol = ctx.solution
    general, arclength = geodesic_residuals_along(ctx.entry.chart, ctx.curve, ctx.grid.nodes, ctx.tol["rank_tol"])
    residual = float(np.linalg.norm(general, axis=1).max())
    t = float(task.get("t", ctx.grid.start))
    samples = trace_curve(sol, t, ctx.grid)
    dev, is_line = straightness(samples, ctx.tol["straight_tol"], ctx.tol["rank_tol"])
    summaries = {
        "residual_max": residual,
        "residual_arclength_max": float(np.linalg.norm(arclength, axis=1).max()),
        "straightness_deviation": dev,
        "is_line": bool(is_line),
        "is_geodesic": bool(residual <= ctx.tol["ode_tol"]),
    }
    return ResultRecord.from_samples(task, samples, summaries)


def _run_holonomy(ctx: _Context, task: TaskSpec) -> ResultRecord:
    sol = ctx.solution
    s0 = float(task.get("s_start", ctx.grid.start))
    s1 = float(task.get("s_end", ctx.grid.stop))
    mat, angle = holonomy(sol, s0, s1, ctx.tol["lin_tol"])
    summaries = {"orthogonality_error": float(np.abs(mat.T @ mat - np.eye(len(mat))).max())}
    if angle is not None:
        summaries["angle"] = angle
    v0 = ctx.vector(task, "v0", [1.0] + [0.0] * (ctx.entry.chart.dim_domain - 1))
    samples = _transport_samples(sol, s0, v0)
    return ResultRecord.from_samples(task, samples, summaries)


def _run_oracle_compare(ctx: _Context, task: TaskSpec) -> ResultRecord:
    sol = ctx.solution
    chart, curve = ctx.entry.chart, ctx.curve
    n = chart.dim_domain
    s = float(task.get("s", ctx.grid.start))
    t_end = float(task.get("t_end", ctx.grid.stop))
    x0 = ctx.vector(task, "x0", [0.0] * n)
    v0 = ctx.vector(task, "v0", [1.0] + [0.0] * (n - 1))
    cfg = OracleConfig(step=float(task.get("h_oracle", 1e-3)))
    ogrid = cfg.grid(s, t_end)
    developed = develop_direct(chart, curve, x0, s, ogrid, cfg)
    transported = transport_direct(chart, curve, v0, s, ogrid, cfg, rank_tol=ctx.tol["rank_tol"])
    dev_gap = float(np.linalg.norm(developed[-1].ambient - apply_rolling(sol, t_end, s, x0).ambient))
    tr_gap = float(np.linalg.norm(transported[-1].ambient - apply_transport(sol, t_end, s, v0).ambient))
    h = ogrid.h
    summaries = {
        "h_oracle": h,
        "develop_gap": dev_gap,
        "transport_gap": tr_gap,
        "develop_gap_per_h": dev_gap / h,
        "transport_gap_per_h": tr_gap / h,
    }
    limit = task.get("max_gap")
    if limit is not None and max(dev_gap, tr_gap) > limit:
        raise NumericalError(f"oracle gap {max(dev_gap, tr_gap):.3e} exceeds max_gap {limit:.3e}")
    return ResultRecord.from_samples(task, developed, summaries)


_RUNNERS = {
    "trace": _run_trace,
    "transport": _run_transport,
    "geodesic_check": _run_geodesic_check,
    "holonomy": _run_holonomy,
    "oracle_compare": _run_oracle_compare,
}


def run(config: ExperimentConfig, only: tuple | None = None) -> list:
    """Run the config's tasks in order and return one record per task.

    ``only`` restricts execution to the given task types. Module errors are
    re-raised as :class:`TaskError` carrying the task id.
    """
    ctx = _Context(config)
    records = []
    for task in config.tasks:
        if only is not None and task.type not in only:
            continue
        log.info("running task %s (%s)", task.id, task.type)
        try:
            records.append(_RUNNERS[task.type](ctx, task))
        except TaskError:
            raise
        except RollframeError as exc:
            raise TaskError(task.id, exc) from exc
    return records

