"""Experiment configuration files (TOML).

A config names exactly one manifold and one curve, a grid resolution and a
list of tasks::

    [manifold]
    name = "sphere"
    params = { radius = 1.0 }

    [curve]
    kind = "latitude"
    params = { colatitude = 1.0471975511965976 }
    interval = [0.0, 6.283185307179586]

    [grid]
    steps = 2048

    [[tasks]]
    id = "trace0"
    type = "trace"
    t = 0.0

Validation collects every violation before raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import tomli

from .. import tolerances as tol
from ..errors import RollframeError
from ..zoo import CURVE_KINDS, MANIFOLDS

TASK_TYPES = ("trace", "transport", "geodesic_check", "holonomy", "oracle_compare")
MIN_STEPS = 16

_TASK_FIELDS = {
    "trace": {"t"},
    "transport": {"s", "v0"},
    "geodesic_check": {"t"},
    "holonomy": {"s_start", "s_end", "v0"},
    "oracle_compare": {"s", "t_end", "x0", "v0", "h_oracle", "max_gap"},
}
_COMMON_FIELDS = {"id", "type", "output"}


class ParseError(RollframeError):
    kind = "parse"

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(RollframeError):
    kind = "validation"

    def __init__(self, violations: list):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class TaskSpec:
    id: str
    type: str
    output: str
    fields: dict = field(default_factory=dict)

    def get(self, key: str, default: Any = None) -> Any:
        return self.fields.get(key, default)


@dataclass(frozen=True)
class ExperimentConfig:
    manifold: str
    manifold_params: dict
    curve_kind: str
    curve_params: dict
    interval: Optional[tuple]
    steps: int
    tasks: tuple
    tolerances: dict

    def with_steps(self, steps: int) -> "ExperimentConfig":
        if steps < MIN_STEPS:
            raise ValidationError([f"grid.steps >= {MIN_STEPS} (got {steps})"])
        return ExperimentConfig(self.manifold, self.manifold_params, self.curve_kind, self.curve_params,
                                self.interval, steps, self.tasks, self.tolerances)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_vector(v) -> bool:
    return isinstance(v, list) and len(v) > 0 and all(_is_number(x) for x in v)


def _table(doc: dict, key: str, errors: list) -> dict:
    value = doc.get(key)
    if value is None:
        errors.append(f"{key}: missing table")
        return {}
    if not isinstance(value, dict):
        errors.append(f"{key}: must be a table")
        return {}
    return value


def _check_task(i: int, raw: Any, errors: list) -> Optional[TaskSpec]:
    where = f"tasks[{i}]"
    if not isinstance(raw, dict):
        errors.append(f"{where}: must be a table")
        return None
    ttype = raw.get("type")
    if ttype not in TASK_TYPES:
        errors.append(f"{where}.type: must be one of {', '.join(TASK_TYPES)} (got {ttype!r})")
        return None
    tid = raw.get("id", f"{ttype}_{i}")
    if not isinstance(tid, str) or not tid:
        errors.append(f"{where}.id: must be a non-empty string")
        tid = f"{ttype}_{i}"
    output = raw.get("output", tid)
    if not isinstance(output, str) or not output:
        errors.append(f"{where}.output: must be a non-empty string")
        output = tid
    fields = {k: v for k, v in raw.items() if k not in _COMMON_FIELDS}
    unknown = sorted(set(fields) - _TASK_FIELDS[ttype])
    for k in unknown:
        errors.append(f"{where}.{k}: unknown field for task type {ttype!r}")
    for k, v in fields.items():
        if k in unknown:
            continue
        if k in ("v0", "x0"):
            if not _is_vector(v):
                errors.append(f"{where}.{k}: must be a list of numbers")
        elif not _is_number(v):
            errors.append(f"{where}.{k}: must be a number")
        elif k in ("h_oracle", "max_gap") and v <= 0:
            errors.append(f"{where}.{k}: must be > 0")
    return TaskSpec(id=tid, type=ttype, output=output, fields=fields)


def validate(doc: dict) -> ExperimentConfig:
    """Turn a parsed TOML document into a config, or raise with every violation."""
    errors: list = []
    unknown_top = sorted(set(doc) - {"manifold", "curve", "grid", "tasks", "tolerances"})
    for k in unknown_top:
        errors.append(f"{k}: unknown top-level key")

    man = _table(doc, "manifold", errors)
    name = man.get("name")
    if man and name not in MANIFOLDS:
        errors.append(f"manifold.name: unknown manifold {name!r}; known: {', '.join(MANIFOLDS)}")
    mparams = man.get("params", {})
    if not isinstance(mparams, dict):
        errors.append("manifold.params: must be a table")
        mparams = {}
    for k, v in mparams.items():
        if not _is_number(v):
            errors.append(f"manifold.params.{k}: must be a number")

    cur = _table(doc, "curve", errors)
    kind = cur.get("kind")
    if cur and kind not in CURVE_KINDS:
        errors.append(f"curve.kind: unknown curve kind {kind!r}; known: {', '.join(CURVE_KINDS)}")
    cparams = cur.get("params", {})
    if not isinstance(cparams, dict):
        errors.append("curve.params: must be a table")
        cparams = {}
    interval = cur.get("interval")
    if interval is not None:
        if not (_is_vector(interval) and len(interval) == 2 and interval[1] > interval[0]):
            errors.append("curve.interval: must be [t_min, t_max] with t_min < t_max")
            interval = None
        else:
            interval = (float(interval[0]), float(interval[1]))

    grid = _table(doc, "grid", errors)
    steps = grid.get("steps")
    if grid:
        if not isinstance(steps, int) or isinstance(steps, bool):
            errors.append("grid.steps: must be an integer")
        elif steps < MIN_STEPS:
            errors.append(f"grid.steps >= {MIN_STEPS} (got {steps})")

    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        errors.append("tolerances: must be a table")
        tols = {}
    for k, v in tols.items():
        if k not in tol.DEFAULTS:
            errors.append(f"tolerances.{k}: unknown tolerance; known: {', '.join(sorted(tol.DEFAULTS))}")
        elif not _is_number(v) or v <= 0:
            errors.append(f"tolerances.{k}: must be a positive number")

    raw_tasks = doc.get("tasks")
    tasks = []
    if not isinstance(raw_tasks, list) or not raw_tasks:
        errors.append("tasks: at least one [[tasks]] entry is required")
    else:
        for i, raw in enumerate(raw_tasks):
            spec = _check_task(i, raw, errors)
            if spec is not None:
                tasks.append(spec)
        seen_ids, seen_out = set(), set()
        for spec in tasks:
            if spec.id in seen_ids:
                errors.append(f"tasks: duplicate id {spec.id!r}")
            if spec.output in seen_out:
                errors.append(f"tasks: duplicate output path {spec.output!r}")
            seen_ids.add(spec.id)
            seen_out.add(spec.output)

    if not errors:
        # parameter ranges and domain membership are owned by the zoo
        from ..zoo import make_chart, make_curve

        try:
            entry = make_chart(name, mparams)
        except RollframeError as exc:
            errors.append(f"manifold.params: {exc}")
        else:
            try:
                make_curve(entry, kind, cparams, interval)
            except RollframeError as exc:
                errors.append(f"curve: {exc}")

    if errors:
        raise ValidationError(errors)
    return ExperimentConfig(
        manifold=name, manifold_params=dict(mparams),
        curve_kind=kind, curve_params=dict(cparams), interval=interval,
        steps=int(steps), tasks=tuple(tasks),
        tolerances={**tol.DEFAULTS, **{k: float(v) for k, v in tols.items()}},
    )


def _position(text: str, offset: int):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def parse_config(text) -> ExperimentConfig:
    """Parse UTF-8 TOML (bytes or str) into a validated :class:`ExperimentConfig`."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = text[: exc.start].decode("utf-8", errors="replace")
            line, col = _position(prefix, len(prefix))
            raise ParseError(f"config is not valid UTF-8 (at line {line}, column {col})", line, col) from None
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(str(exc), getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None
    return validate(doc)
