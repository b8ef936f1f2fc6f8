"""``rollframe`` command line.

Exit codes: 0 success, 2 parse/validation, 3 numerical failure, 4 I/O.
Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from ..errors import RollframeError
from ..zoo import CURVE_KINDS, MANIFOLDS, make_chart
from .config import ParseError, ValidationError, parse_config
from .emit import FORMATS, IoError, emit
from .runner import TaskError, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = _LOG_LEVELS.get(os.environ.get("ROLLFRAME_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, kind: str, message: str, **extra):
    payload = {"error": kind, "message": message, "exit_code": code, **extra}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(code)


def _load(config_path: str):
    try:
        data = Path(config_path).read_bytes()
    except OSError as exc:
        _fail(EXIT_IO, "io", f"cannot read {config_path}: {exc.strerror or exc}")
    try:
        return parse_config(data)
    except ParseError as exc:
        _fail(EXIT_CONFIG, exc.kind, str(exc), line=exc.line, column=exc.column)
    except ValidationError as exc:
        _fail(EXIT_CONFIG, exc.kind, str(exc), violations=exc.violations)


def _execute(config, out_dir: str, formats, only=None):
    try:
        records = run(config, only=only)
    except TaskError as exc:
        _fail(EXIT_NUMERIC, exc.kind, str(exc), task=exc.task_id)
    except RollframeError as exc:
        _fail(EXIT_NUMERIC, exc.kind, str(exc))

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        outputs = {t.id: t.output for t in config.tasks}
        for rec in records:
            base = outputs[rec.task_id]
            if "csv" in formats:
                emit([rec], "csv", out / f"{base}.csv")
            if "svg" in formats and rec.task_type in ("trace", "transport", "geodesic_check", "holonomy"):
                if rec.coords.shape[1] == 2:
                    emit([rec], "svg", out / f"{base}.svg")
                else:
                    logging.getLogger(__name__).warning("task %s: SVG needs n = 2; skipped", rec.task_id)
        if "json" in formats:
            emit(records, "json", out / "results.json")
    except IoError as exc:
        _fail(EXIT_IO, exc.kind, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, "io", f"cannot write to {out}: {exc.strerror or exc}")

    for rec in records:
        parts = ", ".join(f"{k}={v}" for k, v in sorted(rec.summaries.items()))
        click.echo(f"{rec.task_id} [{rec.task_type}] {parts}")


@click.group()
def main():
    """Rolling tangent space experiments."""
    _setup_logging()


@main.command("run")
@click.argument("config_path", metavar="CONFIG")
@click.option("--out-dir", default=".", show_default=True, help="Directory for result files.")
@click.option("--steps", type=int, default=None, help="Override grid.steps.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None,
              help="Write only this format (default: csv and json).")
def run_cmd(config_path, out_dir, steps, fmt):
    """Run every task of CONFIG."""
    config = _load(config_path)
    if steps is not None:
        try:
            config = config.with_steps(steps)
        except ValidationError as exc:
            _fail(EXIT_CONFIG, exc.kind, str(exc), violations=exc.violations)
    _execute(config, out_dir, (fmt,) if fmt else ("csv", "json"))


@main.command("verify")
@click.argument("config_path", metavar="CONFIG")
@click.option("--out-dir", default=".", show_default=True, help="Directory for result files.")
def verify_cmd(config_path, out_dir):
    """Run only the oracle_compare tasks of CONFIG."""
    config = _load(config_path)
    if not any(t.type == "oracle_compare" for t in config.tasks):
        _fail(EXIT_CONFIG, "validation", "config has no oracle_compare tasks",
              violations=["tasks: verify needs at least one oracle_compare task"])
    _execute(config, out_dir, ("csv", "json"), only=("oracle_compare",))


@main.group("zoo")
def zoo_group():
    """Inspect the built-in manifolds."""


@zoo_group.command("list")
def zoo_list():
    """List manifold names, their parameters and the curve kinds."""
    for name in MANIFOLDS:
        entry = make_chart(name)
        facts = ", ".join(sorted(entry.reference_facts))
        click.echo(f"{name}: dim {entry.chart.dim_domain} in R^{entry.chart.dim_ambient}; facts: {facts}")
    click.echo(f"curve kinds: {', '.join(CURVE_KINDS)}")


if __name__ == "__main__":
    main()
