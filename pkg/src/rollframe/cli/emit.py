"""Writers for result records: CSV, JSON and SVG.

Floats are written with ``repr`` so they round-trip exactly; nothing
time-dependent goes into any file, so identical runs give identical bytes.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from ..errors import RollframeError
from .runner import SCHEMA_VERSION, ResultRecord

log = logging.getLogger(__name__)

FORMATS = ("csv", "json", "svg")


class IoError(RollframeError):
    kind = "io"


def _num(x) -> str:
    return repr(float(x))


def csv_text(records, dims=None) -> str:
    if records:
        dims = records[0].dims
    header = ["s"]
    if dims is not None:
        n, nu = dims
        header += [f"coord_{i + 1}" for i in range(n)] + [f"ambient_{i + 1}" for i in range(nu)]
    lines = [",".join(header)]
    for rec in records:
        for s, c, a in zip(rec.s, rec.coords, rec.ambient):
            lines.append(",".join([_num(s), *map(_num, c), *map(_num, a)]))
    return "\n".join(lines) + "\n"


def _summary_value(v):
    return v if isinstance(v, bool) else float(v)


def json_text(records) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "records": {
            rec.task_id: {
                "type": rec.task_type,
                "schema_version": rec.schema_version,
                "summaries": {k: _summary_value(rec.summaries[k]) for k in sorted(rec.summaries)},
                "rows": {
                    "s": [float(x) for x in rec.s],
                    "coords": rec.coords.tolist(),
                    "ambient": rec.ambient.tolist(),
                },
            }
            for rec in records
        },
    }
    return json.dumps(doc, indent=1) + "\n"


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def svg_text(records, size: int = 480, margin: int = 24) -> str:
    """One polyline per record through its 2-D frame coordinates, plus the frame axes."""
    plotted = [r for r in records if r.coords.shape[1] == 2 and len(r.coords)]
    for r in records:
        if r not in plotted:
            log.warning("task %s: SVG needs 2-D frame coordinates; skipped", r.task_id)
    pts = np.concatenate([r.coords for r in plotted] + [np.zeros((1, 2))])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    scale = (size - 2 * margin) / span

    def xy(p):
        return (margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale)

    def fmt(v):
        return f"{v:.3f}"

    ox, oy = xy((0.0, 0.0))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line class="axis" x1="0" y1="{fmt(oy)}" x2="{size}" y2="{fmt(oy)}" stroke="#999" stroke-width="1"/>',
        f'<line class="axis" x1="{fmt(ox)}" y1="0" x2="{fmt(ox)}" y2="{size}" stroke="#999" stroke-width="1"/>',
    ]
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
    for i, rec in enumerate(plotted):
        path = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in map(xy, rec.coords))
        out.append(f'<polyline data-task="{rec.task_id}" fill="none" stroke="{palette[i % len(palette)]}" '
                   f'stroke-width="1.5" points="{path}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(records, fmt: str, path, dims=None) -> None:
    """Write ``records`` to ``path`` as csv, json or svg. Raises IoError on failure."""
    if fmt == "csv":
        text = csv_text(records, dims)
    elif fmt == "json":
        text = json_text(records)
    elif fmt == "svg":
        text = svg_text(records)
    else:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


__all__ = ["FORMATS", "IoError", "ResultRecord", "emit", "read_json"]
