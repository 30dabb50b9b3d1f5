"""File formats: CSV point clouds, versioned JSON reports and SVG plots.

CSV clouds start with ``# key=value`` metadata lines, values JSON-encoded,
followed by one point per line as comma-separated ``repr`` floats.  Python's
``repr`` of a float is the shortest string that parses back to the same
double, so write/read round trips are bit-exact and locale independent.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .cloud import PointCloud

__all__ = [
    "SCHEMA_VERSION",
    "OUTPUT_DIR_ENV",
    "CloudFormatError",
    "format_cloud",
    "parse_cloud",
    "write_cloud",
    "read_cloud",
    "to_jsonable",
    "dumps_report",
    "write_report",
    "output_path",
    "cloud_svg",
    "loglog_svg",
]

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "UNIPERF_OUTPUT_DIR"


class CloudFormatError(ValueError):
    """Malformed cloud file; ``line`` is 1-based (0 for whole-file problems)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# ------------------------------------------------------------------------ json


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, enums and tuples to JSON types.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if hasattr(obj, "value") and hasattr(obj, "name"):
        return to_jsonable(obj.value)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps_report(report: dict) -> str:
    """Serialise a report with ``schema`` first and sorted keys (deterministic)."""
    body = {"schema": SCHEMA_VERSION}
    body.update(to_jsonable(report))
    return json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(path, report: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding="utf-8")
    return path


def output_path(explicit, default_name: str):
    """``explicit`` if given, else ``$UNIPERF_OUTPUT_DIR/default_name``, else ``None``."""
    if explicit:
        return Path(explicit)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return Path(base) / default_name
    return None


# ------------------------------------------------------------------------- csv


def format_cloud(cloud: PointCloud) -> str:
    lines = []
    for key in sorted(cloud.metadata):
        if "\n" in str(key) or "=" in str(key):
            raise ValueError(f"metadata key {key!r} cannot be written")
        lines.append(f"# {key}={json.dumps(to_jsonable(cloud.metadata[key]), sort_keys=True)}")
    for p in cloud.points:
        lines.append(",".join(repr(float(x)) for x in p))
    return "\n".join(lines) + "\n"


def parse_cloud(text: str) -> PointCloud:
    """Parse the CSV cloud format; raises :class:`CloudFormatError` with a line number."""
    meta: dict = {}
    rows = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if rows:
                raise CloudFormatError("metadata after the first point", lineno)
            body = line[1:].strip()
            if "=" not in body:
                raise CloudFormatError("metadata line needs key=value", lineno)
            key, value = body.split("=", 1)
            try:
                meta[key.strip()] = json.loads(value)
            except json.JSONDecodeError:
                meta[key.strip()] = value.strip()
            continue
        fields = line.split(",")
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise CloudFormatError(f"cannot parse coordinates {line!r}", lineno) from None
        if not all(math.isfinite(x) for x in row):
            raise CloudFormatError("non-finite coordinate", lineno)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CloudFormatError(f"expected {width} fields, found {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise CloudFormatError("file contains no points")
    try:
        return PointCloud(np.array(rows, float), meta)
    except ValueError as exc:
        raise CloudFormatError(str(exc)) from None


def write_cloud(path, cloud: PointCloud) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_cloud(cloud), encoding="utf-8")
    return path


def read_cloud(path) -> PointCloud:
    return parse_cloud(Path(path).read_text(encoding="utf-8"))


# ------------------------------------------------------------------------- svg

_SIZE = 480
_PAD = 40


def _num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _svg(body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">'
    )
    return "\n".join([head, f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>', *body, "</svg>"]) + "\n"


def cloud_svg(points, witnesses=(), title: str = "") -> str:
    """Cloud scatter with witness annuli; 3D clouds use the orthographic view onto the first two axes.

    ``witnesses`` are :class:`SeparationWitness` objects or their dicts.
    Only Euclidean annuli are drawn (chordal rings are not round in the view
    after projection of an unbounded outer radius).
    """
    pts = np.atleast_2d(np.asarray(points, float))[:, :2]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    scale = (_SIZE - 2 * _PAD) / span
    mid = (lo + hi) / 2

    def xy(p):
        return _SIZE / 2 + (p[0] - mid[0]) * scale, _SIZE / 2 - (p[1] - mid[1]) * scale

    body = []
    if title:
        body.append(f'<text x="{_PAD}" y="{_PAD // 2}" font-size="14" font-family="sans-serif">{escape(title)}</text>')
    dot = max(0.6, min(2.0, 200.0 / math.sqrt(len(pts))))
    for p in pts:
        x, y = xy(p)
        body.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(dot)}" fill="black"/>')
    for w in witnesses:
        d = w.to_dict() if hasattr(w, "to_dict") else w
        ring = d["ring"]
        if ring.get("metric", "euclidean") != "euclidean" or not math.isfinite(float(ring["outer"])):
            continue
        x, y = xy(np.asarray(ring["center"], float))
        for r, colour in ((ring["inner"], "#1f77b4"), (ring["outer"], "#d62728")):
            body.append(
                f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(float(r) * scale)}" '
                f'fill="none" stroke="{colour}" stroke-width="1"/>'
            )
    return _svg(body)


def loglog_svg(x, y, slope: float | None = None, intercept: float | None = None, title: str = "") -> str:
    """Scatter of ``(log x, log y)`` with an optional fitted line ``log y = slope log x + intercept``."""
    lx = np.log(np.asarray(x, float))
    ly = np.log(np.asarray(y, float))
    xlo, xhi = lx.min(), lx.max()
    ylo, yhi = ly.min(), ly.max()
    xs = (_SIZE - 2 * _PAD) / ((xhi - xlo) or 1.0)
    ys = (_SIZE - 2 * _PAD) / ((yhi - ylo) or 1.0)

    def xy(a, b):
        return _PAD + (a - xlo) * xs, _SIZE - _PAD - (b - ylo) * ys

    body = [
        f'<line x1="{_PAD}" y1="{_SIZE - _PAD}" x2="{_SIZE - _PAD}" y2="{_SIZE - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_SIZE - _PAD}" stroke="black"/>',
    ]
    if title:
        body.append(f'<text x="{_PAD}" y="{_PAD // 2}" font-size="14" font-family="sans-serif">{escape(title)}</text>')
    if slope is not None and intercept is not None:
        x1, y1 = xy(xlo, slope * xlo + intercept)
        x2, y2 = xy(xhi, slope * xhi + intercept)
        body.append(
            f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" stroke="#d62728"/>'
        )
    for a, b in zip(lx, ly):
        px, py = xy(a, b)
        body.append(f'<circle cx="{_num(px)}" cy="{_num(py)}" r="3" fill="#1f77b4"/>')
    return _svg(body)
