"""CSV/JSON persistence and dependency-free SVG scatter plots.

Results CSVs start with ``# key: value`` provenance comment lines followed by
a header row ``pair_index,p,n,iteration,z``. Floats are written with 17
significant digits so they read back exactly. All writes go through a temp
file and ``os.replace``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .distance import DataMatrix
from .errors import DataValidationError, FormatError, ParameterError

SCHEMA_VERSION = 1
RESULT_COLUMNS = ("pair_index", "p", "n", "iteration", "z")

SVG_WIDTH = 700
SVG_HEIGHT = 600


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_matrix_csv(path) -> DataMatrix:
    """One sample point per line; an optional non-numeric first line is a header."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [(k, row) for k, row in enumerate(csv.reader(fh), start=1) if row and any(c.strip() for c in row)]
    if lines and not all(_is_number(c) for c in lines[0][1]):
        lines = lines[1:]
    if not lines:
        raise FormatError(f"{path}: no data rows")
    width = len(lines[0][1])
    data = []
    for r, (line, row) in enumerate(lines, start=1):
        if len(row) != width:
            raise FormatError(f"{path}: row {r} (line {line}) has {len(row)} fields, expected {width}")
        vals = []
        for c, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise FormatError(f"{path}: row {r}, column {c}: not a number: {cell.strip()!r}") from None
            if not math.isfinite(v):
                raise DataValidationError(f"{path}: non-finite value at row {r}, column {c}")
            vals.append(v)
        data.append(vals)
    return DataMatrix(np.array(data))


def _provenance_lines(provenance: dict) -> str:
    out = [f"# schema_version: {SCHEMA_VERSION}"]
    for k, v in provenance.items():
        out.append(f"# {k}: {json.dumps(v, sort_keys=True)}")
    return "\n".join(out) + "\n"


def results_csv_text(result, pair_indices=None) -> str:
    buf = io.StringIO()
    buf.write(_provenance_lines(result.provenance))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in result.pairs:
        if pair_indices is not None and r.pair_index not in pair_indices:
            continue
        for k, z in enumerate(r.z):
            w.writerow((r.pair_index, r.p, r.n, k, fmt(z)))
    return buf.getvalue()


def write_results_csv(result, path, pair_indices=None) -> Path:
    return atomic_write(path, results_csv_text(result, pair_indices))


def read_results_csv(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Return ``(provenance, columns)`` from a results CSV."""
    provenance = {}
    body = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(": ")
                provenance[key] = json.loads(val) if val else None
            elif line.strip():
                body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise FormatError(f"{path}: empty results file")
    header = rows[0]
    if tuple(header) != RESULT_COLUMNS:
        raise FormatError(f"{path}: expected columns {','.join(RESULT_COLUMNS)}, got {','.join(header)}")
    for k, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise FormatError(f"{path}: row {k} has {len(row)} fields, expected {len(header)}")
    cols = {}
    for c, name in enumerate(header):
        dtype = np.float64 if name == "z" else np.int64
        cols[name] = np.array([row[c] for row in rows[1:]], dtype=dtype)
    return provenance, cols


def summary_json_text(result) -> str:
    doc = result.summary_dict()
    doc["schema_version"] = SCHEMA_VERSION
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_summary_json(result, path) -> Path:
    return atomic_write(path, summary_json_text(result))


# ------------------------------------------------------------------ SVG


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    start = math.ceil(lo / step - 1e-9)
    out = []
    k = start
    while k * step <= hi + 1e-9 * step:
        out.append(k * step)
        k += 1
    return out


def _num(x: float) -> str:
    return f"{x:.2f}"


def _tick_label(x: float) -> str:
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _panel(values, reference: float, title: str | None, xlabel: str, ylabel: str) -> list[str]:
    vals = [float(v) for v in values]
    if not vals:
        raise ParameterError("scatter plot needs at least one value")
    left, right, top, bottom = 70.0, 20.0, 40.0, 60.0
    pw, ph = SVG_WIDTH - left - right, SVG_HEIGHT - top - bottom
    ylo = min(min(vals), reference)
    yhi = max(max(vals), reference)
    pad = 0.1 * (yhi - ylo) if yhi > ylo else 1.0
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = 0.0, float(len(vals) + 1)

    def sx(x):
        return left + (x - xlo) / (xhi - xlo) * pw

    def sy(y):
        return top + (yhi - y) / (yhi - ylo) * ph

    out = [f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{_num(left + pw / 2)}" y="24" text-anchor="middle" font-size="16">{_escape(title)}</text>')
    x0, y0, x1, y1 = sx(xlo), sy(ylo), sx(xhi), sy(yhi)
    out.append(f'<path class="axes" d="M{_num(x0)},{_num(y1)} V{_num(y0)} H{_num(x1)}" stroke="black" fill="none"/>')
    ticks = []
    for t in _ticks(ylo, yhi):
        y = sy(t)
        ticks.append(f"M{_num(x0 - 5)},{_num(y)} H{_num(x0)}")
        out.append(f'<text x="{_num(x0 - 8)}" y="{_num(y + 4)}" text-anchor="end" font-size="12">{_tick_label(t)}</text>')
    for t in _ticks(xlo, xhi):
        x = sx(t)
        ticks.append(f"M{_num(x)},{_num(y0)} V{_num(y0 + 5)}")
        out.append(f'<text x="{_num(x)}" y="{_num(y0 + 20)}" text-anchor="middle" font-size="12">{_tick_label(t)}</text>')
    out.append(f'<path class="ticks" d="{" ".join(ticks)}" stroke="black" fill="none"/>')
    out.append(
        f'<text x="{_num(left + pw / 2)}" y="{_num(SVG_HEIGHT - 15)}" text-anchor="middle" font-size="14">{_escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="18" y="{_num(top + ph / 2)}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {_num(top + ph / 2)})">{_escape(ylabel)}</text>'
    )
    out.append('<g class="points" fill="steelblue">')
    for k, v in enumerate(vals, start=1):
        out.append(f'<circle cx="{_num(sx(k))}" cy="{_num(sy(v))}" r="2.5"/>')
    out.append("</g>")
    out.append(
        f'<line class="reference" x1="{_num(x0)}" y1="{_num(sy(reference))}" x2="{_num(x1)}" '
        f'y2="{_num(sy(reference))}" stroke="red" stroke-width="1.5" data-value="{fmt(reference)}"/>'
    )
    return out


def scatter_svg_text(
    panels,
    provenance: dict | None = None,
    xlabel: str = "iteration",
    ylabel: str = "z",
) -> str:
    """SVG with one 700x600 panel per ``(values, reference, title)`` laid side by side."""
    panels = list(panels)
    width = SVG_WIDTH * len(panels)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {width} {SVG_HEIGHT}">',
    ]
    if provenance:
        out.append(f"<metadata>{_escape(json.dumps(provenance, sort_keys=True))}</metadata>")
    for k, (values, reference, title) in enumerate(panels):
        out.append(f'<g transform="translate({k * SVG_WIDTH},0)">')
        out.extend(_panel(values, reference, title, xlabel, ylabel))
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_scatter_svg(values, reference: float, path, title: str | None = None, provenance: dict | None = None) -> Path:
    """Scatter of ``values`` against iteration index with a horizontal line at ``reference``."""
    return atomic_write(path, scatter_svg_text([(values, reference, title)], provenance))
