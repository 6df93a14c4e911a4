"""Potential files, CSV tables and SVG figures.

Potential files are JSON documents::

    {"alphabet_size": 2, "range": 1, "dim": 2,
     "values": {"0": [1.0, 0.0], "1": [0.0, 1.0]}}

with one entry per base-``q`` digit string of length ``range``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .symbolic import PotentialTable, Word, digits_of

CSV_VERSION = "v1"


class PotentialFileError(ValueError):
    """Malformed potential document."""


def _word_key(code: int, q: int, r: int) -> str:
    return str(Word.from_code(code, q, r))


def potential_to_dict(table: PotentialTable) -> dict:
    return {
        "alphabet_size": table.q,
        "range": table.r,
        "dim": table.dim,
        "values": {
            _word_key(c, table.q, table.r): [float(x) for x in table.values[c]]
            for c in range(table.q**table.r)
        },
    }


def write_potential(path, table: PotentialTable) -> None:
    Path(path).write_text(json.dumps(potential_to_dict(table), indent=1) + "\n")


def parse_potential(text: str, source: str = "<string>") -> PotentialTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialFileError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise PotentialFileError(f"{source}: top level must be an object")
    for key in ("alphabet_size", "range", "dim", "values"):
        if key not in doc:
            raise PotentialFileError(f"{source}: missing field '{key}'")
    q, r, m = doc["alphabet_size"], doc["range"], doc["dim"]
    for key, val, low in (("alphabet_size", q, 2), ("range", r, 1), ("dim", m, 1)):
        if not isinstance(val, int) or isinstance(val, bool) or val < low:
            raise PotentialFileError(f"{source}: field '{key}' must be an integer >= {low}")
    if q > 10:
        raise PotentialFileError(f"{source}: digit-string words need alphabet_size <= 10")
    table = doc["values"]
    if not isinstance(table, dict):
        raise PotentialFileError(f"{source}: field 'values' must be an object")

    expected = ["".join(map(str, row)) for row in digits_of(np.arange(q**r), q, r).tolist()]
    missing = [w for w in expected if w not in table]
    if missing:
        shown = ", ".join(missing[:10]) + (" ..." if len(missing) > 10 else "")
        raise PotentialFileError(
            f"{source}: values table is missing {len(missing)} word(s): {shown}")
    extra = sorted(set(table) - set(expected))
    if extra:
        raise PotentialFileError(f"{source}: unexpected word(s) in values: {', '.join(extra[:10])}")
    values = np.empty((q**r, m))
    for code, word in enumerate(expected):
        vec = table[word]
        if not isinstance(vec, list):
            vec = [vec]
        if len(vec) != m or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                    for x in vec):
            raise PotentialFileError(f"{source}: values['{word}'] must be {m} number(s)")
        values[code] = vec
    if not np.isfinite(values).all():
        raise PotentialFileError(f"{source}: values must be finite")
    return PotentialTable(q, r, values)


def read_potential(path) -> PotentialTable:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise PotentialFileError(f"{path}: {exc.strerror}") from None
    return parse_potential(text, str(path))


def fmt(x) -> str:
    return format(float(x), ".17g")


def csv_header(kind: str, **meta) -> str:
    extras = " ".join(f"{k}={v}" for k, v in meta.items())
    return f"# rotground-{kind} {CSV_VERSION} {extras}".rstrip()


def polygon_csv(poly, labels=None) -> str:
    lines = [csv_header("rotset", degenerate=int(poly.degenerate), vertices=len(poly)),
             "index,label,x,y"]
    for k, (x, y) in enumerate(poly.vertices):
        label = labels[k] if labels else f"p{k}"
        lines.append(f"{k},{label},{fmt(x)},{fmt(y)}")
    return "\n".join(lines) + "\n"


def trace_csv(trace, distances) -> str:
    m = trace.rvs.shape[1]
    cols = ["t"] + [f"rv{k + 1}" for k in range(m)] + ["entropy", "pressure", "distance"]
    lines = [csv_header("anneal", dim=m, direction=";".join(fmt(a) for a in trace.direction)),
             ",".join(cols)]
    for entry, d in zip(trace.entries, distances):
        row = [entry.t, *entry.rv, entry.entropy, entry.pressure, d]
        lines.append(",".join(fmt(x) for x in row))
    return "\n".join(lines) + "\n"


class _Canvas:
    """Affine map from data coordinates to a square SVG viewport."""

    def __init__(self, points, size=480, pad=50):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = float(max((hi - lo).max(), 1e-12))
        self.lo, self.span, self.size, self.pad = lo, span, size, pad

    def __call__(self, p):
        inner = self.size - 2 * self.pad
        x = self.pad + (p[0] - self.lo[0]) / self.span * inner
        y = self.size - self.pad - (p[1] - self.lo[1]) / self.span * inner
        return f"{x:.3f}", f"{y:.3f}"


def _svg(body, size) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="10">\n'
            + "\n".join(body) + "\n</svg>\n")


def polygon_svg(poly, labels=None, overlay=None, path=None, size=480) -> str:
    """Polygon with labelled vertices; ``overlay`` maps labels to predicted
    points drawn as open circles; ``path`` is an optional polyline."""
    pts = [poly.vertices]
    if overlay:
        pts.append(np.array(list(overlay.values())))
    if path is not None and len(path):
        pts.append(np.asarray(path))
    canvas = _Canvas(np.vstack(pts), size)
    body = ['<rect width="100%" height="100%" fill="white"/>']
    ring = " ".join(",".join(canvas(p)) for p in poly.vertices)
    body.append(f'<polygon points="{ring}" fill="#dde8f5" stroke="#1f4e8c" stroke-width="1"/>')
    for k, p in enumerate(poly.vertices):
        x, y = canvas(p)
        body.append(f'<circle cx="{x}" cy="{y}" r="2.5" fill="#1f4e8c"/>')
        if labels:
            body.append(f'<text x="{x}" y="{y}" dx="4" dy="-4">{labels[k]}</text>')
    for name, p in (overlay or {}).items():
        x, y = canvas(p)
        body.append(f'<circle cx="{x}" cy="{y}" r="5" fill="none" stroke="#c0392b"/>')
    if path is not None and len(path):
        line = " ".join(",".join(canvas(p)) for p in path)
        body.append(f'<polyline points="{line}" fill="none" stroke="#c0392b" stroke-width="1.5"/>')
    return _svg(body, size)


def label_vertices(poly, named: dict, tol: float = 1e-9) -> list[str]:
    labels = []
    for k, v in enumerate(poly.vertices):
        hit = [name for name, p in named.items() if np.abs(np.asarray(p) - v).max() <= tol]
        labels.append(hit[0] if hit else f"p{k}")
    return labels
