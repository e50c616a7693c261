"""Serialisation of experiment datasets: CSV tables, a JSON envelope and
simple SVG plots. All writers are byte-deterministic for a given dataset."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

SPECTRUM_HEADER = ("k", "band", "quasienergy", "edge_weight")
FLUX_HEADER = ("kx", "ky", "flux")
CHERN_SWEEP_HEADER = ("omega", "c_plus", "c_minus", "c_tilde_plus", "c_tilde_minus", "c_bar_plus", "c_bar_minus")
ZAK_SWEEP_HEADER = ("omega", "gamma_plus", "gamma_minus", "gamma_tilde_plus", "gamma_tilde_minus")

DETERMINISM_NOTE = (
    "No random numbers are used; identical configuration and build give byte-identical output."
)


@dataclass
class Table:
    name: str
    header: tuple
    rows: list = field(default_factory=list)


@dataclass
class Dataset:
    experiment: str
    config: dict
    tables: list[Table] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    # optional plot hints: ("heatmap", table name) or ("scatter", table name)
    plots: list[tuple[str, str]] = field(default_factory=list)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(round(v, 12) + 0.0)
    return str(v)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def csv_text(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float):
        return None if math.isnan(v) else round(v, 12) + 0.0
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


def json_text(ds: Dataset) -> str:
    doc = {
        "experiment": ds.experiment,
        "version": __version__,
        "config_hash": config_hash(ds.config),
        "determinism": DETERMINISM_NOTE,
        "config": _jsonable(ds.config),
        "summary": _jsonable(ds.summary),
        "tables": {t.name: {"header": list(t.header), "rows": _jsonable(t.rows)} for t in ds.tables},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_json(text: str) -> dict:
    return json.loads(text)


# ------------------------------------------------------------------ SVG

def _color(v: float, vmax: float) -> str:
    """Diverging blue-white-red map."""
    x = 0.0 if vmax == 0 else max(-1.0, min(1.0, v / vmax))
    if x >= 0:
        r, g, b = 255, int(255 * (1 - x)), int(255 * (1 - x))
    else:
        r, g, b = int(255 * (1 + x)), int(255 * (1 + x)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_heatmap(table: Table, x: str, y: str, value: str, size: int = 400) -> str:
    ix, iy, iv = (table.header.index(c) for c in (x, y, value))
    xs = sorted({r[ix] for r in table.rows})
    ys = sorted({r[iy] for r in table.rows})
    vals = [r[iv] for r in table.rows if isinstance(r[iv], (int, float))]
    vmax = max((abs(v) for v in vals), default=0.0)
    cw, ch = size / max(len(xs), 1), size / max(len(ys), 1)
    px = {v: i for i, v in enumerate(xs)}
    py = {v: i for i, v in enumerate(ys)}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 60}" height="{size + 40}">',
        f'<text x="{size / 2:.1f}" y="{size + 30}" font-size="12">{x}</text>',
        f'<text x="{size + 8}" y="{size / 2:.1f}" font-size="12">{y}</text>',
    ]
    for r in table.rows:
        v = r[iv]
        if not isinstance(v, (int, float)):
            continue
        parts.append(
            f'<rect x="{px[r[ix]] * cw:.2f}" y="{(len(ys) - 1 - py[r[iy]]) * ch:.2f}" '
            f'width="{cw + 0.01:.2f}" height="{ch + 0.01:.2f}" fill="{_color(v, vmax)}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_scatter(table: Table, x: str, y: str, color: str | None = None, size: int = 400) -> str:
    ix, iy = table.header.index(x), table.header.index(y)
    ic = table.header.index(color) if color else None
    pts = [(r[ix], r[iy], r[ic] if ic is not None else 0.0) for r in table.rows]
    pts = [p for p in pts if isinstance(p[0], (int, float)) and isinstance(p[1], (int, float))]
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}"></svg>\n'
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    sx = size / (x1 - x0) if x1 > x0 else 1.0
    sy = size / (y1 - y0) if y1 > y0 else 1.0
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 20}" height="{size + 20}">']
    for px, py, c in pts:
        fill = _color(float(c) if isinstance(c, (int, float)) else 0.0, 1.0) if ic is not None else "#000000"
        parts.append(
            f'<circle cx="{10 + (px - x0) * sx:.2f}" cy="{10 + (y1 - py) * sy:.2f}" r="1.5" fill="{fill}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --------------------------------------------------------------- writing

def emit(ds: Dataset, formats, out_dir: str | Path) -> list[Path]:
    """Write the dataset in each requested format; returns the files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            for t in ds.tables:
                p = out / f"{ds.experiment}-{t.name}.csv"
                p.write_text(csv_text(t))
                written.append(p)
        elif fmt == "json":
            p = out / f"{ds.experiment}.json"
            p.write_text(json_text(ds))
            written.append(p)
        elif fmt == "svg":
            for kind, name in ds.plots:
                t = ds.table(name)
                if kind == "heatmap":
                    text = svg_heatmap(t, t.header[0], t.header[1], t.header[2])
                else:
                    color = "edge_weight" if "edge_weight" in t.header else None
                    text = svg_scatter(t, t.header[0], t.header[2], color)
                p = out / f"{ds.experiment}-{name}.svg"
                p.write_text(text)
                written.append(p)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    return written
