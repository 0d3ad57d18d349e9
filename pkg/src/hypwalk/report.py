"""CSV / SVG / JSON emitters and the run manifest written next to outputs."""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from .criterion import RegionTable
from .groups import BallCensus
from .walksim import BoundarySample


def dumps(obj: Any) -> str:
    """JSON with stable key order; non-finite floats become strings."""
    return json.dumps(_clean(obj), indent=2, sort_keys=False, ensure_ascii=False)


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def region_csv(table: RegionTable) -> str:
    return _csv(["n", "m", "margin", "verdict"],
                ((r.n, r.m, r.gap, str(r.verdict).lower()) for r in table.pairs))


def census_csv(census: BallCensus) -> str:
    return _csv(["R", "count", "log_count"], census.rows())


def histogram_csv(sample: BoundarySample) -> str:
    return _csv(["bin_center", "count"],
                zip((float(c) for c in sample.bin_centers), (int(h) for h in sample.histogram)))


def region_svg(table: RegionTable, title: str | None = None) -> str:
    """Dot grid: n across, m upward; pairs where the inequality holds in orange."""
    rows = table.pairs
    if not rows:
        return ('<svg xmlns="http://www.w3.org/2000/svg" width="200" height="60">'
                '<text x="10" y="30" font-size="12">empty range</text></svg>\n')
    ns = sorted({r.n for r in rows} | {p[0] for p in table.rejected})
    ms = sorted({r.m for r in rows} | {p[1] for p in table.rejected})
    cell, pad_l, pad_b, pad_t, pad_r = 14, 50, 60, 40, 170
    width = pad_l + cell * (ns[-1] - ns[0] + 1) + pad_r
    height = pad_t + cell * (ms[-1] - ms[0] + 1) + pad_b

    def xy(n, m):
        return (pad_l + cell * (n - ns[0]) + cell / 2,
                pad_t + cell * (ms[-1] - m) + cell / 2)

    title = title or f"{table.family.value} region"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{pad_l}" y="20" font-family="sans-serif" font-size="14">{title}</text>',
    ]
    for r in rows:
        x, y = xy(r.n, r.m)
        fill = "#f28e2b" if r.verdict else "#4e79a7"
        out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="4" fill="{fill}">'
                   f'<title>({r.n},{r.m}) margin={r.gap:.6g}</title></circle>')
    for n, m in table.rejected:
        x, y = xy(n, m)
        out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="4" fill="none" stroke="#999"/>')
    axis_y = pad_t + cell * (ms[-1] - ms[0] + 1) + 5
    for n in ns:
        if n % 5 == 0 or n == ns[0]:
            x, _ = xy(n, ms[0])
            out.append(f'<text x="{x:.1f}" y="{axis_y + 12}" font-size="9" text-anchor="middle">{n}</text>')
    for m in ms:
        if m % 5 == 0 or m == ms[0]:
            _, y = xy(ns[0], m)
            out.append(f'<text x="{pad_l - 8}" y="{y + 3:.1f}" font-size="9" text-anchor="end">{m}</text>')
    out.append(f'<text x="{(width - pad_r + pad_l) / 2:.0f}" y="{height - 12}" font-size="12" '
               f'text-anchor="middle">n</text>')
    out.append(f'<text x="14" y="{(height) / 2:.0f}" font-size="12">m</text>')
    lx = width - pad_r + 15
    legend = [("#f28e2b", "inequality holds"), ("#4e79a7", "exceptional"), (None, "not hyperbolic")]
    for i, (fill, label) in enumerate(legend):
        y = pad_t + 18 * i
        style = f'fill="{fill}"' if fill else 'fill="none" stroke="#999"'
        out.append(f'<circle cx="{lx}" cy="{y}" r="4" {style}/>')
        out.append(f'<text x="{lx + 10}" y="{y + 4}" font-size="11">{label}</text>')
    out.append(f'<text x="{lx}" y="{pad_t + 70}" font-size="10">axes: n horizontal, m vertical</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None = None
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc)
                           .replace(microsecond=0).isoformat())
    deterministic: bool = True

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "deterministic": self.deterministic,
        }

    def write(self, path: Path) -> None:
        path.write_text(dumps(self.to_dict()) + "\n", encoding="utf-8")


def manifest_path(output: Path) -> Path:
    return output.with_name(output.name + ".manifest.json")

