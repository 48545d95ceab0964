"""Deterministic CSV/SVG writers and content hashing for emitted files."""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path
from typing import Iterable, Sequence


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (bool,)):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.12e}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_svg_lines(path: Path, x, series: dict, title: str = "", width=640, height=400) -> Path:
    """Minimal line plot; one polyline per named series, y axis fixed to [0, 1]."""
    colors = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"]
    pad = 40
    x0, x1 = float(min(x)), float(max(x))
    span = (x1 - x0) or 1.0

    def px(v):
        return pad + (float(v) - x0) / span * (width - 2 * pad)

    def py(v):
        v = min(max(float(v), 0.0), 1.0)
        return height - pad - v * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="{pad / 2}" text-anchor="middle">{title}</text>',
    ]
    for k, (name, y) in enumerate(series.items()):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = colors[k % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{color}" points="{pts}"/>')
        parts.append(
            f'<text x="{width - pad}" y="{pad + 15 * (k + 1)}" text-anchor="end" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path
