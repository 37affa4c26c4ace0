"""Minimal SVG 1.1 scatter and line charts; no plotting library involved."""
import math
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

THEME = {
    "width": 640,
    "height": 640,
    "margin": 40,
    "dot_radius": 3.0,
    "star_radius": 9.0,
    "ic_color": "#d3d3d3",
    "background": "#ffffff",
    "stroke": "#000000",
    "font_size": 12,
    "palette": ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"],
}


def color_for(index: int) -> str:
    if index < 0:
        return THEME["ic_color"]
    palette = THEME["palette"]
    return palette[index % len(palette)]


def _fit(xs: Sequence[float], ys: Sequence[float]):
    size, margin = THEME["width"], THEME["margin"]
    lo_x, hi_x = min(xs), max(xs)
    lo_y, hi_y = min(ys), max(ys)
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-12)
    scale = (size - 2 * margin) / span

    def project(x: float, y: float) -> Tuple[float, float]:
        return margin + (x - lo_x) * scale, THEME["height"] - margin - (y - lo_y) * scale

    return project


def _star(cx: float, cy: float, radius: float) -> str:
    pts = []
    for i in range(10):
        r = radius if i % 2 == 0 else radius * 0.45
        angle = math.pi / 2 + i * math.pi / 5
        pts.append(f"{cx + r * math.cos(angle):.2f},{cy - r * math.sin(angle):.2f}")
    return " ".join(pts)


def _document(body: List[str], title: Optional[str]) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{THEME["width"]}" height="{THEME["height"]}">',
        f'<rect width="100%" height="100%" fill="{THEME["background"]}"/>',
    ]
    if title:
        head.append(f'<text x="{THEME["margin"]}" y="{THEME["margin"] // 2}" '
                    f'font-size="{THEME["font_size"]}">{escape(title)}</text>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def scatter_svg(points: Sequence[Tuple[float, float]], colors: Sequence[int],
                stars: Sequence[Tuple[float, float, int]] = (), title: Optional[str] = None) -> str:
    """Dots colored by palette index (-1 is the light-gray background class) and starred centers."""
    xs = [p[0] for p in points] + [s[0] for s in stars]
    ys = [p[1] for p in points] + [s[1] for s in stars]
    project = _fit(xs, ys)
    body = []
    # background class first so colored dots stay on top
    order = sorted(range(len(points)), key=lambda i: colors[i] >= 0)
    for i in order:
        x, y = project(*points[i])
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{THEME["dot_radius"]}" fill="{color_for(colors[i])}"/>')
    for sx, sy, c in stars:
        x, y = project(sx, sy)
        body.append(f'<polygon points="{_star(x, y, THEME["star_radius"])}" fill="{color_for(c)}" '
                    f'stroke="{THEME["stroke"]}"/>')
    return _document(body, title)


def line_chart_svg(series: Dict[str, Sequence[Tuple[float, float]]], title: Optional[str] = None) -> str:
    """One polyline per named series over a shared axis box."""
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    if not xs:
        return _document([], title)
    project = _fit(xs, ys)
    body = []
    for i, (name, pts) in enumerate(series.items()):
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in (project(x, y) for x, y in pts))
        body.append(f'<polyline points="{coords}" fill="none" stroke="{color_for(i)}" stroke-width="2"/>')
        lx, ly = THEME["width"] - 3 * THEME["margin"], THEME["margin"] + (i + 1) * THEME["font_size"] * 1.5
        body.append(f'<text x="{lx}" y="{ly:.1f}" font-size="{THEME["font_size"]}" '
                    f'fill="{color_for(i)}">{escape(name)}</text>')
    return _document(body, title)
