"""Deterministic SVG figures of amoebas, clouds and complexes."""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .amoeba import AmoebaRaster
from .moment import PointCloud
from .polyhedral import PolyhedralComplex


@dataclass(frozen=True)
class Style:
    width: int = 420
    height: int = 420
    margin: int = 20
    background: str = "#ffffff"
    cloud_color: str = "#1f4e9c"
    cloud_size: float = 1.2
    raster_color: str = "#1f4e9c"
    complex_fill: str = "#9ecae1"
    complex_stroke: str = "#08306b"
    outline_color: str = "#444444"
    lattice_color: str = "#d62728"
    lattice_radius: float = 3.5


@dataclass(frozen=True)
class CloudLayer:
    cloud: PointCloud

    @property
    def ambient(self):
        return self.cloud.ambient

    def bounds(self):
        P = self.cloud.points
        return (P.min(axis=0), P.max(axis=0)) if len(P) else None


@dataclass(frozen=True)
class RasterLayer:
    raster: AmoebaRaster
    ambient: str = "log"

    def bounds(self):
        w = self.raster.window
        return np.array([w.x0, w.y0]), np.array([w.x1, w.y1])


@dataclass(frozen=True)
class ComplexLayer:
    complex: PolyhedralComplex
    ambient: str = "polytope"

    def bounds(self):
        V = np.asarray(self.complex.vertex_set(), dtype=float)
        return (V.min(axis=0), V.max(axis=0)) if len(V) else None


@dataclass(frozen=True)
class OutlineLayer:
    """Closed polygon through ``vertices`` (e.g. a Newton polygon)."""

    vertices: tuple
    ambient: str = "polytope"

    def bounds(self):
        V = np.asarray(self.vertices, dtype=float)
        return V.min(axis=0), V.max(axis=0)


@dataclass(frozen=True)
class LatticeLayer:
    points: tuple
    labels: bool = True
    ambient: str = "polytope"

    def bounds(self):
        V = np.asarray(self.points, dtype=float)
        return (V.min(axis=0), V.max(axis=0)) if len(V) else None


def _num(v):
    text = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


@dataclass
class _Viewport:
    lo: np.ndarray
    scale: float
    offset: np.ndarray
    height: int

    def map(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        x = self.offset[0] + (P[:, 0] - self.lo[0]) * self.scale
        y = self.height - (self.offset[1] + (P[:, 1] - self.lo[1]) * self.scale)
        return np.column_stack([x, y])


def _viewport(layers, style):
    boxes = [b for b in (layer.bounds() for layer in layers) if b is not None]
    if boxes:
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
    else:
        lo, hi = np.zeros(2), np.ones(2)
    span = np.maximum(hi - lo, 1e-9)
    inner = np.array([style.width, style.height], dtype=float) - 2 * style.margin
    scale = float(min(inner / span))
    offset = style.margin + (inner - span * scale) / 2
    return _Viewport(lo, scale, offset, style.height)


def _layer_elements(layer, vp, style):
    if isinstance(layer, CloudLayer):
        if not len(layer.cloud):
            return []
        Q = vp.map(layer.cloud.points)
        s = style.cloud_size
        # one path of small squares; duplicates at the output precision merge
        keys = sorted({(_num(x - s / 2), _num(y - s / 2)) for x, y in Q})
        d = "".join(f"M{x} {y}h{_num(s)}v{_num(s)}h-{_num(s)}z" for x, y in keys)
        return [f'<path class="cloud" fill="{style.cloud_color}" d="{d}"/>']
    if isinstance(layer, RasterLayer):
        R = layer.raster
        hx, hy = R.cell_size
        w = R.window
        parts = []
        for iy, row in enumerate(R.occupancy):
            padded = np.concatenate([[False], row, [False]]).astype(np.int8)
            edges = np.flatnonzero(np.diff(padded))
            for a, b in zip(edges[::2], edges[1::2]):
                p0 = vp.map([w.x0 + a * hx, w.y0 + (iy + 1) * hy])[0]
                p1 = vp.map([w.x0 + b * hx, w.y0 + iy * hy])[0]
                parts.append(f"M{_num(p0[0])} {_num(p0[1])}H{_num(p1[0])}V{_num(p1[1])}H{_num(p0[0])}z")
        if not parts:
            return []
        return [f'<path class="amoeba" fill="{style.raster_color}" d="{"".join(parts)}"/>']
    if isinstance(layer, ComplexLayer):
        out = []
        for cell in layer.complex.cells:
            Q = vp.map(cell.vertices)
            d = "M" + "L".join(f"{_num(x)} {_num(y)}" for x, y in Q) + "z"
            out.append(
                f'<path class="cell" fill="{style.complex_fill}" stroke="{style.complex_stroke}" '
                f'stroke-width="1" d="{d}"/>'
            )
        return out
    if isinstance(layer, OutlineLayer):
        Q = vp.map(layer.vertices)
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in Q)
        return [f'<polygon class="outline" fill="none" stroke="{style.outline_color}" stroke-width="1" points="{pts}"/>']
    if isinstance(layer, LatticeLayer):
        out = []
        for p, (x, y) in zip(layer.points, vp.map(layer.points) if layer.points else []):
            label = escape("(" + ",".join(str(v) for v in p) + ")")
            title = f"<title>{label}</title>" if layer.labels else ""
            out.append(
                f'<circle class="lattice" cx="{_num(x)}" cy="{_num(y)}" r="{_num(style.lattice_radius)}" '
                f'fill="{style.lattice_color}">{title}</circle>'
            )
        return out
    raise TypeError(f"unknown layer type {type(layer).__name__}")


def _check_ambient(layers):
    kinds = {layer.ambient for layer in layers}
    if len(kinds) > 1:
        raise ValueError(f"layers mix ambient spaces: {sorted(kinds)}")


def _panel_body(layers, style):
    _check_ambient(layers)
    vp = _viewport(layers, style)
    body = [f'<rect class="canvas" x="0" y="0" width="{style.width}" height="{style.height}" fill="{style.background}"/>']
    for layer in layers:
        body.extend(_layer_elements(layer, vp, style))
    return body


def render_svg(layers, style=Style()):
    """SVG text for layers drawn in order over a background canvas.

    The viewport fits the union of the layer bounds with equal axis scales
    and ``y`` pointing up. Output is byte-identical for identical input.
    """
    body = _panel_body(list(layers), style)
    return _document(style.width, style.height, body)


def render_panels(panels, style=Style(), titles=None):
    """Side-by-side panels, each a list of layers with its own viewport
    (panels may use different ambient spaces)."""
    panels = [list(p) for p in panels]
    title_h = 18 if titles else 0
    body = []
    for k, layers in enumerate(panels):
        inner = _panel_body(layers, style)
        body.append(f'<g class="panel" transform="translate({k * style.width},{title_h})">')
        body.extend("  " + e for e in inner)
        body.append("</g>")
        if titles:
            x = k * style.width + style.width / 2
            body.append(f'<text x="{_num(x)}" y="13" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(titles[k])}</text>')
    return _document(style.width * max(len(panels), 1), style.height + title_h, body)


def _document(width, height, body):
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, *("  " + e for e in body), "</svg>"]) + "\n"
