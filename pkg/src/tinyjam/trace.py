"""Paint-style trace images, layered reply composites, and density heatmaps.

Traces follow the screen convention of the data model: origin top-left,
y growing downward, coordinates scaled by the canvas size. Output is
8-bit RGBA; identical inputs produce byte-identical PNGs.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, ImageDraw

from .analytics import KdeGrid
from .gestures import segment
from .model import LayeredPerformance, TinyPerformance

__all__ = [
    "TRACE_VERSION",
    "PALETTE",
    "render_trace",
    "render_layered",
    "render_heatmap",
    "to_png_bytes",
    "write_png",
]

TRACE_VERSION = "1"

#: Eight distinguishable stroke hues, cycled in gesture order.
PALETTE = (
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (23, 190, 207),
)

_BACKGROUND = (255, 255, 255, 255)
_SINGLE_INK = (32, 32, 32)
_MIN_SIZE = 16
_OLD_LAYER_ALPHA = 153  # 60% opacity for everything below the newest layer


def _stroke_width(size: int) -> int:
    return max(1, round(size / 60))


def _to_pixels(x: float, y: float, size: int) -> tuple[float, float]:
    return (x * (size - 1), y * (size - 1))


def _draw_gestures(
    draw: ImageDraw.ImageDraw,
    perf: TinyPerformance,
    size: int,
    colors: Sequence[tuple[int, ...]],
) -> None:
    width = _stroke_width(size)
    radius = width / 2
    for k, gesture in enumerate(segment(perf)):
        color = colors[k % len(colors)]
        points = [_to_pixels(e.x, e.y, size) for e in gesture.events]
        if len(points) > 1:
            draw.line(points, fill=color, width=width, joint="curve")
        # round caps; a tap is just its own cap dot
        for px, py in (points[0], points[-1]):
            draw.ellipse((px - radius, py - radius, px + radius, py + radius), fill=color)


def render_trace(
    perf: TinyPerformance, size: int = 300, color_mode: str = "per-swipe"
) -> Image.Image:
    """Draw a performance: swipes as polylines with round joins, taps as dots.

    ``color_mode`` is "per-swipe" (cycle the palette per gesture) or
    "single" (one ink color). Raises ``ValueError`` for sizes below 16 px
    or an unknown color mode.
    """
    if size < _MIN_SIZE:
        raise ValueError(f"trace size must be at least {_MIN_SIZE} px")
    if color_mode not in ("per-swipe", "single"):
        raise ValueError(f"unknown color mode {color_mode!r}")
    image = Image.new("RGBA", (size, size), _BACKGROUND)
    draw = ImageDraw.Draw(image)
    colors = PALETTE if color_mode == "per-swipe" else (_SINGLE_INK,)
    _draw_gestures(draw, perf, size, colors)
    return image


def render_layered(
    layers: LayeredPerformance | Sequence[TinyPerformance], size: int = 300
) -> Image.Image:
    """Composite a reply chain oldest-first, one hue per layer.

    The newest layer is fully opaque; everything beneath it is drawn at
    60% alpha so the new material reads on top.
    """
    if not isinstance(layers, LayeredPerformance):
        layers = LayeredPerformance(tuple(layers))
    if size < _MIN_SIZE:
        raise ValueError(f"trace size must be at least {_MIN_SIZE} px")
    base = Image.new("RGBA", (size, size), _BACKGROUND)
    last = len(layers.layers) - 1
    for idx, layer in enumerate(layers.layers):
        overlay = Image.new("RGBA", (size, size), (0, 0, 0, 0))
        draw = ImageDraw.Draw(overlay)
        alpha = 255 if idx == last else _OLD_LAYER_ALPHA
        color = PALETTE[idx % len(PALETTE)] + (alpha,)
        _draw_gestures(draw, layer, size, (color,))
        base = Image.alpha_composite(base, overlay)
    return base


def render_heatmap(grid: KdeGrid, size: int = 300) -> Image.Image:
    """Grayscale density map: darker means denser; nearest-cell upsampling."""
    densities = np.asarray(grid.densities, dtype=float)
    peak = densities.max()
    norm = densities / peak if peak > 0 else np.zeros_like(densities)
    luminance = np.rint(255.0 * (1.0 - norm)).astype(np.uint8)
    res = grid.resolution
    cell_index = np.minimum((np.arange(size) * res) // size, res - 1)
    upsampled = luminance[np.ix_(cell_index, cell_index)]
    rgba = np.dstack(
        [upsampled, upsampled, upsampled, np.full_like(upsampled, 255)]
    )
    return Image.fromarray(rgba, "RGBA")


def to_png_bytes(image: Image.Image) -> bytes:
    out = io.BytesIO()
    image.save(out, format="PNG")
    return out.getvalue()


def write_png(image: Image.Image, path: str | Path) -> None:
    Path(path).write_bytes(to_png_bytes(image))
