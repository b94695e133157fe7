"""Static SVG debug view of one frame's NDC projection.

Draws the [-1,1] NDC square, every projected point, the detection box,
and highlights the points the box filter kept.  Output is built from
fixed-order elements with fixed two-decimal coordinates, so identical
inputs give byte-identical documents (they are committed as goldens).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .camera import NdcPoint
from .detection import NdcBox

__all__ = ["render_debug_svg"]

_CANVAS = 800
_MARGIN = 40
_SQUARE = _CANVAS - 2 * _MARGIN

_STYLE = (
    ".frame{fill:none;stroke:#444444;stroke-width:2}"
    ".box{fill:none;stroke:#d08020;stroke-width:2}"
    ".pt{fill:#4878a8;stroke:none}"
    ".pt.hit{fill:#c03838}"
    ".label{font:14px monospace;fill:#444444}"
)


def _sx(x: float) -> float:
    return _MARGIN + (x + 1.0) * 0.5 * _SQUARE


def _sy(y: float) -> float:
    return _MARGIN + (1.0 - y) * 0.5 * _SQUARE


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_debug_svg(
    frame_id: int,
    projected: Sequence[NdcPoint],
    box: NdcBox | None,
    filtered_indices: Iterable[int],
) -> str:
    """SVG document for one frame; `filtered_indices` match source_index."""
    hits = set(filtered_indices)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_CANVAS}" height="{_CANVAS}" '
        f'viewBox="0 0 {_CANVAS} {_CANVAS}">',
        f"<style>{_STYLE}</style>",
        f'<rect class="frame" x="{_MARGIN}" y="{_MARGIN}" width="{_SQUARE}" height="{_SQUARE}"/>',
    ]
    if box is not None:
        parts.append(
            f'<rect class="box" x="{_f(_sx(box.x_min))}" y="{_f(_sy(box.y_max))}" '
            f'width="{_f((box.x_max - box.x_min) * 0.5 * _SQUARE)}" '
            f'height="{_f((box.y_max - box.y_min) * 0.5 * _SQUARE)}"/>'
        )
    for p in projected:
        cls = "pt hit" if p.source_index in hits else "pt"
        r = 4 if p.source_index in hits else 3
        parts.append(
            f'<circle class="{cls}" cx="{_f(_sx(p.x))}" cy="{_f(_sy(p.y))}" r="{r}"/>'
        )
    parts.append(
        f'<text class="label" x="{_MARGIN}" y="{_MARGIN - 12}">'
        f"frame {frame_id}: {len(projected)} projected, {len(hits)} in box</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
