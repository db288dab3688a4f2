"""Figure rendering for explanations.

Image explanations get two views: the original image with patches tinted by
sign and strength, and the pairwise weight matrix as a diverging heatmap.
Text explanations are rendered as HTML and ANSI with sign-colored word
highlights.  Green marks positive influence, red negative.
"""

from __future__ import annotations

import numpy as np

from .decompose import IMAGE, TEXT, ImageBuffer, SampleDecomposition
from .errors import ModalityMismatch
from .explain import RelationalExplanation, to_local

POSITIVE_RGB = np.array([0, 200, 0], dtype=np.float64)
NEGATIVE_RGB = np.array([220, 0, 0], dtype=np.float64)
DEFAULT_THRESHOLD = 0.2  # |e| below this fraction of max stays unhighlighted


def render_image_explanation(rel: RelationalExplanation,
                             decomp: SampleDecomposition,
                             threshold: float = DEFAULT_THRESHOLD,
                             cell_px: int = 24):
    """Return (overlay, heatmap) ImageBuffers for an image explanation."""
    if decomp.modality != IMAGE:
        raise ModalityMismatch("image rendering requires image modality")
    local = to_local(rel).values
    arr = decomp_image(decomp).to_array().astype(np.float64)
    ph, pw = decomp.patch_height, decomp.patch_width
    peak = float(np.abs(local).max())
    for e, value in zip(decomp.elements, local):
        strength = abs(value) / peak if peak > 0 else 0.0
        if strength < threshold:
            continue
        color = POSITIVE_RGB if value > 0 else NEGATIVE_RGB
        alpha = 0.55 * strength
        block = arr[e.row * ph:(e.row + 1) * ph, e.col * pw:(e.col + 1) * pw]
        block[:] = (1 - alpha) * block + alpha * color
    overlay = ImageBuffer.from_array(np.round(arr).astype(np.uint8))
    return overlay, render_heatmap(rel, cell_px=cell_px)


def render_heatmap(rel: RelationalExplanation, cell_px: int = 24) -> ImageBuffer:
    """Pairwise matrix as a diverging green/white/red image, n*cell_px square."""
    matrix = rel.matrix
    peak = float(np.abs(matrix).max())
    scale = matrix / peak if peak > 0 else np.zeros_like(matrix)
    white = np.array([255.0, 255.0, 255.0])
    cells = np.empty((rel.n, rel.n, 3), dtype=np.float64)
    for u in range(rel.n):
        for v in range(rel.n):
            s = scale[u, v]
            target = POSITIVE_RGB if s >= 0 else NEGATIVE_RGB
            cells[u, v] = white + abs(s) * (target - white)
    big = np.repeat(np.repeat(cells, cell_px, axis=0), cell_px, axis=1)
    return ImageBuffer.from_array(np.round(big).astype(np.uint8))


def decomp_image(decomp: SampleDecomposition) -> ImageBuffer:
    """Reconstruct the original image from its decomposition."""
    from .decompose import reassemble

    return reassemble(decomp, tuple(range(decomp.n)))


def render_text_explanation(rel: RelationalExplanation,
                            decomp: SampleDecomposition,
                            threshold: float = DEFAULT_THRESHOLD):
    """Return (html, ansi) highlighted renderings of a text explanation."""
    if decomp.modality != TEXT:
        raise ModalityMismatch("text rendering requires text modality")
    local = to_local(rel).values
    peak = float(np.abs(local).max())

    html_parts = []
    ansi_parts = []
    for e, value in zip(decomp.elements, local):
        strength = abs(value) / peak if peak > 0 else 0.0
        word = e.text
        if strength < threshold:
            html_parts.append(_escape(word))
            ansi_parts.append(word)
        elif value > 0:
            html_parts.append(
                f'<span style="background:rgba(0,200,0,{strength:.3f})">'
                f"{_escape(word)}</span>"
            )
            ansi_parts.append(f"\x1b[42;30m{word}\x1b[0m")
        else:
            html_parts.append(
                f'<span style="background:rgba(220,0,0,{strength:.3f})">'
                f"{_escape(word)}</span>"
            )
            ansi_parts.append(f"\x1b[41;30m{word}\x1b[0m")

    rows = []
    header = "<tr><th></th>" + "".join(
        f"<th>{_escape(e.text)}</th>" for e in decomp.elements
    ) + "</tr>"
    rows.append(header)
    for u, eu in enumerate(decomp.elements):
        cells = "".join(
            f"<td>{rel.matrix[u, v]:.6f}</td>" for v in range(rel.n)
        )
        rows.append(f"<tr><th>{_escape(eu.text)}</th>{cells}</tr>")
    html = (
        "<div class=\"rle-text\"><p>" + " ".join(html_parts) + "</p>"
        "<table class=\"rle-matrix\">" + "".join(rows) + "</table></div>"
    )
    return html, " ".join(ansi_parts)


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
