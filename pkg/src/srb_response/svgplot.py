"""Minimal self-contained SVG plots (no plotting dependency).

Each plot is paired with a plain-text data file so the numbers remain
inspectable without any renderer.
"""

from __future__ import annotations

import math

import numpy as np

WIDTH, HEIGHT = 760, 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 30, 50, 60

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(1, n - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out or [lo, hi]


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH/2}" y="28" text-anchor="middle" font-size="16">{_esc(title)}</text>',
            f'<text x="{WIDTH/2}" y="{HEIGHT-14}" text-anchor="middle" font-size="13">{_esc(xlabel)}</text>',
            f'<text x="20" y="{HEIGHT/2}" text-anchor="middle" font-size="13" '
            f'transform="rotate(-90 20 {HEIGHT/2})">{_esc(ylabel)}</text>',
        ]

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def save(self, path) -> None:
        self.parts.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(self.parts) + "\n")


def _mapper(lo, hi, pix_lo, pix_hi):
    span = hi - lo or 1.0

    def to_pix(v):
        return pix_lo + (v - lo) / span * (pix_hi - pix_lo)

    return to_pix


def line_plot(path, x, series, title="", xlabel="", ylabel="", logy=False) -> None:
    """Polyline-with-markers plot; ``series`` is a list of (label, y-array).

    With ``logy`` the ordinate is log10 of |y|, skipping zeros.
    """
    x = np.asarray(x, dtype=float)
    prepared = []
    for label, ys in series:
        ys = np.asarray(ys, dtype=float)
        if logy:
            with np.errstate(divide="ignore"):
                ys = np.where(ys != 0.0, np.log10(np.abs(ys)), np.nan)
        prepared.append((label, ys))
    finite = [ys[np.isfinite(ys)] for _, ys in prepared if np.isfinite(ys).any()]
    all_y = np.concatenate(finite) if finite else np.array([0.0, 1.0])
    ylo, yhi = float(all_y.min()), float(all_y.max())
    pad = 0.05 * (yhi - ylo or 1.0)
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = float(x.min()), float(x.max())

    cv = _Canvas(title, xlabel, ("log10 " if logy else "") + ylabel)
    px = _mapper(xlo, xhi, MARGIN_L, WIDTH - MARGIN_R)
    py = _mapper(ylo, yhi, HEIGHT - MARGIN_B, MARGIN_T)
    cv.add(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH-MARGIN_L-MARGIN_R}" '
        f'height="{HEIGHT-MARGIN_T-MARGIN_B}" fill="none" stroke="#444"/>'
    )
    for tick in _ticks(xlo, xhi):
        cv.add(
            f'<line x1="{px(tick):.1f}" y1="{HEIGHT-MARGIN_B}" x2="{px(tick):.1f}" '
            f'y2="{HEIGHT-MARGIN_B+5}" stroke="#444"/>'
            f'<text x="{px(tick):.1f}" y="{HEIGHT-MARGIN_B+20}" text-anchor="middle" '
            f'font-size="11">{tick:g}</text>'
        )
    for tick in _ticks(ylo, yhi):
        cv.add(
            f'<line x1="{MARGIN_L-5}" y1="{py(tick):.1f}" x2="{MARGIN_L}" y2="{py(tick):.1f}" stroke="#444"/>'
            f'<text x="{MARGIN_L-9}" y="{py(tick):.1f}" text-anchor="end" font-size="11" '
            f'dominant-baseline="middle">{tick:g}</text>'
        )
    for idx, (label, ys) in enumerate(prepared):
        color = PALETTE[idx % len(PALETTE)]
        pts = [
            f"{px(xv):.1f},{py(yv):.1f}"
            for xv, yv in zip(x, ys)
            if np.isfinite(yv)
        ]
        if len(pts) > 1:
            cv.add(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for p in pts:
            cx, cy = p.split(",")
            cv.add(f'<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>')
        cv.add(
            f'<rect x="{WIDTH-MARGIN_R-170}" y="{MARGIN_T+8+18*idx}" width="12" height="12" fill="{color}"/>'
            f'<text x="{WIDTH-MARGIN_R-152}" y="{MARGIN_T+18+18*idx}" font-size="12">{_esc(label)}</text>'
        )
    cv.save(path)


def _color_of(v: float) -> str:
    """Small blue-white-red diverging map on [0, 2] centered at 1."""
    v = min(2.0, max(0.0, v))
    if v < 1.0:
        f = v
        r, g, b = int(40 + 215 * f), int(80 + 175 * f), 255
    else:
        f = v - 1.0
        r, g, b = 255, int(255 - 175 * f), int(255 - 215 * f)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(path, matrix, title="", xlabel="x", ylabel="y") -> None:
    """Cell heatmap of a (n, n) matrix on the unit square (values near 1 are white)."""
    mat = np.asarray(matrix, dtype=float)
    n = mat.shape[0]
    size = (WIDTH - MARGIN_L - MARGIN_R) / n
    vsize = (HEIGHT - MARGIN_T - MARGIN_B) / n
    cv = _Canvas(title, xlabel, ylabel)
    for i in range(n):
        xpix = MARGIN_L + i * size
        for j in range(n):
            ypix = HEIGHT - MARGIN_B - (j + 1) * vsize
            cv.add(
                f'<rect x="{xpix:.2f}" y="{ypix:.2f}" width="{size+0.5:.2f}" '
                f'height="{vsize+0.5:.2f}" fill="{_color_of(mat[i, j])}"/>'
            )
    cv.add(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH-MARGIN_L-MARGIN_R}" '
        f'height="{HEIGHT-MARGIN_T-MARGIN_B}" fill="none" stroke="#444"/>'
    )
    cv.save(path)


def write_columns(path, header: list[str], columns) -> None:
    """Whitespace-separated plain-text data file with a one-line header."""
    arrays = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in zip(*arrays):
            fh.write(" ".join(f"{v!r}" if isinstance(v, str) else f"{float(v):.17g}" for v in row) + "\n")


def write_matrix(path, matrix, comment: str = "") -> None:
    mat = np.asarray(matrix, dtype=float)
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for row in mat:
            fh.write(" ".join(f"{v:.8g}" for v in row) + "\n")
