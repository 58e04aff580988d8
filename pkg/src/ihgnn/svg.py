"""Minimal standalone SVG charts written with plain string formatting.

Every numeric attribute is emitted with ``repr``-style precision so that
tests can parse the geometry back and compare it with the data.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

WIDTH = 480
HEIGHT = 320
MARGIN = 40


def _fmt(x):
    return f"{float(x):.6g}"


def _document(body, title):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f"<title>{escape(title)}</title>\n"
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white" class="background"/>\n'
        + "".join(line + "\n" for line in body)
        + "</svg>\n"
    )


def _axes(xlabel, ylabel):
    x0, y0 = MARGIN, HEIGHT - MARGIN
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{WIDTH - MARGIN}" y2="{y0}" stroke="black" class="axis"/>',
        f'<line x1="{x0}" y1="{MARGIN}" x2="{x0}" y2="{y0}" stroke="black" class="axis"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 8}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="12" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]


def bar_chart(bins, title="histogram", xlabel="homophily ratio", ylabel="nodes"):
    """Bars for ``(low, high, count)`` triples; returns the SVG text.

    Each bar is a ``rect`` with class ``bar`` carrying ``data-low``,
    ``data-high`` and ``data-count`` attributes.
    """
    bins = [(float(lo), float(hi), int(c)) for lo, hi, c in bins]
    plot_w = WIDTH - 2 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN
    top = max((c for _, _, c in bins), default=0) or 1
    body = _axes(xlabel, ylabel)
    n = max(len(bins), 1)
    bar_w = plot_w / n
    for i, (lo, hi, c) in enumerate(bins):
        h = plot_h * c / top
        x = MARGIN + i * bar_w
        y = HEIGHT - MARGIN - h
        body.append(
            f'<rect class="bar" x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" height="{_fmt(h)}" '
            f'fill="steelblue" stroke="white" data-low="{lo!r}" data-high="{hi!r}" data-count="{c}"/>'
        )
    return _document(body, title)


def line_chart(xs, means, stds, title="layer sweep", xlabel="layers", ylabel="accuracy"):
    """A polyline of ``means`` over ``xs`` with vertical ``±std`` error bars.

    Each point is a ``circle`` with class ``point`` carrying ``data-x``,
    ``data-mean`` and ``data-std``.
    """
    xs = [float(x) for x in xs]
    means = [float(m) for m in means]
    stds = [float(s) for s in stds]
    if not (len(xs) == len(means) == len(stds)):
        raise ValueError("xs, means and stds must have equal length")
    plot_w = WIDTH - 2 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN
    lo_x, hi_x = (min(xs), max(xs)) if xs else (0.0, 1.0)
    span_x = (hi_x - lo_x) or 1.0

    def px(x):
        return MARGIN + plot_w * (x - lo_x) / span_x

    def py(y):
        # accuracies live in [0, 1]
        return HEIGHT - MARGIN - plot_h * min(max(y, 0.0), 1.0)

    body = _axes(xlabel, ylabel)
    pts = " ".join(f"{_fmt(px(x))},{_fmt(py(m))}" for x, m in zip(xs, means))
    body.append(f'<polyline class="curve" points="{pts}" fill="none" stroke="steelblue"/>')
    for x, m, s in zip(xs, means, stds):
        body.append(
            f'<line class="errorbar" x1="{_fmt(px(x))}" y1="{_fmt(py(m - s))}" '
            f'x2="{_fmt(px(x))}" y2="{_fmt(py(m + s))}" stroke="gray"/>'
        )
        body.append(
            f'<circle class="point" cx="{_fmt(px(x))}" cy="{_fmt(py(m))}" r="3" fill="steelblue" '
            f'data-x="{x!r}" data-mean="{m!r}" data-std="{s!r}"/>'
        )
    return _document(body, title)


def write_svg(text, path):
    Path(path).write_text(text)
    return Path(path)
