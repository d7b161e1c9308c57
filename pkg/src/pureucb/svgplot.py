"""Self-contained, deterministic SVG charts from result tables.

Three kinds:
  pcs   - selection-probability curves vs log2(k), one polyline per
          algorithm (input: results CSV rows for one configuration);
  hist  - grouped bars over power-of-two count bins, one group color per
          algorithm (input: histogram CSV rows);
  alloc - sampling-path scatter, round vs sampled arm (input: trace CSV).

No plotting dependency; byte-identical output for identical input.
"""

import math

from .errors import SchemaMismatch

_W, _H = 720, 440
_ML, _MR, _MT, _MB = 70, 30, 30, 60
_PALETTE = ("#1f6fb4", "#d95f02", "#2a9d5c", "#c02d45", "#7b5bb5",
            "#8c7a1c", "#4b8f8c", "#99582a")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


class _Canvas:
    def __init__(self, title):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2:g}" y="18" text-anchor="middle" font-size="14">'
            f"{_esc(title)}</text>",
        ]

    def line(self, x1, y1, x2, y2, color="#444", width=1.0):
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{_fmt(width)}"/>'
        )

    def text(self, x, y, s, anchor="middle", size=12, color="#222"):
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
            f'font-size="{size}" fill="{color}">{_esc(s)}</text>'
        )

    def polyline(self, pts, color):
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.8"/>'
        )

    def circle(self, x, y, r, color):
        self.parts.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{color}"/>'
        )

    def rect(self, x, y, w, h, color):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
            f'height="{_fmt(h)}" fill="{color}"/>'
        )

    def finish(self) -> str:
        self.parts.append("</svg>")
        return "\n".join(self.parts) + "\n"


def _axes(cv, x_lo, x_hi, y_lo, y_hi, x_label, y_label, x_ticks, y_ticks,
          x_tick_fmt=lambda v: _fmt(v)):
    if x_hi <= x_lo:  # degenerate input: pad a unit around the single value
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi <= y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def sx(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    cv.line(_ML, _H - _MB, _W - _MR, _H - _MB)
    cv.line(_ML, _MT, _ML, _H - _MB)
    for t in x_ticks:
        if x_lo <= t <= x_hi:
            cv.line(sx(t), _H - _MB, sx(t), _H - _MB + 4)
            cv.text(sx(t), _H - _MB + 18, x_tick_fmt(t))
    for t in y_ticks:
        if y_lo <= t <= y_hi:
            cv.line(_ML - 4, sy(t), _ML, sy(t))
            cv.text(_ML - 8, sy(t) + 4, _fmt(t), anchor="end")
    cv.text((_ML + _W - _MR) / 2, _H - 14, x_label)
    cv.text(16, (_MT + _H - _MB) / 2, y_label, anchor="middle")
    return sx, sy


def _legend(cv, names):
    x = _ML + 10
    y = _MT + 8
    for i, name in enumerate(names):
        cv.rect(x, y + 16 * i - 8, 14, 4, _PALETTE[i % len(_PALETTE)])
        cv.text(x + 20, y + 16 * i, name, anchor="start")


def emit_pcs_svg(rows, title="PCS vs number of alternatives") -> str:
    """Curves of pcs against log2(k); one series per algorithm.

    `rows` are dicts with at least algorithm, k, pcs (results CSV schema).
    """
    if not rows:
        raise SchemaMismatch("no data rows")
    try:
        series = {}
        for r in rows:
            series.setdefault(r["algorithm"], []).append(
                (math.log2(int(r["k"])), float(r["pcs"])))
    except (KeyError, ValueError) as exc:
        raise SchemaMismatch(f"bad results row: {exc}") from exc
    names = sorted(series)
    xs = [x for pts in series.values() for x, _ in pts]
    cv = _Canvas(title)
    sx, sy = _axes(cv, min(xs), max(xs), 0.0, 1.0, "log2(k)", "PCS",
                   x_ticks=sorted({round(x) for x in xs}),
                   y_ticks=[0.0, 0.25, 0.5, 0.75, 1.0],
                   x_tick_fmt=lambda v: f"{v:g}")
    for i, name in enumerate(names):
        pts = sorted(series[name])
        color = _PALETTE[i % len(_PALETTE)]
        if len(pts) == 1:
            cv.circle(sx(pts[0][0]), sy(pts[0][1]), 3.5, color)
        else:
            cv.polyline([(sx(x), sy(y)) for x, y in pts], color)
            for x, y in pts:
                cv.circle(sx(x), sy(y), 2.5, color)
    _legend(cv, names)
    return cv.finish()


def emit_hist_svg(rows, title="Final counts of inferior alternatives") -> str:
    """Grouped bars over count bins; rows carry algorithm,bin_lo,bin_hi,count."""
    if not rows:
        raise SchemaMismatch("no data rows")
    try:
        series = {}
        bins = []
        for r in rows:
            key = (int(r["bin_lo"]), int(r["bin_hi"]))
            if key not in bins:
                bins.append(key)
            series.setdefault(r["algorithm"], {})[key] = int(r["count"])
    except (KeyError, ValueError) as exc:
        raise SchemaMismatch(f"bad histogram row: {exc}") from exc
    bins.sort()
    names = sorted(series)
    top = max(max(d.values()) for d in series.values())
    cv = _Canvas(title)
    n_ticks = 5
    y_ticks = [round(top * i / n_ticks) for i in range(n_ticks + 1)]
    sx, sy = _axes(cv, 0, len(bins), 0, top, "final count (bin lower edge)",
                   "arms", x_ticks=list(range(len(bins))), y_ticks=y_ticks,
                   x_tick_fmt=lambda v: str(bins[int(v)][0]) if v == int(v) and int(v) < len(bins) else "")
    group_w = (sx(1) - sx(0)) * 0.9
    bar_w = group_w / max(1, len(names))
    for i, name in enumerate(names):
        color = _PALETTE[i % len(_PALETTE)]
        for b, key in enumerate(bins):
            c = series[name].get(key, 0)
            x = sx(b) + i * bar_w + (sx(1) - sx(0)) * 0.05
            cv.rect(x, sy(c), bar_w * 0.95, sy(0) - sy(c), color)
    _legend(cv, names)
    return cv.finish()


def emit_alloc_svg(rows, title="Sampling path") -> str:
    """Scatter of sampled arm per round; rows carry round,arm."""
    if not rows:
        raise SchemaMismatch("no data rows")
    try:
        pts = [(int(r["round"]), int(r["arm"])) for r in rows]
    except (KeyError, ValueError) as exc:
        raise SchemaMismatch(f"bad trace row: {exc}") from exc
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    cv = _Canvas(title)
    x_ticks = [min(xs) + i * (max(xs) - min(xs)) / 4 for i in range(5)] \
        if max(xs) > min(xs) else [min(xs)]
    y_ticks = sorted({min(ys), max(ys)}) if max(ys) > min(ys) else [min(ys)]
    sx, sy = _axes(cv, min(xs), max(xs), min(ys), max(ys), "round", "arm",
                   x_ticks=[round(t) for t in x_ticks], y_ticks=y_ticks,
                   x_tick_fmt=lambda v: f"{v:g}")
    for x, y in pts:
        cv.circle(sx(x), sy(y), 1.2, "#1f3044")
    return cv.finish()


def emit_svg(rows, kind: str, title=None) -> str:
    if kind == "pcs":
        return emit_pcs_svg(rows, title or "PCS vs number of alternatives")
    if kind == "hist":
        return emit_hist_svg(rows, title or "Final counts of inferior alternatives")
    if kind == "alloc":
        return emit_alloc_svg(rows, title or "Sampling path")
    raise SchemaMismatch(f"unknown plot kind {kind!r}")
