"""
Static SVG phase diagrams on the unit interval.

Markers: green for stable steady states, red for unstable ones, purple for
quasi steady states outside their own region, gray for thresholds that are
not steady states. Thresholds are dashed vertical lines; arrows show the
direction of the drift between landmarks.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .limit import QSS_NAMES, LimitAnalysis, _g, enumerate_configurations
from .model import Region

COLORS = {"stable": "#2e8b57", "unstable": "#d62728", "out_of_region": "#7b3fa0", "not_steady": "#8c8c8c"}
LABELS = {"y_hat_i": "ŷ_I", "y_hat_m": "ŷ_M", "y_n_star": "y*_N", "y_i_star": "y*_I",
          "y_m_star": "y*_M", "y_s_star": "y*_S"}
REGION_FILL = {Region.N: "#f4f4f4", Region.I: "#e8f0fa", Region.M: "#faf0e6", Region.S: "#eef8ee"}


def _status(name, stable, unstable, out_of_region):
    if name in stable:
        return "stable"
    if name in unstable:
        return "unstable"
    if name in out_of_region:
        return "out_of_region"
    return "not_steady"


def _panel(x0, y0, width, order_pos, statuses, flows, regions, thresholds, title=None, radius=6, font=12):
    """SVG fragment for one diagram; positions are fractions of ``width``."""
    parts = []
    axis_y = y0 + 50
    if title:
        parts.append(f'<text x="{x0:.1f}" y="{y0 + 14:.1f}" font-size="{font}" class="title">{escape(title)}</text>')
    for lo, hi, region in regions:
        parts.append(f'<rect class="region" data-region="{region.value}" x="{x0 + lo * width:.2f}" '
                     f'y="{axis_y - 18:.1f}" width="{(hi - lo) * width:.2f}" height="36" '
                     f'fill="{REGION_FILL[region]}"/>')
        parts.append(f'<text x="{x0 + 0.5 * (lo + hi) * width:.2f}" y="{axis_y + 32:.1f}" '
                     f'font-size="{font - 2}" text-anchor="middle">{region.value}</text>')
    parts.append(f'<line class="axis" x1="{x0:.1f}" y1="{axis_y:.1f}" x2="{x0 + width:.1f}" y2="{axis_y:.1f}" '
                 f'stroke="black" stroke-width="1.5"/>')
    for frac, label in ((0.0, "0"), (1.0, "1")):
        parts.append(f'<text x="{x0 + frac * width:.1f}" y="{axis_y + 32:.1f}" font-size="{font - 2}" '
                     f'text-anchor="middle">{label}</text>')
    for name in thresholds:
        x = x0 + order_pos[name] * width
        parts.append(f'<line class="threshold" x1="{x:.2f}" y1="{axis_y - 24:.1f}" x2="{x:.2f}" '
                     f'y2="{axis_y + 24:.1f}" stroke="black" stroke-dasharray="4,3"/>')
    for mid, direction in flows:
        x = x0 + mid * width
        dx = 6 if direction > 0 else -6
        parts.append(f'<path class="flow" d="M{x - dx:.2f},{axis_y - 10:.1f} L{x + dx:.2f},{axis_y:.1f} '
                     f'L{x - dx:.2f},{axis_y + 10:.1f}" fill="none" stroke="#444" stroke-width="1.2"/>')
    for name, frac in sorted(order_pos.items(), key=lambda kv: kv[1]):
        x = x0 + frac * width
        status = statuses[name]
        parts.append(f'<circle class="landmark" data-name="{name}" data-status="{status}" cx="{x:.2f}" '
                     f'cy="{axis_y:.1f}" r="{radius}" fill="{COLORS[status]}" stroke="black" stroke-width="0.8"/>')
        parts.append(f'<text x="{x:.2f}" y="{axis_y - 24:.1f}" font-size="{font - 2}" '
                     f'text-anchor="middle">{escape(LABELS[name])}</text>')
    return "\n".join(parts)


def _document(width, height, body):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n'
            f"{body}\n</svg>\n")


def _flows(points, sign_at):
    # one arrow per gap between consecutive points
    out = []
    for a, b in zip(points, points[1:]):
        if b - a <= 1e-12:
            continue
        mid = 0.5 * (a + b)
        s = sign_at(mid)
        if s != 0:
            out.append((mid, s))
    return out


def phase_diagram(analysis: LimitAnalysis, width: int = 640) -> str:
    """Phase diagram of one parameter vector, one marker per live landmark."""
    p = analysis.params
    th = analysis.thresholds
    live = analysis.live_landmarks()
    stable, unstable = analysis.stable_names, analysis.unstable_names
    q = set(analysis.qss_in_region)
    out_of_region = {n for n in live if n not in ("y_hat_i", "y_hat_m") and n not in q}
    statuses = {n: _status(n, stable, unstable, out_of_region) for n in live}
    inter = analysis.intermediate_region
    regions = [(0.0, th.lower, Region.N), (th.lower, th.upper, inter), (th.upper, 1.0, Region.S)]
    pts = sorted({0.0, 1.0, *live.values()})

    def sign(y):
        v = _g(analysis.region_of(y), y, p)
        return (v > 0) - (v < 0)

    margin = 30
    panel = _panel(margin, 10, width - 2 * margin, live, statuses, _flows(pts, sign), regions,
                   ("y_hat_i", "y_hat_m"), title=f"configuration {analysis.configuration.label()} "
                   f"{analysis.configuration.threshold_order}")
    return _document(width, 110, panel)


def configuration_grid(columns: int = 4, cell_width: int = 300) -> str:
    """All 40 abstract configurations, drawn with evenly spaced landmarks."""
    configs = enumerate_configurations()
    rows = (len(configs) + columns - 1) // columns
    cell_h = 100
    body = []
    for k, cfg in enumerate(configs):
        r, c = divmod(k, columns)
        pos = cfg.positions()
        statuses = {n: _status(n, cfg.stable, cfg.unstable, cfg.out_of_region) for n in cfg.order}
        inter = Region.I if cfg.configuration.threshold_order == "I_below_M" else Region.M
        lower = min(pos["y_hat_i"], pos["y_hat_m"])
        upper = max(pos["y_hat_i"], pos["y_hat_m"])
        regions = [(0.0, lower, Region.N), (lower, upper, inter), (upper, 1.0, Region.S)]
        own = {QSS_NAMES[Region.N]: Region.N, QSS_NAMES[inter]: inter, QSS_NAMES[Region.S]: Region.S}

        def sign(y, pos=pos, lower=lower, upper=upper, inter=inter, own=own):
            # each region's drift is positive below its own quasi steady state
            region = Region.N if y < lower else inter if y < upper else Region.S
            target = next(pos[n] for n, rg in own.items() if rg is region)
            return 1 if y < target else -1

        pts = sorted({0.0, 1.0, *pos.values()})
        title = f"#{cfg.configuration.index} {cfg.configuration.label()} " + (
            "I<M" if inter is Region.I else "M<I") + (" low" if cfg.configuration.intermediate_low else "")
        body.append(_panel(10 + c * cell_width, 10 + r * cell_h, cell_width - 30, pos, statuses,
                           _flows(pts, sign), regions, ("y_hat_i", "y_hat_m"), title=title, radius=5, font=11))
    return _document(columns * cell_width + 10, rows * cell_h + 20, "\n".join(body))
