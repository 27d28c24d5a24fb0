"""Deterministic re-layout pass.

Geometry is recomputed from structure and data in a fixed order: title
block, legend, panels (row-major), annotations.  Operators only change
structural fields; they call :func:`relayout` to refresh geometry.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

from .ir import (Axis, Legend, Layer, Mark, Panel, Rect, Scale, ScrollSpec, Tick, TextBlock,
                 VisScene, scale_apply)
from .measure import (DEFAULT_METRICS, TICK_LEN, TICK_PAD, FontMetrics, estimate_text_width,
                      tick_label_box)
from .ticks import (format_number, format_time, linear_tick_values, month_starts,
                    nice_step, step_decimals, time_format_for)

GAP = 8.0
COL_GAP = 16.0
SWATCH = 10.0
SWATCH_PAD = 4.0
CHIP_GAP = 12.0
LABEL_OFFSET = 4.0


# -- ticks -------------------------------------------------------------------


def default_tick_values(scale: Scale, max_count: int = 10) -> List:
    if scale.kind == "band":
        return list(scale.domain)
    lo, hi = float(scale.domain[0]), float(scale.domain[1])
    if scale.kind == "time":
        for every in (1, 2, 3, 6, 12, 24, 60, 120):
            values = month_starts(lo, hi, every)
            if len(values) <= max_count:
                return values
        return month_starts(lo, hi, 120)
    return linear_tick_values(lo, hi, nice_step(lo, hi, max_count))


def tick_labels(axis: Axis, values: Sequence) -> List[str]:
    scale = axis.scale
    if scale.kind == "band":
        return [axis.display(v) for v in values]
    if scale.kind == "time":
        fmt = scale.label_format or time_format_for(*scale.domain)
        return [format_time(v, fmt) for v in values]
    if len(values) >= 2:
        step = min(abs(b - a) for a, b in zip(values, values[1:]))
        d = step_decimals(step)
    elif values:
        d = step_decimals(abs(values[0])) if values[0] else 0
    else:
        d = 0
    return [format_number(v, d) for v in values]


def position_ticks(axis: Axis) -> Axis:
    values = [t.value for t in axis.ticks]
    if not values and axis.scale.kind == "band":
        values = list(axis.scale.domain)
    if axis.scale.kind == "band":
        values = [v for v in values if v in axis.scale.domain]
    else:
        lo, hi = axis.scale.domain
        values = [v for v in values if lo - 1e-9 * abs(hi - lo) <= v <= hi + 1e-9 * abs(hi - lo)]
    labels = tick_labels(axis, values)
    ticks = tuple(Tick(scale_apply(axis.scale, v), s, v) for v, s in zip(values, labels))
    return replace(axis, ticks=ticks)


def label_widths(axis: Optional[Axis], metrics: FontMetrics) -> List[float]:
    if axis is None:
        return []
    return [estimate_text_width(t.label, axis.font_size, metrics) for t in axis.ticks]


# -- marks -------------------------------------------------------------------


def layer_rows(scene: VisScene, panel: Panel, layer: Layer) -> List[int]:
    ds = scene.dataset
    if ds is None:
        return []
    rows = list(layer.rows) if layer.rows is not None else list(range(len(ds.rows)))
    if scene.facet_field and panel.facet_key is not None:
        fi = ds.index(scene.facet_field)
        rows = [r for r in rows if str(ds.rows[r][fi]) == panel.facet_key]
    return rows


def _value(ds, row: int, name: Optional[str]):
    return None if name is None else ds.rows[row][ds.index(name)]


def build_marks(scene: VisScene, panel: Panel, layer: Layer, metrics: FontMetrics,
                points_for_labels: Optional[Dict[int, Tuple[float, float, float]]] = None) -> Tuple[Mark, ...]:
    ds = scene.dataset
    if ds is None:
        return layer.marks
    rows = layer_rows(scene, panel, layer)
    xa = panel.axis(layer.x_scale_id)
    ya = panel.axis(layer.y_scale_id)
    fields = tuple(f for f in (layer.text_field, layer.x_field, layer.y_field, layer.series_field) if f)
    prov = layer.provenance
    plot = panel.plot_area
    marks: List[Mark] = []

    if layer.mark_kind == "bar":
        key, val = xa.scale, ya.scale
        key_horizontal = xa.orientation == "horizontal"
        series = layer.series_order if layer.series_field else ()
        k = max(1, len(series))
        step = abs(key.step)
        usable = step * (1.0 - layer.bar_padding)
        lo, hi = float(val.domain[0]), float(val.domain[1])
        base_v = 0.0 if lo <= 0.0 <= hi else lo
        base = scale_apply(val, base_v)
        a = min(key.range)
        for r in rows:
            kv = _value(ds, r, layer.x_field)
            v = float(_value(ds, r, layer.y_field))
            s = _value(ds, r, layer.series_field)
            i = key.domain.index(kv)
            j = series.index(s) if s in series else 0
            start = a + i * step + step * layer.bar_padding / 2 + j * usable / k
            vp = scale_apply(val, v)
            lo_p, ext = min(vp, base), abs(vp - base)
            color = layer.color_of(s)
            if key_horizontal:
                m = Mark("bar", x=start, y=lo_p, w=usable / k, h=ext, series=s, fill=color)
            else:
                m = Mark("bar", x=lo_p, y=start, w=ext, h=usable / k, series=s, fill=color)
            marks.append(replace(m, row=r, fields=fields, provenance=prov))
        return tuple(marks)

    def pos(r: int) -> Tuple[float, float]:
        xv = _value(ds, r, layer.x_field)
        px = scale_apply(xa.scale, xv)
        if ya is None:
            py = plot.cy
        else:
            py = scale_apply(ya.scale, _value(ds, r, layer.y_field))
        if xa.orientation == "vertical":
            px, py = py, px
        return px, py

    if layer.mark_kind == "point":
        for r in rows:
            x, y = pos(r)
            s = _value(ds, r, layer.series_field)
            marks.append(Mark("point", x=x, y=y, r=layer.point_r, series=s, fill=layer.color_of(s),
                              row=r, fields=fields, provenance=prov))
        return tuple(marks)

    if layer.mark_kind in ("line-vertex", "area-vertex"):
        order = layer.series_order
        by_series: Dict[object, List[int]] = {}
        for r in rows:
            by_series.setdefault(_value(ds, r, layer.series_field), []).append(r)
        keys = sorted(by_series, key=lambda s: (order.index(s) if s in order else len(order), str(s)))
        for s in keys:
            rs = sorted(by_series[s], key=lambda r: (_sort_key(_value(ds, r, layer.x_field)), r))
            for idx, r in enumerate(rs):
                x, y = pos(r)
                marks.append(Mark(layer.mark_kind, x=x, y=y, series=s, index=idx,
                                  stroke=layer.color_of(s), stroke_width=layer.stroke_width,
                                  row=r, fields=fields, provenance=prov))
        return tuple(marks)

    if layer.mark_kind == "label":
        f = layer.font_size
        lh = metrics.line_height(f)
        anchors = {r: pos(r) for r in rows}
        if layer.label_mode == "indexed":
            number = {r: i + 1 for i, r in enumerate(layer.index_rows)}
            placed: List[Rect] = []
            for r in sorted(rows, key=lambda r: (anchors[r][0], r)):
                x, y = anchors[r]
                text = str(number.get(r, 0))
                w = estimate_text_width(text, f, metrics)
                lane = 0
                while True:
                    by = y - layer.point_r - LABEL_OFFSET - lane * (lh + 2)
                    box = Rect(x - w / 2 - 1, by - f - 1, w + 2, lh + 2)
                    if all(box.intersection_area(p) == 0 for p in placed):
                        break
                    lane += 1
                placed.append(box)
                marks.append(Mark("label", x=x, y=by, text=text, font_size=f, align="middle",
                                  fill=layer.color, row=r, fields=fields, provenance=prov))
            marks.sort(key=lambda m: m.row)
            return tuple(marks)
        for r in rows:
            x, y = anchors[r]
            text = str(_value(ds, r, layer.text_field))
            marks.append(Mark("label", x=x, y=y - layer.point_r - LABEL_OFFSET, text=text, font_size=f,
                              align="middle", fill=layer.color, row=r, fields=fields, provenance=prov))
        return tuple(marks)
    return layer.marks


def _sort_key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v))


# -- panels ------------------------------------------------------------------


def _floor(size: float, floor: Optional[float]) -> float:
    return max(size, floor) if floor else size


def _apply_font_floor(axis: Optional[Axis], floor: Optional[float]) -> Optional[Axis]:
    if axis is None or not floor or axis.font_size >= floor:
        return axis
    return replace(axis, font_size=floor)


def mobile_plot_height(width: float, stacked: bool) -> float:
    if stacked:
        return float(min(max(round(width * 0.6), 140), 300))
    return float(min(max(round(width * 0.9), 180), 420))


def _provisional(axis: Optional[Axis]) -> Optional[Axis]:
    """Axis with labels computed so margins can be measured before positions are known."""
    if axis is None:
        return None
    values = [t.value for t in axis.ticks] or (list(axis.scale.domain) if axis.scale.kind == "band" else [])
    labels = tick_labels(axis, values)
    return replace(axis, ticks=tuple(Tick(0.0, s, v) for v, s in zip(values, labels)))


def layout_panel(scene: VisScene, panel: Panel, x: float, y: float, w: float, stacked: bool,
                 metrics: FontMetrics) -> Tuple[Panel, float]:
    floor = scene.font_floor
    xa = _provisional(_apply_font_floor(panel.x_axis, floor))
    ya = _provisional(_apply_font_floor(panel.y_axis, floor))
    y2 = _provisional(_apply_font_floor(panel.y2_axis, floor))

    header = None
    if panel.facet_key is not None:
        hf = _floor(panel.header.font_size if panel.header else 12.0, floor)
        header = TextBlock((panel.facet_key,), hf, (x, y + hf), "start", id=panel.id + "-header", role="header")
        y += metrics.line_height(hf) + SWATCH_PAD

    left = max(label_widths(ya, metrics), default=0.0) + TICK_LEN + TICK_PAD if ya else 0.0
    right = max(label_widths(y2, metrics), default=0.0) + TICK_LEN + TICK_PAD if y2 else 0.0
    top = 0.0
    for a in (ya, y2):
        if a is not None and a.ticks:
            top = max(top, metrics.line_height(a.font_size) / 2 + 1)
    bottom = 0.0
    if xa is not None:
        ws = label_widths(xa, metrics) or [0.0]
        lh = metrics.line_height(xa.font_size)
        ext = {0: lh, 90: max(ws), 45: (max(ws) + lh) * math.sqrt(0.5)}[xa.label_angle]
        bottom = TICK_LEN + TICK_PAD + ext + 2

    for _ in range(4):
        pw = w - left - right
        if pw <= 20:
            pw = 20.0
        lw = pw
        if panel.logical_width and panel.logical_width > pw:
            lw = panel.logical_width
        if xa is not None and xa.scale.kind == "band" and panel.min_band:
            lw = max(lw, len(xa.scale.domain) * panel.min_band)
        if panel.plot_height:
            h = panel.plot_height
        else:
            h = mobile_plot_height(pw, stacked)
        if ya is not None and ya.scale.kind == "band" and panel.min_band:
            h = max(h, len(ya.scale.domain) * panel.min_band)
        plot = Rect(x + left, y + top, lw, h)
        axes = _place_axes(xa, ya, y2, plot, pw)
        # grow margins until no tick label leaves the cell horizontally
        over_l = over_r = 0.0
        for a in axes:
            if a is None:
                continue
            for t in a.ticks:
                b = tick_label_box(a, t, metrics)
                over_l = max(over_l, x - b.x)
                if lw == pw:
                    over_r = max(over_r, b.right - (x + w))
        if over_l <= 1e-6 and over_r <= 1e-6:
            break
        left += max(over_l, 0.0) + 1
        right += max(over_r, 0.0) + 1

    xa_, ya_, y2_ = axes
    new = replace(panel, plot_area=plot, x_axis=xa_, y_axis=ya_, y2_axis=y2_, header=header,
                  view_width=pw if lw > pw else None)
    layers = []
    for layer in panel.layers:
        if floor and layer.mark_kind == "label" and layer.font_size < floor:
            layer = replace(layer, font_size=floor)
        layers.append(replace(layer, marks=build_marks(scene, new, layer, metrics)))
    new = replace(new, layers=tuple(layers))
    return new, plot.bottom + bottom


def _place_axes(xa, ya, y2, plot: Rect, physical_w: float):
    out = []
    if xa is not None:
        sc = xa.scale.with_range(plot.x, plot.right)
        out.append(position_ticks(replace(xa, scale=sc, orientation="horizontal", side="bottom",
                                          offset=plot.bottom)))
    else:
        out.append(None)
    for a, side in ((ya, "left"), (y2, "right")):
        if a is None:
            out.append(None)
            continue
        if a.scale.kind == "band":
            sc = a.scale.with_range(plot.y, plot.bottom)
        else:
            sc = a.scale.with_range(plot.bottom, plot.y)
        off = plot.x if side == "left" else plot.x + physical_w
        out.append(position_ticks(replace(a, scale=sc, orientation="vertical", side=side, offset=off,
                                          label_angle=0)))
    return tuple(out)


# -- legend ------------------------------------------------------------------


def legend_width(legend: Legend, metrics: FontMetrics) -> float:
    widest = max((estimate_text_width(s, legend.font_size, metrics) for _, s in legend.entries), default=0.0)
    return SWATCH + SWATCH_PAD + widest + CHIP_GAP


def legend_chip_rows(legend: Legend, width: float, metrics: FontMetrics) -> List[List[int]]:
    rows: List[List[int]] = [[]]
    used = 0.0
    for i, (_, label) in enumerate(legend.entries):
        cw = SWATCH + SWATCH_PAD + estimate_text_width(label, legend.font_size, metrics)
        need = cw if not rows[-1] else used + CHIP_GAP + cw
        if rows[-1] and (len(rows[-1]) >= legend.chips_per_row or need > width):
            rows.append([])
            need = cw
        rows[-1].append(i)
        used = need
    return [r for r in rows if r]


def legend_label_anchor(legend: Legend, swatch: Rect, metrics: FontMetrics) -> Tuple[float, float]:
    f = legend.font_size
    return swatch.right + SWATCH_PAD, swatch.cy + f - metrics.line_height(f) / 2


def _layout_legend_stack(legend: Legend, x: float, y: float, metrics: FontMetrics) -> Tuple[Legend, float]:
    rh = max(metrics.line_height(legend.font_size), SWATCH) + SWATCH_PAD
    boxes = []
    for i in range(len(legend.entries)):
        cy = y + i * rh + rh / 2
        boxes.append(Rect(x, cy - SWATCH / 2, SWATCH, SWATCH))
    return replace(legend, anchor=(x, y), item_boxes=tuple(boxes)), len(boxes) * rh


def _layout_legend_chips(legend: Legend, x: float, y: float, width: float,
                         metrics: FontMetrics) -> Tuple[Legend, float]:
    rh = max(metrics.line_height(legend.font_size), SWATCH) + SWATCH_PAD
    boxes: List[Optional[Rect]] = [None] * len(legend.entries)
    rows = legend_chip_rows(legend, width, metrics)
    for ri, row in enumerate(rows):
        cx = x
        cy = y + ri * rh + rh / 2
        for i in row:
            boxes[i] = Rect(cx, cy - SWATCH / 2, SWATCH, SWATCH)
            label = legend.entries[i][1]
            cx += SWATCH + SWATCH_PAD + estimate_text_width(label, legend.font_size, metrics) + CHIP_GAP
    return replace(legend, anchor=(x, y), item_boxes=tuple(boxes)), len(rows) * rh


# -- scene -------------------------------------------------------------------


def _place_block(block: TextBlock, x: float, y: float, floor: Optional[float],
                 metrics: FontMetrics) -> Tuple[TextBlock, float]:
    f = _floor(block.font_size, floor)
    b = replace(block, font_size=f, anchor=(x, y + f), align="start")
    return b, y + metrics.line_height(f) * len(b.lines) + GAP


def relayout(scene: VisScene, metrics: FontMetrics = DEFAULT_METRICS) -> VisScene:
    vp = scene.viewport
    content = vp.content
    x0, cw = content.x, content.w
    y = content.y
    floor = scene.font_floor
    title = subtitle = None
    if scene.title:
        title, y = _place_block(scene.title, x0, y, floor, metrics)
    if scene.subtitle:
        subtitle, y = _place_block(scene.subtitle, x0, y, floor, metrics)

    legend = scene.legend
    if legend is not None and floor and legend.font_size < floor:
        legend = replace(legend, font_size=floor)
    region_x, region_w = x0, cw
    side_legend_w = 0.0
    if legend is not None and legend.position == "top":
        legend, h = _layout_legend_chips(legend, x0, y, cw, metrics)
        y += h + GAP
    elif legend is not None and legend.position in ("left", "right"):
        side_legend_w = legend_width(legend, metrics)
        region_w = cw - side_legend_w
        if legend.position == "left":
            region_x = x0 + side_legend_w

    rows, cols = scene.grid
    stacked = len(scene.panels) > 1
    cell_w = (region_w - (cols - 1) * COL_GAP) / cols
    panels: List[Panel] = []
    panel_top = y
    for r in range(rows):
        bottoms = []
        for c in range(cols):
            i = r * cols + c
            if i >= len(scene.panels):
                break
            p, b = layout_panel(scene, scene.panels[i], region_x + c * (cell_w + COL_GAP), y, cell_w,
                                stacked, metrics)
            panels.append(p)
            bottoms.append(b)
        if bottoms:
            y = max(bottoms) + 2 * GAP
    y -= GAP

    if legend is not None and legend.position in ("left", "right"):
        lx = x0 if legend.position == "left" else x0 + cw - side_legend_w + CHIP_GAP
        legend, _ = _layout_legend_stack(legend, lx, panel_top, metrics)
    elif legend is not None and legend.position in ("bottom", "inline"):
        legend, h = _layout_legend_chips(legend, x0, y, cw, metrics)
        y += h + GAP

    annotations = []
    for block in scene.annotations:
        b, y = _place_block(block, x0, y, floor, metrics)
        annotations.append(b)

    right = x0 + cw
    for p in panels:
        right = max(right, p.plot_area.right)
        if p.x_axis is not None:
            for t in p.x_axis.ticks:
                right = max(right, tick_label_box(p.x_axis, t, metrics).right)
    canvas_w = max(vp.width, right + vp.inset[1])
    canvas_h = max(vp.height, y - GAP + vp.inset[2])
    out = replace(scene, title=title, subtitle=subtitle, legend=legend, panels=tuple(panels),
                  annotations=tuple(annotations), laid_out=True, canvas=(round(canvas_w, 6), round(canvas_h, 6)))
    return replace(out, interactions=refresh_manifest(out, metrics))


def refresh_manifest(scene: VisScene, metrics: FontMetrics = DEFAULT_METRICS):
    """Recompute the geometry-derived parts of the manifest."""
    im = scene.interactions
    vp = scene.viewport
    scroll = None
    for p in scene.panels:
        phys_w = p.view_width or p.plot_area.w
        if p.plot_area.w > phys_w + 0.5:
            offset = 0.0
            if p.window is not None and p.x_axis is not None and p.x_axis.scale.continuous:
                offset = scale_apply(p.x_axis.scale, p.window[0]) - p.plot_area.x
            offset = min(max(offset, 0.0), p.plot_area.w - phys_w)
            sticky = p.y_axis.id if p.y_axis is not None else None
            scroll = ScrollSpec("horizontal", round(p.plot_area.w, 2), round(offset, 2), sticky,
                                p.id, round(phys_w, 2))
            break
    if scroll is None and scene.canvas[1] > vp.height + 0.5:
        scroll = ScrollSpec("vertical", round(scene.canvas[1], 2), 0.0, None, "page", vp.height)
    tooltips = []
    for t in im.tooltips:
        n = sum(len(l.marks) for p in scene.panels for l in p.layers if l.id == t.layer)
        tooltips.append(replace(t, targets=n))
    return replace(im, scroll=scroll, tooltips=tuple(tooltips))
