"""Deterministic SVG, manifest and HTML output."""

from __future__ import annotations

import json
from importlib import resources
from typing import Dict, List, Optional
from xml.sax.saxutils import escape, quoteattr

from .ir import Axis, Color, InteractionManifest, Layer, Mark, Panel, TextBlock, VisScene
from .layout import legend_label_anchor
from .measure import DEFAULT_METRICS, TICK_LEN, FontMetrics, tick_label_anchor
from .ticks import from_epoch_ms

FONT_FAMILY = "Helvetica, Arial, sans-serif"
AXIS_COLOR = "#666666"
LABEL_COLOR = "#333333"
PLOT_BG = "#fafafa"
MANIFEST_VERSION = "1.0"


class EmissionError(ValueError):
    pass


def num(v: float) -> str:
    s = "%.2f" % v
    s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _attrs(pairs) -> str:
    return "".join(" %s=%s" % (k, quoteattr(str(v))) for k, v in pairs if v is not None)


def _color(c: Optional[Color]) -> str:
    return "none" if c is None else c.hex


def axis_id(panel: Panel, key: str, axis: Axis) -> str:
    return axis.id or "%s-%s" % (panel.id, key)


# -- svg ---------------------------------------------------------------------


def _text(lines, font_size: float, x: float, y: float, align: str, color: str, extra=(),
          metrics: FontMetrics = DEFAULT_METRICS, transform: Optional[str] = None) -> str:
    head = _attrs([("x", num(x)), ("y", num(y)), ("font-size", num(font_size)),
                   ("text-anchor", align), ("fill", color), ("transform", transform)] + list(extra))
    if len(lines) == 1:
        return "<text%s>%s</text>" % (head, escape(lines[0]))
    lh = metrics.line_height(font_size)
    spans = "".join("<tspan%s>%s</tspan>" % (_attrs([("x", num(x)), ("dy", num(0 if i == 0 else lh))]),
                                                escape(s)) for i, s in enumerate(lines))
    return "<text%s>%s</text>" % (head, spans)


def _block(b: TextBlock, cls: str, metrics: FontMetrics) -> str:
    extra = [("class", cls), ("id", b.id or None)]
    if b.collapsed:
        extra.append(("data-collapsed", "true"))
    return _text(b.lines, b.font_size, b.anchor[0], b.anchor[1], b.align, _color(b.color), extra, metrics)


def _datum_attrs(scene: VisScene, m: Mark) -> list:
    out = []
    ds = scene.dataset
    if m.row is not None:
        out.append(("data-row", m.row))
        if ds is not None:
            for f in m.fields:
                v = ds.rows[m.row][ds.index(f)]
                out.append(("data-" + _attr_name(f), v if isinstance(v, str) else repr(float(v))))
    if m.series is not None and all(k != "data-series" for k, _ in out):
        out.append(("data-series", m.series))
    return out


def _attr_name(field: str) -> str:
    return "".join(ch if ch.isalnum() or ch == "-" else "-" for ch in field.lower())


def _layer_svg(scene: VisScene, panel: Panel, li: int, layer: Layer, metrics: FontMetrics) -> List[str]:
    out = ['<g%s>' % _attrs([("class", "layer"), ("id", layer.id), ("data-kind", layer.mark_kind)])]
    if layer.mark_kind in ("line-vertex", "area-vertex"):
        groups: Dict[object, List[Mark]] = {}
        for m in layer.marks:
            groups.setdefault(m.series, []).append(m)
        for si, (series, ms) in enumerate(groups.items()):
            ms = sorted(ms, key=lambda m: m.index)
            d = "M" + " L".join("%s %s" % (num(m.x), num(m.y)) for m in ms)
            first = ms[0]
            out.append("<path%s/>" % _attrs([
                ("class", "mark line"), ("id", "m-%s-%d-%d" % (panel.id, li, si)), ("d", d),
                ("fill", "none"), ("stroke", _color(first.stroke)), ("stroke-width", num(first.stroke_width)),
                ("opacity", num(first.opacity) if first.opacity < 1 else None),
                ("data-series", series), ("data-rows", " ".join(str(m.row) for m in ms))]))
    else:
        for i, m in enumerate(layer.marks):
            mid = "m-%s-%d-%d" % (panel.id, li, i)
            op = num(m.opacity) if m.opacity < 1 else None
            if m.kind == "bar":
                out.append("<rect%s/>" % _attrs([("class", "mark bar"), ("id", mid), ("x", num(m.x)),
                                                 ("y", num(m.y)), ("width", num(m.w)), ("height", num(m.h)),
                                                 ("fill", _color(m.fill)), ("opacity", op)]
                                                + _datum_attrs(scene, m)))
            elif m.kind == "point":
                out.append("<circle%s/>" % _attrs([("class", "mark point"), ("id", mid), ("cx", num(m.x)),
                                                   ("cy", num(m.y)), ("r", num(m.r)), ("fill", _color(m.fill)),
                                                   ("opacity", op)] + _datum_attrs(scene, m)))
            elif m.kind == "label":
                out.append(_text((m.text or "",), m.font_size, m.x, m.y, m.align, _color(m.fill or Color(34, 34, 34)),
                                 [("class", "mark label"), ("id", mid)] + _datum_attrs(scene, m), metrics))
    out.append("</g>")
    return out


def _axis_svg(panel: Panel, key: str, axis: Axis, metrics: FontMetrics) -> List[str]:
    sc = axis.scale
    extra = [("class", "axis"), ("id", axis_id(panel, key, axis)), ("data-orient", axis.orientation)]
    if sc.kind == "time":
        year = axis.label_year
        if year is None and "%Y" not in (sc.label_format or "%Y"):
            year = from_epoch_ms(float(sc.domain[0])).year
        extra += [("data-scale", "time"), ("data-format", sc.label_format or ""), ("data-year", year)]
    out = ["<g%s>" % _attrs(extra)]
    lo, hi = sorted(sc.range)
    if axis.orientation == "horizontal":
        out.append("<line%s/>" % _attrs([("class", "domain"), ("x1", num(lo)), ("y1", num(axis.offset)),
                                         ("x2", num(hi)), ("y2", num(axis.offset)), ("stroke", AXIS_COLOR)]))
    else:
        out.append("<line%s/>" % _attrs([("class", "domain"), ("x1", num(axis.offset)), ("y1", num(lo)),
                                         ("x2", num(axis.offset)), ("y2", num(hi)), ("stroke", AXIS_COLOR)]))
    for t in axis.ticks:
        if axis.orientation == "horizontal":
            a = (t.position, axis.offset, t.position, axis.offset + TICK_LEN)
        else:
            d = TICK_LEN if axis.side == "right" else -TICK_LEN
            a = (axis.offset, t.position, axis.offset + d, t.position)
        out.append("<line%s/>" % _attrs([("class", "tick"), ("x1", num(a[0])), ("y1", num(a[1])),
                                         ("x2", num(a[2])), ("y2", num(a[3])), ("stroke", AXIS_COLOR)]))
    for t in axis.ticks:
        (x, y), align, angle = tick_label_anchor(axis, t, metrics)
        tr = "rotate(%s %s %s)" % (num(-angle), num(x), num(y)) if angle else None
        out.append(_text((t.label,), axis.font_size, x, y, align, LABEL_COLOR, [("class", "tick-label")],
                         metrics, transform=tr))
    out.append("</g>")
    return out


def emit_svg(scene: VisScene, metrics: FontMetrics = DEFAULT_METRICS) -> str:
    if not scene.laid_out:
        raise EmissionError("scene has not been laid out")
    w, h = scene.canvas_rect.w, scene.canvas_rect.h
    out = ['<svg%s>' % _attrs([("xmlns", "http://www.w3.org/2000/svg"), ("width", num(w)), ("height", num(h)),
                               ("viewBox", "0 0 %s %s" % (num(w), num(h))), ("font-family", FONT_FAMILY)]),
           '<rect%s/>' % _attrs([("class", "background"), ("x", "0"), ("y", "0"), ("width", num(w)),
                                 ("height", num(h)), ("fill", scene.background.hex)])]
    for p in scene.panels:
        out.append("<g%s>" % _attrs([("class", "panel"), ("id", p.id), ("data-facet", p.facet_key)]))
        pa = p.plot_area
        out.append("<rect%s/>" % _attrs([("class", "plot-bg"), ("x", num(pa.x)), ("y", num(pa.y)),
                                         ("width", num(pa.w)), ("height", num(pa.h)), ("fill", PLOT_BG)]))
        for li, layer in enumerate(p.layers):
            out.extend(_layer_svg(scene, p, li, layer, metrics))
        for key, axis in p.axes():
            out.extend(_axis_svg(p, key, axis, metrics))
        out.append("</g>")
    lg = scene.legend
    if lg is not None:
        out.append("<g%s>" % _attrs([("class", "legend"), ("data-position", lg.position),
                                     ("data-interactive", "true" if lg.interactive else None)]))
        for (color, label), box in zip(lg.entries, lg.item_boxes):
            out.append("<rect%s/>" % _attrs([("class", "swatch"), ("x", num(box.x)), ("y", num(box.y)),
                                             ("width", num(box.w)), ("height", num(box.h)), ("fill", color.hex)]))
            x, y = legend_label_anchor(lg, box, metrics)
            out.append(_text((label,), lg.font_size, x, y, "start", LABEL_COLOR, [("class", "legend-label")], metrics))
        out.append("</g>")
    if scene.title:
        out.append(_block(scene.title, "title", metrics))
    if scene.subtitle:
        out.append(_block(scene.subtitle, "subtitle", metrics))
    for p in scene.panels:
        if p.header:
            out.append(_block(p.header, "header", metrics))
    for b in scene.annotations:
        out.append(_block(b, b.role, metrics))
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- manifest ----------------------------------------------------------------


def manifest_dict(scene: VisScene) -> dict:
    im: InteractionManifest = scene.interactions
    if im.empty:
        return {}
    layer_ids = {l.id for p in scene.panels for l in p.layers}
    axis_ids = {axis_id(p, k, a) for p in scene.panels for k, a in p.axes()}
    containers = {p.id for p in scene.panels} | {"page"}
    out: dict = {"version": MANIFEST_VERSION}
    if im.tooltips:
        for t in im.tooltips:
            if t.layer not in layer_ids:
                raise EmissionError("tooltip references missing layer %r" % t.layer)
        out["tooltips"] = [{"layer": t.layer, "trigger": t.trigger, "fields": list(t.fields),
                            "fixed_card": t.fixed_card, "hit_radius": t.hit_radius, "targets": t.targets}
                           for t in im.tooltips]
    if im.scroll is not None:
        s = im.scroll
        if s.container not in containers:
            raise EmissionError("scroll references missing container %r" % s.container)
        if s.sticky_axis is not None and s.sticky_axis not in axis_ids:
            raise EmissionError("scroll references missing axis %r" % s.sticky_axis)
        out["scroll"] = {"axis": s.axis, "container": s.container, "logical_extent": s.logical_extent,
                         "viewport_extent": s.viewport_extent, "initial_offset": s.initial_offset,
                         "sticky_axis": s.sticky_axis}
    if im.filters is not None:
        f = im.filters
        out["filters"] = {"labels": list(f.labels), "colors": [c.hex for c in f.colors], "default": f.default,
                          "mode": f.mode, "dim_opacity": f.dim_opacity, "hit_area": f.hit_area}
    if im.collapsibles:
        out["collapsibles"] = []
        for c in im.collapsibles:
            if scene.block(c.block) is None:
                raise EmissionError("collapsible references missing block %r" % c.block)
            if not c.payload:
                raise EmissionError("collapsible %r has an empty payload" % c.block)
            out["collapsibles"].append({"block": c.block, "visible_lines": c.visible_lines,
                                        "payload": c.payload, "hit_area": c.hit_area})
    if im.sliders:
        out["sliders"] = [{"label": s.label, "domain": list(s.domain), "binding": s.binding,
                           "window": list(s.window) if s.window else None, "hit_area": s.hit_area}
                          for s in im.sliders]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def emit_manifest(scene: VisScene) -> str:
    return dumps(manifest_dict(scene))


# -- html --------------------------------------------------------------------


def runtime_asset() -> str:
    return resources.files("chartmorph").joinpath("assets/runtime.js").read_text(encoding="utf-8")


def emit_html(scene: VisScene, metrics: FontMetrics = DEFAULT_METRICS) -> str:
    svg = emit_svg(scene, metrics)
    manifest = manifest_dict(scene)
    title = escape(scene.title.text) if scene.title else "chart"
    parts = ["<!DOCTYPE html>", "<html>", "<head>", '<meta charset="utf-8">',
             '<meta name="viewport" content="width=device-width, initial-scale=1">',
             "<title>%s</title>" % title, "</head>", "<body style=\"margin:0\">",
             '<div id="chart">', svg.rstrip("\n"), "</div>"]
    if manifest:
        data = json.dumps(manifest, indent=2, ensure_ascii=False).replace("</", "<\\/")
        parts += ['<script type="application/json" id="manifest">', data, "</script>",
                  "<script>", runtime_asset().rstrip("\n"), "</script>",
                  "<script>chartRuntime.init(document.getElementById(\"chart\"), "
                  "JSON.parse(document.getElementById(\"manifest\").textContent));</script>"]
    parts += ["</body>", "</html>"]
    return "\n".join(parts) + "\n"
