"""The seventeen chart operators as structural rewrites of a scene.

Each operator changes structure only (scales, encodings, layer settings,
manifest) and leaves geometry to :func:`chartmorph.layout.relayout`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional

from .abbrev import DEFAULT_RULES, AbbreviationRules, op_semantic_abbreviation
from .ir import Axis, Collapsible, FilterGroup, Layer, Panel, Slider, TextBlock, Tick, Tooltip, VisScene
from .layout import layer_rows, relayout
from .measure import DEFAULT_METRICS, FontMetrics, wrap_words
from .planner import (OperatorApplication, Thresholds, TransformPlan, axis_tick_values, categories_ordered,
                      compute_metrics, named_blocks, rescaled_padding)
from .registry import OP_IDS, validate_params
from .sampling import lttb, uniform_sample
from .ticks import decimate_values, visible_count


class OperatorError(ValueError):
    """An operator's precondition does not hold for the scene."""


class PlanExecutionError(ValueError):
    def __init__(self, index: int, op_id: str, reason: str):
        super().__init__("step %d (%s) failed: %s" % (index, op_id, reason))
        self.index = index
        self.op_id = op_id
        self.reason = reason


@dataclass(frozen=True)
class OpContext:
    thresholds: Thresholds = Thresholds()
    metrics: FontMetrics = DEFAULT_METRICS
    rules: AbbreviationRules = DEFAULT_RULES


def _data_layers(panel: Panel) -> List[Layer]:
    return [l for l in panel.layers if l.mark_kind != "label"]


def _swap_ids(layer: Layer) -> Layer:
    swap = {"x": "y", "y": "x"}
    return replace(layer, x_scale_id=swap.get(layer.x_scale_id, layer.x_scale_id),
                   y_scale_id=swap.get(layer.y_scale_id, layer.y_scale_id))


# -- level 1 -------------------------------------------------------------------------


def op_grid_reflow(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    cols = int(params.get("cols", 1))
    rows, old = scene.grid
    if old <= cols:
        raise OperatorError("grid already has %d column(s)" % old)
    n = len(scene.panels)
    return replace(scene, grid=(math.ceil(n / cols), cols))


def op_transpose(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    panels, changed = [], False
    for p in scene.panels:
        xa, ya = p.x_axis, p.y_axis
        forward = xa is not None and ya is not None and xa.scale.kind == "band" and ya.scale.continuous
        back = xa is not None and ya is not None and ya.scale.kind == "band" and xa.scale.continuous
        if p.y2_axis is not None or not (forward or back):
            panels.append(p)
            continue
        changed = True
        # a band must at least hold one line of its labels
        font = max(xa.font_size, scene.font_floor or 0.0)
        band = max(ctx.thresholds.min_band, ctx.metrics.line_height(font))
        nx = replace(ya, orientation="horizontal", side="bottom", label_angle=0)
        ny = replace(xa, orientation="vertical", side="left", label_angle=0)
        panels.append(replace(p, x_axis=nx, y_axis=ny, layers=tuple(_swap_ids(l) for l in p.layers),
                              transposed=forward, min_band=band if forward else None))
    if not changed:
        raise OperatorError("no panel pairs a band axis with a continuous axis")
    return replace(scene, panels=tuple(panels))


def op_mark_transmutation(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    panels, changed = [], False
    for p in scene.panels:
        layers = []
        for l in p.layers:
            key = p.axis(l.x_scale_id)
            if l.mark_kind == "bar" and l.series_field and len(l.series_order) >= 2 and key is not None \
                    and key.scale.kind == "band":
                if not categories_ordered(key.scale.domain):
                    raise OperatorError("categories of %s are not ordered" % l.id)
                l = replace(l, mark_kind="line-vertex", stroke_width=max(l.stroke_width, 2.0))
                changed = True
            layers.append(l)
        panels.append(replace(p, layers=tuple(layers)))
    if not changed:
        raise OperatorError("no grouped bar layer to transmute")
    return replace(scene, panels=tuple(panels))


def op_layout_serialization(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    panels, changed = [], False
    for p in scene.panels:
        data = _data_layers(p)
        if len(data) < 2:
            panels.append(p)
            continue
        changed = True
        labels = [l for l in p.layers if l.mark_kind == "label"]
        for i, layer in enumerate(data):
            pid = p.id if i == 0 else "%s-%d" % (p.id, i)
            y = p.axis(layer.y_scale_id)
            xa = p.x_axis if i == 0 else replace(p.x_axis, id=(p.x_axis.id + "-%d" % i) if p.x_axis.id else "")
            if y is not None:
                y = replace(y, side="left")
            own = [replace(layer, y_scale_id="y" if layer.y_scale_id else None)]
            if i == 0:
                own += [l for l in labels if l.y_scale_id == layer.y_scale_id]
            panels.append(replace(p, id=pid, x_axis=xa, y_axis=y, y2_axis=None, layers=tuple(own),
                                  header=p.header if i == 0 else None))
    if not changed:
        raise OperatorError("no panel has two or more data layers")
    return replace(scene, panels=tuple(panels), grid=(len(panels), 1))


# -- level 2 ---------------------------------------------------------------------------


def op_viewport_constriction(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    frac = float(params["fraction"])
    panels, sliders, changed = [], list(scene.interactions.sliders), False
    for p in scene.panels:
        xa = p.x_axis
        if xa is None or not xa.scale.continuous:
            panels.append(p)
            continue
        changed = True
        lo, hi = float(xa.scale.domain[0]), float(xa.scale.domain[1])
        window = (hi - frac * (hi - lo), hi)
        panels.append(replace(p, window=window))
        if not sliders:
            label = next((l.x_field for l in p.layers if l.x_field), "x")
            binding = "index-date" if xa.scale.kind == "time" else "range-filter"
            sliders.append(Slider(label, (lo, hi), binding, window))
    if not changed:
        raise OperatorError("no continuous x-axis to constrict")
    return replace(scene, panels=tuple(panels),
                   interactions=replace(scene.interactions, sliders=tuple(sliders)))


def op_viewport_decoupling(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    lw = float(params["logical_width"])
    panels = []
    for p in scene.panels:
        if lw <= (p.view_width or p.plot_area.w) + 0.5:
            raise OperatorError("logical width %.1f does not exceed plot width %.1f"
                                % (lw, p.view_width or p.plot_area.w))
        panels.append(replace(p, logical_width=lw))
    return replace(scene, panels=tuple(panels))


def decimate_axis(axis: Axis, max_count: int, window: Optional[float] = None) -> Axis:
    """Axis keeping at most ``max_count`` ticks visible at once."""
    if axis.scale.kind == "band":
        raise OperatorError("tick decimation does not apply to band axes")
    lo, hi = float(axis.scale.domain[0]), float(axis.scale.domain[1])
    current = [float(v) for v in axis_tick_values(axis)]
    if visible_count(current, window) <= max_count:
        return axis
    values = decimate_values(axis.scale.kind, lo, hi, current, max_count, window)
    return replace(axis, ticks=tuple(Tick(0.0, "", v) for v in values))


def op_tick_decimation(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    k = int(params["max_count"])
    orient = params["orientation"]
    panels, found = [], False
    for p in scene.panels:
        new = {}
        for key, a in p.axes():
            if a.orientation != orient or a.scale.kind == "band":
                continue
            found = True
            window = None
            if orient == "horizontal" and p.view_width and p.plot_area.w > p.view_width:
                lo, hi = a.scale.domain
                window = (float(hi) - float(lo)) * p.view_width / p.plot_area.w
            new[key + "_axis"] = decimate_axis(a, k, window)
        panels.append(replace(p, **new))
    if not found:
        raise OperatorError("no continuous %s axis" % orient)
    return replace(scene, panels=tuple(panels))


def op_label_rotation(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    if any(p.transposed for p in scene.panels):
        raise OperatorError("scene is transposed; rotation is mutually exclusive with transposition")
    m = compute_metrics(scene, scene.viewport, ctx.thresholds, ctx.metrics)
    hit = {a.panel for a in m.axes if a.kind == "band" and a.orientation == "horizontal" and a.label_overflow}
    if not hit:
        raise OperatorError("band axis labels do not overlap")
    angle = int(params["angle"])
    panels = [replace(p, x_axis=replace(p.x_axis, label_angle=angle)) if p.id in hit else p
              for p in scene.panels]
    return replace(scene, panels=tuple(panels))


def op_legend_reposition(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    if scene.legend is None:
        raise OperatorError("scene has no legend")
    legend = replace(scene.legend, position=params["position"], chips_per_row=ctx.thresholds.chips_per_row,
                     interactive=bool(params.get("interactive", scene.legend.interactive)))
    return replace(scene, legend=legend)


def op_tooltip_enabling(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    ds = scene.dataset
    if ds is None:
        raise OperatorError("scene has no dataset")
    radius = float(params.get("hit_radius", ctx.thresholds.hit_radius))
    have = {t.layer for t in scene.interactions.tooltips}
    tips = list(scene.interactions.tooltips)
    for p in scene.panels:
        for l in _data_layers(p):
            if l.id not in have:
                have.add(l.id)
                tips.append(Tooltip(l.id, ds.field_names, "tap", True, radius))
    return replace(scene, interactions=replace(scene.interactions, tooltips=tuple(tips)))


# -- level 3 -------------------------------------------------------------------------------


def op_abbreviate(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    panels = []
    for p in scene.panels:
        new = {}
        for key, a in p.axes():
            if a.scale.kind != "band":
                continue
            cats = list(a.scale.domain)
            short = op_semantic_abbreviation([a.display(c) for c in cats], ctx.rules)
            new[key + "_axis"] = replace(a, label_map=tuple((c, s) for c, s in zip(cats, short)
                                                            if s != str(c)))
        panels.append(replace(p, **new))
    return replace(scene, panels=tuple(panels))


def op_label_externalization(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    m = compute_metrics(scene, scene.viewport, ctx.thresholds, ctx.metrics)
    overlapping = {p.panel for p in m.panels if p.label_overlap}
    if not overlapping:
        raise OperatorError("no overlapping in-plot labels")
    panels, lists = [], []
    for p in scene.panels:
        if p.id not in overlapping:
            panels.append(p)
            continue
        layers = []
        for l in p.layers:
            if l.mark_kind == "label" and l.label_mode == "inline":
                order = sorted(l.marks, key=lambda mk: (round(mk.y), mk.x, mk.row))
                rows = tuple(mk.row for mk in order)
                lines = tuple("%d. %s" % (i + 1, mk.text) for i, mk in enumerate(order))
                bid = "label-list" if not lists else "label-list-%d" % len(lists)
                lists.append(TextBlock(lines, l.font_size, id=bid, role="list"))
                r = max(l.point_r, ctx.thresholds.min_point_r)
                l = replace(l, label_mode="indexed", index_rows=rows, point_r=r)
            layers.append(l)
        panels.append(replace(p, layers=tuple(layers)))
    return replace(scene, panels=tuple(panels), annotations=scene.annotations + tuple(lists))


def _map_blocks(scene: VisScene, ids, fn) -> VisScene:
    wanted = set(ids)
    found = set()
    out = {}
    for key, b in named_blocks(scene):
        if key in wanted:
            found.add(key)
            out[id(b)] = fn(key, b)
    missing = wanted - found
    if missing:
        raise OperatorError("unknown text block(s): %s" % ", ".join(sorted(missing)))

    def sub(b):
        return out.get(id(b), b) if b is not None else None

    return replace(scene, title=sub(scene.title), subtitle=sub(scene.subtitle),
                   annotations=tuple(sub(b) for b in scene.annotations))


def wrap_block(block: TextBlock, max_width: float, metrics: FontMetrics = DEFAULT_METRICS,
               floor: Optional[float] = None) -> TextBlock:
    f = max(block.font_size, floor or 0.0)
    lines, _ = wrap_words(block.text, max_width, f, metrics)
    return replace(block, lines=lines) if lines else block


def op_text_wrapping(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    width = float(params["max_width"])
    return _map_blocks(scene, params["blocks"],
                       lambda key, b: wrap_block(b, width, ctx.metrics, scene.font_floor))


def op_element_rescaling(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    r_min, w_min, s_min = float(params["min_point_r"]), float(params["min_bar_width"]), float(params["min_stroke"])
    panels = []
    for p in scene.panels:
        layers, min_band = [], p.min_band
        for l in p.layers:
            if l.mark_kind == "point":
                l = replace(l, point_r=max(l.point_r, r_min))
            elif l.mark_kind in ("line-vertex", "area-vertex"):
                l = replace(l, stroke_width=max(l.stroke_width, s_min))
            elif l.mark_kind == "bar":
                key = p.axis(l.x_scale_id)
                k = max(1, len(l.series_order)) if l.series_field else 1
                step = abs(key.scale.step)
                pad = rescaled_padding(l.bar_padding, step, k, w_min)
                if step * (1 - pad) / k < w_min - 1e-6:
                    # padding alone is not enough: widen the bands
                    min_band = max(min_band or 0.0, w_min * k / (1 - pad))
                l = replace(l, bar_padding=pad)
            layers.append(l)
        panels.append(replace(p, layers=tuple(layers), min_band=min_band))
    return replace(scene, panels=tuple(panels))


def _numeric(v, axis: Optional[Axis]) -> float:
    if isinstance(v, (int, float)):
        return float(v)
    if axis is not None and axis.scale.kind == "band":
        return float(axis.scale.domain.index(v))
    return 0.0


def op_sample_data(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    k = int(params["max_points"])
    seed = int(params["seed"])
    if k < 2:
        raise OperatorError("max_points must be >= 2")
    ds = scene.dataset
    if ds is None:
        raise OperatorError("scene has no dataset")
    panels, changed = [], False
    for p in scene.panels:
        layers = []
        for l in p.layers:
            rows = layer_rows(scene, p, l)
            if l.mark_kind == "label" or len(rows) <= k:
                layers.append(l)
                continue
            changed = True
            if l.mark_kind in ("line-vertex", "area-vertex"):
                xa, ya = p.axis(l.x_scale_id), p.axis(l.y_scale_id)
                groups: Dict[object, List[int]] = {}
                si = ds.index(l.series_field) if l.series_field else None
                for r in rows:
                    groups.setdefault(ds.rows[r][si] if si is not None else None, []).append(r)
                keep = []
                for rs in groups.values():
                    quota = max(2, int(round(k * len(rs) / len(rows))))
                    pts = [(_numeric(ds.rows[r][ds.index(l.x_field)], xa),
                            _numeric(ds.rows[r][ds.index(l.y_field)], ya)) for r in rs]
                    order = sorted(range(len(rs)), key=lambda i: (pts[i][0], rs[i]))
                    picked = lttb([pts[i] for i in order], quota)
                    keep.extend(rs[order[i]] for i in picked)
            else:
                keep = [rows[i] for i in uniform_sample(len(rows), k, seed)]
            layers.append(replace(l, rows=tuple(sorted(keep))))
        panels.append(replace(p, layers=tuple(layers)))
    if not changed:
        raise OperatorError("no layer has more than %d marks" % k)
    return replace(scene, panels=tuple(panels), sampled=True)


def _series(scene: VisScene):
    if scene.legend is not None and len(scene.legend.entries) >= 2:
        return [s for _, s in scene.legend.entries], [c for c, _ in scene.legend.entries]
    for p in scene.panels:
        for l in p.layers:
            if len(l.series_colors) >= 2:
                return list(l.series_order), [c for _, c in l.series_colors]
    return [], []


def op_filter_enabling(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    labels, colors = _series(scene)
    if len(labels) < 2:
        raise OperatorError("filtering needs at least two series")
    group = FilterGroup(tuple(labels), tuple(colors))
    legend = replace(scene.legend, interactive=True) if scene.legend is not None else None
    return replace(scene, legend=legend, interactions=replace(scene.interactions, filters=group))


def op_context_collapsing(scene: VisScene, params: dict, ctx: OpContext) -> VisScene:
    limit = int(params["max_chars"])
    width = scene.viewport.content.w
    collapsibles = list(scene.interactions.collapsibles)

    def collapse(key: str, b: TextBlock) -> TextBlock:
        if len(b.text) <= limit:
            raise OperatorError("block %s has %d chars, not more than %d" % (key, len(b.text), limit))
        f = max(b.font_size, scene.font_floor or 0.0)
        first = wrap_words(b.text, width, f, ctx.metrics)[0][0]
        collapsibles.append(Collapsible(b.id or key, b.text, 1))
        return replace(b, lines=(first,), collapsed=True, id=b.id or key)

    out = _map_blocks(scene, params["blocks"], collapse)
    return replace(out, interactions=replace(out.interactions, collapsibles=tuple(collapsibles)))


# -- plan execution ----------------------------------------------------------------------

OPERATIONS: Dict[str, Callable[[VisScene, dict, OpContext], VisScene]] = {
    "grid_reflow": op_grid_reflow,
    "axis_transposition": op_transpose,
    "mark_transmutation": op_mark_transmutation,
    "layout_serialization": op_layout_serialization,
    "viewport_constriction": op_viewport_constriction,
    "viewport_decoupling": op_viewport_decoupling,
    "tick_decimation": op_tick_decimation,
    "label_rotation": op_label_rotation,
    "legend_repositioning": op_legend_reposition,
    "tooltip_enabling": op_tooltip_enabling,
    "semantic_abbreviation": op_abbreviate,
    "label_externalization": op_label_externalization,
    "text_wrapping": op_text_wrapping,
    "element_rescaling": op_element_rescaling,
    "sample_data": op_sample_data,
    "filter_enabling": op_filter_enabling,
    "context_collapsing": op_context_collapsing,
}
assert tuple(OPERATIONS) == OP_IDS


def retarget(scene: VisScene, plan: TransformPlan, metrics: FontMetrics = DEFAULT_METRICS) -> VisScene:
    floor = plan.layout.get("font_floor")
    panels = tuple(replace(p, plot_height=None, view_width=None) for p in scene.panels)
    scene = replace(scene, viewport=plan.target, panels=panels, canvas=(0.0, 0.0),
                    font_floor=float(floor) if floor else None)
    return relayout(scene, metrics)


def _stamp(scene: VisScene, op_id: str) -> VisScene:
    panels = tuple(replace(p, layers=tuple(replace(l, provenance=l.provenance + (op_id,)) for l in p.layers))
                   for p in scene.panels)
    return replace(scene, panels=panels, applied_ops=scene.applied_ops + (op_id,))


def apply_step(scene: VisScene, step: OperatorApplication, ctx: OpContext = OpContext()) -> VisScene:
    validate_params(step.op_id, step.params)
    out = OPERATIONS[step.op_id](scene, step.params, ctx)
    return relayout(_stamp(out, step.op_id), ctx.metrics)


def apply_plan(scene: VisScene, plan: TransformPlan, ctx: OpContext = OpContext()) -> VisScene:
    scene = retarget(scene, plan, ctx.metrics)
    for i, step in enumerate(plan.steps):
        try:
            scene = apply_step(scene, step, ctx)
        except (OperatorError, ValueError) as exc:
            raise PlanExecutionError(i, step.op_id, str(exc)) from None
    return relayout(scene, ctx.metrics)
