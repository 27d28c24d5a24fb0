"""Checks an adapted scene for fidelity, plan adherence, readability and layout, and routes failures."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .emitter import axis_id, emit_svg
from .ir import Color, Rect, RecoveredDataset, VisScene, contrast_ratio, union_rect
from .layout import legend_label_anchor
from .measure import DEFAULT_METRICS, FontMetrics, block_box, mark_box, text_box, tick_label_box
from .planner import Thresholds, TransformPlan, compute_metrics
from .recovery import RecoveryError, compare_datasets, recover_svg

CATEGORIES = ("data_fidelity", "plan_adherence", "text_readability", "aesthetics")
MIN_CONTRAST = 3.0
MIN_UTILIZATION = 0.5
MIN_MARGIN = 8.0
TICK_COLOR = Color(51, 51, 51)
PLOT_BG = Color(250, 250, 250)


@dataclass(frozen=True)
class Issue:
    category: str
    severity: str  # hard | soft
    detail: str
    evidence: Dict[str, object] = field(default_factory=dict)
    route: Optional[Dict[str, object]] = None

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError("unknown issue category %r" % self.category)
        if self.severity not in ("hard", "soft"):
            raise ValueError("severity must be hard or soft")
        if self.severity == "hard" and self.route is None:
            raise ValueError("hard issues need a route")

    def sort_key(self):
        ids = self.evidence.get("elements") or [""]
        return (0 if self.severity == "hard" else 1, CATEGORIES.index(self.category), str(ids[0]), self.detail)

    def to_dict(self) -> dict:
        return {"category": self.category, "severity": self.severity, "route": self.route,
                "detail": self.detail, "evidence": self.evidence}


def reapply(*adjustments: Dict[str, object]) -> Dict[str, object]:
    return {"action": "reapply", "adjustments": list(adjustments)}


def replan(*forced: str) -> Dict[str, object]:
    return {"action": "replan", "force": list(forced)}


@dataclass(frozen=True)
class CritiqueReport:
    issues: Tuple[Issue, ...]
    metrics_snapshot: Dict[str, object]
    iteration: int = 0

    @property
    def verdict(self) -> str:
        return "fail" if any(i.severity == "hard" for i in self.issues) else "pass"

    @property
    def hard(self) -> Tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == "hard")

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "iteration": self.iteration,
                "issues": [i.to_dict() for i in self.issues], "metrics_snapshot": self.metrics_snapshot}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


# -- element inventory -------------------------------------------------------------------


@dataclass(frozen=True)
class TextItem:
    id: str
    box: Rect
    font_size: float
    kind: str  # tick, block, legend, label
    color: Color = TICK_COLOR
    panel: Optional[str] = None
    axis_key: Optional[str] = None


def text_items(scene: VisScene, fm: FontMetrics = DEFAULT_METRICS) -> List[TextItem]:
    out: List[TextItem] = []
    for b in scene.text_blocks():
        out.append(TextItem(b.id or b.role, block_box(b, fm), b.font_size, "block", b.color))
    for p in scene.panels:
        for key, a in p.axes():
            aid = axis_id(p, key, a)
            for i, t in enumerate(a.ticks):
                out.append(TextItem("%s/tick-%d" % (aid, i), tick_label_box(a, t, fm), a.font_size, "tick",
                                    TICK_COLOR, p.id, key))
        for li, layer in enumerate(p.layers):
            for i, m in enumerate(layer.marks):
                if m.kind == "label":
                    out.append(TextItem("m-%s-%d-%d" % (p.id, li, i), mark_box(m, fm), m.font_size, "label",
                                        m.fill or TICK_COLOR, p.id))
    lg = scene.legend
    if lg is not None:
        for i, ((_, label), sw) in enumerate(zip(lg.entries, lg.item_boxes)):
            if sw is None:
                continue
            box = text_box(label, lg.font_size, legend_label_anchor(lg, sw, fm), "start", 0.0, fm)
            out.append(TextItem("legend-%d" % i, box, lg.font_size, "legend"))
    return out


def geometry_items(scene: VisScene, fm: FontMetrics = DEFAULT_METRICS) -> List[Tuple[str, Rect, Optional[str]]]:
    out = []
    for p in scene.panels:
        out.append((p.id, Rect(p.plot_area.x, p.plot_area.y, p.plot_area.w, p.plot_area.h), p.id))
        for li, layer in enumerate(p.layers):
            for i, m in enumerate(layer.marks):
                if m.kind != "label":
                    out.append(("m-%s-%d-%d" % (p.id, li, i), mark_box(m, fm), p.id))
    if scene.legend is not None:
        for i, sw in enumerate(scene.legend.item_boxes):
            if sw is not None:
                out.append(("legend-swatch-%d" % i, sw, None))
    return out


def allowed_region(scene: VisScene) -> Rect:
    """Viewport, stretched by any declared scroll container."""
    vp = scene.viewport
    sc = scene.interactions.scroll
    w, h = vp.width, vp.height
    if sc is not None and sc.axis == "horizontal":
        w += sc.logical_extent - sc.viewport_extent
    if sc is not None and sc.axis == "vertical":
        h = max(h, sc.logical_extent)
    return Rect(0.0, 0.0, w, h)


def _outside(box: Rect, region: Rect, tol: float = 0.5) -> bool:
    return not region.contains(box, tol)


def _tick_axis(scene: VisScene, item: TextItem):
    for p in scene.panels:
        if p.id == item.panel:
            return p, p.axis(item.axis_key)
    return None, None


def _step_params(plan: Optional[TransformPlan], op_id: str, **match) -> Optional[dict]:
    if plan is None:
        return None
    for s in plan.steps:
        if s.op_id == op_id and all(s.params.get(k) == v for k, v in match.items()):
            return dict(s.params)
    return None


def _overlap_route(scene: VisScene, a: TextItem, b: TextItem, plan: Optional[TransformPlan]) -> Dict[str, object]:
    """Route for two overlapping text boxes."""
    for item in (a, b):
        if item.kind != "tick":
            continue
        panel, axis = _tick_axis(scene, item)
        if axis is None:
            continue
        if axis.scale.kind == "band" and axis.orientation == "horizontal":
            if axis.label_angle == 0:
                return reapply({"op_id": "label_rotation", "params": {"angle": 45}})
            if axis.label_angle == 45:
                return reapply({"op_id": "label_rotation", "params": {"angle": 90}})
            return replan("axis_transposition")
        if axis.scale.continuous:
            visible = max(len(axis.ticks) - 1, 2)
            prev = _step_params(plan, "tick_decimation", orientation=axis.orientation)
            if prev is not None:
                visible = max(min(visible, int(prev["max_count"]) - 1), 2)
            return reapply({"op_id": "tick_decimation",
                            "params": {"max_count": visible, "orientation": axis.orientation}})
    if "label" in (a.kind, b.kind):
        return reapply({"op_id": "label_externalization", "params": {}})
    blocks = [i.id for i in (a, b) if i.kind == "block"]
    if blocks:
        return reapply({"op_id": "text_wrapping",
                        "params": {"blocks": blocks, "max_width": scene.viewport.content.w}})
    return replan()


def _containment_route(scene: VisScene, panel_id: Optional[str], element: str) -> Dict[str, object]:
    panel = next((p for p in scene.panels if p.id == panel_id), None)
    if panel is None:
        blk = scene.block(element)
        if blk is not None:
            return reapply({"op_id": "text_wrapping",
                            "params": {"blocks": [element], "max_width": scene.viewport.content.w}})
        return replan()
    x = panel.x_axis
    if x is not None and x.scale.kind == "band" and not panel.transposed:
        return replan("axis_transposition")
    if panel.logical_width is not None:
        return replan("sample_data")
    return replan("viewport_decoupling")


# -- checks --------------------------------------------------------------------------------


def check_data_fidelity(expected: RecoveredDataset, scene: VisScene, thresholds: Thresholds = Thresholds(),
                        fm: FontMetrics = DEFAULT_METRICS) -> List[Issue]:
    """Emit the scene, recover it again and compare against the input dataset."""
    try:
        got = recover_svg(emit_svg(scene, fm)).dataset
    except (RecoveryError, ValueError) as exc:
        return [Issue("data_fidelity", "hard", "output is not recoverable: %s" % exc,
                      {"elements": [], "error": str(exc)}, replan())]
    diff = compare_datasets(expected, got, thresholds.fidelity_rtol, subset=scene.sampled)
    if diff.ok:
        return []
    detail = "; ".join(diff.problems) or "%d expected rows unmatched, %d recovered rows unmatched" % (
        len(diff.missing), len(diff.extra))
    return [Issue("data_fidelity", "hard", "recovered data differs from input: " + detail,
                  {"elements": [], "missing_rows": diff.missing[:20], "extra_rows": diff.extra[:20]}, replan())]


def check_plan_adherence(plan: TransformPlan, scene: VisScene) -> List[Issue]:
    planned, applied = Counter(plan.op_ids), Counter(scene.applied_ops)
    out = []
    for op in sorted((planned - applied) + (applied - planned)):
        which = "missing" if planned[op] > applied[op] else "unplanned"
        out.append(Issue("plan_adherence", "hard", "%s operator %s" % (which, op),
                         {"elements": [op], "planned": planned[op], "applied": applied[op]}, replan()))
    return out


def _group(entries: Sequence[Tuple[Dict[str, object], str]]) -> List[Tuple[Dict[str, object], List[str]]]:
    """Collect element ids that share a route, keeping first-seen order."""
    out: List[Tuple[Dict[str, object], List[str]]] = []
    for route_, eid in entries:
        for r, ids in out:
            if r == route_:
                if eid not in ids:
                    ids.append(eid)
                break
        else:
            out.append((route_, [eid]))
    return out


def overlapping_pairs(items: Sequence[TextItem]) -> List[Tuple[TextItem, TextItem]]:
    order = sorted(items, key=lambda t: t.box.x)
    pairs = []
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            if b.box.x >= a.box.right:
                break
            if a.box.intersection_area(b.box) > 1e-6:
                pairs.append((a, b))
    return pairs


def _background_under(scene: VisScene, x: float, y: float) -> Color:
    for p in scene.panels:
        for layer in p.layers:
            for m in layer.marks:
                if m.kind == "bar" and m.x <= x <= m.x + m.w and m.y <= y <= m.y + m.h:
                    return m.fill or layer.color
        pa = p.plot_area
        if pa.x <= x <= pa.right and pa.y <= y <= pa.bottom:
            return PLOT_BG
    return scene.background


def check_text_readability(scene: VisScene, thresholds: Thresholds = Thresholds(),
                           plan: Optional[TransformPlan] = None, fm: FontMetrics = DEFAULT_METRICS) -> List[Issue]:
    items = text_items(scene, fm)
    issues: List[Issue] = []
    small = [t for t in items if t.font_size < thresholds.min_font - 1e-9]
    if small:
        issues.append(Issue(
            "text_readability", "hard", "%d text elements below %gpx" % (len(small), thresholds.min_font),
            {"elements": [t.id for t in small], "font_sizes": sorted({t.font_size for t in small})},
            reapply({"layout": {"font_floor": thresholds.min_font}})))

    by_route: Dict[str, List[Tuple[str, str]]] = {}
    routes: Dict[str, Dict[str, object]] = {}
    for a, b in overlapping_pairs(items):
        r = _overlap_route(scene, a, b, plan)
        key = json.dumps(r, sort_keys=True)
        routes[key] = r
        by_route.setdefault(key, []).append(tuple(sorted((a.id, b.id))))
    for key, pairs in by_route.items():
        ids = sorted({i for pair in pairs for i in pair})
        issues.append(Issue("text_readability", "hard", "%d overlapping text pairs" % len(pairs),
                            {"elements": ids, "pairs": [list(p) for p in sorted(pairs)[:20]]}, routes[key]))

    region = allowed_region(scene)
    crossing = [(_containment_route(scene, t.panel, t.id), t.id) for t in items if _outside(t.box, region)]
    for r, ids in _group(crossing):
        issues.append(Issue("text_readability", "hard", "%d text elements cross the visible boundary" % len(ids),
                            {"elements": sorted(ids), "region": list(region)}, r))

    low = []
    for t in items:
        ratio = contrast_ratio(t.color, _background_under(scene, t.box.cx, t.box.cy))
        if ratio < MIN_CONTRAST:
            low.append((t.id, round(ratio, 2)))
    if low:
        issues.append(Issue("text_readability", "soft", "%d text elements with contrast below %g:1"
                            % (len(low), MIN_CONTRAST), {"elements": [i for i, _ in low],
                                                          "ratios": [r for _, r in low]}))
    return issues


def panel_box(panel, fm: FontMetrics = DEFAULT_METRICS) -> Rect:
    """Visible plot area plus its axes and header."""
    pa = panel.plot_area
    boxes = [Rect(pa.x, pa.y, panel.view_width or pa.w, pa.h)]
    for _, a in panel.axes():
        boxes.extend(tick_label_box(a, t, fm) for t in a.ticks)
    if panel.header is not None:
        boxes.append(block_box(panel.header, fm))
    u = union_rect(boxes)
    if panel.view_width:
        right = pa.x + panel.view_width
        u = Rect(u.x, u.y, max(min(u.right, right), pa.x + 1) - u.x, u.h)
    return u


def layout_blocks(scene: VisScene, fm: FontMetrics = DEFAULT_METRICS) -> List[Tuple[str, Rect]]:
    out = [(b.id or b.role, block_box(b, fm)) for b in (scene.title, scene.subtitle, *scene.annotations) if b]
    out.extend((p.id, panel_box(p, fm)) for p in scene.panels)
    lg = scene.legend
    if lg is not None and lg.item_boxes:
        boxes = [sw for sw in lg.item_boxes if sw is not None]
        boxes += [text_box(label, lg.font_size, legend_label_anchor(lg, sw, fm), "start", 0.0, fm)
                  for (_, label), sw in zip(lg.entries, lg.item_boxes) if sw is not None]
        out.append(("legend", union_rect(boxes)))
    return out


def utilization(scene: VisScene, fm: FontMetrics = DEFAULT_METRICS) -> float:
    """Share of the occupied content box taken by panels."""
    blocks = layout_blocks(scene, fm)
    used = union_rect([r for _, r in blocks])
    if used is None or used.w * used.h <= 0:
        return 0.0
    panels = sum(panel_box(p, fm).w * panel_box(p, fm).h for p in scene.panels)
    return min(panels / (used.w * used.h), 1.0)


def check_aesthetics(scene: VisScene, thresholds: Thresholds = Thresholds(),
                     fm: FontMetrics = DEFAULT_METRICS) -> List[Issue]:
    issues: List[Issue] = []
    u = utilization(scene, fm)
    if scene.panels and u < MIN_UTILIZATION:
        issues.append(Issue("aesthetics", "soft", "panels fill %.0f%% of the content box" % (100 * u),
                            {"elements": [p.id for p in scene.panels], "utilization": round(u, 4)}))

    blocks = layout_blocks(scene, fm)
    tight = []
    for i, (ia, ra) in enumerate(blocks):
        for ib, rb in blocks[i + 1:]:
            g = ra.gap(rb)
            if g < MIN_MARGIN:
                tight.append((ia, ib, round(g, 2)))
    for ia, ib, g in tight:
        issues.append(Issue("aesthetics", "soft", "blocks %s and %s are %gpx apart" % (ia, ib, g),
                            {"elements": [ia, ib], "gap": g}))

    stray = []
    for p in scene.panels:
        pa = p.plot_area
        for li, layer in enumerate(p.layers):
            for i, m in enumerate(layer.marks):
                if m.kind == "label":
                    continue
                box = Rect(m.x, m.y, 0.0, 0.0) if m.kind == "point" else mark_box(m, fm)
                if not pa.contains(box, 0.5 + m.stroke_width / 2):
                    stray.append("m-%s-%d-%d" % (p.id, li, i))
    if stray:
        issues.append(Issue("aesthetics", "soft", "%d marks drawn outside their plot area" % len(stray),
                            {"elements": stray[:50]}))

    region = allowed_region(scene)
    outside = [(_containment_route(scene, pid, eid), eid)
               for eid, box, pid in geometry_items(scene, fm) if _outside(box, region)]
    for r, ids in _group(outside):
        issues.append(Issue("aesthetics", "hard", "%d elements outside the viewport without scrolling" % len(ids),
                            {"elements": sorted(ids), "region": list(region)}, r))
    return issues


# -- routing -------------------------------------------------------------------------------

ESCALATION_ORDER = ("axis_transposition", "viewport_decoupling", "sample_data")
MAX_ITERATIONS = 3


def route(issues: Sequence[Issue]) -> Dict[str, object]:
    """Single decision for a set of issues: replan beats reapply beats pass."""
    hard = [i for i in issues if i.severity == "hard"]
    if not hard:
        return {"action": "pass"}
    replans = [i.route for i in hard if i.route["action"] == "replan"]
    if replans:
        forced = {op for r in replans for op in r["force"]}
        first = next((op for op in ESCALATION_ORDER if op in forced), None)
        return replan(*([first] if first else []))
    merged: Dict[str, dict] = {}
    for i in hard:
        for adj in i.route["adjustments"]:
            key = adj.get("op_id") or "layout"
            params = adj.get("params") or {}
            if "orientation" in params:
                key += ":" + params["orientation"]
            merged[key] = adj
    return reapply(*[merged[k] for k in sorted(merged)])


def critique(scene: VisScene, plan: TransformPlan, expected: Optional[RecoveredDataset],
             thresholds: Thresholds = Thresholds(), iteration: int = 0,
             fm: FontMetrics = DEFAULT_METRICS) -> CritiqueReport:
    issues: List[Issue] = []
    if expected is not None:
        issues += check_data_fidelity(expected, scene, thresholds, fm)
    issues += check_plan_adherence(plan, scene)
    issues += check_text_readability(scene, thresholds, plan, fm)
    issues += check_aesthetics(scene, thresholds, fm)
    snapshot = compute_metrics(scene, plan.target, thresholds, fm).to_dict()
    return CritiqueReport(tuple(sorted(issues, key=Issue.sort_key)), snapshot, iteration)
