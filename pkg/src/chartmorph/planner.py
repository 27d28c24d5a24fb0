"""Constraint metrics and the rule-based transformation planner."""

from __future__ import annotations

import copy
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .abbrev import MONTH_ABBR, MONTHS, op_semantic_abbreviation
from .ir import Axis, Layer, Panel, Viewport, VisScene
from .layout import default_tick_values, layer_rows, legend_chip_rows, legend_width, mobile_plot_height, \
    tick_labels
from .measure import DEFAULT_METRICS, FontMetrics, estimate_text_width
from .registry import LEVEL, validate_params
from .segment import Topology, scene_topology
from .ticks import decimate_values, visible_count

MIN_LABEL_GAP = 8.0


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class Thresholds:
    min_band: float = 24.0
    max_density: float = 25.0
    max_ticks: int = 5
    min_cell_width: float = 280.0
    max_series: int = 4
    max_points: int = 300
    min_font: float = 12.0
    min_point_r: float = 3.0
    min_bar_width: float = 8.0
    min_stroke: float = 1.5
    max_context_chars: int = 140
    max_label_frac: float = 0.35
    min_point_spacing: float = 4.0
    chips_per_row: int = 4
    constriction_fraction: float = 0.25
    hit_radius: float = 22.0
    fidelity_rtol: float = 1e-2
    seed: int = 0

    @classmethod
    def from_mapping(cls, values: Dict[str, object]) -> "Thresholds":
        known = {f.name: f.type for f in fields(cls)}
        out = {}
        for k, v in values.items():
            if k not in known:
                raise PlanError("unknown threshold %r" % k)
            default = getattr(cls, k)
            try:
                out[k] = type(default)(v)
            except (TypeError, ValueError):
                raise PlanError("threshold %s: cannot use %r" % (k, v)) from None
            if out[k] < 0 or (k != "seed" and out[k] == 0):
                raise PlanError("threshold %s must be positive" % k)
        return cls(**out)


# -- metrics -----------------------------------------------------------------------


@dataclass
class AxisMetrics:
    panel: str
    key: str
    orientation: str
    kind: str
    extent: float  # physical pixels available along the axis
    labels: Tuple[str, ...] = ()
    font_size: float = 12.0
    label_angle: int = 0
    category_count: int = 0
    ordered: bool = False
    tick_count: int = 0
    fits: int = 0
    min_band_px: float = 0.0
    max_label_width_px: float = 0.0
    label_slot_px: float = 0.0
    label_overflow: bool = False
    label_too_wide: bool = False
    domain: Optional[Tuple[float, float]] = None
    tick_values: Tuple[float, ...] = ()
    band_min: float = 0.0
    window: Optional[float] = None  # visible domain span when the axis scrolls


@dataclass
class PanelMetrics:
    panel: str
    kinds: Tuple[str, ...]
    cell_width: float
    logical_width: float
    mark_count: int = 0
    series_mark_max: int = 0
    marks_per_100px: float = 0.0
    y_scale_count: int = 1
    mixed_kinds: bool = False
    min_point_r: Optional[float] = None
    min_bar_width_px: Optional[float] = None
    min_stroke: Optional[float] = None
    bar_series: int = 1
    bar_padding: float = 0.2
    label_count: int = 0
    label_overlap: bool = False
    label_overlap_raw: bool = False
    labels_external: bool = False
    logical_raw: float = 0.0
    total: int = 0
    series_max: int = 0
    bar_key: Optional[str] = None


@dataclass
class ConstraintMetrics:
    content_width: float
    content_height: float
    rows: int
    cols: int
    legend_position: Optional[str]
    legend_width_px: float
    legend_footprint_ratio: float
    series_count: int
    wide_blocks: Tuple[str, ...]
    long_blocks: Tuple[str, ...]
    min_font_px: float
    n_panels: int = 1
    legend_top_ratio: float = 0.0
    axes: List[AxisMetrics] = field(default_factory=list)
    panels: List[PanelMetrics] = field(default_factory=list)

    @property
    def region_width(self) -> float:
        return self.content_width - self.legend_width_px

    @property
    def cell_width(self) -> float:
        # per-column share of the region, gutters included
        return self.region_width / self.cols

    def to_dict(self) -> dict:
        d = asdict(self)
        for a in d["axes"]:
            a["labels"] = list(a["labels"])
        return _round(d)


def _round(obj):
    if isinstance(obj, float):
        return round(obj, 4)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


_QUARTER = re.compile(r"^Q([1-4])(?:\s+\d{4})?$")


def categories_ordered(cats: Sequence[object]) -> bool:
    """True when band categories have an intrinsic order (months, quarters, years, numbers)."""
    if len(cats) < 2:
        return False
    names = [str(c).strip() for c in cats]
    lower = {m.lower(): i for i, m in enumerate(MONTHS)}
    lower.update({m.lower(): i for i, m in enumerate(MONTH_ABBR)})
    if all(n.lower() in lower for n in names):
        return True
    if all(_QUARTER.match(n) for n in names):
        return True
    try:
        vals = [float(n) for n in names]
    except ValueError:
        return False
    return vals == sorted(vals)


def named_blocks(scene: VisScene) -> List[Tuple[str, object]]:
    """Title, subtitle and annotation blocks keyed by id (role or position when unnamed)."""
    out = []
    if scene.title is not None:
        out.append((scene.title.id or "title", scene.title))
    if scene.subtitle is not None:
        out.append((scene.subtitle.id or "subtitle", scene.subtitle))
    for i, b in enumerate(scene.annotations):
        out.append((b.id or "annotation-%d" % i, b))
    return out


def axis_tick_values(axis: Axis) -> List:
    if axis.ticks:
        return [t.value for t in axis.ticks]
    return default_tick_values(axis.scale)


def _axis_metrics(panel: Panel, key: str, axis: Axis, floor: float = 0.0) -> AxisMetrics:
    sc = axis.scale
    font = max(axis.font_size, floor)
    if sc.kind == "band":
        cats = list(sc.domain)
        return AxisMetrics(panel.id, key, axis.orientation, "band", 0.0,
                           labels=tuple(axis.display(c) for c in cats), font_size=font,
                           label_angle=axis.label_angle, category_count=len(cats),
                           ordered=categories_ordered(cats))
    values = axis_tick_values(axis)
    am = AxisMetrics(panel.id, key, axis.orientation, sc.kind, 0.0,
                     labels=tuple(tick_labels(axis, values)), font_size=font,
                     label_angle=axis.label_angle, tick_count=len(values))
    am.domain = (float(sc.domain[0]), float(sc.domain[1]))
    am.tick_values = tuple(float(v) for v in values)
    return am


def _row_counts(scene: VisScene, panel: Panel, layer: Layer) -> Tuple[int, int]:
    """(total, largest per-series) data rows drawn by a layer."""
    ds = scene.dataset
    if ds is None:
        n = len(layer.marks)
        per: Dict[object, int] = {}
        for m in layer.marks:
            per[m.series] = per.get(m.series, 0) + 1
        return n, max(per.values(), default=0)
    rows = layer_rows(scene, panel, layer)
    if layer.series_field is None:
        return len(rows), len(rows)
    si = ds.index(layer.series_field)
    per = {}
    for r in rows:
        per[ds.rows[r][si]] = per.get(ds.rows[r][si], 0) + 1
    return len(rows), max(per.values(), default=0)


def _label_overlap(panel: Panel, layer: Layer, logical_w: float, height: float, fm: FontMetrics,
                   floor: float = 0.0) -> bool:
    if layer.label_mode != "inline" or len(layer.marks) < 2:
        return False
    plot = panel.plot_area
    boxes = []
    for m in layer.marks:
        x = (m.x - plot.x) / plot.w * logical_w if plot.w else m.x
        y = (m.y - plot.y) / plot.h * height if plot.h else m.y
        f = max(m.font_size, floor)
        w = estimate_text_width(m.text or "", f, fm)
        boxes.append((x - w / 2, x + w / 2, y - f, y - f + fm.line_height(f)))
    boxes.sort()
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            if b[0] >= a[1]:
                break
            if b[2] < a[3] and a[2] < b[3]:
                return True
    return False


def compute_metrics(scene: VisScene, target: Viewport, thresholds: Thresholds = Thresholds(),
                    fm: FontMetrics = DEFAULT_METRICS) -> ConstraintMetrics:
    content = target.content
    fl = scene.font_floor or 0.0
    legend = scene.legend
    if legend is not None and legend.font_size < fl:
        legend = replace(legend, font_size=fl)
    lw = 0.0
    ratio = 0.0
    if legend is not None and legend.position in ("left", "right"):
        lw = legend_width(legend, fm)
        ratio = lw / content.w
    top_ratio = 0.0
    if legend is not None:
        rh = max(fm.line_height(legend.font_size), 10.0) + 4.0
        chips = replace(legend, chips_per_row=thresholds.chips_per_row)
        top_ratio = len(legend_chip_rows(chips, content.w, fm)) * rh / content.h
        if legend.position not in ("left", "right"):
            ratio = len(legend_chip_rows(legend, content.w, fm)) * rh / content.h
    series = len(legend.entries) if legend is not None else 0
    for p in scene.panels:
        for layer in p.layers:
            series = max(series, len(layer.series_order))
    fonts = [max(b.font_size, fl) for b in scene.text_blocks()]
    if legend is not None:
        fonts.append(legend.font_size)
    for p in scene.panels:
        fonts.extend(max(a.font_size, fl) for _, a in p.axes())
        fonts.extend(max(l.font_size, fl) for l in p.layers if l.mark_kind == "label")
    wide, long_ = [], []
    for key, b in named_blocks(scene):
        if max(estimate_text_width(s, max(b.font_size, fl), fm) for s in b.lines) > content.w + 0.5:
            wide.append(key)
        if b.role != "title" and not b.collapsed and len(b.text) > thresholds.max_context_chars:
            long_.append(key)
    rows, cols = scene.grid
    m = ConstraintMetrics(content.w, content.h, rows, cols, legend.position if legend else None, lw, ratio,
                          series, tuple(wide), tuple(long_), min(fonts, default=thresholds.min_font))
    for p in scene.panels:
        for key, axis in p.axes():
            am = _axis_metrics(p, key, axis, fl)
            am.band_min = p.min_band or 0.0
            m.axes.append(am)
        data = [l for l in p.layers if l.mark_kind != "label"]
        kinds = tuple(dict.fromkeys(l.mark_kind for l in data))
        pm = PanelMetrics(p.id, kinds, 0.0, 0.0)
        pm.logical_raw = p.logical_width or 0.0
        pm.total = pm.series_max = 0
        for l in data:
            t, s = _row_counts(scene, p, l)
            pm.total += t
            pm.series_max = max(pm.series_max, s)
        pm.y_scale_count = len({l.y_scale_id for l in data}) or 1
        pm.mixed_kinds = len(kinds) > 1
        pts = [l.point_r for l in data if l.mark_kind == "point"]
        strokes = [l.stroke_width for l in data if l.mark_kind in ("line-vertex", "area-vertex")]
        bars = [l for l in data if l.mark_kind == "bar"]
        pm.min_point_r = min(pts) if pts else None
        pm.min_stroke = min(strokes) if strokes else None
        pm.bar_key = None
        if bars:
            pm.bar_key = bars[0].x_scale_id
            pm.bar_series = max(1, len(bars[0].series_order) if bars[0].series_field else 1)
            pm.bar_padding = bars[0].bar_padding
        labels = [l for l in p.layers if l.mark_kind == "label"]
        pm.label_count = sum(len(l.marks) for l in labels)
        pm.labels_external = bool(labels) and all(l.label_mode == "indexed" for l in labels)
        if labels and not pm.labels_external:
            cell = (content.w - lw) / cols
            lwid = max(cell, pm.logical_raw)
            h = mobile_plot_height(cell, len(scene.panels) > 1)
            pm.label_overlap_raw = any(_label_overlap(p, l, lwid, h, fm, fl) for l in labels)
        m.panels.append(pm)
    m.n_panels = len(scene.panels)
    m.legend_top_ratio = top_ratio
    return derive(m, thresholds, fm)


def _hextent(width: float, lh: float, angle: int) -> float:
    if angle == 0:
        return width
    if angle == 90:
        return lh
    return (width + lh) * math.sqrt(0.5)


def derive(m: ConstraintMetrics, thr: Thresholds, fm: FontMetrics = DEFAULT_METRICS) -> ConstraintMetrics:
    """Recompute every derived quantity from the raw fields."""
    cell = m.cell_width
    stacked = m.n_panels > 1
    plot_h = mobile_plot_height(cell, stacked)
    logical = {}
    for p in m.panels:
        p.cell_width = cell
        p.logical_width = max(cell, p.logical_raw)
        logical[p.panel] = p.logical_width
    for a in m.axes:
        lh = fm.line_height(a.font_size)
        widths = [estimate_text_width(s, a.font_size, fm) for s in a.labels] or [0.0]
        a.max_label_width_px = max(widths)
        if a.orientation == "horizontal":
            a.extent = cell
        elif a.kind == "band":
            a.extent = m.content_height
        else:
            a.extent = plot_h
        if a.kind == "band":
            n = max(a.category_count, 1)
            span = a.extent
            if a.orientation == "horizontal":
                span = max(logical.get(a.panel, cell), n * a.band_min)
            a.min_band_px = span / n
            if a.orientation == "horizontal":
                a.label_overflow = _hextent(a.max_label_width_px, lh, a.label_angle) > a.min_band_px
                a.label_slot_px = a.min_band_px if a.label_angle == 0 else thr.max_label_frac * m.content_width
            else:
                a.label_overflow = lh > a.min_band_px
                a.label_slot_px = thr.max_label_frac * m.content_width
            a.label_too_wide = a.max_label_width_px > a.label_slot_px + 1e-9
            continue
        window = None
        if a.orientation == "horizontal":
            lw = logical.get(a.panel, cell)
            if lw > cell + 0.5:
                lo, hi = a.domain
                window = (hi - lo) * cell / lw
            a.fits = max(1, int(a.extent // (a.max_label_width_px + MIN_LABEL_GAP)))
        else:
            a.fits = max(1, int(a.extent // (lh + MIN_LABEL_GAP)))
        a.tick_count = visible_count(a.tick_values, window)
        a.window = window
        a.label_overflow = a.tick_count > min(thr.max_ticks, a.fits)
    for p in m.panels:
        lw = p.logical_width
        p.mark_count = p.total
        p.series_mark_max = p.series_max
        p.marks_per_100px = (p.series_max if _is_line(p) else p.total) / (lw / 100.0) if lw else 0.0
        p.min_bar_width_px = None
        if p.bar_key is not None:
            key = next((a for a in m.axes if a.panel == p.panel and a.key == p.bar_key), None)
            if key is not None and key.kind == "band":
                p.min_bar_width_px = key.min_band_px * (1 - p.bar_padding) / p.bar_series
        p.label_overlap = p.label_overlap_raw and not p.labels_external
    return m


def _is_line(p: PanelMetrics) -> bool:
    return any(k in ("line-vertex", "area-vertex") for k in p.kinds)


# -- plan ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorApplication:
    op_id: str
    level: int
    params: Dict[str, object] = field(default_factory=dict)
    trigger: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if LEVEL.get(self.op_id) != self.level:
            raise PlanError("operator %s is level %s, not %s" % (self.op_id, LEVEL.get(self.op_id), self.level))
        try:
            validate_params(self.op_id, self.params)
        except ValueError as exc:
            raise PlanError(str(exc)) from None

    def to_dict(self) -> dict:
        return {"op_id": self.op_id, "level": self.level, "params": dict(self.params),
                "trigger": _round(dict(self.trigger))}


@dataclass(frozen=True)
class TransformPlan:
    steps: Tuple[OperatorApplication, ...]
    target: Viewport
    escalation_round: int = 0
    layout: Dict[str, object] = field(default_factory=dict)  # scene-wide settings, e.g. font floor
    warnings: Tuple[str, ...] = ()
    topology: str = "unknown"

    def __post_init__(self) -> None:
        if self.escalation_round < 0:
            raise PlanError("escalation_round must be >= 0")
        levels = [s.level for s in self.steps]
        if levels != sorted(levels):
            raise PlanError("plan steps must be sorted by level")
        ids = self.op_ids
        if "axis_transposition" in ids and "mark_transmutation" in ids:
            raise PlanError("axis_transposition and mark_transmutation are mutually exclusive")
        if "axis_transposition" in ids and "label_rotation" in ids:
            raise PlanError("axis_transposition and label_rotation are mutually exclusive")

    @property
    def op_ids(self) -> Tuple[str, ...]:
        return tuple(s.op_id for s in self.steps)

    def to_dict(self) -> dict:
        t = self.target
        return {
            "target": {"width": t.width, "height": t.height, "content_inset": list(t.inset)},
            "escalation_round": self.escalation_round,
            "steps": [s.to_dict() for s in self.steps],
            "topology": self.topology,
            "layout": dict(self.layout),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransformPlan":
        try:
            t = d["target"]
            target = Viewport(float(t["width"]), float(t["height"]),
                              tuple(float(v) for v in t.get("content_inset", (16, 16, 16, 16))))
            steps = tuple(OperatorApplication(s["op_id"], int(s["level"]), dict(s.get("params", {})),
                                              dict(s.get("trigger", {}))) for s in d["steps"])
            return cls(steps, target, int(d.get("escalation_round", 0)), dict(d.get("layout", {})),
                       tuple(d.get("warnings", ())), str(d.get("topology", "unknown")))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, PlanError):
                raise
            raise PlanError("malformed plan: %s" % exc) from None


# -- closed-form simulation -------------------------------------------------------------


def _relabel_linear(values: Sequence[float]) -> Tuple[str, ...]:
    from .ticks import format_number, step_decimals
    if len(values) >= 2:
        d = step_decimals(min(abs(b - a) for a, b in zip(values, values[1:])))
    else:
        d = 0
    return tuple(format_number(v, d) for v in values)


def simulate_step(m: ConstraintMetrics, step: OperatorApplication, thr: Thresholds = Thresholds(),
                  fm: FontMetrics = DEFAULT_METRICS) -> ConstraintMetrics:
    """Metrics after ``step``, computed without touching the scene."""
    m = copy.deepcopy(m)
    op, prm = step.op_id, step.params
    if op == "grid_reflow":
        m.cols = int(prm["cols"])
        m.rows = math.ceil(m.n_panels / m.cols)
    elif op == "axis_transposition":
        flipped = set()
        for a in m.axes:
            if a.kind == "band" and a.orientation == "horizontal":
                flipped.add(a.panel)
        for a in m.axes:
            if a.panel not in flipped:
                continue
            if a.key in ("x", "y"):
                a.orientation = "vertical" if a.orientation == "horizontal" else "horizontal"
                a.key = "y" if a.key == "x" else "x"
            if a.kind == "band":
                a.label_angle = 0
                a.band_min = max(thr.min_band, fm.line_height(a.font_size))
        for p in m.panels:
            if p.panel in flipped and p.bar_key is not None:
                p.bar_key = "y" if p.bar_key == "x" else "x"
    elif op == "mark_transmutation":
        for p in m.panels:
            if p.bar_key is not None and p.bar_series > 1:
                p.kinds = tuple("line-vertex" if k == "bar" else k for k in p.kinds)
                p.series_max = math.ceil(p.total / p.bar_series)
                p.bar_key = None
    elif op == "layout_serialization":
        extra = []
        for p in m.panels:
            if p.y_scale_count > 1 or p.mixed_kinds:
                q = copy.deepcopy(p)
                q.panel = p.panel + "-1"
                extra.append(q)
                p.y_scale_count = q.y_scale_count = 1
                p.mixed_kinds = q.mixed_kinds = False
                for a in [a for a in m.axes if a.panel == p.panel and a.key in ("x", "y2")]:
                    b = copy.deepcopy(a)
                    b.panel = q.panel
                    b.key = "y" if a.key == "y2" else a.key
                    m.axes.append(b)
                m.axes = [a for a in m.axes if not (a.panel == p.panel and a.key == "y2")]
        m.panels.extend(extra)
        m.n_panels += len(extra)
        m.rows, m.cols = m.n_panels, 1
    elif op == "viewport_decoupling":
        for p in m.panels:
            p.logical_raw = float(prm["logical_width"])
    elif op == "tick_decimation":
        k = int(prm["max_count"])
        m = derive(m, thr, fm)
        for a in m.axes:
            if a.kind == "band" or a.orientation != prm["orientation"] or a.tick_count <= k:
                continue
            lo, hi = a.domain
            vals = decimate_values(a.kind, lo, hi, a.tick_values, k, a.window)
            if a.kind == "linear":
                a.labels = _relabel_linear(vals)
            else:
                keep = {v: s for v, s in zip(a.tick_values, a.labels)}
                a.labels = tuple(keep[v] for v in vals)
            a.tick_values = tuple(vals)
    elif op == "label_rotation":
        for a in m.axes:
            if a.kind == "band" and a.orientation == "horizontal":
                a.label_angle = int(prm["angle"])
    elif op == "legend_repositioning":
        m.legend_position = prm["position"]
        m.legend_width_px = 0.0
        m.legend_footprint_ratio = m.legend_top_ratio
    elif op == "semantic_abbreviation":
        for a in m.axes:
            if a.kind == "band":
                a.labels = op_semantic_abbreviation(a.labels)
    elif op == "label_externalization":
        for p in m.panels:
            p.labels_external = True
    elif op == "text_wrapping":
        m.wide_blocks = tuple(b for b in m.wide_blocks if b not in prm["blocks"])
    elif op == "element_rescaling":
        for p in m.panels:
            if p.min_point_r is not None:
                p.min_point_r = max(p.min_point_r, float(prm["min_point_r"]))
            if p.min_stroke is not None:
                p.min_stroke = max(p.min_stroke, float(prm["min_stroke"]))
        m = derive(m, thr, fm)
        for p in m.panels:
            key = next((a for a in m.axes if a.panel == p.panel and a.key == p.bar_key), None)
            if key is not None and key.kind == "band":
                p.bar_padding = rescaled_padding(p.bar_padding, key.min_band_px, p.bar_series,
                                                 float(prm["min_bar_width"]))
    elif op == "sample_data":
        k = int(prm["max_points"])
        for p in m.panels:
            if p.total > k:
                p.series_max = math.ceil(p.series_max * k / p.total)
                p.total = k
    elif op == "context_collapsing":
        m.long_blocks = tuple(b for b in m.long_blocks if b not in prm["blocks"])
    return derive(m, thr, fm)


def rescaled_padding(padding: float, step: float, k: int, min_width: float) -> float:
    """Band padding that lets each of ``k`` bars in a ``step``-wide slot reach ``min_width``."""
    if step <= 0 or step * (1 - padding) / k >= min_width:
        return padding
    return max(0.05, min(padding, 1 - min_width * k / step))


# -- rules --------------------------------------------------------------------------------

LINE_KINDS = ("line", "multi-line")


@dataclass(frozen=True)
class RuleContext:
    kind: str  # chart kind, or the inner kind of a faceted chart
    planned: Tuple[str, ...]
    thr: Thresholds
    fm: FontMetrics = DEFAULT_METRICS


Fired = List[Tuple[Dict[str, object], Dict[str, object]]]  # (params, trigger) per step


def _band_x(m: ConstraintMetrics) -> List[AxisMetrics]:
    return [a for a in m.axes if a.kind == "band" and a.orientation == "horizontal"]


def _r_reflow(m, ctx) -> Fired:
    if m.cols > 1 and m.cell_width < ctx.thr.min_cell_width:
        return [({"cols": 1}, {"rule": "L1-a", "cols": m.cols, "facet_cell_width": m.cell_width})]
    return []


def _r_transpose(m, ctx) -> Fired:
    for a in _band_x(m):
        if ctx.kind == "grouped-bar" and a.ordered:
            continue  # ordered groups go through transmutation instead
        lh = ctx.fm.line_height(a.font_size)
        need = a.category_count * ctx.thr.min_band
        overlap90 = lh > a.min_band_px
        if overlap90 or (need > m.cell_width and a.category_count >= 8):
            return [({}, {"rule": "L1-b", "category_count": a.category_count, "required_px": need,
                          "content_width": m.cell_width, "min_band_px": a.min_band_px,
                          "overlap_at_90": overlap90})]
    return []


def _r_transmute(m, ctx) -> Fired:
    if ctx.kind != "grouped-bar" or "axis_transposition" in ctx.planned:
        return []
    for p in m.panels:
        key = next((a for a in m.axes if a.panel == p.panel and a.key == p.bar_key), None)
        if key is None or not key.ordered or p.min_bar_width_px is None:
            continue
        if p.min_bar_width_px < ctx.thr.min_bar_width:
            return [({}, {"rule": "L1-c", "bar_width_px": p.min_bar_width_px, "ordered": True})]
    return []


def _r_serialize(m, ctx) -> Fired:
    for p in m.panels:
        if p.y_scale_count > 1 or p.mixed_kinds:
            return [({}, {"rule": "L1-d", "panel": p.panel, "y_scales": p.y_scale_count,
                          "mark_kinds": list(p.kinds)})]
    return []


def _dense(m, ctx) -> List[PanelMetrics]:
    if ctx.kind not in LINE_KINDS:
        return []
    return [p for p in m.panels if p.marks_per_100px > ctx.thr.max_density]


def _r_constrict(m, ctx) -> Fired:
    dense = _dense(m, ctx)
    if dense:
        p = dense[0]
        return [({"fraction": ctx.thr.constriction_fraction},
                 {"rule": "L2-a", "marks_per_100px": p.marks_per_100px, "max_density": ctx.thr.max_density})]
    return []


def _r_decouple(m, ctx) -> Fired:
    dense = _dense(m, ctx)
    if dense:
        n = max(p.series_mark_max for p in dense)
        return [({"logical_width": round(n * ctx.thr.min_point_spacing, 2)},
                 {"rule": "L2-b", "marks_per_100px": max(p.marks_per_100px for p in dense), "points": n})]
    return []


def _r_ticks(m, ctx) -> Fired:
    out = []
    for orient in ("horizontal", "vertical"):
        hit = [a for a in m.axes if a.kind != "band" and a.orientation == orient and a.label_overflow]
        if hit:
            target = min(min(ctx.thr.max_ticks, a.fits) for a in hit)
            a = hit[0]
            out.append(({"max_count": max(1, target), "orientation": orient},
                        {"rule": "L2-c", "tick_count": a.tick_count, "fits": a.fits,
                         "max_ticks": ctx.thr.max_ticks}))
    return out


def _r_rotate(m, ctx) -> Fired:
    if "axis_transposition" in ctx.planned:
        return []
    hit = [a for a in _band_x(m) if a.label_overflow]
    if not hit:
        return []
    angle = 45
    for a in hit:
        lh = ctx.fm.line_height(a.font_size)
        if _hextent(a.max_label_width_px, lh, 45) > a.min_band_px:
            angle = 90
    a = hit[0]
    return [({"angle": angle}, {"rule": "L2-d", "max_label_width_px": a.max_label_width_px,
                                "min_band_px": a.min_band_px, "label_angle": a.label_angle})]


def _r_legend(m, ctx) -> Fired:
    if m.legend_position in ("left", "right"):
        return [({"position": "top"}, {"rule": "L2-e", "legend_position": m.legend_position,
                                       "legend_footprint_ratio": m.legend_footprint_ratio})]
    return []


def _r_tooltip(m, ctx) -> Fired:
    why = [o for o in ("tick_decimation", "element_rescaling", "sample_data") if o in ctx.planned]
    if _r_rescale(m, ctx):
        why.append("element_rescaling")
    if _r_sample(m, ctx):
        why.append("sample_data")
    if why:
        return [({"hit_radius": ctx.thr.hit_radius}, {"rule": "L2-f", "because": sorted(set(why))})]
    return []


def _r_abbreviate(m, ctx) -> Fired:
    for a in m.axes:
        if a.kind == "band" and a.label_too_wide:
            return [({}, {"rule": "L3-a", "max_label_width_px": a.max_label_width_px,
                          "slot_px": a.label_slot_px})]
    return []


def _r_wrap(m, ctx) -> Fired:
    if m.wide_blocks:
        return [({"blocks": list(m.wide_blocks), "max_width": m.content_width},
                 {"rule": "L3-b", "blocks": list(m.wide_blocks), "content_width": m.content_width})]
    return []


def _r_externalize(m, ctx) -> Fired:
    for p in m.panels:
        if p.label_overlap:
            return [({}, {"rule": "L3-c", "panel": p.panel, "labels": p.label_count})]
    return []


def _r_rescale(m, ctx) -> Fired:
    t = ctx.thr
    for p in m.panels:
        small = {}
        if p.min_point_r is not None and p.min_point_r < t.min_point_r:
            small["point_r"] = p.min_point_r
        if p.min_stroke is not None and p.min_stroke < t.min_stroke:
            small["stroke_width"] = p.min_stroke
        if p.min_bar_width_px is not None and p.min_bar_width_px < t.min_bar_width - 1e-9:
            small["bar_width_px"] = p.min_bar_width_px
        if small:
            return [({"min_point_r": t.min_point_r, "min_bar_width": t.min_bar_width, "min_stroke": t.min_stroke},
                     dict(rule="L3-d", panel=p.panel, **small))]
    return []


def _r_sample(m, ctx) -> Fired:
    if "viewport_decoupling" in ctx.planned:
        return []
    for p in m.panels:
        if p.total > ctx.thr.max_points:
            return [({"max_points": ctx.thr.max_points, "seed": ctx.thr.seed},
                     {"rule": "L3-e", "mark_count": p.total, "max_points": ctx.thr.max_points})]
    return []


def _r_filter(m, ctx) -> Fired:
    if m.series_count > ctx.thr.max_series:
        return [({}, {"rule": "L3-f", "series_count": m.series_count, "max_series": ctx.thr.max_series})]
    return []


def _r_collapse(m, ctx) -> Fired:
    if m.long_blocks:
        return [({"blocks": list(m.long_blocks), "max_chars": ctx.thr.max_context_chars},
                 {"rule": "L3-g", "blocks": list(m.long_blocks)})]
    return []


RULES = (
    ("L1-a", "grid_reflow", _r_reflow),
    ("L1-b", "axis_transposition", _r_transpose),
    ("L1-c", "mark_transmutation", _r_transmute),
    ("L1-d", "layout_serialization", _r_serialize),
    ("L2-a", "viewport_constriction", _r_constrict),
    ("L2-b", "viewport_decoupling", _r_decouple),
    ("L2-c", "tick_decimation", _r_ticks),
    ("L2-d", "label_rotation", _r_rotate),
    ("L2-e", "legend_repositioning", _r_legend),
    ("L2-f", "tooltip_enabling", _r_tooltip),
    ("L3-a", "semantic_abbreviation", _r_abbreviate),
    ("L3-b", "text_wrapping", _r_wrap),
    ("L3-c", "label_externalization", _r_externalize),
    ("L3-d", "element_rescaling", _r_rescale),
    ("L3-e", "sample_data", _r_sample),
    ("L3-f", "filter_enabling", _r_filter),
    ("L3-g", "context_collapsing", _r_collapse),
)
RULE_FOR = {op: fn for _, op, fn in RULES}
MINIMAL_OPS = ("legend_repositioning", "text_wrapping", "element_rescaling")


def _forced_params(op: str, m: ConstraintMetrics, thr: Thresholds) -> Dict[str, object]:
    if op == "viewport_decoupling":
        n = max((p.series_max for p in m.panels), default=0)
        return {"logical_width": round(max(n * thr.min_point_spacing, 2 * m.cell_width), 2)}
    if op == "sample_data":
        return {"max_points": thr.max_points, "seed": thr.seed}
    if op == "grid_reflow":
        return {"cols": 1}
    if op == "viewport_constriction":
        return {"fraction": thr.constriction_fraction}
    if op == "label_rotation":
        return {"angle": 90}
    if op == "legend_repositioning":
        return {"position": "top"}
    if op == "tooltip_enabling":
        return {"hit_radius": thr.hit_radius}
    if op == "tick_decimation":
        return {"max_count": thr.max_ticks, "orientation": "horizontal"}
    if op == "text_wrapping":
        return {"blocks": [], "max_width": m.content_width}
    if op == "element_rescaling":
        return {"min_point_r": thr.min_point_r, "min_bar_width": thr.min_bar_width, "min_stroke": thr.min_stroke}
    if op == "context_collapsing":
        return {"blocks": [], "max_chars": thr.max_context_chars}
    return {}


def prepare(scene: VisScene, thr: Thresholds, fm: FontMetrics = DEFAULT_METRICS) -> VisScene:
    """Scene as the planner sees it: laid out, with the font floor in force."""
    from .layout import relayout
    if scene.font_floor != thr.min_font:
        scene = replace(scene, font_floor=thr.min_font)
    if not scene.laid_out:
        scene = relayout(scene, fm)
    return scene


def chart_kind(topology: Topology) -> str:
    if topology.chart_kind == "faceted":
        return topology.inner or "unknown"
    return topology.chart_kind


def plan(scene: VisScene, target: Viewport, config: Thresholds = Thresholds(),
         escalation: Iterable[str] = (), escalation_round: int = 0,
         fm: FontMetrics = DEFAULT_METRICS) -> TransformPlan:
    forced = set(escalation)
    for op in forced:
        if op not in LEVEL:
            raise PlanError("unknown operator %r in escalation" % op)
    scene = prepare(scene, config, fm)
    topo = scene_topology(scene)
    kind = chart_kind(topo)
    m = compute_metrics(scene, target, config, fm)
    steps: List[OperatorApplication] = []
    warnings: List[str] = []
    rules = RULES
    if kind == "unknown":
        warnings.append("unknown chart topology; using the minimal plan")
        rules = tuple(r for r in RULES if r[1] in MINIMAL_OPS or r[1] in forced)
    for _, op, fn in rules:
        ctx = RuleContext(kind, tuple(s.op_id for s in steps), config, fm)
        fired = fn(m, ctx)
        if not fired and op in forced:
            if op == "label_rotation" and "axis_transposition" in ctx.planned:
                continue
            if op == "mark_transmutation" and "axis_transposition" in ctx.planned:
                continue
            if op == "axis_transposition" and not _band_x(m):
                warnings.append("forced axis_transposition skipped: no horizontal band axis")
                continue
            fired = [(_forced_params(op, m, config), {"forced": True})]
        for params, trigger in fired:
            step = OperatorApplication(op, LEVEL[op], params, trigger)
            steps.append(step)
            m = simulate_step(m, step, config, fm)
    return TransformPlan(tuple(steps), target, escalation_round, {"font_floor": config.min_font},
                         tuple(warnings), topo.label())


def plan_json(p: TransformPlan) -> str:
    import json
    return json.dumps(p.to_dict(), indent=2) + "\n"
