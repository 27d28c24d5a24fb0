"""Component segmentation and topology classification over a parsed SVG tree."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .ir import Rect, parse_color
from .measure import DEFAULT_METRICS, FontMetrics, text_box
from .svg import SvgElement, SvgTree

TICK_MAX_LEN = 10.0
ADJACENCY = 12.0
SWATCH_MAX = 20.0
_LIST_RE = re.compile(r"^(\d+)\. (.+)$")


@dataclass
class TickCandidate:
    line: SvgElement
    position: float
    text: Optional[SvgElement] = None


@dataclass
class AxisCandidate:
    orientation: str
    baseline: SvgElement
    offset: float
    extent: Tuple[float, float]
    ticks: List[TickCandidate] = field(default_factory=list)
    side: str = "bottom"

    @property
    def labelled(self) -> List[TickCandidate]:
        return [t for t in self.ticks if t.text is not None]

    def hint(self, name: str) -> Optional[str]:
        for t in self.labelled:
            v = t.text.style.get(name)
            if v:
                return v
        return None


@dataclass
class PlotCandidate:
    rect: Rect
    x_axis: Optional[AxisCandidate] = None
    y_axis: Optional[AxisCandidate] = None
    y2_axis: Optional[AxisCandidate] = None
    frame: Optional[SvgElement] = None
    marks: List[SvgElement] = field(default_factory=list)
    labels: List[SvgElement] = field(default_factory=list)
    header: Optional[SvgElement] = None


@dataclass
class LegendCandidate:
    pairs: List[Tuple[SvgElement, SvgElement]]
    position: str


@dataclass
class Components:
    width: float
    height: float
    plots: List[PlotCandidate]
    legend: Optional[LegendCandidate]
    title: Optional[SvgElement]
    subtitle: Optional[SvgElement]
    annotations: List[SvgElement]
    list_block: List[SvgElement]
    decorations: List[SvgElement]
    unassigned_axes: List[AxisCandidate]
    geometry_count: int
    text_count: int

    @property
    def axes(self) -> List[AxisCandidate]:
        out = []
        for p in self.plots:
            out += [a for a in (p.x_axis, p.y_axis, p.y2_axis) if a is not None]
        return out + self.unassigned_axes

    def accounted_geometry(self) -> int:
        ticks = sum(len(a.ticks) for a in self.axes)
        baselines = len(self.axes)
        swatches = len(self.legend.pairs) if self.legend else 0
        marks = sum(len(p.marks) for p in self.plots)
        frames = sum(1 for p in self.plots if p.frame is not None)
        return ticks + baselines + swatches + marks + frames + len(self.decorations)

    def accounted_text(self) -> int:
        n = sum(len(a.labelled) for a in self.axes)
        n += len(self.legend.pairs) if self.legend else 0
        n += sum(len(p.labels) + (1 if p.header is not None else 0) for p in self.plots)
        n += (self.title is not None) + (self.subtitle is not None)
        return n + len(self.annotations) + len(self.list_block)


def element_box(el: SvgElement, metrics: FontMetrics = DEFAULT_METRICS) -> Rect:
    if el.tag == "text":
        align = el.style.get("text-anchor", "start")
        if align not in ("start", "middle", "end"):
            align = "start"
        return text_box(el.lines or ("",), el.font_size, el.anchor, align, el.angle, metrics)
    if el.rect is not None:
        return Rect(*el.rect)
    if el.circle is not None:
        cx, cy, r = el.circle
        return Rect(cx - r, cy - r, 2 * r, 2 * r)
    xs = [p[0] for p in el.points] or [0.0]
    ys = [p[1] for p in el.points] or [0.0]
    return Rect(min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))


def _geom_key(el: SvgElement):
    b = element_box(el)
    return (round(b.x, 2), round(b.y, 2), round(b.w, 2), round(b.h, 2), el.tag,
            tuple((round(x, 2), round(y, 2)) for x, y in el.points))


def fill_of(el: SvgElement):
    return parse_color(el.style.get("fill", "black"))


def stroke_of(el: SvgElement):
    return parse_color(el.style.get("stroke", "none"))


# -- axes ----------------------------------------------------------------------------


def _is_h(el: SvgElement, tol: float = 0.5) -> bool:
    (x1, y1), (x2, y2) = el.points
    return abs(y1 - y2) <= tol and abs(x2 - x1) > tol


def _is_v(el: SvgElement, tol: float = 0.5) -> bool:
    (x1, y1), (x2, y2) = el.points
    return abs(x1 - x2) <= tol and abs(y2 - y1) > tol


def _length(el: SvgElement) -> float:
    (x1, y1), (x2, y2) = el.points
    return max(abs(x2 - x1), abs(y2 - y1))


def find_axes(lines: List[SvgElement], texts: List[SvgElement],
              metrics: FontMetrics) -> Tuple[List[AxisCandidate], List[SvgElement]]:
    short = [l for l in lines if _length(l) <= TICK_MAX_LEN and (_is_h(l) or _is_v(l))]
    long_ = [l for l in lines if l not in short]
    axes: List[AxisCandidate] = []
    used: set = set()
    boxes = {id(t): element_box(t, metrics) for t in texts}
    for base in sorted(long_, key=_geom_key):
        if _is_h(base):
            y = base.points[0][1]
            x0, x1 = sorted(p[0] for p in base.points)
            ticks = [l for l in short if id(l) not in used and _is_v(l)
                     and min(abs(l.points[0][1] - y), abs(l.points[1][1] - y)) <= 0.5
                     and x0 - 0.5 <= l.points[0][0] <= x1 + 0.5]
            if len(ticks) < 2:
                continue
            far = [max(l.points, key=lambda p: abs(p[1] - y)) for l in ticks]
            side = "bottom" if sum(p[1] - y for p in far) >= 0 else "top"
            ax = AxisCandidate("horizontal", base, y, (x0, x1), side=side)
            for l, end in sorted(zip(ticks, far), key=lambda t: t[1][0]):
                ax.ticks.append(TickCandidate(l, l.points[0][0]))
        elif _is_v(base):
            x = base.points[0][0]
            y0, y1 = sorted(p[1] for p in base.points)
            ticks = [l for l in short if id(l) not in used and _is_h(l)
                     and min(abs(l.points[0][0] - x), abs(l.points[1][0] - x)) <= 0.5
                     and y0 - 0.5 <= l.points[0][1] <= y1 + 0.5]
            if len(ticks) < 2:
                continue
            far = [max(l.points, key=lambda p: abs(p[0] - x)) for l in ticks]
            side = "left" if sum(p[0] - x for p in far) < 0 else "right"
            ax = AxisCandidate("vertical", base, x, (y0, y1), side=side)
            for l in sorted(ticks, key=lambda l: l.points[0][1]):
                ax.ticks.append(TickCandidate(l, l.points[0][1]))
        else:
            continue
        _attach_labels(ax, texts, boxes)
        if len(ax.labelled) < 1:
            continue
        for t in ax.ticks:
            used.add(id(t.line))
        axes.append(ax)
    axis_lines = {id(a.baseline) for a in axes} | used
    rest = [l for l in lines if id(l) not in axis_lines]
    return axes, rest


def _attach_labels(ax: AxisCandidate, texts: List[SvgElement], boxes: Dict[int, Rect]) -> None:
    pairs = []
    for ti, t in enumerate(ax.ticks):
        end = max(t.line.points, key=lambda p: abs((p[1] if ax.orientation == "horizontal" else p[0]) - ax.offset))
        for s in texts:
            if getattr(s, "_claimed", False):
                continue
            b = boxes[id(s)]
            gap = b.gap(Rect(end[0], end[1], 0, 0))
            if gap > ADJACENCY:
                continue
            along = s.anchor[0] if ax.orientation == "horizontal" else s.anchor[1]
            pairs.append((abs(along - t.position), gap, ti, s.order, s))
    pairs.sort(key=lambda p: p[:4])
    taken_t, taken_s = set(), set()
    for _, _, ti, _, s in pairs:
        if ti in taken_t or id(s) in taken_s:
            continue
        taken_t.add(ti)
        taken_s.add(id(s))
        ax.ticks[ti].text = s
        s._claimed = True  # type: ignore[attr-defined]


# -- segmentation ----------------------------------------------------------------------


def segment_components(tree: SvgTree, metrics: FontMetrics = DEFAULT_METRICS) -> Components:
    geometry = sorted((e for e in tree.elements("rect", "circle", "line", "path")), key=_geom_key)
    texts = sorted((e for e in tree.elements("text") if e.lines), key=_geom_key)
    for t in texts:
        t._claimed = False  # type: ignore[attr-defined]
    lines = [e for e in geometry if e.tag == "line" and len(e.points) == 2]
    axes, loose_lines = find_axes(lines, texts, metrics)
    decorations: List[SvgElement] = list(loose_lines)
    others = [e for e in geometry if e.tag != "line"]
    canvas = Rect(0, 0, tree.width, tree.height)

    # background rects
    rest = []
    for e in others:
        b = element_box(e)
        if e.tag == "rect" and (fill_of(e) is None or b.w * b.h >= 0.9 * canvas.w * canvas.h):
            decorations.append(e)
        else:
            rest.append(e)
    others = rest

    plots = _pair_axes(axes, others)
    assigned = {id(a) for p in plots for a in (p.x_axis, p.y_axis, p.y2_axis) if a is not None}
    unassigned = [a for a in axes if id(a) not in assigned]

    # frames: rects coinciding with a plot area
    rest = []
    for e in others:
        b = element_box(e)
        hit = None
        for p in plots:
            if p.frame is None and e.tag == "rect" and _same_rect(b, p.rect, 1.0):
                hit = p
                break
        if hit is not None:
            hit.frame = e
        else:
            rest.append(e)
    others = rest

    free_texts = [t for t in texts if not t._claimed]  # type: ignore[attr-defined]
    legend = _find_legend(others, free_texts, plots, metrics)
    if legend is not None:
        sw = {id(s) for s, _ in legend.pairs}
        lt = {id(t) for _, t in legend.pairs}
        others = [e for e in others if id(e) not in sw]
        free_texts = [t for t in free_texts if id(t) not in lt]

    for e in others:
        b = element_box(e)
        owner = _owner(plots, b)
        if owner is not None:
            owner.marks.append(e)
        else:
            decorations.append(e)

    remaining = []
    for t in free_texts:
        b = element_box(t, metrics)
        owner = None
        for p in plots:
            if p.rect.contains(b, tol=0.5) or p.rect.contains(Rect(t.anchor[0], t.anchor[1], 0, 0), 0.5):
                owner = p
                break
        if owner is not None:
            owner.labels.append(t)
        else:
            remaining.append(t)

    if len(plots) >= 2:
        for p in plots:
            cands = []
            for t in remaining:
                b = element_box(t, metrics)
                if 0 <= p.rect.y - b.bottom <= 24 and _cell_left(p, metrics) - 2 <= b.x < p.rect.right:
                    cands.append((p.rect.y - b.bottom, t.order, t))
            if cands:
                t = min(cands, key=lambda c: c[:2])[2]
                p.header = t
                remaining.remove(t)

    list_block = [t for t in remaining if t.lines and all(_LIST_RE.match(s) for s in t.lines)]
    remaining = [t for t in remaining if t not in list_block]
    list_block.sort(key=lambda t: int(_LIST_RE.match(t.lines[0]).group(1)))
    top = min((p.rect.y for p in plots), default=float("inf"))
    above = sorted((t for t in remaining if element_box(t, metrics).bottom <= top),
                   key=lambda t: (element_box(t, metrics).y, t.order))
    title = subtitle = None
    if above:
        title = above[0]
        if len(above) > 1 and above[1].font_size <= title.font_size:
            subtitle = above[1]
    annotations = [t for t in remaining if t is not title and t is not subtitle]
    annotations.sort(key=lambda t: (element_box(t, metrics).y, t.order))
    for t in texts:
        del t._claimed  # type: ignore[attr-defined]
    return Components(tree.width, tree.height, plots, legend, title, subtitle, annotations, list_block,
                      decorations, unassigned, len(geometry), len(texts))


def _cell_left(p: PlotCandidate, metrics: FontMetrics) -> float:
    if p.y_axis is None or not p.y_axis.labelled:
        return p.rect.x
    return min(element_box(t.text, metrics).x for t in p.y_axis.labelled)


def _same_rect(a: Rect, b: Rect, tol: float) -> bool:
    return (abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol
            and abs(a.right - b.right) <= tol and abs(a.bottom - b.bottom) <= tol)


def _owner(plots: List[PlotCandidate], b: Rect) -> Optional[PlotCandidate]:
    best, best_area = None, 0.0
    for p in plots:
        grown = Rect(p.rect.x - 1, p.rect.y - 1, p.rect.w + 2, p.rect.h + 2)
        a = grown.intersection_area(Rect(b.x, b.y, max(b.w, 0.01), max(b.h, 0.01)))
        if a > best_area:
            best, best_area = p, a
    return best


def _pair_axes(axes: List[AxisCandidate], shapes: List[SvgElement]) -> List[PlotCandidate]:
    hs = [a for a in axes if a.orientation == "horizontal"]
    vs = [a for a in axes if a.orientation == "vertical"]
    plots = []
    used_v: set = set()
    for h in sorted(hs, key=lambda a: (a.offset, a.extent[0])):
        x0, x1 = h.extent
        left = right = None
        for v in vs:
            if id(v) in used_v or abs(v.extent[1] - h.offset) > 1.0:
                continue
            if abs(v.offset - x0) <= 1.0 and v.side == "left":
                left = v
            elif x0 + 1.0 < v.offset <= x1 + 1.0 and v.side == "right":
                right = v
        if left is not None:
            used_v.add(id(left))
            rect = Rect(x0, left.extent[0], x1 - x0, h.offset - left.extent[0])
        else:
            rect = _frame_above(h, shapes)
        if right is not None:
            used_v.add(id(right))
        if rect is None:
            continue
        plots.append(PlotCandidate(rect, h, left, right))
    return plots


def _frame_above(h: AxisCandidate, shapes: List[SvgElement]) -> Optional[Rect]:
    x0, x1 = h.extent
    for e in shapes:
        if e.tag != "rect":
            continue
        b = element_box(e)
        if abs(b.x - x0) <= 1 and abs(b.right - x1) <= 1 and abs(b.bottom - h.offset) <= 1:
            return b
    return None


def _find_legend(shapes: List[SvgElement], texts: List[SvgElement], plots: List[PlotCandidate],
                 metrics: FontMetrics) -> Optional[LegendCandidate]:
    pairs = []
    used = set()
    for s in shapes:
        b = element_box(s)
        if s.tag not in ("rect", "circle") or b.w > SWATCH_MAX or b.h > SWATCH_MAX or b.w <= 0:
            continue
        if any(p.rect.intersection_area(b) > 0 for p in plots):
            continue
        best = None
        for t in texts:
            if id(t) in used or t.angle:
                continue
            tb = element_box(t, metrics)
            if 0 <= tb.x - b.right <= ADJACENCY and tb.y <= b.cy <= tb.bottom:
                d = tb.x - b.right
                if best is None or d < best[0]:
                    best = (d, t)
        if best is not None:
            used.add(id(best[1]))
            pairs.append((s, best[1]))
    if len(pairs) < 2:
        return None
    boxes = [element_box(s) for s, _ in pairs]
    if not plots:
        position = "top"
    else:
        px0 = min(p.rect.x for p in plots)
        px1 = max(p.rect.right for p in plots)
        py0 = min(p.rect.y for p in plots)
        if all(b.x >= px1 for b in boxes):
            position = "right"
        elif all(b.right <= px0 for b in boxes):
            position = "left"
        elif all(b.bottom <= py0 for b in boxes):
            position = "top"
        else:
            position = "bottom"
    pairs.sort(key=lambda p: (round(element_box(p[0]).y, 1), element_box(p[0]).x))
    return LegendCandidate(pairs, position)


# -- topology ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Topology:
    chart_kind: str
    confidence: float
    rows: int = 1
    cols: int = 1
    inner: Optional[str] = None

    def label(self) -> str:
        if self.chart_kind == "faceted":
            return "faceted(%s,%d,%d)" % (self.inner, self.rows, self.cols)
        return self.chart_kind


@dataclass
class PanelSummary:
    """Geometry-only view of one plot, shared by SVG and scene classification."""
    width: float
    x_band: bool
    y_band: bool
    x_linear: bool
    y_linear: bool
    bars: List[Tuple[Rect, object]]
    polylines: List[Tuple[Tuple[Tuple[float, float], ...], object]]
    circles: List[Tuple[float, float, float]]
    height: float = 0.0


def classify_panel(p: PanelSummary) -> Tuple[str, int, int]:
    """Return (kind, explained marks, total marks)."""
    total = len(p.bars) + len(p.polylines) + len(p.circles)
    if total == 0:
        return "unknown", 0, 0
    if len(p.bars) >= 3 and (p.x_band or p.y_band):
        edges = [b.bottom for b, _ in p.bars] if p.x_band else [b.x for b, _ in p.bars]
        common = max(sum(1 for e in edges if abs(e - ref) <= 1.0) for ref in edges)
        if common >= 3:
            kind = "bar"
            if len({c for _, c in p.bars}) >= 2:
                if sum(1 for s in _slot_colors(p).values() if len(s) >= 2) >= 2:
                    kind = "grouped-bar"
            return kind, len(p.bars), total
    spanning = [(pts, c) for pts, c in p.polylines
                if pts and (max(x for x, _ in pts) - min(x for x, _ in pts)) >= 0.6 * p.width]
    if spanning:
        strokes = {c for _, c in spanning}
        kind = "multi-line" if len(spanning) >= 2 and len(strokes) >= 2 else "line"
        return kind, len(spanning), total
    if len(p.circles) >= 2:
        ys = [c[1] for c in p.circles]
        xs = [c[0] for c in p.circles]
        if max(ys) - min(ys) <= 4.0 or max(xs) - min(xs) <= 4.0:
            return "dot-strip", len(p.circles), total
        if len(p.circles) >= 5 and p.x_linear and p.y_linear:
            return "scatter", len(p.circles), total
    return "unknown", 0, total


def _slot_colors(p: PanelSummary) -> Dict[int, set]:
    """Colours per category slot, slotting bars by which band tick they sit nearest."""
    bars = sorted(p.bars, key=lambda bc: bc[0].cx if p.x_band else bc[0].cy)
    groups: Dict[int, set] = {}
    gi = 0
    prev_end = None
    for b, color in bars:
        start, end = (b.x, b.right) if p.x_band else (b.y, b.bottom)
        if prev_end is not None and start - prev_end > 0.5:
            gi += 1
        groups.setdefault(gi, set()).add(color)
        prev_end = end
    return groups


def classify_summaries(summaries: List[PanelSummary], rows: int, cols: int) -> Topology:
    if not summaries:
        return Topology("unknown", 0.0)
    results = [classify_panel(s) for s in summaries]
    explained = sum(r[1] for r in results)
    total = sum(r[2] for r in results)
    conf = explained / total if total else 0.0
    if len(summaries) >= 2:
        inner = results[0][0]
        return Topology("faceted", round(conf, 6), rows, cols, inner)
    kind = results[0][0]
    if kind == "unknown":
        return Topology("unknown", 0.0)
    return Topology(kind, round(conf, 6))


def grid_shape(rects: List[Rect]) -> Tuple[int, int]:
    """Rows are clusters of plot tops; columns the widest row."""
    rows: List[List[Rect]] = []
    for r in sorted(rects, key=lambda r: r.y):
        if rows and r.y - rows[-1][0].y <= 2:
            rows[-1].append(r)
        else:
            rows.append([r])
    return len(rows), max((len(r) for r in rows), default=1)


def summarize_plot(p: PlotCandidate) -> PanelSummary:
    def band(a: Optional[AxisCandidate]) -> bool:
        from .ticks import parse_number
        if a is None or not a.labelled:
            return False
        if a.hint("data-scale") == "time":
            return False
        return any(parse_number(t.text.lines[0]) is None for t in a.labelled)

    def linear(a: Optional[AxisCandidate]) -> bool:
        return a is not None and bool(a.labelled) and not band(a)

    bars, polys, circles = [], [], []
    for m in p.marks:
        if m.tag == "rect":
            bars.append((element_box(m), fill_of(m)))
        elif m.tag == "circle":
            circles.append(m.circle)
        elif m.tag == "path" and not m.closed and len(m.points) >= 2:
            polys.append((m.points, stroke_of(m)))
    return PanelSummary(p.rect.w, band(p.x_axis), band(p.y_axis), linear(p.x_axis), linear(p.y_axis),
                        bars, polys, circles, p.rect.h)


def classify_topology(components: Components) -> Topology:
    summaries = [summarize_plot(p) for p in components.plots]
    rows, cols = grid_shape([p.rect for p in components.plots]) if components.plots else (1, 1)
    return classify_summaries(summaries, rows, cols)


def summarize_panel(panel) -> PanelSummary:
    """PanelSummary from a laid-out scene panel (same rules as for parsed SVG)."""
    def kind(a):
        return None if a is None else a.scale.kind

    bars, polys, circles = [], [], []
    for layer in panel.layers:
        series: Dict[object, List] = {}
        for m in layer.marks:
            if m.kind == "bar":
                bars.append((Rect(m.x, m.y, m.w, m.h), m.fill))
            elif m.kind == "point":
                circles.append((m.x, m.y, m.r))
            elif m.kind in ("line-vertex", "area-vertex"):
                series.setdefault(m.series, []).append(m)
        for ms in series.values():
            ms.sort(key=lambda m: m.index)
            if len(ms) >= 2:
                polys.append((tuple((m.x, m.y) for m in ms), ms[0].stroke))
    xk, yk = kind(panel.x_axis), kind(panel.y_axis)
    return PanelSummary(panel.view_width or panel.plot_area.w, xk == "band", yk == "band",
                        xk in ("linear", "time"), yk in ("linear", "time"), bars, polys, circles,
                        panel.plot_area.h)


def scene_topology(scene) -> Topology:
    rows, cols = scene.grid
    return classify_summaries([summarize_panel(p) for p in scene.panels], rows, cols)
