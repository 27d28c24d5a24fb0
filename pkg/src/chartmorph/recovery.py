"""Scale fitting and dataset reconstruction from segmented geometry."""

from __future__ import annotations

import bisect
import math
import re
import statistics
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .abbrev import op_semantic_abbreviation
from .ir import (Axis, Color, FieldSpec, Layer, Legend, Panel, RecoveredDataset, Scale, TextBlock,
                 Tick, Viewport, VisScene, parse_color)
from .measure import DEFAULT_METRICS, FontMetrics
from .segment import (AxisCandidate, Components, PlotCandidate, Topology, classify_topology, element_box,
                      fill_of, segment_components, stroke_of)
from .svg import SvgElement
from .ticks import parse_month_label, parse_number

MAX_RESIDUAL = 1.0
_LIST_PREFIX = re.compile(r"^(\d+)\. (.+)$")


class RecoveryError(ValueError):
    pass


class InsufficientTicks(RecoveryError):
    pass


class NonlinearScale(RecoveryError):
    pass


class AmbiguousCategories(RecoveryError):
    pass


@dataclass(frozen=True)
class FittedScale:
    scale: Scale
    residual_rms: float
    support: int
    slope: float = 1.0
    intercept: float = 0.0

    def invert(self, position: float) -> float:
        return (position - self.intercept) / self.slope

    def apply(self, value: float) -> float:
        return self.slope * value + self.intercept


def fit_linear_scale(ticks: Sequence[Tuple[float, object]], kind: str = "linear",
                     label_format: Optional[str] = None, year: Optional[int] = None) -> FittedScale:
    """Least-squares ``position = a * value + b`` over labelled ticks."""
    pts = []
    for pos, label in ticks:
        if isinstance(label, (int, float)):
            v = float(label)
        elif kind == "time":
            v = parse_month_label(str(label), year)
        else:
            v = parse_number(str(label))
        if v is not None:
            pts.append((float(v), float(pos)))
    if len({v for v, _ in pts}) < 2:
        raise InsufficientTicks("need at least 2 ticks with distinct numeric labels")
    pts.sort()
    n = len(pts)
    mv = sum(v for v, _ in pts) / n
    mp = sum(p for _, p in pts) / n
    sxx = sum((v - mv) ** 2 for v, _ in pts)
    sxy = sum((v - mv) * (p - mp) for v, p in pts)
    a = sxy / sxx
    b = mp - a * mv
    rms = math.sqrt(sum((a * v + b - p) ** 2 for v, p in pts) / n)
    if rms > MAX_RESIDUAL:
        raise NonlinearScale("residual %.3fpx exceeds %.1fpx" % (rms, MAX_RESIDUAL))
    lo, hi = pts[0][0], pts[-1][0]
    scale = Scale(kind, (lo, hi), (a * lo + b, a * hi + b), label_format=label_format)
    return FittedScale(scale, rms, n, a, b)


def fit_band_scale(ticks: Sequence[Tuple[float, str]], extent: Tuple[float, float],
                   mark_widths: Sequence[float] = ()) -> FittedScale:
    if not ticks:
        raise InsufficientTicks("band axis needs at least one labelled tick")
    ordered = sorted(ticks, key=lambda t: t[0])
    labels = [str(l) for _, l in ordered]
    if len(set(labels)) != len(labels):
        raise AmbiguousCategories("duplicate category labels: %s" % sorted({l for l in labels if labels.count(l) > 1}))
    pos = [p for p, _ in ordered]
    if len(pos) >= 2:
        width = statistics.median(b - a for a, b in zip(pos, pos[1:]))
        a = pos[0] - width / 2
        b = pos[-1] + width / 2
    else:
        a, b = extent
        width = b - a
    padding = 0.1
    if mark_widths:
        padding = min(max(1.0 - statistics.median(mark_widths) / width, 0.0), 0.95)
        padding = round(padding, 6)
    resid = 0.0
    if len(pos) >= 2:
        resid = math.sqrt(sum((p - (a + (i + 0.5) * width)) ** 2 for i, p in enumerate(pos)) / len(pos))
    return FittedScale(Scale("band", tuple(labels), (a, b), padding), resid, len(pos))


def band_invert(fs: FittedScale, position: float) -> Tuple[str, bool]:
    sc = fs.scale
    a, b = sc.range
    n = len(sc.domain)
    i = int(math.floor((position - a) / (b - a) * n))
    if 0 <= i < n:
        return sc.domain[i], False
    return sc.domain[min(max(i, 0), n - 1)], True


# -- axes ---------------------------------------------------------------------


def _axis_kind(ax: AxisCandidate) -> str:
    if ax.hint("data-scale") == "time":
        return "time"
    labels = [t.text.lines[0] for t in ax.labelled]
    if labels and all(parse_number(s) is not None for s in labels):
        return "linear"
    return "band"


def fit_axis(ax: AxisCandidate, bar_widths: Sequence[float] = ()) -> FittedScale:
    kind = _axis_kind(ax)
    ticks = [(t.position, t.text.lines[0]) for t in ax.labelled]
    if kind == "band":
        return fit_band_scale(ticks, ax.extent, bar_widths)
    year = ax.hint("data-year")
    return fit_linear_scale(ticks, kind, ax.hint("data-format") or None, int(year) if year else None)


# -- datasets -----------------------------------------------------------------


@dataclass
class _Row:
    key: object
    values: Dict[str, float] = field(default_factory=dict)
    series: Optional[str] = None
    text: Optional[str] = None
    approximate: bool = False
    order: Tuple = ()


def _series_for(color: Optional[Color], legend_map: Dict[str, str]) -> Optional[str]:
    if color is None:
        return None
    return legend_map.get(color.hex)


def _is_band(fs: Optional[FittedScale]) -> bool:
    return fs is not None and fs.scale.kind == "band"


def _invert(fs: FittedScale, pos: float, extent: Tuple[float, float]) -> Tuple[object, bool]:
    if fs.scale.kind == "band":
        return band_invert(fs, pos)
    lo, hi = sorted(extent)
    slack = 0.05 * (hi - lo)
    return fs.invert(pos), not (lo - slack <= pos <= hi + slack)


@dataclass
class PlotRecovery:
    plot: PlotCandidate
    x: Optional[FittedScale]
    y: Optional[FittedScale]
    y2: Optional[FittedScale]
    layers: List[Tuple[str, List[SvgElement]]]  # (kind, elements) in first-appearance order
    rows: List[_Row]
    value_names: List[str]
    has_series: bool
    has_text: bool
    label_mode: str = "inline"


def _mark_kind(el: SvgElement) -> Optional[str]:
    if el.tag == "rect":
        return "bar"
    if el.tag == "circle":
        return "point"
    if el.tag == "path" and len(el.points) >= 2:
        return "line"
    return None


def recover_plot(plot: PlotCandidate, legend_map: Dict[str, str], list_items: Dict[str, str],
                 metrics: FontMetrics = DEFAULT_METRICS) -> PlotRecovery:
    groups: Dict[str, List[SvgElement]] = {}
    first: Dict[str, int] = {}
    for m in plot.marks:
        k = _mark_kind(m)
        if k is None:
            continue
        groups.setdefault(k, []).append(m)
        first[k] = min(first.get(k, m.order), m.order)
    kinds = sorted(groups, key=lambda k: first[k])
    bar_w = []
    x = y = y2 = None
    if plot.x_axis is not None:
        x_is_band = _axis_kind(plot.x_axis) == "band"
        if x_is_band:
            bar_w = _slot_widths(groups.get("bar", []), "x")
        x = fit_axis(plot.x_axis, bar_w)
    if plot.y_axis is not None:
        bw = _slot_widths(groups.get("bar", []), "y") if _axis_kind(plot.y_axis) == "band" else []
        y = fit_axis(plot.y_axis, bw)
    if plot.y2_axis is not None:
        y2 = fit_axis(plot.y2_axis)
    key_vertical = _is_band(y) and not _is_band(x)
    value_scale_for: Dict[str, Tuple[str, Optional[FittedScale]]] = {}
    for i, k in enumerate(kinds):
        if y2 is not None and i >= 1:
            value_scale_for[k] = ("y2", y2)
        else:
            value_scale_for[k] = ("y", x if key_vertical else y)
    key_scale = y if key_vertical else x
    key_extent = plot.y_axis.extent if key_vertical and plot.y_axis else (plot.rect.x, plot.rect.right)
    rows: List[_Row] = []
    names: List[str] = []
    for k in kinds:
        vname, vfs = value_scale_for[k]
        if vname not in names and vfs is not None:
            names.append(vname)
        val_extent = (plot.rect.x, plot.rect.right) if key_vertical else (plot.rect.y, plot.rect.bottom)
        for el in groups[k]:
            rows.extend(_rows_for(k, el, key_scale, vfs, vname, key_vertical, key_extent, val_extent, legend_map))
    has_text = False
    mode = "inline"
    if plot.labels:
        has_text, mode = _attach_texts(plot, rows, key_vertical, list_items)
    return PlotRecovery(plot, x, y, y2, [(k, groups[k]) for k in kinds], rows, names,
                        any(r.series is not None for r in rows), has_text, mode)


def _slot_widths(bars: List[SvgElement], axis: str) -> List[float]:
    """Width of the bar group in each occupied slot (grouped bars add up)."""
    if not bars:
        return []
    boxes = sorted((element_box(b) for b in bars), key=lambda r: r.x if axis == "x" else r.y)
    groups: List[Tuple[float, float]] = []
    for r in boxes:
        s, e = (r.x, r.right) if axis == "x" else (r.y, r.bottom)
        if groups and s - groups[-1][1] <= 0.5:
            groups[-1] = (groups[-1][0], e)
        else:
            groups.append((s, e))
    return [e - s for s, e in groups]


def _rows_for(kind, el, key_scale, vfs, vname, key_vertical, key_extent, val_extent, legend_map) -> List[_Row]:
    out = []
    if kind == "bar":
        b = element_box(el)
        kpos = b.cy if key_vertical else b.cx
        key, approx = _invert(key_scale, kpos, key_extent) if key_scale else (None, True)
        if vfs is None:
            return [_Row(key, {}, _series_for(fill_of(el), legend_map), approximate=True, order=(kpos,))]
        zero = vfs.apply(0.0)
        lo_px, hi_px = sorted(val_extent)
        base = zero if lo_px - 0.5 <= zero <= hi_px + 0.5 else (lo_px if key_vertical else hi_px)
        if key_vertical:
            edge = b.right if abs(b.right - base) >= abs(b.x - base) else b.x
        else:
            edge = b.y if abs(b.y - base) >= abs(b.bottom - base) else b.bottom
        v, a2 = _invert(vfs, edge, val_extent)
        out.append(_Row(key, {vname: v}, _series_for(fill_of(el), legend_map), approximate=approx or a2,
                        order=(kpos, b.x, b.y)))
    elif kind == "point":
        cx, cy, _ = el.circle
        kpos, vpos = (cy, cx) if key_vertical else (cx, cy)
        key, approx = _invert(key_scale, kpos, key_extent) if key_scale else (None, True)
        values = {}
        a2 = False
        if vfs is not None:
            v, a2 = _invert(vfs, vpos, val_extent)
            values[vname] = v
        out.append(_Row(key, values, _series_for(fill_of(el), legend_map), approximate=approx or a2,
                        order=(kpos, vpos)))
    elif kind == "line":
        series = _series_for(stroke_of(el), legend_map)
        for px, py in el.points:
            kpos, vpos = (py, px) if key_vertical else (px, py)
            key, approx = _invert(key_scale, kpos, key_extent) if key_scale else (None, True)
            values = {}
            a2 = False
            if vfs is not None:
                v, a2 = _invert(vfs, vpos, val_extent)
                values[vname] = v
            out.append(_Row(key, values, series, approximate=approx or a2, order=(kpos, vpos)))
    return out


def _attach_texts(plot: PlotCandidate, rows: List[_Row], key_vertical: bool,
                  list_items: Dict[str, str]) -> Tuple[bool, str]:
    """Bind in-plot text to marks: names, list indices or value labels."""
    texts = sorted(plot.labels, key=lambda t: (t.anchor[0], t.anchor[1]))
    marks = [(r, r.order[0]) for r in rows]
    if not marks:
        return False, "inline"
    indexed = bool(list_items) and all(t.lines[0] in list_items for t in texts)
    numeric = all(parse_number(t.lines[0]) is not None for t in texts) and not indexed
    taken = set()
    for t in texts:
        along = t.anchor[1] if key_vertical else t.anchor[0]
        best = None
        for i, (r, pos) in enumerate(marks):
            if i in taken:
                continue
            d = abs(pos - along)
            if best is None or d < best[0]:
                best = (d, i)
        if best is None:
            continue
        taken.add(best[1])
        r = marks[best[1]][0]
        s = t.lines[0]
        if indexed:
            r.text = list_items[s]
        elif numeric:
            name = next(iter(r.values), "y")
            r.values[name] = parse_number(s)
        else:
            r.text = s
    if numeric:
        return False, "inline"
    return True, "indexed" if indexed else "inline"


@dataclass
class Recovery:
    dataset: RecoveredDataset
    plots: List[PlotRecovery]
    field_roles: Dict[str, str]  # role -> field name
    legend_map: Dict[str, str]
    topology: Topology
    components: Components


def _legend_map(components: Components) -> Dict[str, str]:
    out: Dict[str, str] = {}
    if components.legend is None:
        return out
    for sw, text in components.legend.pairs:
        c = fill_of(sw)
        if c is not None:
            out[c.hex] = text.lines[0]
    return out


def _list_items(components: Components) -> Dict[str, str]:
    items = {}
    for t in components.list_block:
        for line in t.lines:
            m = _LIST_PREFIX.match(line)
            if m:
                items[m.group(1)] = m.group(2)
    return items


def recover_components(components: Components, metrics: FontMetrics = DEFAULT_METRICS) -> Recovery:
    legend_map = _legend_map(components)
    items = _list_items(components)
    plots = [recover_plot(p, legend_map, items, metrics) for p in components.plots]
    topo = classify_topology(components)
    facets = len(plots) >= 2 and all(p.plot.header is not None for p in plots)
    has_text = any(p.has_text for p in plots)
    has_series = any(p.has_series for p in plots)
    key_kind = "quantitative"
    for p in plots:
        ks = p.y if (_is_band(p.y) and not _is_band(p.x)) else p.x
        if ks is not None:
            key_kind = {"band": "nominal", "time": "temporal"}.get(ks.scale.kind, "quantitative")
            break
    value_names: List[str] = []
    if facets or len(plots) <= 1:
        for p in plots:
            for n in p.value_names:
                if n not in value_names:
                    value_names.append(n)
    else:
        # stacked panels sharing a key: the k-th panel's values become the k-th value column
        for i, p in enumerate(plots):
            if p.value_names:
                value_names.append("y" if i == 0 else "y%d" % (i + 1))
    fields: List[FieldSpec] = []
    roles: Dict[str, str] = {}
    if has_text:
        fields.append(FieldSpec("label", "nominal"))
        roles["text"] = "label"
    has_key = any(p.x is not None or p.y is not None for p in plots)
    if has_key:
        fields.append(FieldSpec("x", key_kind))
        roles["key"] = "x"
    for n in value_names:
        fields.append(FieldSpec(n, "quantitative"))
    if has_series:
        fields.append(FieldSpec("series", "nominal"))
        roles["series"] = "series"
    if facets:
        fields.append(FieldSpec("facet", "nominal"))
        roles["facet"] = "facet"

    rows: List[Tuple] = []
    approx: List[int] = []

    def emit(r: _Row, vals: Dict[str, float], facet: Optional[str]):
        row: List[object] = []
        if has_text:
            row.append(r.text if r.text is not None else "")
        if has_key:
            row.append(r.key if r.key is not None else 0.0)
        for n in value_names:
            row.append(float(vals.get(n, 0.0)))
        if has_series:
            row.append(r.series if r.series is not None else "")
        if facets:
            row.append(facet)
        if r.approximate or any(n not in vals for n in value_names):
            approx.append(len(rows))
        rows.append(tuple(row))

    if facets or len(plots) <= 1:
        for p in plots:
            facet = p.plot.header.lines[0] if facets else None
            if len(p.value_names) > 1:
                for r in _join_rows(p.rows, p.value_names):
                    emit(r, r.values, facet)
            else:
                for r in sorted(p.rows, key=lambda r: (str(r.series), r.order)):
                    emit(r, r.values, facet)
    else:
        renamed = []
        for i, p in enumerate(plots):
            name = "y" if i == 0 else "y%d" % (i + 1)
            for r in p.rows:
                r.values = {name: v for v in list(r.values.values())[:1]}
                renamed.append(r)
        for r in _join_rows(renamed, value_names):
            emit(r, r.values, None)
    source = "parsed-labels" if any(p.plot.labels and not p.has_text for p in plots) else "inverted-geometry"
    ds = RecoveredDataset(tuple(fields), tuple(rows), source, tuple(approx))
    return Recovery(ds, plots, roles, legend_map, topo, components)


def _join_rows(rows: List[_Row], names: List[str]) -> List[_Row]:
    """Merge rows of several layers on (key, series); first appearance order."""
    merged: Dict[Tuple, _Row] = {}
    order: List[Tuple] = []
    for r in rows:
        k = (r.key, r.series)
        if k not in merged:
            merged[k] = _Row(r.key, dict(r.values), r.series, r.text, r.approximate, r.order)
            order.append(k)
        else:
            m = merged[k]
            for n, v in r.values.items():
                m.values.setdefault(n, v)
            m.approximate = m.approximate or r.approximate
            m.text = m.text or r.text
    return [merged[k] for k in sorted(order, key=lambda k: merged[k].order)]


def recover_svg(data, metrics: FontMetrics = DEFAULT_METRICS) -> Recovery:
    from .svg import parse_svg
    tree = parse_svg(data)
    return recover_components(segment_components(tree, metrics), metrics)


# -- comparison -----------------------------------------------------------------


@dataclass
class Comparison:
    missing: List[int] = field(default_factory=list)  # expected rows without a match
    extra: List[int] = field(default_factory=list)  # recovered rows without a match
    pairs: List[Tuple[int, int]] = field(default_factory=list)  # (expected row, recovered row)
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.missing or self.extra or self.problems)


def _scale(a: float, b: float, span: Optional[float]) -> float:
    # timestamps are judged against the column's span, plain numbers against themselves
    return span if span is not None else max(abs(a), abs(b))


def _close(a: float, b: float, rtol: float, span: Optional[float] = None) -> bool:
    return abs(a - b) <= rtol * _scale(a, b, span) + 1e-9


def compare_datasets(expected: RecoveredDataset, got: RecoveredDataset, rtol: float = 1e-2,
                     subset: bool = False) -> Comparison:
    """Match rows by nominal values, then pair quantitative values within ``rtol``.

    Columns are compared by position.  Nominal values also match their
    semantic abbreviation within the expected column.  With ``subset``
    only recovered rows must find a partner.
    """
    res = Comparison()
    if len(expected.fields) != len(got.fields):
        res.problems.append("field count %d != %d" % (len(got.fields), len(expected.fields)))
        return res
    nominal = [i for i, f in enumerate(expected.fields) if f.kind == "nominal"]
    quant = [i for i, f in enumerate(expected.fields) if f.kind != "nominal"]
    alias: Dict[int, Dict[str, str]] = {}
    for i in nominal:
        vals = sorted({str(r[i]) for r in expected.rows})
        short = op_semantic_abbreviation(vals)
        table = {v: v for v in vals}
        for v, s in zip(vals, short):
            table.setdefault(s, v)
        alias[i] = table
    spans: List[Optional[float]] = []
    for q in quant:
        if expected.fields[q].kind == "temporal" and expected.rows:
            col = [float(r[q]) for r in expected.rows]
            spans.append(max(max(col) - min(col), 1.0))
        else:
            spans.append(None)
    exp = [(tuple(str(r[i]) for i in nominal), [float(r[q]) for q in quant]) for r in expected.rows]
    rec = [(tuple(alias[i].get(str(r[i]), "\0" + str(r[i])) for i in nominal), [float(r[q]) for q in quant])
           for r in got.rows]
    if subset:
        res.extra, pairs = _pair(rec, exp, rtol, spans)
        res.pairs = sorted((e, j) for j, e in pairs)
    else:
        res.missing, pairs = _pair(exp, rec, rtol, spans)
        used = {j for _, j in pairs}
        res.extra = [j for j in range(len(rec)) if j not in used]
        res.pairs = sorted(pairs)
    return res


def _pair(src, dst, rtol: float, spans: Sequence[Optional[float]] = ()) -> Tuple[List[int], List[Tuple[int, int]]]:
    """Give each src row its closest unused dst row with equal nominals and close values."""
    groups: Dict[Tuple, Tuple[List[float], List[int]]] = {}
    for j, (key, vals) in enumerate(dst):
        groups.setdefault(key, ([], []))[1].append(j)
    for key, (keys, idx) in groups.items():
        idx.sort(key=lambda j: dst[j][1][0] if dst[j][1] else 0.0)
        keys.extend(dst[j][1][0] if dst[j][1] else 0.0 for j in idx)
    spans = list(spans) or [None] * max((len(v) for _, v in src), default=0)
    pairs = []
    for e, (key, vals) in enumerate(src):
        if key not in groups:
            continue
        keys, idx = groups[key]
        if vals:
            w = 2.1 * rtol * (spans[0] if spans[0] is not None else abs(vals[0])) + 1e-9
            span = range(bisect.bisect_left(keys, vals[0] - w), bisect.bisect_right(keys, vals[0] + w))
        else:
            span = range(len(idx))
        for k in span:
            j = idx[k]
            other = dst[j][1]
            if all(_close(a, b, rtol, sp) for a, b, sp in zip(vals, other, spans)):
                err = sum(abs(a - b) / (_scale(a, b, sp) + 1e-12) for a, b, sp in zip(vals, other, spans))
                pairs.append((err, e, j))
    # closest pairs first, so a near-miss cannot steal another row's partner
    pairs.sort()
    used: set = set()
    done: Dict[int, int] = {}
    for _, e, j in pairs:
        if e not in done and j not in used:
            done[e] = j
            used.add(j)
    unmatched = [e for e in range(len(src)) if e not in done]
    return unmatched, sorted(done.items())


# -- scene construction -----------------------------------------------------------


def _text_block(el: SvgElement, role: str, bid: str) -> TextBlock:
    color = parse_color(el.style.get("fill", "#222222")) or Color(34, 34, 34)
    align = el.style.get("text-anchor", "start")
    return TextBlock(el.lines, el.font_size, el.anchor, align if align in ("start", "middle", "end") else "start",
                     color, id=bid, role=role)


def _snap(dom, ticks, px: float):
    """Pull domain ends onto tick values lying within half a pixel of them."""
    if px <= 0:
        return dom
    tol = abs(dom[1] - dom[0]) / px * 0.5
    out = list(dom)
    for i, end in enumerate(dom):
        near = [t.value for t in ticks if abs(t.value - end) <= tol]
        if near:
            out[i] = min(near, key=lambda v: abs(v - end))
    return out


def _axis_from(ax: AxisCandidate, fs: FittedScale, axis_id: str) -> Axis:
    labelled = ax.labelled
    font = statistics.median(t.text.font_size for t in labelled) if labelled else 12.0
    angle = 0
    if ax.orientation == "horizontal" and labelled:
        a = round(abs(labelled[0].text.angle))
        angle = 90 if a >= 67 else 45 if a >= 22 else 0
    ticks = []
    sc = fs.scale
    if sc.kind == "band":
        ticks = [Tick(t.position, t.text.lines[0], t.text.lines[0]) for t in labelled]
    else:
        year = ax.hint("data-year")
        for t in labelled:
            label = t.text.lines[0]
            v = parse_month_label(label, int(year) if year else None) if sc.kind == "time" else parse_number(label)
            if v is not None:
                ticks.append(Tick(t.position, label, v))
        lo, hi = sorted(ax.extent)
        if ax.orientation == "vertical":
            dom = _snap(sorted((fs.invert(hi), fs.invert(lo))), ticks, hi - lo)
            sc = Scale(sc.kind, (dom[0], dom[1]), (hi, lo), label_format=sc.label_format)
        else:
            dom = _snap([fs.invert(lo), fs.invert(hi)], ticks, hi - lo)
            sc = Scale(sc.kind, (dom[0], dom[1]), (lo, hi), label_format=sc.label_format)
    year = ax.hint("data-year")
    side = ax.side if ax.orientation == "vertical" else "bottom"
    return Axis(ax.orientation, sc, tuple(ticks), label_angle=angle, font_size=round(font, 4), side=side,
                offset=ax.offset, id=axis_id, label_year=int(year) if year else None)


def deconstruct_svg(data, metrics: FontMetrics = DEFAULT_METRICS) -> Tuple[VisScene, Recovery]:
    """Parse, segment and recover an SVG chart into a scene with a dataset."""
    rec = recover_svg(data, metrics)
    return scene_from_recovery(rec, metrics), rec


def scene_from_recovery(rec: Recovery, metrics: FontMetrics = DEFAULT_METRICS) -> VisScene:
    comp = rec.components
    ds = rec.dataset
    roles = rec.field_roles
    legend_entries: List[Tuple[Color, str]] = []
    if comp.legend is not None:
        for sw, t in comp.legend.pairs:
            c = fill_of(sw)
            if c is not None and t.lines[0] not in [l for _, l in legend_entries]:
                legend_entries.append((c, t.lines[0]))
    series_colors = tuple((label, c) for c, label in legend_entries)
    value_fields = [f.name for f in ds.fields if f.kind == "quantitative" and f.name != roles.get("key")]
    facets = "facet" in roles
    stacked = len(rec.plots) >= 2 and not facets
    panels = []
    for pi, pr in enumerate(rec.plots):
        p = pr.plot
        pid = "p%d" % pi
        x_axis = _axis_from(p.x_axis, pr.x, pid + "-x") if p.x_axis is not None and pr.x else None
        y_axis = _axis_from(p.y_axis, pr.y, pid + "-y") if p.y_axis is not None and pr.y else None
        y2_axis = _axis_from(p.y2_axis, pr.y2, pid + "-y2") if p.y2_axis is not None and pr.y2 else None
        key_vertical = _is_band(pr.y) and not _is_band(pr.x)
        layers = []
        rows_here = _rows_of_panel(ds, roles, p, facets, pi if stacked else None, value_fields)
        for li, (kind, els) in enumerate(pr.layers):
            if stacked:
                vfield = value_fields[pi] if pi < len(value_fields) else None
                vscale = "y"
            else:
                vfield = value_fields[li] if li < len(value_fields) and y2_axis is not None else \
                    (value_fields[0] if value_fields else None)
                vscale = "y2" if (y2_axis is not None and li >= 1) else "y"
            mark_kind = {"bar": "bar", "point": "point", "line": "line-vertex"}[kind]
            colors = [fill_of(e) if kind != "line" else stroke_of(e) for e in els]
            base = next((c for c in colors if c is not None), Color(76, 120, 168))
            kw = dict(x_field=roles.get("key"), y_field=vfield, series_field=roles.get("series"),
                      color=base, series_colors=series_colors if roles.get("series") else (),
                      rows=None)
            if key_vertical:
                kw.update(x_scale_id="y", y_scale_id="x")
            else:
                kw.update(x_scale_id="x", y_scale_id=vscale if vfield else None)
            if kind == "point":
                kw["point_r"] = round(statistics.median(e.circle[2] for e in els), 4)
            if kind == "line":
                kw["stroke_width"] = round(float(els[0].style.get("stroke-width", "1") or 1), 4)
            if kind == "bar" and (pr.x and pr.x.scale.kind == "band" or pr.y and pr.y.scale.kind == "band"):
                band = pr.y if key_vertical else pr.x
                kw["bar_padding"] = band.scale.band_padding
            layer = Layer("%s-l%d" % (pid, li), mark_kind, **kw)
            layers.append(layer)
        if pr.has_text:
            lf = statistics.median(t.font_size for t in p.labels)
            point_layer = next((l for l in layers if l.mark_kind == "point"), None)
            index_rows = ()
            if pr.label_mode == "indexed":
                names = [_LIST_PREFIX.match(t.lines[0]).group(2) for t in comp.list_block]
                ti = ds.index(roles["text"])
                index_rows = tuple(next(r for r in rows_here if ds.rows[r][ti] == n) for n in names
                                   if any(ds.rows[r][ti] == n for r in rows_here))
            layers.append(Layer("%s-labels" % pid, "label", x_field=roles.get("key"),
                                y_field=point_layer.y_field if point_layer else None,
                                y_scale_id=point_layer.y_scale_id if point_layer else None,
                                text_field=roles["text"], font_size=round(lf, 4),
                                point_r=point_layer.point_r if point_layer else 3.0,
                                color=parse_color(p.labels[0].style.get("fill", "#222222")) or Color(34, 34, 34),
                                label_mode=pr.label_mode, index_rows=index_rows))
        layers = [_with_marks(l, ds, rows_here, p, pr, key_vertical) for l in layers]
        header = _text_block(p.header, "header", pid + "-header") if p.header is not None else None
        panels.append(Panel(pid, p.rect, x_axis, y_axis, tuple(layers), y2_axis,
                            facet_key=p.header.lines[0] if p.header is not None else None, header=header,
                            plot_height=p.rect.h))
    rows_n, cols_n = (rec.topology.rows, rec.topology.cols) if len(panels) >= 2 else (1, 1)
    if rows_n * cols_n != len(panels):
        rows_n, cols_n = len(panels), 1
    legend = None
    if legend_entries:
        lf = statistics.median(t.font_size for _, t in comp.legend.pairs)
        legend = Legend(tuple(legend_entries), comp.legend.position, font_size=round(lf, 4))
    annotations = [_text_block(t, "annotation", "note-%d" % i) for i, t in enumerate(comp.annotations)]
    if comp.list_block:
        lines = tuple(t.lines[0] for t in comp.list_block)
        first = comp.list_block[0]
        annotations.append(TextBlock(lines, first.font_size, first.anchor, "start", id="label-list", role="list"))
    vp = Viewport(comp.width, comp.height)
    return VisScene(vp, tuple(panels), (rows_n, cols_n),
                    title=_text_block(comp.title, "title", "title") if comp.title else None,
                    subtitle=_text_block(comp.subtitle, "subtitle", "subtitle") if comp.subtitle else None,
                    legend=legend, annotations=tuple(annotations), dataset=ds,
                    facet_field=roles.get("facet"), canvas=(comp.width, comp.height))


def _rows_of_panel(ds: RecoveredDataset, roles, plot: PlotCandidate, facets: bool, stacked_index,
                   value_fields) -> List[int]:
    if facets:
        fi = ds.index(roles["facet"])
        return [i for i, r in enumerate(ds.rows) if r[fi] == plot.header.lines[0]]
    return list(range(len(ds.rows)))


def _with_marks(layer: Layer, ds: RecoveredDataset, rows: List[int], plot: PlotCandidate, pr: PlotRecovery,
                key_vertical: bool) -> Layer:
    """Attach SVG-positioned marks, binding each to its dataset row."""
    from .layout import build_marks
    # Geometry comes straight from the fitted scales; build_marks reproduces it from data.
    panel = Panel("tmp", plot.rect,
                  _axis_from(plot.x_axis, pr.x, "x") if plot.x_axis is not None and pr.x else None,
                  _axis_from(plot.y_axis, pr.y, "y") if plot.y_axis is not None and pr.y else None,
                  (), _axis_from(plot.y2_axis, pr.y2, "y2") if plot.y2_axis is not None and pr.y2 else None)
    scene = VisScene(Viewport(), (), dataset=ds)
    marks = build_marks(scene, panel, replace(layer, rows=tuple(rows)), DEFAULT_METRICS)
    return replace(layer, marks=marks)
