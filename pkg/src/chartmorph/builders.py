"""Convenience constructors for desktop chart scenes.

Used to author fixtures and in tests; every builder returns a laid-out
:class:`VisScene` whose dataset is the ground truth for the chart.
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence, Tuple

from .ir import (Axis, Color, FieldSpec, Layer, Legend, Panel, Rect, RecoveredDataset, Scale, TextBlock,
                 Tick, Viewport, VisScene)
from .layout import default_tick_values, relayout
from .ticks import nice_domain, time_format_for

DESKTOP = Viewport(800.0, 500.0, (24.0, 24.0, 24.0, 24.0))
PALETTE = tuple(Color(*c) for c in (
    (76, 120, 168), (245, 133, 24), (228, 87, 86), (114, 183, 178), (84, 162, 75),
    (238, 202, 59), (178, 121, 162), (255, 157, 166), (157, 117, 93), (186, 176, 172)))
_EMPTY = Rect(0.0, 0.0, 1.0, 1.0)


def band_axis(categories: Sequence[str], axis_id: str, font_size: float = 12.0, padding: float = 0.2,
              angle: int = 0) -> Axis:
    return Axis("horizontal", Scale("band", tuple(categories), (0.0, 1.0), padding), font_size=font_size,
                id=axis_id, label_angle=angle)


def linear_axis(lo: float, hi: float, axis_id: str, orientation: str = "vertical", font_size: float = 12.0,
                include_zero: bool = False, max_count: int = 8) -> Axis:
    lo, hi = nice_domain(lo, hi, max_count, include_zero)
    sc = Scale("linear", (lo, hi), (0.0, 1.0))
    ticks = tuple(Tick(0.0, "", v) for v in default_tick_values(sc, max_count))
    return Axis(orientation, sc, ticks, font_size=font_size, id=axis_id,
                side="bottom" if orientation == "horizontal" else "left")


def time_axis(lo_ms: float, hi_ms: float, axis_id: str, font_size: float = 12.0, max_count: int = 12,
              label_format: Optional[str] = None) -> Axis:
    sc = Scale("time", (lo_ms, hi_ms), (0.0, 1.0), label_format=label_format or time_format_for(lo_ms, hi_ms))
    ticks = tuple(Tick(0.0, "", v) for v in default_tick_values(sc, max_count))
    return Axis("horizontal", sc, ticks, font_size=font_size, id=axis_id)


def block(text: str, role: str, font_size: float, block_id: Optional[str] = None) -> TextBlock:
    return TextBlock((text,), font_size, id=block_id or role, role=role)


def series_colors(names: Sequence[str]) -> Tuple[Tuple[str, Color], ...]:
    return tuple((n, PALETTE[i % len(PALETTE)]) for i, n in enumerate(names))


def legend_for(names: Sequence[str], position: str = "right", font_size: float = 12.0) -> Legend:
    return Legend(tuple((c, n) for n, c in series_colors(names)), position, font_size=font_size)


def dataset(fields: Sequence[Tuple[str, str]], rows: Sequence[Sequence]) -> RecoveredDataset:
    return RecoveredDataset(tuple(FieldSpec(n, k) for n, k in fields), tuple(tuple(r) for r in rows), "declared")


def assemble(panels: Sequence[Panel], data: RecoveredDataset, title: Optional[str] = None,
             subtitle: Optional[str] = None, legend: Optional[Legend] = None,
             annotations: Sequence[str] = (), grid: Tuple[int, int] = (1, 1), facet_field: Optional[str] = None,
             viewport: Viewport = DESKTOP, title_size: float = 18.0, text_size: float = 12.0) -> VisScene:
    scene = VisScene(
        viewport, tuple(panels), grid,
        title=block(title, "title", title_size) if title else None,
        subtitle=block(subtitle, "subtitle", text_size) if subtitle else None,
        legend=legend,
        annotations=tuple(block(a, "annotation", text_size, "note-%d" % i) for i, a in enumerate(annotations)),
        dataset=data, facet_field=facet_field)
    return relayout(scene)


def _panel(pid: str, x: Axis, y: Optional[Axis], layers: Sequence[Layer], height: float,
           y2: Optional[Axis] = None, facet: Optional[str] = None) -> Panel:
    return Panel(pid, _EMPTY, x, y, tuple(layers), y2_axis=y2, facet_key=facet, plot_height=height)


# -- chart kinds ---------------------------------------------------------------------------


def bar_chart(categories: Sequence[str], values: Sequence[float], *, key: str = "category",
              value: str = "value", title: Optional[str] = None, font_size: float = 12.0,
              height: float = 340.0, **kw) -> VisScene:
    data = dataset([(key, "nominal"), (value, "quantitative")], list(zip(categories, values)))
    x = band_axis(categories, "p0-x", font_size)
    y = linear_axis(min(0.0, min(values)), max(values), "p0-y", font_size=font_size, include_zero=True)
    layer = Layer("bars", "bar", x_field=key, y_field=value, color=PALETTE[0])
    return assemble([_panel("p0", x, y, [layer], height)], data, title, **kw)


def grouped_bar_chart(categories: Sequence[str], series: Sequence[str], values: Sequence[Sequence[float]], *,
                      key: str = "category", value: str = "value", group: str = "group",
                      title: Optional[str] = None, height: float = 340.0, **kw) -> VisScene:
    rows = [(c, values[i][j], s) for i, c in enumerate(categories) for j, s in enumerate(series)]
    data = dataset([(key, "nominal"), (value, "quantitative"), (group, "nominal")], rows)
    flat = [v for row in values for v in row]
    x = band_axis(categories, "p0-x")
    y = linear_axis(min(0.0, min(flat)), max(flat), "p0-y", include_zero=True)
    layer = Layer("bars", "bar", x_field=key, y_field=value, series_field=group,
                  series_colors=series_colors(series))
    return assemble([_panel("p0", x, y, [layer], height)], data, title, legend=legend_for(series), **kw)


def line_chart(xs: Sequence[float], series: Dict[str, Sequence[float]], *, time: bool = True,
               key: str = "date", value: str = "value", group: str = "series", title: Optional[str] = None,
               height: float = 340.0, stroke: float = 2.0, **kw) -> VisScene:
    names = list(series)
    multi = len(names) > 1
    rows = []
    for n in names:
        for xv, yv in zip(xs, series[n]):
            rows.append((xv, yv, n) if multi else (xv, yv))
    fields = [(key, "temporal" if time else "quantitative"), (value, "quantitative")]
    if multi:
        fields.append((group, "nominal"))
    data = dataset(fields, rows)
    flat = [v for n in names for v in series[n]]
    x = time_axis(min(xs), max(xs), "p0-x") if time else \
        linear_axis(min(xs), max(xs), "p0-x", "horizontal")
    y = linear_axis(min(flat), max(flat), "p0-y")
    layer = Layer("lines", "line-vertex", x_field=key, y_field=value, series_field=group if multi else None,
                  series_colors=series_colors(names) if multi else (), stroke_width=stroke)
    return assemble([_panel("p0", x, y, [layer], height)], data, title,
                    legend=legend_for(names) if multi else None, **kw)


def scatter_chart(points: Sequence[Tuple[float, float]], *, xname: str = "x", yname: str = "y",
                  radius: float = 2.0, title: Optional[str] = None, height: float = 340.0, **kw) -> VisScene:
    data = dataset([(xname, "quantitative"), (yname, "quantitative")], points)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x = linear_axis(min(xs), max(xs), "p0-x", "horizontal")
    y = linear_axis(min(ys), max(ys), "p0-y")
    layer = Layer("points", "point", x_field=xname, y_field=yname, point_r=radius)
    return assemble([_panel("p0", x, y, [layer], height)], data, title, **kw)


def dot_strip(names: Sequence[str], values: Sequence[float], *, label: str = "name", value: str = "value",
              title: Optional[str] = None, height: float = 120.0, **kw) -> VisScene:
    data = dataset([(label, "nominal"), (value, "quantitative")], list(zip(names, values)))
    x = linear_axis(min(values), max(values), "p0-x", "horizontal")
    dots = Layer("dots", "point", x_field=value, y_field=None, y_scale_id=None, point_r=5.0)
    labels = Layer("dot-labels", "label", x_field=value, y_field=None, y_scale_id=None, text_field=label,
                   point_r=5.0, color=Color(51, 51, 51))
    return assemble([_panel("p0", x, None, [dots, labels], height)], data, title, **kw)


def facet_bars(facets: Sequence[str], categories: Sequence[str], values: Sequence[Sequence[float]], *,
               cols: int = 3, key: str = "category", value: str = "value", facet: str = "region",
               title: Optional[str] = None, height: float = 130.0, **kw) -> VisScene:
    rows = [(c, values[f][i], fname) for f, fname in enumerate(facets) for i, c in enumerate(categories)]
    data = dataset([(key, "nominal"), (value, "quantitative"), (facet, "nominal")], rows)
    hi = max(v for row in values for v in row)
    panels = []
    for f, fname in enumerate(facets):
        pid = "p%d" % f
        x = band_axis(categories, pid + "-x")
        y = linear_axis(0.0, hi, pid + "-y", include_zero=True, max_count=4)
        layer = Layer("bars-%d" % f, "bar", x_field=key, y_field=value, color=PALETTE[0])
        panels.append(_panel(pid, x, y, [layer], height, facet=fname))
    n = len(facets)
    grid = ((n + cols - 1) // cols, cols)
    return assemble(panels, data, title, grid=grid, facet_field=facet, **kw)


def dual_overlay(categories: Sequence[str], bars: Sequence[float], line: Sequence[float], *,
                 key: str = "month", bar_name: str = "rainfall", line_name: str = "temperature",
                 title: Optional[str] = None, height: float = 340.0, **kw) -> VisScene:
    data = dataset([(key, "nominal"), (bar_name, "quantitative"), (line_name, "quantitative")],
                   list(zip(categories, bars, line)))
    x = band_axis(categories, "p0-x")
    y = linear_axis(0.0, max(bars), "p0-y", include_zero=True)
    y2 = linear_axis(min(line), max(line), "p0-y2")
    b = Layer("bars", "bar", x_field=key, y_field=bar_name, color=PALETTE[0])
    ln = Layer("line", "line-vertex", y_scale_id="y2", x_field=key, y_field=line_name, color=PALETTE[1],
               stroke_width=2.5)
    return assemble([_panel("p0", x, y, [b, ln], height, y2=y2)], data, title, **kw)
