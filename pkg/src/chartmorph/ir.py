"""Scene-graph intermediate representation.

All geometry lives in one pixel space: origin top-left, y grows downward,
exactly as in SVG.  Every value here is immutable; rewrites build new
objects with :func:`dataclasses.replace`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence, Tuple, Union

Value = Union[float, int, str]


class DomainError(ValueError):
    """A value or position falls outside what a scale can map."""


class IRError(ValueError):
    """An IR object violates one of its invariants."""


# --------------------------------------------------------------------------
# geometry


class Rect(NamedTuple):
    x: float
    y: float
    w: float
    h: float

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def cx(self) -> float:
        return self.x + self.w / 2

    @property
    def cy(self) -> float:
        return self.y + self.h / 2

    def intersection_area(self, other: "Rect") -> float:
        dx = min(self.right, other.right) - max(self.x, other.x)
        dy = min(self.bottom, other.bottom) - max(self.y, other.y)
        if dx <= 0 or dy <= 0:
            return 0.0
        return dx * dy

    def contains(self, other: "Rect", tol: float = 0.5) -> bool:
        return (other.x >= self.x - tol and other.y >= self.y - tol
                and other.right <= self.right + tol and other.bottom <= self.bottom + tol)

    def gap(self, other: "Rect") -> float:
        """Euclidean distance between two boxes (0 when they touch or overlap)."""
        dx = max(other.x - self.right, self.x - other.right, 0.0)
        dy = max(other.y - self.bottom, self.y - other.bottom, 0.0)
        return math.hypot(dx, dy)

    def scaled(self, k: float) -> "Rect":
        return Rect(self.x * k, self.y * k, self.w * k, self.h * k)


def union_rect(rects: Sequence[Rect]) -> Optional[Rect]:
    if not rects:
        return None
    x0 = min(r.x for r in rects)
    y0 = min(r.y for r in rects)
    x1 = max(r.right for r in rects)
    y1 = max(r.bottom for r in rects)
    return Rect(x0, y0, x1 - x0, y1 - y0)


# --------------------------------------------------------------------------
# colour

_NAMED = {
    "black": (0, 0, 0), "white": (255, 255, 255), "red": (255, 0, 0),
    "green": (0, 128, 0), "blue": (0, 0, 255), "gray": (128, 128, 128),
    "grey": (128, 128, 128), "orange": (255, 165, 0), "none": None,
}
_RGB_RE = re.compile(r"rgba?\(\s*([\d.]+)\s*,\s*([\d.]+)\s*,\s*([\d.]+)\s*(?:,\s*([\d.]+)\s*)?\)")


class Color(NamedTuple):
    r: int
    g: int
    b: int
    a: float = 1.0

    @property
    def hex(self) -> str:
        return "#{:02x}{:02x}{:02x}".format(self.r, self.g, self.b)

    def css(self) -> str:
        if self.a >= 1.0:
            return self.hex
        return "rgba({},{},{},{})".format(self.r, self.g, self.b, _fmt_alpha(self.a))

    def luminance(self) -> float:
        """WCAG relative luminance."""
        def channel(c: int) -> float:
            s = c / 255.0
            return s / 12.92 if s <= 0.03928 else ((s + 0.055) / 1.055) ** 2.4
        return 0.2126 * channel(self.r) + 0.7152 * channel(self.g) + 0.0722 * channel(self.b)


def _fmt_alpha(a: float) -> str:
    return ("%.3f" % a).rstrip("0").rstrip(".")


def parse_color(text: Optional[str]) -> Optional[Color]:
    """Parse ``#rgb``, ``#rrggbb``, ``rgb()``/``rgba()`` or a few CSS names."""
    if text is None:
        return None
    s = text.strip().lower()
    if not s or s == "none" or s == "transparent":
        return None
    if s.startswith("#"):
        h = s[1:]
        if len(h) == 3:
            h = "".join(c * 2 for c in h)
        if len(h) != 6:
            raise ValueError("bad colour %r" % text)
        return Color(int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16))
    m = _RGB_RE.fullmatch(s)
    if m:
        r, g, b = (int(round(float(v))) for v in m.group(1, 2, 3))
        a = float(m.group(4)) if m.group(4) is not None else 1.0
        return Color(r, g, b, a)
    if s in _NAMED and _NAMED[s] is not None:
        return Color(*_NAMED[s])
    raise ValueError("bad colour %r" % text)


def contrast_ratio(fg: Color, bg: Color) -> float:
    l1, l2 = fg.luminance(), bg.luminance()
    hi, lo = max(l1, l2), min(l1, l2)
    return (hi + 0.05) / (lo + 0.05)


# --------------------------------------------------------------------------
# scales

SCALE_KINDS = ("linear", "band", "time")


@dataclass(frozen=True)
class Scale:
    """Value to pixel mapping.

    ``domain`` is ``(lo, hi)`` for linear and time scales (time in epoch
    milliseconds) and the ordered category tuple for band scales.
    ``range`` is a pixel pair ``(a, b)``; for a y-down vertical linear axis
    ``a`` is the bottom pixel.
    """

    kind: str
    domain: Tuple[Value, ...]
    range: Tuple[float, float]
    band_padding: float = 0.0
    label_format: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in SCALE_KINDS:
            raise IRError("unknown scale kind %r" % self.kind)
        if self.range[0] == self.range[1]:
            raise IRError("scale range endpoints must differ")
        if self.kind == "band":
            if not self.domain:
                raise IRError("band scale needs at least one category")
            if len(set(self.domain)) != len(self.domain):
                raise IRError("band categories must be distinct")
            if not 0.0 <= self.band_padding < 1.0:
                raise IRError("band padding must lie in [0, 1)")
        else:
            if len(self.domain) != 2 or not float(self.domain[0]) < float(self.domain[1]):
                raise IRError("continuous domain must be strictly ordered (lo < hi)")

    @property
    def continuous(self) -> bool:
        return self.kind != "band"

    @property
    def step(self) -> float:
        """Slot width of a band scale."""
        return (self.range[1] - self.range[0]) / len(self.domain)

    @property
    def bandwidth(self) -> float:
        return abs(self.step) * (1.0 - self.band_padding)

    def with_range(self, a: float, b: float) -> "Scale":
        return replace(self, range=(float(a), float(b)))


def scale_apply(scale: Scale, value: Value, name: str = "scale") -> float:
    """Map a data value to pixels."""
    a, b = scale.range
    if scale.kind == "band":
        try:
            i = scale.domain.index(value)
        except ValueError:
            raise DomainError("%s: %r is not a category" % (name, value)) from None
        return a + (i + 0.5) * scale.step
    lo, hi = float(scale.domain[0]), float(scale.domain[1])
    v = float(value)
    slack = 0.05 * (hi - lo)
    if not (lo - slack <= v <= hi + slack):
        raise DomainError("%s: %r outside domain [%r, %r]" % (name, value, lo, hi))
    return a + (v - lo) / (hi - lo) * (b - a)


class Inverted(NamedTuple):
    value: Value
    approximate: bool = False


def scale_invert(scale: Scale, position: float, name: str = "scale") -> Inverted:
    """Map pixels back to a data value.

    Band positions outside every slot resolve to the nearest slot and are
    flagged ``approximate``.
    """
    a, b = scale.range
    span = b - a
    if scale.kind == "band":
        t = (position - a) / span
        n = len(scale.domain)
        i = int(math.floor(t * n))
        if 0 <= i < n:
            return Inverted(scale.domain[i])
        return Inverted(scale.domain[min(max(i, 0), n - 1)], True)
    t = (position - a) / span
    if not (-0.05 <= t <= 1.05):
        raise DomainError("%s: position %r outside range %r" % (name, position, scale.range))
    lo, hi = float(scale.domain[0]), float(scale.domain[1])
    return Inverted(lo + t * (hi - lo))


# --------------------------------------------------------------------------
# scene elements


@dataclass(frozen=True)
class Viewport:
    width: float = 390.0
    height: float = 844.0
    inset: Tuple[float, float, float, float] = (16.0, 16.0, 16.0, 16.0)  # top, right, bottom, left

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise IRError("viewport dimensions must be positive")
        t, r, b, l = self.inset
        if min(self.inset) < 0:
            raise IRError("insets must be non-negative")
        if l + r >= self.width or t + b >= self.height:
            raise IRError("insets must leave a positive content box")

    @property
    def content(self) -> Rect:
        t, r, b, l = self.inset
        return Rect(l, t, self.width - l - r, self.height - t - b)


DEFAULT_TARGET = Viewport()


@dataclass(frozen=True)
class TextBlock:
    lines: Tuple[str, ...]
    font_size: float = 12.0
    anchor: Tuple[float, float] = (0.0, 0.0)
    align: str = "start"
    color: Color = Color(34, 34, 34)
    collapsed: bool = False
    id: str = ""
    role: str = "annotation"  # title, subtitle, annotation, header, list

    def __post_init__(self) -> None:
        if self.font_size <= 0:
            raise IRError("font size must be positive")
        if not self.lines or any(line == "" for line in self.lines):
            raise IRError("text block %r has an empty line" % self.id)
        if self.align not in ("start", "middle", "end"):
            raise IRError("bad alignment %r" % self.align)

    @property
    def text(self) -> str:
        return " ".join(self.lines)


@dataclass(frozen=True)
class Tick:
    position: float
    label: str
    value: Value


@dataclass(frozen=True)
class Axis:
    """One positional axis.

    ``offset`` is the baseline coordinate (y for horizontal axes, x for
    vertical ones); ``side`` tells on which side of the baseline labels sit.
    """

    orientation: str
    scale: Scale
    ticks: Tuple[Tick, ...] = ()
    title: Optional[TextBlock] = None
    label_angle: int = 0
    font_size: float = 12.0
    side: str = "bottom"  # bottom, left, right
    offset: float = 0.0
    id: str = ""
    label_map: Tuple[Tuple[str, str], ...] = ()  # band category -> display label
    label_year: Optional[int] = None  # year context for month-only time labels

    def __post_init__(self) -> None:
        if self.orientation not in ("horizontal", "vertical"):
            raise IRError("bad orientation %r" % self.orientation)
        if self.label_angle not in (0, 45, 90):
            raise IRError("label angle must be 0, 45 or 90")

    def display(self, value: Value) -> str:
        for k, v in self.label_map:
            if k == value:
                return v
        return str(value)


MARK_KINDS = ("bar", "point", "line-vertex", "area-vertex", "label")


@dataclass(frozen=True)
class Mark:
    """A data mark.

    Geometry by kind: bar uses ``x, y, w, h``; point uses ``x, y`` as the
    centre and ``r``; vertices use ``x, y`` with ``series`` and ``index``;
    labels use ``x, y`` as the text anchor plus ``text``.
    """

    kind: str
    x: float = 0.0
    y: float = 0.0
    w: float = 0.0
    h: float = 0.0
    r: float = 0.0
    series: Optional[str] = None
    index: int = 0
    text: Optional[str] = None
    font_size: float = 12.0
    align: str = "middle"
    fill: Optional[Color] = None
    stroke: Optional[Color] = None
    stroke_width: float = 0.0
    opacity: float = 1.0
    row: Optional[int] = None
    fields: Tuple[str, ...] = ()
    provenance: Tuple[str, ...] = ()
    approximate: bool = False

    def __post_init__(self) -> None:
        if self.kind not in MARK_KINDS:
            raise IRError("unknown mark kind %r" % self.kind)
        for v in (self.x, self.y, self.w, self.h, self.r):
            if not math.isfinite(v):
                raise IRError("non-finite mark geometry")
        if not 0.0 <= self.opacity <= 1.0:
            raise IRError("opacity must lie in [0, 1]")

    @property
    def datum_ref(self) -> Optional[Tuple[int, Tuple[str, ...]]]:
        return None if self.row is None else (self.row, self.fields)


@dataclass(frozen=True)
class Layer:
    """Homogeneous marks plus the encoding that produced them."""

    id: str
    mark_kind: str
    marks: Tuple[Mark, ...] = ()
    x_scale_id: str = "x"
    y_scale_id: Optional[str] = "y"
    x_field: Optional[str] = None
    y_field: Optional[str] = None
    series_field: Optional[str] = None
    text_field: Optional[str] = None
    color: Color = Color(76, 120, 168)
    series_colors: Tuple[Tuple[str, Color], ...] = ()
    point_r: float = 3.0
    stroke_width: float = 2.0
    bar_padding: float = 0.2
    font_size: float = 12.0
    rows: Optional[Tuple[int, ...]] = None  # row subset after sampling
    label_mode: str = "inline"  # inline, indexed
    index_rows: Tuple[int, ...] = ()  # reading order of indexed labels
    provenance: Tuple[str, ...] = ()

    def color_of(self, series: Optional[str]) -> Color:
        if series is not None:
            for s, c in self.series_colors:
                if s == series:
                    return c
        return self.color

    @property
    def series_order(self) -> Tuple[str, ...]:
        return tuple(s for s, _ in self.series_colors)


@dataclass(frozen=True)
class Panel:
    id: str
    plot_area: Rect
    x_axis: Optional[Axis]
    y_axis: Optional[Axis]
    layers: Tuple[Layer, ...] = ()
    y2_axis: Optional[Axis] = None
    facet_key: Optional[str] = None
    header: Optional[TextBlock] = None
    transposed: bool = False
    logical_width: Optional[float] = None
    window: Optional[Tuple[float, float]] = None
    min_band: Optional[float] = None
    plot_height: Optional[float] = None
    view_width: Optional[float] = None  # visible plot width when wider than the screen

    def axis(self, scale_id: Optional[str]) -> Optional[Axis]:
        return {"x": self.x_axis, "y": self.y_axis, "y2": self.y2_axis}.get(scale_id or "")

    def axes(self) -> Tuple[Tuple[str, Axis], ...]:
        return tuple((k, a) for k, a in (("x", self.x_axis), ("y", self.y_axis), ("y2", self.y2_axis))
                     if a is not None)


@dataclass(frozen=True)
class Legend:
    entries: Tuple[Tuple[Color, str], ...]
    position: str = "right"
    interactive: bool = False
    font_size: float = 12.0
    chips_per_row: int = 4
    anchor: Tuple[float, float] = (0.0, 0.0)
    item_boxes: Tuple[Rect, ...] = ()  # swatch boxes, filled in by layout

    def __post_init__(self) -> None:
        if self.position not in ("left", "right", "top", "bottom", "inline"):
            raise IRError("bad legend position %r" % self.position)
        labels = [label for _, label in self.entries]
        if len(set(labels)) != len(labels):
            raise IRError("legend labels must be distinct")


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: str  # quantitative, nominal, temporal


@dataclass(frozen=True)
class RecoveredDataset:
    fields: Tuple[FieldSpec, ...]
    rows: Tuple[Tuple[Value, ...], ...]
    source: str = "declared"  # inverted-geometry, parsed-labels, declared
    approximate_rows: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.fields)
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise IRError("row %d has arity %d, expected %d" % (i, len(row), n))
            for f, v in zip(self.fields, row):
                if f.kind != "nominal" and not (isinstance(v, (int, float)) and math.isfinite(v)):
                    raise IRError("row %d field %s: non-finite value %r" % (i, f.name, v))

    @property
    def field_names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def index(self, name: str) -> int:
        return self.field_names.index(name)

    def column(self, name: str) -> list:
        i = self.index(name)
        return [row[i] for row in self.rows]


# --------------------------------------------------------------------------
# interaction manifest


@dataclass(frozen=True)
class Tooltip:
    layer: str
    fields: Tuple[str, ...]
    trigger: str = "tap"
    fixed_card: bool = True
    hit_radius: float = 22.0
    targets: int = 0


@dataclass(frozen=True)
class ScrollSpec:
    axis: str
    logical_extent: float
    initial_offset: float = 0.0
    sticky_axis: Optional[str] = None
    container: Optional[str] = None
    viewport_extent: float = 0.0


@dataclass(frozen=True)
class FilterGroup:
    labels: Tuple[str, ...]
    colors: Tuple[Color, ...]
    default: str = "All"
    mode: str = "single-focus"
    dim_opacity: float = 0.25
    hit_area: float = 44.0


@dataclass(frozen=True)
class Collapsible:
    block: str
    payload: str
    visible_lines: int = 1
    hit_area: float = 44.0


@dataclass(frozen=True)
class Slider:
    label: str
    domain: Tuple[Value, Value]
    binding: str = "range-filter"  # or index-date
    window: Optional[Tuple[Value, Value]] = None
    hit_area: float = 44.0


@dataclass(frozen=True)
class InteractionManifest:
    tooltips: Tuple[Tooltip, ...] = ()
    scroll: Optional[ScrollSpec] = None
    filters: Optional[FilterGroup] = None
    collapsibles: Tuple[Collapsible, ...] = ()
    sliders: Tuple[Slider, ...] = ()

    @property
    def empty(self) -> bool:
        return not (self.tooltips or self.scroll or self.filters or self.collapsibles or self.sliders)


@dataclass(frozen=True)
class VisScene:
    viewport: Viewport
    panels: Tuple[Panel, ...] = ()
    grid: Tuple[int, int] = (1, 1)
    title: Optional[TextBlock] = None
    subtitle: Optional[TextBlock] = None
    legend: Optional[Legend] = None
    annotations: Tuple[TextBlock, ...] = ()
    dataset: Optional[RecoveredDataset] = None
    interactions: InteractionManifest = field(default_factory=InteractionManifest)
    applied_ops: Tuple[str, ...] = ()
    facet_field: Optional[str] = None
    sampled: bool = False
    laid_out: bool = False
    canvas: Tuple[float, float] = (0.0, 0.0)
    font_floor: Optional[float] = None
    background: Color = Color(255, 255, 255)

    def __post_init__(self) -> None:
        rows, cols = self.grid
        if rows < 1 or cols < 1:
            raise IRError("grid must be at least 1x1")
        if rows * cols != len(self.panels) and self.panels:
            raise IRError("grid %dx%d does not match %d panels" % (rows, cols, len(self.panels)))

    def marks(self):
        for p in self.panels:
            for layer in p.layers:
                yield from layer.marks

    def text_blocks(self) -> Tuple[TextBlock, ...]:
        out = []
        if self.title:
            out.append(self.title)
        if self.subtitle:
            out.append(self.subtitle)
        out.extend(p.header for p in self.panels if p.header is not None)
        out.extend(self.annotations)
        return tuple(out)

    def block(self, block_id: str) -> Optional[TextBlock]:
        for b in self.text_blocks():
            if b.id == block_id:
                return b
        return None

    @property
    def canvas_rect(self) -> Rect:
        w = max(self.canvas[0], self.viewport.width)
        h = max(self.canvas[1], self.viewport.height)
        return Rect(0.0, 0.0, w, h)


def check_scene(scene: VisScene) -> None:
    """Referential checks that span several objects."""
    ds = scene.dataset
    for p in scene.panels:
        for layer in p.layers:
            if p.axis(layer.x_scale_id) is None and layer.x_scale_id is not None:
                raise IRError("layer %s references missing scale %s" % (layer.id, layer.x_scale_id))
            if layer.y_scale_id is not None and p.axis(layer.y_scale_id) is None:
                raise IRError("layer %s references missing scale %s" % (layer.id, layer.y_scale_id))
            for m in layer.marks:
                if ds is not None and m.row is not None:
                    if not 0 <= m.row < len(ds.rows):
                        raise IRError("mark in %s references missing row %d" % (layer.id, m.row))
                    for f in m.fields:
                        if f not in ds.field_names:
                            raise IRError("mark in %s references missing field %s" % (layer.id, f))
