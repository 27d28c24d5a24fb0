"""Text measurement and element bounding boxes without a renderer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

from .ir import Axis, Mark, Rect, TextBlock, Tick

# Helvetica advance widths as fractions of the em.
_HELVETICA = {
    " ": .278, "!": .278, '"': .355, "#": .556, "$": .556, "%": .889, "&": .667, "'": .191,
    "(": .333, ")": .333, "*": .389, "+": .584, ",": .278, "-": .333, ".": .278, "/": .278,
    "0": .556, "1": .556, "2": .556, "3": .556, "4": .556, "5": .556, "6": .556, "7": .556,
    "8": .556, "9": .556, ":": .278, ";": .278, "<": .584, "=": .584, ">": .584, "?": .556,
    "@": 1.015, "A": .667, "B": .667, "C": .722, "D": .722, "E": .667, "F": .611, "G": .778,
    "H": .722, "I": .278, "J": .5, "K": .667, "L": .556, "M": .833, "N": .722, "O": .778,
    "P": .667, "Q": .778, "R": .722, "S": .667, "T": .611, "U": .722, "V": .667, "W": .944,
    "X": .667, "Y": .667, "Z": .611, "[": .278, "\\": .278, "]": .278, "^": .469, "_": .556,
    "`": .333, "a": .556, "b": .556, "c": .5, "d": .556, "e": .556, "f": .278, "g": .556,
    "h": .556, "i": .222, "j": .222, "k": .5, "l": .222, "m": .833, "n": .556, "o": .556,
    "p": .556, "q": .556, "r": .333, "s": .5, "t": .278, "u": .556, "v": .5, "w": .722,
    "x": .5, "y": .5, "z": .5, "{": .334, "|": .26, "}": .334, "~": .584,
}


@dataclass(frozen=True)
class FontMetrics:
    advances: Dict[str, float] = field(default_factory=lambda: dict(_HELVETICA))
    fallback_advance: float = 0.55
    line_height_factor: float = 1.25

    def __post_init__(self) -> None:
        for ch, adv in self.advances.items():
            if not 0.0 < adv <= 2.0:
                raise ValueError("advance for %r out of (0, 2]" % ch)

    @classmethod
    def uniform(cls, advance: float = 0.55) -> "FontMetrics":
        return cls(advances={}, fallback_advance=advance)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.advances.items())), self.fallback_advance, self.line_height_factor))

    def line_height(self, font_size: float) -> float:
        return self.line_height_factor * font_size


DEFAULT_METRICS = FontMetrics()


def estimate_text_width(text: str, font_size: float, metrics: FontMetrics = DEFAULT_METRICS) -> float:
    if font_size <= 0:
        raise ValueError("font size must be positive")
    adv = metrics.advances
    fb = metrics.fallback_advance
    return sum(adv.get(ch, fb) for ch in text) * font_size


def text_box(lines, font_size: float, anchor: Tuple[float, float], align: str = "start",
             angle: float = 0.0, metrics: FontMetrics = DEFAULT_METRICS) -> Rect:
    """Box of a (possibly multi-line, possibly rotated) text anchored at its first baseline.

    The unrotated box spans ``font_size`` above the baseline and one
    line-height per line in total.  Rotation is counter-clockwise by
    ``angle`` degrees around the anchor, as SVG ``rotate(-angle)``.
    """
    if isinstance(lines, str):
        lines = (lines,)
    w = max((estimate_text_width(s, font_size, metrics) for s in lines), default=0.0)
    h = metrics.line_height(font_size) * len(lines)
    x0 = {"start": 0.0, "middle": -w / 2, "end": -w}[align]
    y0 = -font_size
    ax, ay = anchor
    if not angle:
        return Rect(ax + x0, ay + y0, w, h)
    t = math.radians(-angle)
    c, s = math.cos(t), math.sin(t)
    xs, ys = [], []
    for px, py in ((x0, y0), (x0 + w, y0), (x0, y0 + h), (x0 + w, y0 + h)):
        xs.append(ax + px * c - py * s)
        ys.append(ay + px * s + py * c)
    return Rect(min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))


def rotated_extent(width: float, font_size: float, angle: int,
                   metrics: FontMetrics = DEFAULT_METRICS) -> Tuple[float, float]:
    """Horizontal and vertical extent of a single-line label at ``angle``."""
    h = metrics.line_height(font_size)
    if angle == 0:
        return width, h
    if angle == 90:
        return h, width
    k = math.sqrt(0.5)
    return (width + h) * k, (width + h) * k


# -- axis label placement, shared by layout, bounding boxes and the emitter

TICK_LEN = 6.0
TICK_PAD = 3.0


def tick_label_anchor(axis: Axis, tick: Tick, metrics: FontMetrics = DEFAULT_METRICS):
    """Anchor point, alignment and angle of a tick label."""
    f = axis.font_size
    p = tick.position
    if axis.orientation == "horizontal":
        base = axis.offset + TICK_LEN + TICK_PAD
        if axis.label_angle == 0:
            return (p, base + f), "middle", 0
        if axis.label_angle == 90:
            # shift so the rotated box is centred on the tick
            return (p + f - metrics.line_height(f) / 2, base), "end", 90
        h = metrics.line_height(f)
        k = math.sqrt(0.5)
        # the end of the label's mid-line lands on the tick, box top on the pad
        return (p + (f - h / 2) * k, base + f * k), "end", 45
    y = p + f - metrics.line_height(f) / 2
    if axis.side == "right":
        return (axis.offset + TICK_LEN + TICK_PAD, y), "start", 0
    return (axis.offset - TICK_LEN - TICK_PAD, y), "end", 0


def tick_label_box(axis: Axis, tick: Tick, metrics: FontMetrics = DEFAULT_METRICS) -> Rect:
    anchor, align, angle = tick_label_anchor(axis, tick, metrics)
    return text_box(tick.label, axis.font_size, anchor, align, angle, metrics)


def block_box(block: TextBlock, metrics: FontMetrics = DEFAULT_METRICS) -> Rect:
    return text_box(block.lines, block.font_size, block.anchor, block.align, 0, metrics)


def mark_box(mark: Mark, metrics: FontMetrics = DEFAULT_METRICS) -> Rect:
    if mark.kind == "bar":
        return Rect(mark.x, mark.y, mark.w, mark.h)
    if mark.kind == "point":
        return Rect(mark.x - mark.r, mark.y - mark.r, 2 * mark.r, 2 * mark.r)
    if mark.kind == "label":
        return text_box(mark.text or "", mark.font_size, (mark.x, mark.y), mark.align, 0, metrics)
    half = mark.stroke_width / 2
    return Rect(mark.x - half, mark.y - half, 2 * half, 2 * half)


def axis_box(axis: Axis, metrics: FontMetrics = DEFAULT_METRICS) -> Rect:
    boxes: List[Rect] = [tick_label_box(axis, t, metrics) for t in axis.ticks]
    lo, hi = sorted(axis.scale.range)
    if axis.orientation == "horizontal":
        boxes.append(Rect(lo, axis.offset, hi - lo, TICK_LEN))
    else:
        x = axis.offset - TICK_LEN if axis.side != "right" else axis.offset
        boxes.append(Rect(x, lo, TICK_LEN, hi - lo))
    x0 = min(b.x for b in boxes)
    y0 = min(b.y for b in boxes)
    return Rect(x0, y0, max(b.right for b in boxes) - x0, max(b.bottom for b in boxes) - y0)


def bounding_box(element: Union[Mark, TextBlock, Axis], metrics: FontMetrics = DEFAULT_METRICS) -> Rect:
    """Tight axis-aligned box of a mark, text block or axis."""
    if isinstance(element, Mark):
        return mark_box(element, metrics)
    if isinstance(element, TextBlock):
        return block_box(element, metrics)
    if isinstance(element, Axis):
        return axis_box(element, metrics)
    raise TypeError("no bounding box for %r" % type(element).__name__)


def wrap_words(text: str, max_width: float, font_size: float,
               metrics: FontMetrics = DEFAULT_METRICS) -> Tuple[Tuple[str, ...], bool]:
    """Greedy word wrap.

    Returns the lines and whether some single word is wider than
    ``max_width`` (such a word sits alone on its line).
    """
    words = text.split()
    lines: List[str] = []
    current = ""
    too_wide = False
    for word in words:
        if estimate_text_width(word, font_size, metrics) > max_width:
            too_wide = True
        trial = word if not current else current + " " + word
        if current and estimate_text_width(trial, font_size, metrics) > max_width:
            lines.append(current)
            current = word
        else:
            current = trial
    if current:
        lines.append(current)
    return tuple(lines), too_wide
