"""Restricted SVG parsing with transforms resolved to absolute coordinates."""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

Matrix = Tuple[float, float, float, float, float, float]  # a b c d e f
IDENTITY: Matrix = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
SUPPORTED = ("svg", "g", "rect", "circle", "line", "path", "text", "tspan")
GEOMETRY = ("rect", "circle", "line", "path")
INHERITED = ("fill", "stroke", "stroke-width", "font-size", "text-anchor", "opacity",
             "data-scale", "data-format", "data-year")
CUBIC_SAMPLES = 8


class SvgParseError(ValueError):
    """Malformed XML; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__("%s (byte offset %d)" % (message, offset))
        self.offset = offset


class SvgInputError(ValueError):
    pass


class UnsupportedFeature(ValueError):
    pass


@dataclass
class SvgElement:
    tag: str
    attributes: Dict[str, str]
    children: List["SvgElement"] = field(default_factory=list)
    resolved_transform: Matrix = IDENTITY
    # absolute geometry, filled for geometry and text elements
    points: Tuple[Tuple[float, float], ...] = ()
    closed: bool = False
    rect: Optional[Tuple[float, float, float, float]] = None
    circle: Optional[Tuple[float, float, float]] = None
    lines: Tuple[str, ...] = ()
    anchor: Tuple[float, float] = (0.0, 0.0)
    font_size: float = 0.0
    angle: float = 0.0  # counter-clockwise degrees
    style: Dict[str, str] = field(default_factory=dict)  # inherited presentation attributes
    order: int = 0

    def iter(self):
        yield self
        for c in self.children:
            yield from c.iter()


@dataclass
class SvgTree:
    root: SvgElement
    width: float
    height: float
    unsupported: Tuple[str, ...] = ()

    def elements(self, *tags: str) -> List[SvgElement]:
        return [e for e in self.root.iter() if not tags or e.tag in tags]


# -- transforms ----------------------------------------------------------------


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    a, b, c, d, e, f = m
    a2, b2, c2, d2, e2, f2 = n
    return (a * a2 + c * b2, b * a2 + d * b2, a * c2 + c * d2, b * c2 + d * d2,
            a * e2 + c * f2 + e, b * e2 + d * f2 + f)


def apply(m: Matrix, x: float, y: float) -> Tuple[float, float]:
    a, b, c, d, e, f = m
    return a * x + c * y + e, b * x + d * y + f


_TRANSFORM_RE = re.compile(r"(\w+)\s*\(([^)]*)\)")
_NUM_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


def parse_transform(text: Optional[str]) -> Matrix:
    m = IDENTITY
    if not text:
        return m
    for name, args in _TRANSFORM_RE.findall(text):
        v = [float(x) for x in _NUM_RE.findall(args)]
        if name == "translate":
            t = (1.0, 0.0, 0.0, 1.0, v[0], v[1] if len(v) > 1 else 0.0)
        elif name == "scale":
            sx = v[0]
            sy = v[1] if len(v) > 1 else sx
            t = (sx, 0.0, 0.0, sy, 0.0, 0.0)
        elif name == "rotate":
            r = math.radians(v[0])
            c, s = math.cos(r), math.sin(r)
            t = (c, s, -s, c, 0.0, 0.0)
            if len(v) == 3:
                cx, cy = v[1], v[2]
                t = mat_mul(mat_mul((1.0, 0.0, 0.0, 1.0, cx, cy), t), (1.0, 0.0, 0.0, 1.0, -cx, -cy))
        elif name == "matrix":
            t = tuple(v[:6])  # type: ignore[assignment]
        else:
            raise UnsupportedFeature("unsupported transform %r" % name)
        m = mat_mul(m, t)
    return m


# -- paths ---------------------------------------------------------------------


_PATH_TOKEN = re.compile(r"([A-Za-z])|([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)")


def parse_path(d: str) -> Tuple[List[Tuple[float, float]], bool]:
    """Absolute vertex list of a path plus whether it is closed.

    Supports M, L, H, V, Z and C (flattened), upper and lower case.
    """
    tokens = []
    for cmd, number in _PATH_TOKEN.findall(d):
        tokens.append(cmd if cmd else float(number))
    pts: List[Tuple[float, float]] = []
    closed = False
    x = y = 0.0
    start = (0.0, 0.0)
    i = 0
    cmd = None
    while i < len(tokens):
        t = tokens[i]
        if isinstance(t, str):
            cmd = t
            i += 1
            if cmd in "Zz":
                closed = True
                x, y = start
                continue
            if cmd.upper() not in "MLHVC":
                raise UnsupportedFeature("unsupported path command %r" % cmd)
            continue
        if cmd is None:
            raise UnsupportedFeature("path data must start with a command")
        rel = cmd.islower()
        up = cmd.upper()
        if up in "ML":
            nx, ny = tokens[i], tokens[i + 1]
            i += 2
            x, y = (x + nx, y + ny) if rel else (nx, ny)
            pts.append((x, y))
            if up == "M":
                start = (x, y)
                cmd = "l" if rel else "L"
        elif up == "H":
            x = x + tokens[i] if rel else tokens[i]
            i += 1
            pts.append((x, y))
        elif up == "V":
            y = y + tokens[i] if rel else tokens[i]
            i += 1
            pts.append((x, y))
        elif up == "C":
            c = tokens[i:i + 6]
            i += 6
            if rel:
                c = [c[0] + x, c[1] + y, c[2] + x, c[3] + y, c[4] + x, c[5] + y]
            p0 = (x, y)
            for k in range(1, CUBIC_SAMPLES + 1):
                s = k / CUBIC_SAMPLES
                u = 1 - s
                px = u ** 3 * p0[0] + 3 * u * u * s * c[0] + 3 * u * s * s * c[2] + s ** 3 * c[4]
                py = u ** 3 * p0[1] + 3 * u * u * s * c[1] + 3 * u * s * s * c[3] + s ** 3 * c[5]
                pts.append((px, py))
            x, y = c[4], c[5]
    if closed and len(pts) > 1 and pts[-1] == pts[0]:
        pts.pop()
    return pts, closed


# -- document --------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _style(attrs: Dict[str, str]) -> Dict[str, str]:
    out = dict(attrs)
    for decl in attrs.get("style", "").split(";"):
        if ":" in decl:
            k, v = decl.split(":", 1)
            out[k.strip()] = v.strip()
    return out


def _length(v: Optional[str]) -> Optional[float]:
    if v is None:
        return None
    m = _NUM_RE.match(v.strip())
    return float(m.group(0)) if m else None


def _f(attrs: Dict[str, str], name: str, default: float = 0.0) -> float:
    v = _length(attrs.get(name))
    return default if v is None else v


def _byte_offset(text: str, line: int, col: int) -> int:
    lines = text.split("\n")
    prefix = "\n".join(lines[:line - 1])
    off = len(prefix.encode("utf-8")) + (1 if line > 1 else 0)
    return off + len(lines[line - 1][:col].encode("utf-8")) if line - 1 < len(lines) else off


def parse_svg(data) -> SvgTree:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    try:
        xml_root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise SvgParseError("malformed XML: %s" % exc,
                            _byte_offset(text, line, col)) from None
    if _local(xml_root.tag) != "svg":
        raise SvgInputError("root element is %r, expected svg" % _local(xml_root.tag))
    width = _length(xml_root.get("width"))
    height = _length(xml_root.get("height"))
    vb = xml_root.get("viewBox")
    if (width is None or height is None) and vb:
        parts = [float(x) for x in _NUM_RE.findall(vb)]
        if len(parts) == 4:
            width = width if width is not None else parts[2]
            height = height if height is not None else parts[3]
    if width is None or height is None:
        raise SvgInputError("svg root has no resolvable width/height")
    unsupported: List[str] = []
    counter = [0]

    def build(node, parent_m: Matrix, inherited: Dict[str, str]) -> Optional[SvgElement]:
        tag = _local(node.tag)
        if tag not in SUPPORTED:
            unsupported.append(tag)
            return None
        attrs = {_local(k): v for k, v in node.attrib.items()}
        own = _style(attrs)
        style = dict(inherited)
        style.update({k: own[k] for k in INHERITED if k in own})
        m = mat_mul(parent_m, parse_transform(attrs.get("transform")))
        el = SvgElement(tag, attrs, resolved_transform=m, style=style, order=counter[0])
        counter[0] += 1
        if tag == "rect":
            x, y, w, h = _f(attrs, "x"), _f(attrs, "y"), _f(attrs, "width"), _f(attrs, "height")
            corners = [apply(m, x, y), apply(m, x + w, y), apply(m, x, y + h), apply(m, x + w, y + h)]
            xs, ys = [c[0] for c in corners], [c[1] for c in corners]
            el.rect = (min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))
            el.points = tuple(corners)
        elif tag == "circle":
            cx, cy = apply(m, _f(attrs, "cx"), _f(attrs, "cy"))
            scale = math.sqrt(abs(m[0] * m[3] - m[1] * m[2]))
            el.circle = (cx, cy, _f(attrs, "r") * scale)
        elif tag == "line":
            el.points = (apply(m, _f(attrs, "x1"), _f(attrs, "y1")), apply(m, _f(attrs, "x2"), _f(attrs, "y2")))
        elif tag == "path":
            pts, closed = parse_path(attrs.get("d", ""))
            el.points = tuple(apply(m, px, py) for px, py in pts)
            el.closed = closed
        elif tag == "text":
            spans = [c for c in node if _local(c.tag) == "tspan"]
            if spans:
                el.lines = tuple((s.text or "").strip() for s in spans if (s.text or "").strip())
            else:
                el.lines = ((node.text or "").strip(),) if (node.text or "").strip() else ()
            el.anchor = apply(m, _f(attrs, "x"), _f(attrs, "y"))
            scale = math.sqrt(abs(m[0] * m[3] - m[1] * m[2]))
            el.font_size = _f(style, "font-size", 16.0) * scale
            el.angle = round(-math.degrees(math.atan2(m[1], m[0])), 6) + 0.0
            for c in node:
                if _local(c.tag) != "tspan":
                    unsupported.append(_local(c.tag))
            return el
        for child in node:
            c = build(child, m, style)
            if c is not None:
                el.children.append(c)
        return el

    root = build(xml_root, IDENTITY, {})
    assert root is not None
    return SvgTree(root, width, height, tuple(unsupported))
