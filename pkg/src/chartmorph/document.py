"""Canonical JSON chart document: lossless (de)serialization of a VisScene.

Encoding and the JSON schema are both derived from the IR dataclass type
hints, so the shipped schema cannot drift from the types without the
schema test failing.
"""

from __future__ import annotations

import dataclasses
import json
import typing
from functools import lru_cache
from typing import Any, Dict, Tuple, Union

import jsonschema

from .ir import (Color, FieldSpec, IRError, Rect, RecoveredDataset, VisScene, check_scene, parse_color)

FORMAT = "chart-document/1"
SCHEMA_ID = "https://chartmorph.invalid/schemas/chart-document-1.json"


class DocumentError(ValueError):
    """Input document failed schema or referential validation."""


# field renames between IR attribute names and document keys
_RENAMES = {
    ("Viewport", "inset"): "content_inset",
    ("VisScene", "grid"): "facet_grid",
    ("Mark", "kind"): "mark_kind",
}

_ENUMS = {
    ("Scale", "kind"): ["linear", "band", "time"],
    ("Axis", "orientation"): ["horizontal", "vertical"],
    ("Axis", "side"): ["bottom", "left", "right"],
    ("Axis", "label_angle"): [0, 45, 90],
    ("Mark", "kind"): ["bar", "point", "line-vertex", "area-vertex", "label"],
    ("Layer", "mark_kind"): ["bar", "point", "line-vertex", "area-vertex", "label"],
    ("Layer", "label_mode"): ["inline", "indexed"],
    ("Legend", "position"): ["left", "right", "top", "bottom", "inline"],
    ("TextBlock", "align"): ["start", "middle", "end"],
    ("TextBlock", "role"): ["title", "subtitle", "annotation", "header", "list"],
    ("FieldSpec", "kind"): ["quantitative", "nominal", "temporal"],
    ("RecoveredDataset", "source"): ["inverted-geometry", "parsed-labels", "declared"],
    ("ScrollSpec", "axis"): ["horizontal", "vertical"],
    ("Slider", "binding"): ["index-date", "range-filter"],
    ("Tooltip", "trigger"): ["tap"],
    ("FilterGroup", "mode"): ["single-focus"],
}


def _key(cls, name: str) -> str:
    return _RENAMES.get((cls.__name__, name), name)


@lru_cache(maxsize=None)
def _hints(cls) -> Dict[str, Any]:
    return typing.get_type_hints(cls)


def _default(f: dataclasses.Field):
    if f.default is not dataclasses.MISSING:
        return f.default
    if f.default_factory is not dataclasses.MISSING:  # type: ignore[misc]
        return f.default_factory()  # type: ignore[misc]
    return dataclasses.MISSING


def _sig12(v):
    if isinstance(v, bool) or not isinstance(v, float):
        return v
    r = float("%.12g" % v)
    return int(r) if r.is_integer() and abs(r) < 2 ** 53 else r


# -- encode ------------------------------------------------------------------


def _encode(v, tp):
    origin = typing.get_origin(tp)
    if v is None:
        return None
    if tp is Color:
        return v.css()
    if tp is Rect:
        return [v.x, v.y, v.w, v.h]
    if dataclasses.is_dataclass(tp):
        return _encode_obj(v)
    if origin is Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return _encode(v, args[0])
        return v
    if origin in (tuple, Tuple):
        args = typing.get_args(tp)
        if len(args) == 2 and args[1] is Ellipsis:
            return [_encode(x, args[0]) for x in v]
        return [_encode(x, a) for x, a in zip(v, args)]
    return v


def _encode_obj(obj) -> dict:
    cls = type(obj)
    hints = _hints(cls)
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        d = _default(f)
        if d is not dataclasses.MISSING and v == d and type(v) is type(d):
            continue
        if cls is RecoveredDataset and f.name == "rows":
            out[f.name] = [[_sig12(x) for x in row] for row in v]
            continue
        out[_key(cls, f.name)] = _encode(v, hints[f.name])
    return out


def scene_to_dict(scene: VisScene) -> dict:
    d = {"format": FORMAT}
    d.update(_encode_obj(scene))
    return d


def emit_chart_document(scene: VisScene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2, ensure_ascii=False) + "\n"


# -- decode ------------------------------------------------------------------


def _decode(v, tp):
    if v is None:
        return None
    origin = typing.get_origin(tp)
    if tp is Color:
        return parse_color(v)
    if tp is Rect:
        return Rect(*(float(x) for x in v))
    if dataclasses.is_dataclass(tp):
        return _decode_obj(v, tp)
    if origin is Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return _decode(v, args[0])
        return v
    if origin in (tuple, Tuple):
        args = typing.get_args(tp)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_decode(x, args[0]) for x in v)
        return tuple(_decode(x, a) for x, a in zip(v, args))
    if tp is float:
        return float(v)
    if tp is int:
        return int(v)
    return v


def _decode_obj(d: dict, cls):
    hints = _hints(cls)
    kwargs = {}
    for f in dataclasses.fields(cls):
        k = _key(cls, f.name)
        if k in d:
            kwargs[f.name] = _decode(d[k], hints[f.name])
    return cls(**kwargs)


def scene_from_dict(doc: dict) -> VisScene:
    validate_document(doc)
    body = {k: v for k, v in doc.items() if k != "format"}
    try:
        scene = _decode_obj(body, VisScene)
        check_scene(scene)
    except (IRError, ValueError) as exc:
        raise DocumentError(str(exc)) from None
    return scene


def load_chart_document(text: Union[str, bytes]) -> VisScene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("invalid JSON at byte %d: %s" % (exc.pos, exc.msg)) from None
    return scene_from_dict(doc)


# -- schema ------------------------------------------------------------------


def _schema_for(tp, defs: dict, owner=None, name=None) -> dict:
    enum = _ENUMS.get((owner.__name__, name)) if owner is not None else None
    if enum is not None:
        return {"enum": enum}
    origin = typing.get_origin(tp)
    if tp is Color:
        return {"type": "string", "pattern": r"^(#[0-9a-fA-F]{6}|rgba\(\d+,\d+,\d+,[0-9.]+\))$"}
    if tp is Rect:
        return {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}
    if dataclasses.is_dataclass(tp):
        _define(tp, defs)
        return {"$ref": "#/$defs/" + tp.__name__}
    if origin is Union:
        args = typing.get_args(tp)
        non_null = [a for a in args if a is not type(None)]
        if set(non_null) <= {float, int, str}:
            base = {"type": sorted({"number" if a in (float, int) else "string" for a in non_null})}
            if len(base["type"]) == 1:
                base["type"] = base["type"][0]
        elif len(non_null) == 1:
            base = _schema_for(non_null[0], defs, owner, name)
        else:
            base = {"anyOf": [_schema_for(a, defs) for a in non_null]}
        if type(None) in args:
            return {"anyOf": [base, {"type": "null"}]}
        return base
    if origin in (tuple, Tuple):
        args = typing.get_args(tp)
        if len(args) == 2 and args[1] is Ellipsis:
            return {"type": "array", "items": _schema_for(args[0], defs)}
        return {"type": "array", "prefixItems": [_schema_for(a, defs) for a in args],
                "minItems": len(args), "maxItems": len(args)}
    if tp is bool:
        return {"type": "boolean"}
    if tp is int:
        return {"type": "integer"}
    if tp is float:
        return {"type": "number"}
    if tp is str:
        return {"type": "string"}
    raise TypeError("no schema for %r" % (tp,))


def _define(cls, defs: dict) -> None:
    if cls.__name__ in defs:
        return
    defs[cls.__name__] = {}  # placeholder against recursion
    hints = _hints(cls)
    props, required = {}, []
    for f in dataclasses.fields(cls):
        k = _key(cls, f.name)
        props[k] = _schema_for(hints[f.name], defs, cls, f.name)
        if _default(f) is dataclasses.MISSING:
            required.append(k)
    entry = {"type": "object", "properties": props, "additionalProperties": False}
    if required:
        entry["required"] = required
    defs[cls.__name__] = entry


def build_schema() -> dict:
    defs: dict = {}
    _define(VisScene, defs)
    top = dict(defs.pop("VisScene"))
    props = {"format": {"const": FORMAT}}
    props.update(top["properties"])
    schema = {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": SCHEMA_ID,
        "title": "Chart document",
        "type": "object",
        "properties": props,
        "required": ["viewport", "panels"],
        "additionalProperties": False,
        "$defs": dict(sorted(defs.items())),
    }
    return schema


@lru_cache(maxsize=1)
def _validator():
    return jsonschema.Draft202012Validator(build_schema())


def validate_document(doc: dict) -> None:
    errors = sorted(_validator().iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/" + "/".join(str(p) for p in e.absolute_path)
        raise DocumentError("%s: %s" % (path, e.message))


def dataset_to_dict(ds: RecoveredDataset) -> dict:
    return {"fields": [{"name": f.name, "kind": f.kind} for f in ds.fields],
            "rows": [[_sig12(x) for x in row] for row in ds.rows],
            "source": ds.source,
            "approximate_rows": list(ds.approximate_rows)}


def dataset_from_dict(d: dict) -> RecoveredDataset:
    return RecoveredDataset(tuple(FieldSpec(f["name"], f["kind"]) for f in d["fields"]),
                            tuple(tuple(r) for r in d["rows"]), d.get("source", "declared"),
                            tuple(d.get("approximate_rows", ())))
