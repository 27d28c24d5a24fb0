"""JSON Schemas for the files the tool writes.

``python3 -m chartmorph.schemas DIR`` regenerates the copies kept under docs/.
"""

from __future__ import annotations

import json
import os
import sys

from .document import build_schema
from .registry import OP_IDS, OPERATORS

DRAFT = "https://json-schema.org/draft/2020-12/schema"
_NUM = {"type": "number"}
_STR = {"type": "string"}
_SCALAR = {"type": ["string", "number", "null"]}


def _obj(props: dict, required=None, extra: bool = False) -> dict:
    return {"type": "object", "properties": props, "required": list(props if required is None else required),
            "additionalProperties": extra}


def dataset_schema() -> dict:
    field = _obj({"name": _STR, "kind": {"enum": ["quantitative", "nominal", "temporal"]}})
    return {"$schema": DRAFT, "title": "Recovered dataset", **_obj({
        "fields": {"type": "array", "items": field},
        "rows": {"type": "array", "items": {"type": "array", "items": _SCALAR}},
        "source": _STR,
        "approximate_rows": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    })}


def plan_schema() -> dict:
    step_variants = []
    for op, (level, params) in OPERATORS.items():
        step_variants.append(_obj({"op_id": {"const": op}, "level": {"const": level}, "params": params,
                                   "trigger": {"type": "object"}}))
    return {"$schema": DRAFT, "title": "Transform plan", **_obj({
        "target": _obj({"width": _NUM, "height": _NUM,
                        "content_inset": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}}),
        "escalation_round": {"type": "integer", "minimum": 0},
        "steps": {"type": "array", "items": {"oneOf": step_variants}},
        "topology": _STR,
        "layout": {"type": "object", "properties": {"font_floor": _NUM}},
        "warnings": {"type": "array", "items": _STR},
    })}


def critique_schema() -> dict:
    route = {"oneOf": [
        {"type": "null"},
        _obj({"action": {"const": "reapply"}, "adjustments": {"type": "array", "items": {"type": "object"}}}),
        _obj({"action": {"const": "replan"}, "force": {"type": "array", "items": {"enum": list(OP_IDS)}}}),
    ]}
    issue = _obj({"category": {"enum": ["data_fidelity", "plan_adherence", "text_readability", "aesthetics"]},
                  "severity": {"enum": ["hard", "soft"]}, "route": route, "detail": _STR,
                  "evidence": {"type": "object", "properties": {"elements": {"type": "array"}}}})
    return {"$schema": DRAFT, "title": "Critique report", **_obj({
        "verdict": {"enum": ["pass", "fail"]},
        "iteration": {"type": "integer", "minimum": 0},
        "issues": {"type": "array", "items": issue},
        "metrics_snapshot": {"type": "object"},
    })}


def manifest_schema() -> dict:
    tooltip = _obj({"layer": _STR, "trigger": {"enum": ["tap", "hover"]}, "fields": {"type": "array", "items": _STR},
                    "fixed_card": {"type": "boolean"}, "hit_radius": _NUM, "targets": {"type": "integer"}})
    scroll = _obj({"axis": {"enum": ["horizontal", "vertical"]}, "container": _STR, "logical_extent": _NUM,
                   "viewport_extent": _NUM, "initial_offset": _NUM, "sticky_axis": {"type": ["string", "null"]}})
    filters = _obj({"labels": {"type": "array", "items": _STR}, "colors": {"type": "array", "items": _STR},
                    "default": _STR, "mode": _STR, "dim_opacity": _NUM, "hit_area": _NUM})
    collapsible = _obj({"block": _STR, "visible_lines": {"type": "integer", "minimum": 1},
                        "payload": {"type": "string", "minLength": 1}, "hit_area": _NUM})
    slider = _obj({"label": _STR, "domain": {"type": "array", "items": _SCALAR, "minItems": 2, "maxItems": 2},
                   "binding": {"enum": ["range-filter", "index-date"]},
                   "window": {"type": ["array", "null"], "items": _SCALAR}, "hit_area": _NUM})
    return {"$schema": DRAFT, "title": "Interaction manifest", **_obj({
        "version": _STR,
        "tooltips": {"type": "array", "items": tooltip},
        "scroll": scroll,
        "filters": filters,
        "collapsibles": {"type": "array", "items": collapsible},
        "sliders": {"type": "array", "items": slider},
    }, required=[])}


SCHEMAS = {
    "chart-document.schema.json": build_schema,
    "dataset.schema.json": dataset_schema,
    "plan.schema.json": plan_schema,
    "critique.schema.json": critique_schema,
    "manifest.schema.json": manifest_schema,
}


def write_schemas(directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    for name, make in SCHEMAS.items():
        with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(make(), indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    write_schemas(sys.argv[1] if len(sys.argv) > 1 else "docs")
