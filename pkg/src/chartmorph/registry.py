"""Operator identifiers, levels and parameter schemas."""

from __future__ import annotations

from typing import Dict

import jsonschema

_INT = {"type": "integer", "minimum": 1}
_NUM = {"type": "number", "exclusiveMinimum": 0}
_IDS = {"type": "array", "items": {"type": "string"}}


def _obj(props: Dict[str, dict], required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


OPERATORS = {
    # level 1: global topology
    "grid_reflow": (1, _obj({"cols": _INT}, ["cols"])),
    "axis_transposition": (1, _obj({})),
    "mark_transmutation": (1, _obj({})),
    "layout_serialization": (1, _obj({})),
    # level 2: reference frame
    "viewport_constriction": (2, _obj({"fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
                                      ["fraction"])),
    "viewport_decoupling": (2, _obj({"logical_width": _NUM}, ["logical_width"])),
    "tick_decimation": (2, _obj({"max_count": _INT, "orientation": {"enum": ["horizontal", "vertical"]}},
                                ["max_count", "orientation"])),
    "label_rotation": (2, _obj({"angle": {"enum": [45, 90]}}, ["angle"])),
    "legend_repositioning": (2, _obj({"position": {"enum": ["top"]}, "interactive": {"type": "boolean"}},
                                     ["position"])),
    "tooltip_enabling": (2, _obj({"hit_radius": _NUM})),
    # level 3: visual elements
    "semantic_abbreviation": (3, _obj({})),
    "label_externalization": (3, _obj({})),
    "text_wrapping": (3, _obj({"blocks": _IDS, "max_width": _NUM}, ["blocks", "max_width"])),
    "element_rescaling": (3, _obj({"min_point_r": _NUM, "min_bar_width": _NUM, "min_stroke": _NUM},
                                  ["min_point_r", "min_bar_width", "min_stroke"])),
    "sample_data": (3, _obj({"max_points": {"type": "integer", "minimum": 2}, "seed": {"type": "integer"}},
                            ["max_points", "seed"])),
    "filter_enabling": (3, _obj({})),
    "context_collapsing": (3, _obj({"blocks": _IDS, "max_chars": _INT}, ["blocks", "max_chars"])),
}

OP_IDS = tuple(OPERATORS)
LEVEL = {k: v[0] for k, v in OPERATORS.items()}


class ParamError(ValueError):
    pass


def validate_params(op_id: str, params: dict) -> None:
    if op_id not in OPERATORS:
        raise ParamError("unknown operator %r" % op_id)
    try:
        jsonschema.validate(params, OPERATORS[op_id][1])
    except jsonschema.ValidationError as exc:
        raise ParamError("%s: %s" % (op_id, exc.message)) from None
