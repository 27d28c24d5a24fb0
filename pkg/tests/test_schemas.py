import json

import pytest
from jsonschema import Draft202012Validator

from chartmorph.corpus import FIXTURES
from chartmorph.document import dataset_to_dict, emit_chart_document
from chartmorph.emitter import emit_manifest
from chartmorph.schemas import SCHEMAS

from conftest import ROOT


def schema(name):
    return json.loads((ROOT / "docs" / name).read_text())


@pytest.mark.parametrize("name", sorted(SCHEMAS))
def test_docs_copy_is_current(name):
    assert schema(name) == json.loads(json.dumps(SCHEMAS[name]()))
    Draft202012Validator.check_schema(schema(name))


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_outputs_validate(name, corpus_results):
    res = corpus_results[name]
    checks = {
        "chart-document.schema.json": json.loads(emit_chart_document(res.scene)),
        "plan.schema.json": res.plan.to_dict(),
        "critique.schema.json": res.report.to_dict(),
        "manifest.schema.json": json.loads(emit_manifest(res.scene)),
        "dataset.schema.json": dataset_to_dict(res.scene.dataset),
    }
    for sname, doc in checks.items():
        errors = list(Draft202012Validator(schema(sname)).iter_errors(doc))
        assert not errors, (sname, errors[0].message)


def test_invalid_plan_rejected():
    bad = {"target": {"width": 390, "height": 844, "content_inset": [16, 16, 16, 16]}, "escalation_round": 0,
           "steps": [{"op_id": "label_rotation", "level": 2, "params": {"angle": 30}, "trigger": {}}],
           "topology": "bar", "layout": {}, "warnings": []}
    assert list(Draft202012Validator(schema("plan.schema.json")).iter_errors(bad))
