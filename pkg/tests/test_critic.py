from dataclasses import replace

import pytest

from chartmorph.corpus import FIXTURES
from chartmorph.critic import (Issue, check_aesthetics, check_data_fidelity, check_plan_adherence,
                               check_text_readability, critique, layout_blocks, overlapping_pairs, reapply, replan,
                               route, TextItem)
from chartmorph.ir import DEFAULT_TARGET, Color, Rect
from chartmorph.operators import OpContext, apply_plan
from chartmorph.planner import Thresholds, plan

WHITE, BLACK = Color(255, 255, 255), Color(0, 0, 0)


def adapted(name="bar_basic"):
    scene = FIXTURES[name].build()
    p = plan(scene, DEFAULT_TARGET)
    return scene, p, apply_plan(scene, p, OpContext())


def item(i, box):
    return TextItem(i, Rect(*box), 12.0, "block")


def test_overlap_detection_on_boxes():
    a, b, c = item("a", (0, 0, 10, 10)), item("b", (5, 5, 10, 10)), item("c", (10, 0, 5, 6))
    pairs = overlapping_pairs([a, b, c])
    # c only touches a along an edge; b overlaps both
    assert {(x.id, y.id) for x, y in pairs} == {("a", "b"), ("b", "c")}


def test_clean_output_has_no_issues():
    _, p, out = adapted()
    report = critique(out, p, FIXTURES["bar_basic"].build().dataset, Thresholds(), 1)
    assert report.verdict == "pass"
    assert not report.issues


def test_small_font_is_hard():
    _, p, out = adapted()
    out = replace(out, title=replace(out.title, font_size=10.0))
    hits = [i for i in check_text_readability(out, Thresholds(), p) if "below 12px" in i.detail]
    assert len(hits) == 1 and hits[0].severity == "hard"
    assert hits[0].route == reapply({"layout": {"font_floor": 12.0}})


def test_contrast():
    _, p, out = adapted()
    low = replace(out, title=replace(out.title, color=WHITE))
    soft = [i for i in check_text_readability(low, Thresholds(), p) if "contrast" in i.detail]
    assert soft and soft[0].severity == "soft" and "title" in soft[0].evidence["elements"][0]
    high = replace(out, title=replace(out.title, color=BLACK))
    assert not [i for i in check_text_readability(high, Thresholds(), p) if "contrast" in i.detail]


def test_element_beyond_viewport_is_hard():
    _, p, out = adapted()
    panel = out.panels[0]
    layer = panel.layers[0]
    moved = replace(layer, marks=(replace(layer.marks[0], x=500.0),) + layer.marks[1:])
    out = replace(out, panels=(replace(panel, layers=(moved,) + panel.layers[1:]),))
    hard = [i for i in check_aesthetics(out) if i.severity == "hard"]
    assert hard and hard[0].route["action"] == "replan"


def test_tight_blocks_are_soft():
    _, p, out = adapted("long_title")
    blocks = dict(layout_blocks(out))
    sub = out.subtitle
    title_box = blocks[out.title.id or "title"]
    sub_box = blocks[sub.id or "subtitle"]
    shift = (title_box.bottom + 4.0) - sub_box.y
    out = replace(out, subtitle=replace(sub, anchor=(sub.anchor[0], sub.anchor[1] + shift)))
    tight = [i for i in check_aesthetics(out) if "apart" in i.detail]
    assert tight and all(i.severity == "soft" for i in tight)
    assert any(abs(i.evidence["gap"] - 4.0) < 1e-6 for i in tight)


def test_tick_overlap_routes_to_rotation():
    scene, p, out = adapted()
    panel = out.panels[0]
    xa = panel.x_axis
    squashed = replace(xa, ticks=tuple(replace(t, position=xa.ticks[0].position + i) for i, t in enumerate(xa.ticks)))
    out = replace(out, panels=(replace(panel, x_axis=squashed),))
    hits = [i for i in check_text_readability(out, Thresholds(), p) if "overlapping" in i.detail]
    assert hits and hits[0].severity == "hard"
    assert hits[0].route == reapply({"op_id": "label_rotation", "params": {"angle": 45}})


def test_tampered_geometry_fails_fidelity():
    scene, p, out = adapted()
    panel = out.panels[0]
    layer = panel.layers[0]
    bar = layer.marks[0]
    taller = replace(bar, y=bar.y - 40, h=bar.h + 40)
    out = replace(out, panels=(replace(panel, layers=(replace(layer, marks=(taller,) + layer.marks[1:]),)),))
    issues = check_data_fidelity(scene.dataset, out)
    assert issues and issues[0].severity == "hard"


def test_plan_adherence():
    _, p, out = adapted()
    out = replace(out, applied_ops=out.applied_ops[:-1])
    issues = check_plan_adherence(p, out)
    assert [i.detail for i in issues] == ["missing operator %s" % p.op_ids[-1]]


def test_route_priorities():
    soft = Issue("aesthetics", "soft", "x")
    rot = Issue("text_readability", "hard", "r", route=reapply({"op_id": "label_rotation", "params": {"angle": 45}}))
    dec = Issue("aesthetics", "hard", "d", route=replan("viewport_decoupling"))
    tr = Issue("aesthetics", "hard", "t", route=replan("axis_transposition"))
    assert route([]) == {"action": "pass"}
    assert route([soft]) == {"action": "pass"}
    assert route([soft, rot]) == rot.route
    assert route([rot, dec]) == replan("viewport_decoupling")
    assert route([dec, tr]) == replan("axis_transposition")


def test_hard_issue_requires_route():
    with pytest.raises(ValueError):
        Issue("aesthetics", "hard", "no route")


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_verdict_matches_hard_issues(name, corpus_results):
    res = corpus_results[name]
    rep = res.report
    assert (rep.verdict == "pass") == (not rep.hard)
    assert not [i for i in rep.issues if i.category == "aesthetics"]
