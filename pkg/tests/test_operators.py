import pytest

from chartmorph import builders as B
from chartmorph.corpus import FIXTURES
from chartmorph.emitter import emit_svg
from chartmorph.ir import DEFAULT_TARGET
from chartmorph.layout import relayout
from chartmorph.measure import wrap_words
from chartmorph.operators import OPERATIONS, OpContext, PlanExecutionError, apply_plan, retarget
from chartmorph.planner import OperatorApplication, TransformPlan, plan
from chartmorph.svg import parse_svg

CTX = OpContext()


def run(op, scene, params):
    return relayout(OPERATIONS[op](scene, params, CTX))


def planned(name):
    scene = FIXTURES[name].build()
    p = plan(scene, DEFAULT_TARGET)
    return retarget(scene, p), p


IDEMPOTENT = ("tick_decimation", "legend_repositioning", "tooltip_enabling", "text_wrapping", "element_rescaling",
              "semantic_abbreviation", "filter_enabling")


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_idempotent_operators(name):
    scene, p = planned(name)
    for step in p.steps:
        # each step is checked where it sits in the plan
        after = run(step.op_id, scene, step.params)
        if step.op_id in IDEMPOTENT:
            assert emit_svg(run(step.op_id, after, step.params)) == emit_svg(after), step.op_id
        scene = after


@pytest.mark.parametrize("name", ["bar_basic", "bar_20cat", "long_labels", "escalation_labels"])
def test_transposition_is_an_involution(name):
    base, _ = planned(name)
    there = run("axis_transposition", base, {})
    assert there.panels[0].y_axis.scale.kind == "band"
    assert emit_svg(run("axis_transposition", there, {})) == emit_svg(base)


def test_grid_reflow_to_single_column():
    base, _ = planned("facets_3x2")
    assert base.grid == (2, 3)
    out = run("grid_reflow", base, {"cols": 1})
    assert out.grid == (6, 1)
    # panels stack in reading order with non-decreasing tops
    tops = [p.plot_area.y for p in out.panels]
    assert tops == sorted(tops)


def test_wrapping_matches_greedy_reference():
    base, p = planned("long_title")
    step = next(s for s in p.steps if s.op_id == "text_wrapping")
    out = run("text_wrapping", base, step.params)
    title = out.title
    # reference: plain greedy fill over the measured widths
    expect, _ = wrap_words(title.text, step.params["max_width"], max(title.font_size, 12))
    assert title.lines == expect
    assert len(title.lines) > 1


def _numbers(svg_text):
    tree = parse_svg(svg_text)
    for e in tree.elements():
        if e.rect:
            yield e.rect
        for x, y in e.points:
            yield (x, y, 0, 0)
        if e.circle:
            cx, cy, r = e.circle
            yield (cx - r, cy - r, 2 * r, 2 * r)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_containment_after_plan(name):
    scene = FIXTURES[name].build()
    out = apply_plan(scene, plan(scene, DEFAULT_TARGET), CTX)
    text = emit_svg(out)
    tree = parse_svg(text)
    for x, y, w, h in _numbers(text):
        assert -0.5 <= x and x + w <= tree.width + 0.5
        assert -0.5 <= y and y + h <= tree.height + 0.5


def test_failed_step_reports_index():
    scene = B.bar_chart(["a", "b"], [1, 2], key="k", value="v")
    p = TransformPlan((OperatorApplication("grid_reflow", 1, {"cols": 1}),), DEFAULT_TARGET)
    with pytest.raises(PlanExecutionError) as info:
        apply_plan(scene, p, CTX)
    assert info.value.index == 0 and info.value.op_id == "grid_reflow"


def test_transmutation_needs_ordered_categories():
    scene = B.grouped_bar_chart(["pear", "apple", "fig"], ["a", "b"], [[1, 2], [3, 4], [5, 6]],
                                key="fruit", value="n", group="g")
    p = TransformPlan((OperatorApplication("mark_transmutation", 1),), DEFAULT_TARGET)
    with pytest.raises(PlanExecutionError):
        apply_plan(scene, p, CTX)


def test_sampling_caps_points():
    base, p = planned("scatter_500")
    step = next(s for s in p.steps if s.op_id == "sample_data")
    out = run("sample_data", base, step.params)
    assert out.sampled
    assert sum(1 for _ in out.marks()) <= step.params["max_points"] == 300
    assert emit_svg(run("sample_data", base, step.params)) == emit_svg(out)
