import json
import re

from chartmorph import builders as B
from chartmorph.corpus import FIXTURES
from chartmorph.document import emit_chart_document, load_chart_document
from chartmorph.emitter import emit_html, emit_manifest, emit_svg, num, runtime_asset
from chartmorph.ir import DEFAULT_TARGET
from chartmorph.operators import OpContext, apply_plan
from chartmorph.planner import plan


def adapted(name):
    scene = FIXTURES[name].build()
    return apply_plan(scene, plan(scene, DEFAULT_TARGET), OpContext())


def test_number_formatting():
    assert num(1.0) == "1"
    assert num(2.345678) == "2.35"
    assert num(-0.001) == "0"


def test_static_chart_has_empty_manifest_and_no_script():
    scene = B.bar_chart(["a", "b"], [1, 2], key="k", value="v")
    assert json.loads(emit_manifest(scene)) == {}
    assert "<script" not in emit_html(scene)


def test_tooltips_cover_every_data_layer():
    out = adapted("grouped_bar_4x3")
    m = json.loads(emit_manifest(out))
    layers = {l.id for p in out.panels for l in p.layers if l.mark_kind != "label"}
    assert {t["layer"] for t in m["tooltips"]} == layers
    assert all(t["hit_radius"] == 22 for t in m["tooltips"])


def test_filter_chips_are_series_plus_all():
    out = adapted("multiline_5series")
    f = json.loads(emit_manifest(out))["filters"]
    assert f["labels"] == ["Oslo", "Lima", "Cairo", "Perth", "Quito"]
    # the runtime adds a chip for the default when it is not a series
    assert f["default"] == "All" and f["default"] not in f["labels"]
    assert len(f["colors"]) == len(f["labels"])


def test_html_embeds_manifest_and_constant_runtime():
    out = adapted("line_1000")
    html = emit_html(out)
    blob = re.search(r'<script type="application/json" id="manifest">\n(.*?)\n</script>', html, re.S).group(1)
    assert json.loads(blob) == json.loads(emit_manifest(out))
    rt = runtime_asset()
    assert rt.rstrip("\n") in html
    # the runtime is the same text for every chart
    assert rt.rstrip("\n") in emit_html(adapted("long_title"))


def test_emission_is_byte_deterministic():
    for name in FIXTURES:
        a, b = adapted(name), adapted(name)
        assert emit_svg(a) == emit_svg(b)
        assert emit_html(a) == emit_html(b)


def test_document_round_trip():
    for name in FIXTURES:
        out = adapted(name)
        text = emit_chart_document(out)
        again = load_chart_document(text)
        assert emit_chart_document(again) == text
        assert emit_svg(again) == emit_svg(out)


def test_collapsible_payload_is_full_text():
    out = adapted("long_title")
    m = json.loads(emit_manifest(out))
    full = FIXTURES["long_title"].build().subtitle.text
    assert any(c["payload"] == full for c in m["collapsibles"])


STUB_DOM = r"""
function Node(tag) { this.tag = tag; this.attrs = {}; this.children = []; this.style = {}; this.handlers = {}; }
Node.prototype.setAttribute = function (k, v) { this.attrs[k] = String(v); };
Node.prototype.getAttribute = function (k) { return k in this.attrs ? this.attrs[k] : null; };
Node.prototype.appendChild = function (c) { this.children.push(c); return c; };
Node.prototype.insertBefore = function (c) { this.children.unshift(c); return c; };
Node.prototype.addEventListener = function (e, f) { this.handlers[e] = f; };
Node.prototype.querySelector = function (s) { return s === "svg" ? svg : null; };
Node.prototype.querySelectorAll = function () { return marks; };
var document = { createElement: function (t) { return new Node(t); }, addEventListener: function () {} };
var svg = new Node("svg"), root = new Node("div");
var marks = SERIES.map(function (s) { var m = new Node("path"); m.setAttribute("data-series", s); return m; });
"""


def test_runtime_draws_default_chip(tmp_path):
    import shutil
    import subprocess

    import pytest
    if shutil.which("node") is None:
        pytest.skip("node is not installed")
    f = json.loads(emit_manifest(adapted("multiline_5series")))["filters"]
    script = ("var SERIES = %s;\n" % json.dumps(f["labels"]) + STUB_DOM + runtime_asset()
              + "\nchartRuntime.init(root, {filters: %s});\n" % json.dumps(f)
              + "var bar = root.children[0];\n"
              + "bar.children[2].handlers.click();\n"
              + "console.log(JSON.stringify({chips: bar.children.map(function (c) { return c.textContent; }),"
              + " dim: marks.map(function (m) { return m.style.opacity; })}));\n")
    js = tmp_path / "run.js"
    js.write_text(script)
    res = json.loads(subprocess.run(["node", str(js)], capture_output=True, text=True, check=True).stdout)
    assert res["chips"] == ["All"] + f["labels"]
    # clicking the chip for the second series dims the other four
    assert res["dim"] == ["0.25", "", "0.25", "0.25", "0.25"]
