import json
import shutil

import pytest

from chartmorph.cli import EXIT_CRITIC, EXIT_INPUT, EXIT_OK, EXIT_PLAN, main


@pytest.fixture
def work(tmp_path, fixture_dir):
    for name in ("bar_basic.svg", "bar_20cat.svg", "facets_3x2.json", "escalation_labels.svg"):
        shutil.copy(fixture_dir / name, tmp_path / name)
    return tmp_path


def read(path):
    return path.read_bytes()


def test_full_run_writes_outputs(work):
    out = work / "out"
    assert main([str(work / "bar_basic.svg"), "-o", str(out)]) == EXIT_OK
    for name in ("adapted.svg", "adapted.html", "manifest.json", "adapted.json", "plan.json", "critique.json"):
        assert (out / name).exists(), name
    assert json.loads(read(out / "critique.json"))["verdict"] == "pass"


def test_default_output_dir(work, monkeypatch):
    monkeypatch.chdir(work)
    assert main(["bar_basic.svg", "--emit", "svg"]) == EXIT_OK
    assert (work / "bar_basic-mobile" / "adapted.svg").exists()
    assert not (work / "bar_basic-mobile" / "adapted.html").exists()


def test_malformed_svg_exit_code(work, capsys):
    bad = work / "bad.svg"
    bad.write_text('<svg xmlns="http://www.w3.org/2000/svg" width="9" height="9"><g></svg>')
    assert main([str(bad)]) == EXIT_INPUT
    assert "byte offset" in capsys.readouterr().err


def test_missing_artifact(work, capsys):
    assert main(["apply", str(work / "nope.json"), str(work / "plan.json")]) == EXIT_INPUT
    assert "missing" in capsys.readouterr().err


def test_unknown_forced_operator_is_plan_error(work):
    assert main(["recover", str(work / "bar_basic.svg"), "-o", str(work / "r")]) == EXIT_OK
    assert main(["plan", str(work / "r" / "scene.json"), "--force", "warp_drive",
                 "-o", str(work / "p.json")]) == EXIT_PLAN


def test_bad_threshold_is_input_error(work):
    assert main([str(work / "bar_basic.svg"), "--set", "max_ticks=zero"]) == EXIT_INPUT


def test_chained_stages_match_full_run(work):
    src = str(work / "bar_20cat.svg")
    assert main([src, "-o", str(work / "full"), "--max-iterations", "1"]) == EXIT_OK
    s = work / "s"
    assert main(["parse", src, "-o", str(s / "parsed.json")]) == EXIT_OK
    assert main(["recover", src, "-o", str(s)]) == EXIT_OK
    assert main(["plan", str(s / "scene.json"), "-o", str(s / "plan.json")]) == EXIT_OK
    assert main(["apply", str(s / "scene.json"), str(s / "plan.json"), "-o", str(s / "adapted.json"),
                 "--emit", "svg"]) == EXIT_OK
    assert main(["critique", str(s / "adapted.json"), "--against", str(s / "scene.json"), str(s / "plan.json"),
                 "-o", str(s / "critique.json")]) == EXIT_OK
    full = work / "full"
    for a, b in (("plan.json", "plan.json"), ("adapted.json", "adapted.json"), ("critique.json", "critique.json"),
                 ("adapted.svg", "adapted.svg")):
        assert read(full / a) == read(s / b), a
    plan = json.loads(read(s / "plan.json"))
    assert "axis_transposition" in [st["op_id"] for st in plan["steps"]]


def test_critique_stage_fails_on_wrong_plan(work):
    s = work / "s"
    main(["recover", str(work / "bar_basic.svg"), "-o", str(s)])
    main(["plan", str(s / "scene.json"), "-o", str(s / "plan.json")])
    main(["apply", str(s / "scene.json"), str(s / "plan.json"), "-o", str(s / "adapted.json")])
    main(["plan", str(s / "scene.json"), "--force", "viewport_decoupling", "-o", str(s / "other.json")])
    code = main(["critique", str(s / "adapted.json"), "--against", str(s / "scene.json"), str(s / "other.json"),
                 "-o", str(s / "critique.json")])
    assert code == EXIT_CRITIC
    rep = json.loads(read(s / "critique.json"))
    assert rep["verdict"] == "fail"
    assert any(i["category"] == "plan_adherence" for i in rep["issues"])


def test_batch_summary(work):
    out = work / "batch"
    assert main(["--batch", str(work), "-o", str(out)]) == EXIT_OK
    summary = json.loads(read(out / "summary.json"))
    assert set(summary) == {"bar_basic.svg", "bar_20cat.svg", "facets_3x2.json", "escalation_labels.svg"}
    assert all(v["verdict"] == "pass" for v in summary.values())
    facets = json.loads(read(out / "facets_3x2_json" / "plan.json"))
    reflow = [s for s in facets["steps"] if s["op_id"] == "grid_reflow"]
    assert reflow and reflow[0]["params"] == {"cols": 1}
    esc = summary["escalation_labels.svg"]
    assert esc["iterations"] == 2 and "axis_transposition" in esc["op_ids"]


def test_batch_missing_dir(work):
    assert main(["--batch", str(work / "none")]) == EXIT_INPUT


def test_config_file_and_flag_precedence(work):
    cfg = work / "adapt.cfg"
    cfg.write_text("viewport = 600x900  # wide phone\nmax_ticks = 4\n")
    out = work / "c"
    assert main([str(work / "bar_20cat.svg"), "--config", str(cfg), "--viewport", "390x844", "-o", str(out)]) == 0
    plan = json.loads(read(out / "plan.json"))
    assert plan["target"]["width"] == 390
    dec = [s for s in plan["steps"] if s["op_id"] == "tick_decimation"]
    assert dec[0]["params"]["max_count"] <= 4
