"""End-to-end adaptation: load, plan, apply, critique, refine and emit."""

from __future__ import annotations

import configparser
import json
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .critic import MAX_ITERATIONS, CritiqueReport, critique, route
from .document import emit_chart_document, load_chart_document
from .emitter import dumps, emit_html, emit_manifest, emit_svg
from .ir import DEFAULT_TARGET, RecoveredDataset, Viewport, VisScene
from .operators import OpContext, PlanExecutionError, apply_plan
from .planner import OperatorApplication, PlanError, Thresholds, TransformPlan, plan
from .registry import LEVEL
from .recovery import deconstruct_svg

EMIT_KINDS = ("svg", "html", "manifest", "document", "plan", "critique")
DEFAULT_SEED = 42


class InputError(ValueError):
    """Input could not be read or deconstructed (exit code 2)."""


@dataclass(frozen=True)
class PipelineConfig:
    target: Viewport = DEFAULT_TARGET
    thresholds: Thresholds = Thresholds(seed=DEFAULT_SEED)
    max_iterations: int = MAX_ITERATIONS
    emit: Tuple[str, ...] = EMIT_KINDS

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        bad = set(self.emit) - set(EMIT_KINDS)
        if bad:
            raise ValueError("unknown emit kinds: %s" % ", ".join(sorted(bad)))

    @property
    def seed(self) -> int:
        return self.thresholds.seed


def parse_viewport(text: str, inset: Optional[Sequence[float]] = None) -> Viewport:
    try:
        w, h = (float(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValueError("viewport must look like WIDTHxHEIGHT, got %r" % text) from None
    return Viewport(w, h, tuple(inset) if inset else DEFAULT_TARGET.inset)


def read_config(text: str) -> Dict[str, str]:
    """key = value lines; ``#`` starts a comment."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    cp.read_string("[adapt]\n" + text)
    return dict(cp["adapt"])


def build_config(values: Dict[str, object]) -> PipelineConfig:
    """Config from flat settings; threshold names pass straight through."""
    values = dict(values)
    inset = values.pop("inset", None)
    if isinstance(inset, str):
        inset = [float(v) for v in inset.replace(",", " ").split()]
        if len(inset) == 1:
            inset = inset * 4
    vp = values.pop("viewport", None)
    target = parse_viewport(vp, inset) if vp else Viewport(DEFAULT_TARGET.width, DEFAULT_TARGET.height,
                                                          tuple(inset) if inset else DEFAULT_TARGET.inset)
    iters = int(values.pop("max_iterations", MAX_ITERATIONS))
    emit = values.pop("emit", None)
    if isinstance(emit, str):
        emit = tuple(e.strip() for e in emit.split(",") if e.strip())
    values.setdefault("seed", DEFAULT_SEED)
    thr = Thresholds.from_mapping(values)
    return PipelineConfig(target, thr, iters, tuple(emit) if emit else EMIT_KINDS)


# -- input ---------------------------------------------------------------------------------


def load_input(path: str) -> Tuple[VisScene, RecoveredDataset]:
    """Scene plus the dataset the output must preserve."""
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc.strerror)) from None
    try:
        if p.suffix.lower() == ".json":
            scene = load_chart_document(data)
            if scene.dataset is None:
                raise InputError("%s: chart document has no dataset" % path)
        else:
            scene, _ = deconstruct_svg(data)
    except InputError:
        raise
    except ValueError as exc:
        raise InputError("%s: %s" % (path, exc)) from None
    # normalise through the document form so chained stages see exactly this scene
    scene = load_chart_document(emit_chart_document(scene))
    return scene, scene.dataset


# -- plan adjustment -----------------------------------------------------------------------


def adjust_plan(p: TransformPlan, adjustments: Sequence[dict]) -> TransformPlan:
    """Apply critic adjustments: update params in place, or insert the step at the end of its level."""
    steps = list(p.steps)
    layout = dict(p.layout)
    for adj in adjustments:
        if "layout" in adj:
            layout.update(adj["layout"])
            continue
        op, params = adj["op_id"], dict(adj.get("params") or {})
        hit = None
        for i, s in enumerate(steps):
            if s.op_id == op and s.params.get("orientation") == params.get("orientation"):
                hit = i
                break
        if hit is not None:
            s = steps[hit]
            steps[hit] = OperatorApplication(op, s.level, {**s.params, **params}, s.trigger)
            continue
        new = OperatorApplication(op, LEVEL[op], params, {"critic": True})
        at = max((i + 1 for i, s in enumerate(steps) if s.level <= new.level), default=0)
        steps.insert(at, new)
    return replace(p, steps=tuple(steps), layout=layout)


# -- the loop ------------------------------------------------------------------------------


@dataclass
class PipelineResult:
    verdict: str
    iterations: int
    plan: TransformPlan
    scene: VisScene
    report: CritiqueReport
    outputs: Dict[str, str] = field(default_factory=dict)
    timings_ms: Dict[str, float] = field(default_factory=dict)
    history: List[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {"verdict": self.verdict, "iterations": self.iterations, "op_ids": list(self.plan.op_ids),
                "outputs": dict(self.outputs), "timings_ms": {k: round(v, 3) for k, v in self.timings_ms.items()},
                "history": self.history}


class _Clock:
    def __init__(self) -> None:
        self.ms: Dict[str, float] = {}

    def run(self, stage: str, fn, *args, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kw)
        finally:
            self.ms[stage] = self.ms.get(stage, 0.0) + (time.perf_counter() - t0) * 1000.0


def refine(scene: VisScene, expected: RecoveredDataset, config: PipelineConfig,
           clock: Optional[_Clock] = None) -> PipelineResult:
    """Plan, apply and critique until the critic passes or the budget runs out."""
    clock = clock or _Clock()
    thr = config.thresholds
    ctx = OpContext(thr)
    forced: List[str] = []
    current = clock.run("plan", plan, scene, config.target, thr)
    history: List[dict] = []
    for it in range(1, config.max_iterations + 1):
        adapted = clock.run("apply", apply_plan, scene, current, ctx)
        report = clock.run("critique", critique, adapted, current, expected, thr, it)
        decision = route(report.issues)
        history.append({"iteration": it, "op_ids": list(current.op_ids), "verdict": report.verdict,
                        "route": decision})
        if decision["action"] == "pass" or it == config.max_iterations:
            break
        if decision["action"] == "replan":
            forced += [op for op in decision["force"] if op not in forced]
            current = clock.run("plan", plan, scene, config.target, thr, forced, len(forced))
            continue
        try:
            current = adjust_plan(current, decision["adjustments"])
        except PlanError:
            # the adjustment conflicts with the plan's structure; start over
            current = clock.run("plan", plan, scene, config.target, thr, forced, len(forced))
    return PipelineResult(report.verdict, it, current, adapted, report, timings_ms=clock.ms, history=history)


def write_outputs(result: PipelineResult, out_dir: str, emit: Sequence[str]) -> Dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    writers = {
        "svg": ("adapted.svg", lambda: emit_svg(result.scene)),
        "html": ("adapted.html", lambda: emit_html(result.scene)),
        "manifest": ("manifest.json", lambda: emit_manifest(result.scene)),
        "document": ("adapted.json", lambda: emit_chart_document(result.scene)),
        "plan": ("plan.json", lambda: dumps(result.plan.to_dict())),
        "critique": ("critique.json", lambda: result.report.to_json()),
    }
    out = {}
    for kind in EMIT_KINDS:
        if kind in emit or kind == "critique":
            name, make = writers[kind]
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(make())
            out[kind] = path
    return out


def run_pipeline(path: str, config: PipelineConfig = PipelineConfig(), out_dir: Optional[str] = None
                 ) -> PipelineResult:
    """Raises InputError, PlanError or PlanExecutionError; a failing critique is reported in the result."""
    clock = _Clock()
    scene, expected = clock.run("load", load_input, path)
    result = refine(scene, expected, config, clock)
    if out_dir is not None:
        result.outputs = clock.run("emit", write_outputs, result, out_dir, config.emit)
    result.timings_ms = clock.ms
    return result


# -- batch ---------------------------------------------------------------------------------


def batch_inputs(directory: str) -> List[str]:
    """Charts in a directory; ground-truth files and indexes are skipped."""
    out = []
    for name in sorted(os.listdir(directory)):
        low = name.lower()
        if low.endswith(".svg") or (low.endswith(".json") and not low.endswith(".expected.json")
                                    and low != "index.json" and low != "summary.json"):
            out.append(os.path.join(directory, name))
    return out


def _batch_one(args) -> Tuple[str, dict]:
    path, config, out_dir = args
    name = os.path.basename(path)
    sub = os.path.join(out_dir, name.replace(".", "_"))
    try:
        res = run_pipeline(path, config, sub)
        res.outputs = {k: os.path.relpath(v, out_dir) for k, v in res.outputs.items()}
        return name, res.summary()
    except InputError as exc:
        return name, {"verdict": "error", "exit_code": 2, "error": str(exc)}
    except (PlanError, PlanExecutionError) as exc:
        return name, {"verdict": "error", "exit_code": 3, "error": str(exc)}


def run_batch(directory: str, config: PipelineConfig, out_dir: str, jobs: int = 1) -> Dict[str, dict]:
    inputs = batch_inputs(directory)
    tasks = [(p, config, out_dir) for p in inputs]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_one, tasks))
    else:
        results = [_batch_one(t) for t in tasks]
    summary = dict(sorted(results))
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
