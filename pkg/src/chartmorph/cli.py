"""``adapt`` command line.

``adapt <input>`` runs the whole refinement loop; ``adapt <stage> ...``
runs one stage on files so the stages can be chained by hand.

Exit codes: 0 success, 2 unreadable input or missing artifact,
3 plan could not be built or executed, 4 critic still failing after the
iteration budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional, Sequence

from .critic import critique
from .document import dataset_to_dict, emit_chart_document, load_chart_document
from .emitter import dumps, emit_html, emit_manifest, emit_svg
from .operators import OpContext, PlanExecutionError, apply_plan
from .pipeline import (EMIT_KINDS, InputError, PipelineConfig, build_config, load_input, read_config,
                       run_batch, run_pipeline)
from .planner import PlanError, TransformPlan, plan
from .recovery import RecoveryError, recover_svg
from .segment import segment_components
from .svg import parse_svg

EXIT_OK, EXIT_INPUT, EXIT_PLAN, EXIT_CRITIC = 0, 2, 3, 4
STAGES = ("parse", "recover", "plan", "apply", "critique")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: str, what: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError:
        raise CliError("missing %s: expected %s" % (what, path), EXIT_INPUT) from None


def _write(path: str, text: str) -> str:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _scene(path: str, what: str = "scene document"):
    try:
        return load_chart_document(_read(path, what))
    except ValueError as exc:
        raise CliError("%s: %s" % (path, exc), EXIT_INPUT) from None


def _plan(path: str) -> TransformPlan:
    try:
        return TransformPlan.from_dict(json.loads(_read(path, "plan")))
    except ValueError as exc:
        raise CliError("%s: %s" % (path, exc), EXIT_INPUT) from None


# -- configuration -------------------------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--viewport", help="target size as WIDTHxHEIGHT (default 390x844)")
    p.add_argument("--config", help="key = value file: viewport, inset, max_iterations, emit, seed, thresholds")
    p.add_argument("--seed", type=int, help="random seed for sampling (default 42)")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                   help="override one threshold; repeatable")


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        try:
            values.update(read_config(_read(args.config, "config file").decode("utf-8")))
        except ValueError as exc:
            raise CliError("%s: %s" % (args.config, exc), EXIT_INPUT) from None
    for item in args.set:
        if "=" not in item:
            raise CliError("--set expects NAME=VALUE, got %r" % item, EXIT_INPUT)
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    # flags win over the config file
    for key in ("viewport", "seed", "max_iterations", "emit"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        return build_config(values)
    except ValueError as exc:
        raise CliError("bad configuration: %s" % exc, EXIT_INPUT) from None


# -- stages --------------------------------------------------------------------------------


def cmd_parse(args) -> int:
    data = _read(args.input, "input SVG")
    try:
        tree = parse_svg(data)
        comp = segment_components(tree)
    except ValueError as exc:
        raise CliError("%s: %s" % (args.input, exc), EXIT_INPUT) from None
    out = {
        "width": tree.width, "height": tree.height, "unsupported": list(tree.unsupported),
        "geometry_count": comp.geometry_count, "text_count": comp.text_count,
        "title": comp.title.lines[0] if comp.title is not None else None,
        "plots": [{"rect": list(p.rect), "axes": [a.orientation for a in (p.x_axis, p.y_axis, p.y2_axis) if a],
                   "marks": len(p.marks)} for p in comp.plots],
        "legend": [t.lines[0] for _, t in comp.legend.pairs] if comp.legend is not None else None,
        "annotations": [" ".join(a.lines) for a in comp.annotations],
    }
    _write(args.output, dumps(out))
    return EXIT_OK


def cmd_recover(args) -> int:
    try:
        scene, _ = load_input(args.input)
    except InputError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    try:
        # documents carry a declared dataset; check it survives rendering
        ds = recover_svg(emit_svg(scene)).dataset if scene.laid_out else scene.dataset
    except RecoveryError as exc:
        raise CliError("%s: %s" % (args.input, exc), EXIT_INPUT) from None
    os.makedirs(args.output, exist_ok=True)
    _write(os.path.join(args.output, "scene.json"), emit_chart_document(scene))
    _write(os.path.join(args.output, "dataset.json"), dumps(dataset_to_dict(ds)))
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = config_from_args(args)
    scene = _scene(args.scene)
    force = [f for f in (args.force or "").split(",") if f]
    try:
        p = plan(scene, cfg.target, cfg.thresholds, force, len(force))
    except PlanError as exc:
        raise CliError(str(exc), EXIT_PLAN) from None
    _write(args.output, dumps(p.to_dict()))
    return EXIT_OK


def cmd_apply(args) -> int:
    cfg = config_from_args(args)
    scene, p = _scene(args.scene), _plan(args.plan)
    try:
        out = apply_plan(scene, p, OpContext(cfg.thresholds))
    except PlanExecutionError as exc:
        raise CliError(str(exc), EXIT_PLAN) from None
    _write(args.output, emit_chart_document(out))
    base = os.path.splitext(args.output)[0]
    for kind in _emit_list(args.emit, ()):
        if kind == "svg":
            _write(base + ".svg", emit_svg(out))
        elif kind == "html":
            _write(base + ".html", emit_html(out))
        elif kind == "manifest":
            _write(base + ".manifest.json", emit_manifest(out))
    return EXIT_OK


def cmd_critique(args) -> int:
    cfg = config_from_args(args)
    adapted = _scene(args.adapted, "adapted scene")
    source, p = _scene(args.against[0]), _plan(args.against[1])
    report = critique(adapted, p, source.dataset, cfg.thresholds, args.iteration)
    _write(args.output, report.to_json())
    return EXIT_OK if report.verdict == "pass" else EXIT_CRITIC


def _emit_list(text: Optional[str], default: Sequence[str]) -> List[str]:
    if not text:
        return list(default)
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in EMIT_KINDS]
    if bad:
        raise CliError("unknown emit kind(s): %s" % ", ".join(bad), EXIT_INPUT)
    return kinds


# -- full pipeline -------------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = config_from_args(args)
    if args.batch:
        if not os.path.isdir(args.batch):
            raise CliError("batch directory not found: %s" % args.batch, EXIT_INPUT)
        summary = run_batch(args.batch, cfg, args.output or "adapted", args.jobs)
        codes = [s.get("exit_code", EXIT_OK if s["verdict"] == "pass" else EXIT_CRITIC) for s in summary.values()]
        for name, s in summary.items():
            print("%-32s %s" % (name, s["verdict"]))
        return max(codes, default=EXIT_OK)
    if not args.input:
        raise CliError("an input file or --batch DIR is required", EXIT_INPUT)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    out_dir = args.output or stem + "-mobile"
    try:
        res = run_pipeline(args.input, cfg, out_dir)
    except InputError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    except (PlanError, PlanExecutionError) as exc:
        raise CliError(str(exc), EXIT_PLAN) from None
    print("%s: %s after %d iteration(s); operators: %s; written to %s"
          % (args.input, res.verdict, res.iterations, ", ".join(res.plan.op_ids) or "none", out_dir))
    return EXIT_OK if res.verdict == "pass" else EXIT_CRITIC


def _stage_parser(stage: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adapt " + stage)
    if stage == "parse":
        p.add_argument("input")
        p.add_argument("-o", "--output", default="parsed.json")
        return p
    if stage == "recover":
        p.add_argument("input", help="chart SVG or chart document JSON")
        p.add_argument("-o", "--output", default=".", help="directory for scene.json and dataset.json")
        return p
    _add_config_flags(p)
    if stage == "plan":
        p.add_argument("scene")
        p.add_argument("--force", help="comma-separated operators to force")
        p.add_argument("-o", "--output", default="plan.json")
    elif stage == "apply":
        p.add_argument("scene")
        p.add_argument("plan")
        p.add_argument("--emit", help="extra outputs next to the document: svg,html,manifest")
        p.add_argument("-o", "--output", default="adapted.json")
    else:
        p.add_argument("adapted")
        p.add_argument("--against", nargs=2, required=True, metavar=("SCENE", "PLAN"))
        p.add_argument("--iteration", type=int, default=1)
        p.add_argument("-o", "--output", default="critique.json")
    return p


def _main_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="adapt", description="Adapt a desktop chart (SVG or chart document) to a small screen.",
        epilog="Stages can also run alone: adapt {%s} --help" % ",".join(STAGES))
    p.add_argument("input", nargs="?")
    _add_config_flags(p)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--emit", help="comma-separated subset of %s" % ",".join(EMIT_KINDS))
    p.add_argument("-o", "--output", help="output directory")
    p.add_argument("--batch", metavar="DIR", help="adapt every chart in DIR")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers in batch mode")
    return p


COMMANDS = {"parse": cmd_parse, "recover": cmd_recover, "plan": cmd_plan, "apply": cmd_apply,
            "critique": cmd_critique}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] in STAGES:
            args = _stage_parser(argv[0]).parse_args(argv[1:])
            return COMMANDS[argv[0]](args)
        return cmd_run(_main_parser().parse_args(argv))
    except CliError as exc:
        print("adapt: error: %s" % exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
