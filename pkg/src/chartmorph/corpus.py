"""The built-in fixture corpus.

Each entry builds a desktop scene from a declared dataset and records
hand-derived expectations: topology label and the operator set the
planner's rules call for.  ``python3 -m chartmorph.corpus DIR`` writes
the corpus as SVG, chart document and ``*.expected.json`` files.
"""

from __future__ import annotations

import math
import os
import random
import sys
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

from . import builders as B
from .abbrev import MONTH_ABBR
from .document import dataset_to_dict, emit_chart_document
from .emitter import dumps, emit_svg
from .ir import VisScene
from .ticks import DAY_MS, to_epoch_ms


@dataclass(frozen=True)
class Fixture:
    name: str
    build: Callable[[], VisScene]
    topology: str
    op_ids: Tuple[str, ...]  # expected plan, as a set
    note: str = ""


def _walk(n: int, seed: int, start: float = 100.0) -> list:
    rng = random.Random(seed)
    y, out = start, []
    for _ in range(n):
        y += rng.uniform(-2.0, 2.1)
        out.append(round(y, 2))
    return out


def bar_basic() -> VisScene:
    return B.bar_chart(["Mon", "Tue", "Wed", "Thu", "Fri"], [42, 55, 38, 61, 47], key="day", value="visits",
                       title="Visits per weekday")


def bar_20cat() -> VisScene:
    cats = ["Product %d" % (i + 1) for i in range(20)]
    vals = [round(20 + 15 * math.sin(i * 0.7) + i, 1) for i in range(20)]
    return B.bar_chart(cats, vals, key="product", value="units", title="Units sold by product")


def grouped_bar_4x3() -> VisScene:
    return B.grouped_bar_chart(["Q1", "Q2", "Q3", "Q4"], ["North", "South", "West"],
                               [[12, 15, 9], [14, 13, 11], [18, 16, 12], [21, 17, 15]],
                               key="quarter", value="revenue", group="region", title="Quarterly revenue by region")


def grouped_monthly() -> VisScene:
    return B.grouped_bar_chart(list(MONTH_ABBR), ["2022", "2023", "2024"],
                               [[30 + i * 2 + j * 3 for j in range(3)] for i in range(12)],
                               key="month", value="orders", group="year", title="Monthly orders")


def line_1000() -> VisScene:
    t0 = to_epoch_ms(2021, 1, 1)
    xs = [t0 + i * DAY_MS for i in range(1000)]
    return B.line_chart(xs, {"price": _walk(1000, 7)}, value="price", title="Daily closing price")


def multiline_5series() -> VisScene:
    xs = [to_epoch_ms(2023, m, 1) for m in range(1, 13)]
    cities = ["Oslo", "Lima", "Cairo", "Perth", "Quito"]
    series = {c: [round(20 + 10 * math.sin(m / 2 + k) + k * 3, 1) for m in range(12)] for k, c in enumerate(cities)}
    return B.line_chart(xs, series, value="temperature", group="city", title="Monthly mean temperature")


def scatter_500() -> VisScene:
    rng = random.Random(11)
    pts = [(round(rng.gauss(170, 9), 2), round(rng.gauss(70, 12), 2)) for _ in range(500)]
    return B.scatter_chart(pts, xname="height", yname="weight", title="Height and weight")


def dot_strip() -> VisScene:
    names = ["Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel"]
    vals = [3.1, 3.4, 3.6, 5.2, 5.5, 7.9, 8.1, 8.4]
    return B.dot_strip(names, vals, label="team", value="score", title="Team scores")


def facets_3x2() -> VisScene:
    regions = ["North", "South", "East", "West", "Central", "Coastal"]
    cats = ["A", "B", "C", "D", "E"]
    return B.facet_bars(regions, cats, [[5 + f + i * 2 for i in range(5)] for f in range(6)],
                        key="segment", value="sales", facet="region", title="Sales by region")


def dual_overlay() -> VisScene:
    return B.dual_overlay(list(MONTH_ABBR), [80, 60, 55, 40, 30, 20, 15, 18, 35, 60, 75, 90],
                          [2, 3, 7, 11, 15, 18, 21, 20, 16, 11, 6, 3], title="Rainfall and temperature")


def long_title() -> VisScene:
    return B.bar_chart(["North", "South", "East", "West"], [340, 275, 410, 198], key="region", value="stores",
                       title="Number of retail stores operated by the company in each sales region at year end",
                       subtitle="Counts include franchise locations, pop-up outlets that traded for at least three "
                                "months and flagship stores, but exclude warehouses and pickup-only points of sale "
                                "opened during the holiday season.")


def long_labels() -> VisScene:
    countries = ["United States of America", "Democratic Republic of the Congo", "Central African Republic",
                 "Bosnia and Herzegovina", "Trinidad and Tobago", "United Arab Emirates"]
    return B.bar_chart(countries, [92.0, 26.5, 10.6, 79.2, 81.3, 99.0], key="country", value="share",
                       title="Share of adults online (%)")


def annotation_heavy() -> VisScene:
    xs = [to_epoch_ms(2022, m, 1) for m in range(1, 13)]
    ys = [112.0, 118.5, 121.2, 119.8, 125.1, 131.4, 129.9, 134.2, 138.8, 136.1, 141.7, 147.3]
    notes = [
        "Source: regional transit authority ridership reports.",
        "March figures were revised after a counting error at two stations was corrected by the operator in "
        "April, which moved roughly four thousand trips from February into March.",
        "Values are thousands of trips per weekday.",
    ]
    return B.line_chart(xs, {"riders": ys}, value="riders", title="Weekday ridership", annotations=notes)


def escalation_labels() -> VisScene:
    # large tick text: too wide at 0 and 45 degrees, too tall for a band at 90
    cats = ["Item %02d" % (i + 1) for i in range(14)]
    return B.bar_chart(cats, [i + 3 for i in range(14)], key="item", value="count", font_size=20.0,
                       title="Counts per item")


FIXTURES: Dict[str, Fixture] = {f.name: f for f in (
    Fixture("bar_basic", bar_basic, "bar", ("tick_decimation", "tooltip_enabling")),
    Fixture("bar_20cat", bar_20cat, "bar", ("axis_transposition", "tick_decimation", "tooltip_enabling")),
    Fixture("grouped_bar_4x3", grouped_bar_4x3, "grouped-bar",
            ("tick_decimation", "legend_repositioning", "tooltip_enabling")),
    Fixture("grouped_monthly", grouped_monthly, "grouped-bar",
            ("mark_transmutation", "tick_decimation", "legend_repositioning", "tooltip_enabling")),
    Fixture("line_1000", line_1000, "line", ("viewport_constriction", "viewport_decoupling")),
    Fixture("multiline_5series", multiline_5series, "multi-line",
            ("tick_decimation", "legend_repositioning", "tooltip_enabling", "filter_enabling")),
    Fixture("scatter_500", scatter_500, "scatter",
            ("tick_decimation", "tooltip_enabling", "element_rescaling", "sample_data")),
    Fixture("dot_strip", dot_strip, "dot-strip", ("tick_decimation", "tooltip_enabling", "label_externalization")),
    Fixture("facets_3x2", facets_3x2, "faceted(bar,2,3)", ("grid_reflow",)),
    Fixture("dual_overlay", dual_overlay, "bar", ("layout_serialization", "tick_decimation", "tooltip_enabling"),
            "bars and a line on a second scale; the dominant mark kind names the topology"),
    Fixture("long_title", long_title, "bar", ("tick_decimation", "tooltip_enabling", "text_wrapping",
                                              "context_collapsing")),
    Fixture("long_labels", long_labels, "bar", ("tick_decimation", "label_rotation", "tooltip_enabling",
                                              "semantic_abbreviation")),
    Fixture("annotation_heavy", annotation_heavy, "line",
            ("tick_decimation", "tooltip_enabling", "text_wrapping", "context_collapsing")),
    Fixture("escalation_labels", escalation_labels, "bar", ("axis_transposition", "tick_decimation",
                                                            "tooltip_enabling"),
            "first plan rotates the labels; the critic escalates to transposition"),
)}


def expected_record(fx: Fixture, scene: VisScene) -> dict:
    return {"name": fx.name, "topology": fx.topology, "op_ids": sorted(set(fx.op_ids)), "note": fx.note,
            "dataset": dataset_to_dict(scene.dataset)}


def write_corpus(directory: str) -> Dict[str, dict]:
    os.makedirs(directory, exist_ok=True)
    index = {}
    for name, fx in FIXTURES.items():
        scene = fx.build()
        files = {"svg": name + ".svg", "document": name + ".json", "expected": name + ".expected.json"}
        for key, text in (("svg", emit_svg(scene)), ("document", emit_chart_document(scene)),
                          ("expected", dumps(expected_record(fx, scene)))):
            with open(os.path.join(directory, files[key]), "w", encoding="utf-8") as fh:
                fh.write(text)
        index[name] = files
    with open(os.path.join(directory, "index.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps(index))
    return index


if __name__ == "__main__":
    write_corpus(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
