import math

import pytest

from chartmorph.corpus import FIXTURES
from chartmorph.emitter import emit_svg
from chartmorph.builders import dataset
from chartmorph.recovery import (InsufficientTicks, NonlinearScale, compare_datasets, fit_band_scale,
                                 fit_linear_scale, recover_svg)

from conftest import expected


def test_collinear_fit_has_zero_residual():
    fs = fit_linear_scale([(0, "0"), (100, "50"), (200, "100")])
    assert (fs.slope, fs.intercept, fs.residual_rms) == (2.0, 0.0, 0.0)


def test_jittered_fit_matches_closed_form():
    # by hand: mean v = 50, mean p = 298/3; Sxx = 5000, Sxy = 10000
    fs = fit_linear_scale([(0, "0"), (98, "50"), (200, "100")])
    assert fs.slope == pytest.approx(2.0)
    assert fs.intercept == pytest.approx(298 / 3 - 100)
    assert fs.residual_rms == pytest.approx(math.sqrt(8 / 9))


def test_log_axis_rejected():
    with pytest.raises(NonlinearScale):
        fit_linear_scale([(0, "1"), (100, "10"), (200, "100"), (300, "1000")])


def test_single_tick_insufficient():
    with pytest.raises(InsufficientTicks):
        fit_linear_scale([(10, "5")])


def test_band_fit_from_centres():
    fs = fit_band_scale([(50, "a"), (150, "b"), (250, "c")], (0, 300), mark_widths=[80, 80, 80])
    assert fs.scale.range == (0, 300)
    assert fs.scale.band_padding == pytest.approx(0.2)


def assert_exact_up_to_rounding(want, got):
    """Every row paired; each value within 1e-4 of its column's range.

    Coordinates are written with two decimals, so a value can drift by at
    most 0.005px; on axes of at least 100px that is below 1e-4 of the span.
    """
    cmp = compare_datasets(want, got, rtol=1e-2)
    assert cmp.ok, (cmp.missing[:5], cmp.extra[:5], cmp.problems)
    assert len(cmp.pairs) == len(want.rows)
    for c, f in enumerate(want.fields):
        if f.kind == "nominal":
            continue
        col = [float(r[c]) for r in want.rows]
        tol = 1e-4 * max(max(col) - min(col), abs(max(col, key=abs)), 1e-12)
        for e, j in cmp.pairs:
            assert abs(float(got.rows[j][c]) - float(want.rows[e][c])) <= tol


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_desktop_fixture_round_trip(name, fixture_dir):
    got = recover_svg((fixture_dir / (name + ".svg")).read_bytes())
    assert got.topology.label() == expected(name)["topology"]
    assert_exact_up_to_rounding(FIXTURES[name].build().dataset, got.dataset)


def test_emitter_scene_recovers_declared_dataset():
    scene = FIXTURES["grouped_bar_4x3"].build()
    rec = recover_svg(emit_svg(scene))
    assert len(rec.dataset.rows) == 12
    assert_exact_up_to_rounding(scene.dataset, rec.dataset)


def test_compare_subset_prefers_closest_partner():
    exp = dataset([("x", "quantitative"), ("y", "quantitative")], [(100.0, 50.0), (100.4, 50.2)])
    got = dataset([("x", "quantitative"), ("y", "quantitative")], [(100.41, 50.21)])
    assert compare_datasets(exp, got, 1e-2, subset=True).ok
    assert compare_datasets(exp, got, 1e-2).missing == [0]


def test_compare_reports_value_drift():
    exp = dataset([("k", "nominal"), ("v", "quantitative")], [("a", 10.0), ("b", 20.0)])
    got = dataset([("k", "nominal"), ("v", "quantitative")], [("a", 10.05), ("b", 21.0)])
    cmp = compare_datasets(exp, got, 1e-2)
    assert cmp.missing == [1] and cmp.extra == [1]
