import math

import pytest
from hypothesis import given, settings, strategies as st

from chartmorph.ir import (Color, IRError, Rect, Scale, Viewport, contrast_ratio, parse_color, scale_apply,
                           scale_invert)


def test_rect_intersection_positive_area():
    assert Rect(0, 0, 10, 10).intersection_area(Rect(5, 5, 10, 10)) == 25
    assert Rect(0, 0, 10, 10).intersection_area(Rect(10, 0, 5, 5)) == 0


def test_contrast_extremes():
    # WCAG: (1.0 + 0.05) / (0.0 + 0.05)
    assert contrast_ratio(Color(255, 255, 255), Color(0, 0, 0)) == pytest.approx(21.0)
    assert contrast_ratio(Color(10, 20, 30), Color(10, 20, 30)) == pytest.approx(1.0)


def test_contrast_mid_grey_by_hand():
    # sRGB 119 -> linear ((119/255 + 0.055)/1.055)^2.4
    c = ((119 / 255 + 0.055) / 1.055) ** 2.4
    want = 1.05 / (c + 0.05)
    assert contrast_ratio(Color(255, 255, 255), Color(119, 119, 119)) == pytest.approx(want)


def test_parse_color_forms():
    assert parse_color("#fff") == Color(255, 255, 255)
    assert parse_color("rgb(1, 2, 3)") == Color(1, 2, 3)
    assert parse_color("none") is None


def test_viewport_rejects_bad_sizes():
    with pytest.raises(IRError):
        Viewport(0, 100)
    with pytest.raises(IRError):
        Viewport(30, 100, (0, 16, 0, 16))
    assert Viewport().content == Rect(16, 16, 358, 812)


def test_band_scale_positions():
    # four slots of 100px; positions are slot centres, bars take 80% of a slot
    s = Scale("band", ("a", "b", "c", "d"), (0.0, 400.0), 0.2)
    assert [scale_apply(s, c) for c in "abcd"] == pytest.approx([50, 150, 250, 350])
    assert s.bandwidth == pytest.approx(80)


@settings(max_examples=10000, deadline=None)
@given(lo=st.floats(-1e6, 1e6), span=st.floats(1e-3, 1e6), r0=st.floats(-2000, 2000),
       rspan=st.floats(1.0, 4000), t=st.floats(0, 1), flip=st.booleans())
def test_linear_inverse_property(lo, span, r0, rspan, t, flip):
    rng = (r0 + rspan, r0) if flip else (r0, r0 + rspan)
    s = Scale("linear", (lo, lo + span), rng)
    v = lo + t * span
    back = scale_invert(s, scale_apply(s, v)).value
    assert math.isclose(back, v, rel_tol=1e-9, abs_tol=1e-9 * max(1.0, span))
