import random
from dataclasses import replace
from decimal import Decimal
from fractions import Fraction

import pytest

from chartmorph.builders import time_axis
from chartmorph.layout import position_ticks
from chartmorph.ir import Scale
from chartmorph.operators import decimate_axis
from chartmorph.ticks import (decimate_values, format_number, nice_domain, parse_month_label, parse_number,
                              stride_decimate, to_epoch_ms, visible_count)


def brute_nice_ticks(lo, hi, max_count):
    """Enumerate m * 10^k steps exactly with fractions; smallest step whose multiples fit."""
    lo_f, hi_f = Fraction(Decimal(repr(lo))), Fraction(Decimal(repr(hi)))
    candidates = sorted(Fraction(m) * Fraction(10) ** k for k in range(-12, 13)
                        for m in (Fraction(1), Fraction(2), Fraction(5, 2), Fraction(5)))
    for step in candidates:
        first = -((-lo_f) // step)
        last = hi_f // step
        if last - first + 1 <= max_count:
            return [float(i * step) for i in range(int(first), int(last) + 1)]
    raise AssertionError


def test_decimation_matches_enumeration_oracle():
    rng = random.Random(1234)
    for _ in range(1000):
        lo = round(rng.uniform(-1e4, 1e4), rng.randint(0, 3))
        hi = round(lo + 10 ** rng.uniform(-1, 4), rng.randint(0, 3))
        if hi <= lo:
            continue
        k = rng.randint(2, 8)
        got = decimate_values("linear", lo, hi, [], k)
        want = brute_nice_ticks(lo, hi, k)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9), (lo, hi, k)


def test_month_axis_decimates_to_quarters():
    axis = time_axis(to_epoch_ms(2023, 1, 1), to_epoch_ms(2023, 12, 1), "x")
    assert len(axis.ticks) == 12
    axis = replace(axis, scale=axis.scale.with_range(0, 300))
    out = position_ticks(decimate_axis(axis, 4))
    assert [t.label for t in out.ticks] == ["Jan", "Apr", "Jul", "Oct"]


def test_visible_count_window():
    assert visible_count([0, 1, 2, 3, 10], 3) == 4
    assert visible_count([0, 5, 10], 4) == 1
    assert visible_count([1, 2, 3]) == 3


def test_nice_domain_includes_zero():
    assert nice_domain(3, 97, 5, include_zero=True) == (0.0, 100.0)


@pytest.mark.parametrize("label,value", [("1,200", 1200.0), ("-3.5", -3.5), ("2k", 2000.0), ("45%", 45.0),
                                         ("abc", None)])
def test_parse_number(label, value):
    assert parse_number(label) == value


def test_month_label_needs_year_hint():
    assert parse_month_label("Mar", 2020) == to_epoch_ms(2020, 3, 1)
    assert parse_month_label("Mar 2021", None) == to_epoch_ms(2021, 3, 1)


def test_format_number_and_stride():
    assert format_number(1234.5, 1) == "1,234.5"
    assert stride_decimate(list(range(10)), 4) == [0, 3, 6, 9]


def test_scale_kind_guard():
    with pytest.raises(ValueError):
        Scale("log", (1, 10), (0, 1))
