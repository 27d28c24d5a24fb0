"""Nice-number ticks, month ticks and label formatting/parsing."""

from __future__ import annotations

import math
import re
from datetime import datetime, timezone
from typing import List, Optional, Sequence, Tuple

from .abbrev import MONTH_ABBR, MONTHS

NICE_MANTISSAS = (1.0, 2.0, 2.5, 5.0)
_EPS = 1e-9


def count_multiples(lo: float, hi: float, step: float) -> int:
    first = math.ceil(lo / step - _EPS)
    last = math.floor(hi / step + _EPS)
    return max(0, last - first + 1)


def nice_steps(span: float):
    """Ascending nice steps starting well below ``span``."""
    k = math.floor(math.log10(span)) - 3 if span > 0 else -3
    while True:
        base = 10.0 ** k
        for m in NICE_MANTISSAS:
            yield m * base
        k += 1


def nice_step(lo: float, hi: float, max_count: int, window: Optional[float] = None) -> float:
    """Smallest nice step giving at most ``max_count`` ticks.

    With ``window`` set the count is the worst case over any visible
    window of that width instead of the whole domain.
    """
    if max_count < 1:
        raise ValueError("max_count must be >= 1")
    span = hi - lo
    for s in nice_steps(span):
        if window is not None:
            n = int(math.floor(window / s + _EPS)) + 1
        else:
            n = count_multiples(lo, hi, s)
        if n <= max_count:
            return s
    raise AssertionError("unreachable")


def linear_tick_values(lo: float, hi: float, step: float) -> List[float]:
    first = math.ceil(lo / step - _EPS)
    last = math.floor(hi / step + _EPS)
    return [_clean(i * step) for i in range(first, last + 1)]


def _clean(v: float) -> float:
    r = round(v, 10)
    return 0.0 if r == 0 else r


def nice_domain(lo: float, hi: float, max_count: int = 10, include_zero: bool = False) -> Tuple[float, float]:
    if include_zero:
        lo, hi = min(lo, 0.0), max(hi, 0.0)
    if hi <= lo:
        hi = lo + 1.0
    s = nice_step(lo, hi, max_count)
    return _clean(math.floor(lo / s + _EPS) * s), _clean(math.ceil(hi / s - _EPS) * s)


def step_decimals(step: float) -> int:
    for d in range(0, 12):
        if abs(round(step, d) - step) < 1e-9 * max(1.0, abs(step)):
            return d
    return 12


def format_number(v: float, decimals: int = 0) -> str:
    s = "{:,.{}f}".format(v, decimals)
    if s.startswith("-") and float(s.replace(",", "")) == 0:
        s = s[1:]
    return s


# -- time --------------------------------------------------------------------

DAY_MS = 86_400_000.0


def to_epoch_ms(year: int, month: int = 1, day: int = 1) -> float:
    return datetime(year, month, day, tzinfo=timezone.utc).timestamp() * 1000.0


def from_epoch_ms(ms: float) -> datetime:
    return datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)


def format_time(ms: float, fmt: str) -> str:
    d = from_epoch_ms(ms)
    if fmt == "%b":
        return MONTH_ABBR[d.month - 1]
    if fmt == "%b %Y":
        return "%s %d" % (MONTH_ABBR[d.month - 1], d.year)
    if fmt == "%Y":
        return str(d.year)
    return d.strftime(fmt)


def month_starts(lo_ms: float, hi_ms: float, every: int = 1) -> List[float]:
    d = from_epoch_ms(lo_ms)
    y, m = d.year, d.month
    if to_epoch_ms(y, m) < lo_ms - 1:
        m += 1
        if m > 12:
            y, m = y + 1, 1
    out = []
    i = 0
    while True:
        ms = to_epoch_ms(y, m)
        if ms > hi_ms + 1:
            break
        if i % every == 0:
            out.append(ms)
        i += 1
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return out


def time_format_for(lo_ms: float, hi_ms: float) -> str:
    a, b = from_epoch_ms(lo_ms), from_epoch_ms(hi_ms)
    if (b - a).days > 366 * 6:
        return "%Y"
    if a.year == b.year or (b.year == a.year + 1 and b.month == 1 and b.day == 1):
        return "%b"
    return "%b %Y"


def stride_decimate(values: Sequence, max_count: int) -> list:
    """Keep every ceil(n / max_count)-th item, starting with the first."""
    n = len(values)
    if n <= max_count:
        return list(values)
    stride = math.ceil(n / max_count)
    return list(values[::stride])


# -- label parsing -------------------------------------------------------------

_SUFFIX = {"k": 1e3, "K": 1e3, "M": 1e6, "B": 1e9}
_NUM_RE = re.compile(r"^([+-]?)(\d{1,3}(?:,\d{3})+|\d+)(\.\d+)?\s*([kKMB%]?)$")
_MONTH_LOOKUP = {m.lower(): i + 1 for i, m in enumerate(MONTH_ABBR)}
_MONTH_LOOKUP.update({m.lower(): i + 1 for i, m in enumerate(MONTHS)})


def parse_number(label: str) -> Optional[float]:
    """Parse tick/value labels: thousands separators, ``%`` and k/M/B suffixes."""
    s = label.strip().replace("−", "-")
    m = _NUM_RE.match(s)
    if not m:
        return None
    sign, whole, frac, suffix = m.groups()
    v = float(whole.replace(",", "") + (frac or ""))
    if sign == "-":
        v = -v
    if suffix in _SUFFIX:
        v *= _SUFFIX[suffix]
    return v


def parse_month_label(label: str, year: Optional[int]) -> Optional[float]:
    """Parse ``Jan``, ``Jan 2023``, ``January 2023`` or ``2023`` into epoch ms."""
    parts = label.strip().split()
    if len(parts) == 2 and parts[0].lower() in _MONTH_LOOKUP and parts[1].isdigit():
        return to_epoch_ms(int(parts[1]), _MONTH_LOOKUP[parts[0].lower()])
    if len(parts) == 1 and parts[0].lower() in _MONTH_LOOKUP and year is not None:
        return to_epoch_ms(year, _MONTH_LOOKUP[parts[0].lower()])
    if len(parts) == 1 and re.fullmatch(r"\d{4}", parts[0]) and year is None:
        return to_epoch_ms(int(parts[0]))
    return None


def visible_count(values: Sequence[float], window: Optional[float] = None) -> int:
    """Most values falling inside any closed interval of length ``window``."""
    vs = sorted(float(v) for v in values)
    if window is None or not vs:
        return len(vs)
    best = j = 0
    for i, v in enumerate(vs):
        while vs[j] < v - window - _EPS * max(1.0, abs(v)):
            j += 1
        best = max(best, i - j + 1)
    return best


def decimate_values(kind: str, lo: float, hi: float, values: Sequence[float], max_count: int,
                    window: Optional[float] = None) -> List[float]:
    """Tick values reduced so at most ``max_count`` are visible at once.

    Linear axes get a fresh nice step; time axes keep every k-th existing
    tick so labels stay on month boundaries.
    """
    if max_count < 1:
        raise ValueError("max_count must be >= 1")
    if kind == "linear":
        return linear_tick_values(lo, hi, nice_step(lo, hi, max_count, window))
    vals = list(values)
    stride = 1
    while visible_count(vals[::stride], window) > max_count:
        stride += 1
    return vals[::stride]
