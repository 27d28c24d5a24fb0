"""Meaning-preserving label shortening."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

MONTHS = ("January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December")
MONTH_ABBR = tuple(m[:3] for m in MONTHS)

COUNTRIES = {
    "United States of America": "USA",
    "United States": "USA",
    "United Kingdom": "GBR",
    "Democratic Republic of the Congo": "COD",
    "Republic of the Congo": "COG",
    "Central African Republic": "CAF",
    "Dominican Republic": "DOM",
    "Czech Republic": "CZE",
    "South Africa": "ZAF",
    "South Korea": "KOR",
    "North Korea": "PRK",
    "New Zealand": "NZL",
    "Saudi Arabia": "SAU",
    "United Arab Emirates": "ARE",
    "Bosnia and Herzegovina": "BIH",
    "Papua New Guinea": "PNG",
    "Trinidad and Tobago": "TTO",
    "Russian Federation": "RUS",
    "Germany": "DEU",
    "France": "FRA",
    "Netherlands": "NLD",
    "Switzerland": "CHE",
    "Argentina": "ARG",
    "Australia": "AUS",
    "Indonesia": "IDN",
    "Philippines": "PHL",
    "Bangladesh": "BGD",
    "Madagascar": "MDG",
    "Mozambique": "MOZ",
    "Afghanistan": "AFG",
    "Kazakhstan": "KAZ",
    "Uzbekistan": "UZB",
    "Venezuela": "VEN",
    "Colombia": "COL",
    "Ethiopia": "ETH",
    "Tanzania": "TZA",
    "Nigeria": "NGA",
    "Pakistan": "PAK",
    "Vietnam": "VNM",
    "Thailand": "THA",
    "Malaysia": "MYS",
    "Singapore": "SGP",
    "Canada": "CAN",
    "Mexico": "MEX",
    "Brazil": "BRA",
    "Japan": "JPN",
    "China": "CHN",
    "India": "IND",
    "Italy": "ITA",
    "Spain": "ESP",
    "Portugal": "PRT",
    "Sweden": "SWE",
    "Norway": "NOR",
    "Denmark": "DNK",
    "Finland": "FIN",
    "Poland": "POL",
    "Ukraine": "UKR",
    "Turkey": "TUR",
    "Egypt": "EGY",
    "Kenya": "KEN",
}


def _default_dictionary() -> Dict[str, str]:
    d = dict(COUNTRIES)
    d.update({m: m[:3] for m in MONTHS if len(m) > 3})
    return d


_DATE_RE = re.compile(r"^(%s) (\d{4})$" % "|".join(MONTHS))


@dataclass(frozen=True)
class AbbreviationRules:
    dictionary: Dict[str, str] = field(default_factory=_default_dictionary)
    use_dates: bool = True
    use_initials: bool = True

    def __post_init__(self) -> None:
        for k, v in self.dictionary.items():
            if len(v) >= len(k):
                raise ValueError("abbreviation %r -> %r does not shorten" % (k, v))
            if v in self.dictionary:
                raise ValueError("abbreviation %r -> %r forms a cycle" % (k, v))

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.dictionary.items())), self.use_dates, self.use_initials))


DEFAULT_RULES = AbbreviationRules()


def _dictionary_rule(label: str, rules: AbbreviationRules) -> str:
    return rules.dictionary.get(label, label)


def _date_rule(label: str, rules: AbbreviationRules) -> str:
    m = _DATE_RE.match(label)
    if not m:
        return label
    return "%s %s" % (m.group(2)[2:], m.group(1)[:3])


def _initials_rule(labels: Sequence[str]) -> List[str]:
    firsts: Dict[str, int] = {}
    for label in labels:
        words = label.split(" ")
        if len(words) >= 2 and len(words[0]) > 2:
            firsts[words[0]] = firsts.get(words[0], 0) + 1
    out = []
    for label in labels:
        words = label.split(" ")
        if len(words) >= 2 and firsts.get(words[0], 0) >= 2:
            out.append(words[0][0] + ". " + " ".join(words[1:]))
        else:
            out.append(label)
    return out


def _distinct(labels: Sequence[str]) -> bool:
    return len(set(labels)) == len(labels)


def op_semantic_abbreviation(labels: Sequence[str], rules: AbbreviationRules = DEFAULT_RULES) -> Tuple[str, ...]:
    """Shorten labels by dictionary, date pattern and shared-leading-word rules.

    Each rule is applied to the whole set and rolled back for the set if it
    would make two labels collide.
    """
    current = list(labels)
    stages = [lambda ls: [_dictionary_rule(s, rules) for s in ls]]
    if rules.use_dates:
        stages.append(lambda ls: [_date_rule(s, rules) for s in ls])
    if rules.use_initials:
        stages.append(_initials_rule)
    input_distinct = _distinct(current)
    for stage in stages:
        candidate = stage(current)
        if input_distinct and not _distinct(candidate):
            continue
        current = candidate
    return tuple(current)
