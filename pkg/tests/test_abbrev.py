import pytest

from chartmorph.abbrev import AbbreviationRules, op_semantic_abbreviation


@pytest.mark.parametrize("label,short", [
    ("United States", "USA"),
    ("January 2023", "23 Jan"),
    ("September 1999", "99 Sep"),
])
def test_single_label(label, short):
    assert op_semantic_abbreviation([label]) == (short,)


def test_shared_leading_word_becomes_initial():
    out = op_semantic_abbreviation(["North Dakota", "North Carolina", "Texas"])
    assert out == ("N. Dakota", "N. Carolina", "Texas")


def test_colliding_rule_is_rolled_back():
    rules = AbbreviationRules(dictionary={"Alpha": "A", "Alphabet": "A1"}, use_dates=False, use_initials=False)
    assert op_semantic_abbreviation(["Alpha", "Alphabet"], rules) == ("A", "A1")
    rules = AbbreviationRules(dictionary={"Alpha": "Al", "Alps": "Al"}, use_dates=False, use_initials=False)
    assert op_semantic_abbreviation(["Alpha", "Alps"], rules) == ("Alpha", "Alps")


def test_output_never_longer():
    labels = ["United Arab Emirates", "March 2020", "Bosnia and Herzegovina", "Peru"]
    for a, b in zip(labels, op_semantic_abbreviation(labels)):
        assert len(b) <= len(a)


def test_rules_must_shorten():
    with pytest.raises(ValueError):
        AbbreviationRules(dictionary={"UK": "Britain"})
