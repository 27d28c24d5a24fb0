import math

import pytest

from chartmorph.svg import SvgInputError, SvgParseError, apply, parse_path, parse_svg, parse_transform


def test_malformed_reports_byte_offset():
    text = '<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"><rect></svg>'
    with pytest.raises(SvgParseError) as info:
        parse_svg(text)
    # the stray closing tag starts right after "<rect>"
    assert info.value.offset == text.index("</svg>") + 2
    assert "byte offset" in str(info.value)


def test_byte_offset_counts_multibyte_characters():
    text = '<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"><text>é</text><g></svg>'
    with pytest.raises(SvgParseError) as info:
        parse_svg(text.encode("utf-8"))
    assert info.value.offset == len(text[:text.index("</svg>") + 2].encode("utf-8"))


def test_non_svg_root():
    with pytest.raises(SvgInputError):
        parse_svg("<html/>")


def test_size_from_viewbox():
    tree = parse_svg('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 320 200"/>')
    assert (tree.width, tree.height) == (320, 200)


def test_nested_transforms_compose():
    svg = ('<svg xmlns="http://www.w3.org/2000/svg" width="100" height="100">'
           '<g transform="translate(10,20)"><rect transform="scale(2)" x="1" y="1" width="3" height="4"/></g></svg>')
    rect = parse_svg(svg).elements("rect")[0]
    assert rect.rect == pytest.approx((12, 22, 6, 8))


def test_rotate_about_point():
    m = parse_transform("rotate(90, 10, 10)")
    assert apply(m, 20, 10) == pytest.approx((10, 20))


def test_path_relative_and_close():
    pts, closed = parse_path("M 0 0 l 10 0 v 5 h -10 z")
    assert pts == [(0, 0), (10, 0), (10, 5), (0, 5)]
    assert closed


def test_unsupported_elements_listed():
    svg = ('<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10">'
           '<foreignObject/><rect width="1" height="1"/></svg>')
    tree = parse_svg(svg)
    assert "foreignObject" in tree.unsupported
    assert len(tree.elements("rect")) == 1


def test_text_angle_from_rotation():
    svg = ('<svg xmlns="http://www.w3.org/2000/svg" width="100" height="100">'
           '<text x="5" y="5" font-size="12" transform="rotate(-45, 5, 5)">Hi</text></svg>')
    t = parse_svg(svg).elements("text")[0]
    assert t.lines == ("Hi",)
    assert math.isclose(abs(t.angle), 45, abs_tol=1e-9)
