import re

from spacebound import terms as T
from spacebound.scenarios import gen_forklift_topological, synthetic_forklift_geometry
from spacebound.svg import render_svg
from spacebound.timeorder import At, TimeOrder
from spacebound.transforms import (
    Classification,
    Mode,
    TimedSpace,
    geometrize,
    index_by_time,
)


def occupied(component, entries):
    return TimedSpace(component, Classification.OCCUPIED, Mode.OVER, entries)


def component_rects(svg_text):
    # colored component boxes carry fill-opacity; chrome does not
    return re.findall(r'<rect[^>]*fill-opacity="0.55"[^>]*/>', svg_text)


def test_single_box_renders_one_component_rect():
    ts = occupied("a", {At("t0"): T.OccupyBox2D(0, 0, 5, 5)})
    text = render_svg([ts], TimeOrder.chain(1))
    assert text.startswith("<?xml")
    assert text.rstrip().endswith("</svg>")
    assert len(component_rects(text)) == 1


def test_forklift_demo_renders_four_rows():
    term, order = gen_forklift_topological()
    ts = geometrize(index_by_time(term, order, component="fl2"), synthetic_forklift_geometry())
    text = render_svg([ts], order)
    for label in ("pt1", "pt2", "pt3", "pt4"):
        assert f">{label}</text>" in text
    # pt2 and pt3 show two boxes each (disjunctions), pt1 and pt4 one
    assert len(component_rects(text)) == 6


def test_empty_space_is_still_valid_svg():
    ts = occupied("a", {})
    text = render_svg([ts], TimeOrder.chain(3))
    assert text.startswith("<?xml") and text.rstrip().endswith("</svg>")
    assert component_rects(text) == []


def test_3d_renders_two_projections():
    ts = occupied("a", {At("t0"): T.OccupyBox3D(0, 0, 0, 5, 6, 7)})
    text = render_svg([ts], TimeOrder.chain(1))
    assert "x against time" in text
    assert "y against time" in text
    assert len(component_rects(text)) == 2  # one bar per projection


def test_legend_names_components():
    a = occupied("left", {At("t0"): T.OccupyBox2D(0, 0, 1, 1)})
    b = occupied("right", {At("t0"): T.OccupyBox2D(5, 0, 6, 1)})
    text = render_svg([a, b], TimeOrder.chain(1))
    assert ">left</text>" in text and ">right</text>" in text
