import math
import xml.etree.ElementTree as ET

from seakit.svg import line_plot


def test_plot_is_valid_svg_with_one_polyline():
    svg = line_plot([1, 10, 100], [5, 50, 500], title="a<b", logx=True, logy=True)
    root = ET.fromstring(svg)
    lines = [e for e in root.iter() if e.tag.endswith("polyline")]
    assert len(lines) == 1
    assert len(lines[0].get("points").split()) == 3
    assert "a&lt;b" in svg


def test_non_finite_points_dropped():
    svg = line_plot([0, 1, 2, 3], [1.0, math.inf, None, 2.0])
    pts = ET.fromstring(svg).find("{http://www.w3.org/2000/svg}polyline").get("points")
    assert len(pts.split()) == 2


def test_empty_series():
    root = ET.fromstring(line_plot([], []))
    assert not [e for e in root.iter() if e.tag.endswith("polyline")]
