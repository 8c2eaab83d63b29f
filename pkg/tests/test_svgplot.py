import xml.etree.ElementTree as ET

import pytest

from meshgrad import svgplot


def parse(svg: str) -> ET.Element:
    return ET.fromstring(svg)


class TestLinePlot:
    def test_well_formed_xml_with_one_polyline_per_series(self):
        svg = svgplot.line_plot_svg(
            [("a", [0, 1, 2], [1.0, 0.1, 0.01]),
             ("b", [0, 1, 2], [2.0, 1.0, 0.5])],
            title="t", xlabel="x", ylabel="y")
        root = parse(svg)
        ns = "{http://www.w3.org/2000/svg}"
        polylines = root.findall(f"{ns}polyline")
        assert len(polylines) == 2
        texts = [t.text for t in root.iter(f"{ns}text")]
        assert "t" in texts and "a" in texts and "b" in texts

    def test_log_axis_has_decade_labels(self):
        svg = svgplot.line_plot_svg([("s", [0, 1], [1.0, 1e-3])], log_y=True)
        assert "1e0" in svg and "1e-3" in svg

    def test_log_axis_drops_nonpositive_points(self):
        svg = svgplot.line_plot_svg(
            [("s", [0, 1, 2], [1.0, 0.0, 0.01])], log_y=True)
        root = parse(svg)
        ns = "{http://www.w3.org/2000/svg}"
        pts = root.find(f"{ns}polyline").get("points").split()
        assert len(pts) == 2

    def test_all_nonpositive_raises(self):
        with pytest.raises(ValueError):
            svgplot.line_plot_svg([("s", [0, 1], [0.0, -1.0])], log_y=True)

    def test_linear_axis_keeps_zero(self):
        svg = svgplot.line_plot_svg([("s", [0, 1], [0.0, 2.0])], log_y=False)
        root = parse(svg)
        ns = "{http://www.w3.org/2000/svg}"
        pts = root.find(f"{ns}polyline").get("points").split()
        assert len(pts) == 2

    def test_constant_series_does_not_crash(self):
        svg = svgplot.line_plot_svg([("s", [0, 1, 2], [1.0, 1.0, 1.0])])
        assert "<polyline" in svg
