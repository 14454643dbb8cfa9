import xml.etree.ElementTree as ET

import pandas as pd
import pytest

from kinex.errors import UsageError
from kinex.experiments.sinks import DirectorySink
from kinex.plotting import Axis, PlotSpec, emit_plot_svg, render_svg

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def ccdf_frame():
    return pd.DataFrame({"x": [1.0, 3.0, 10.0, 40.0, 200.0], "ccdf": [1.0, 0.8, 0.4, 0.1, 0.02]})


def test_scatter_draws_one_circle_per_row():
    frame = pd.DataFrame({"x": [1.0, 2.0], "y": [3.0, 4.0]})
    svg = render_svg(frame, PlotSpec(x="x", y="y"))
    assert svg.count("<circle") == 2
    assert "<polyline" not in svg


def test_line_draws_one_polyline(ccdf_frame):
    svg = render_svg(ccdf_frame, PlotSpec(x="x", y="ccdf", kind="line"))
    assert svg.count("<polyline") == 1
    assert "<circle" not in svg


def test_rendering_is_deterministic(ccdf_frame):
    spec = PlotSpec(x="x", y="ccdf", xscale="log", yscale="log", title="wealth")
    assert render_svg(ccdf_frame, spec) == render_svg(ccdf_frame.copy(), spec)


def test_log_log_plot_is_well_formed_xml(ccdf_frame):
    svg = render_svg(ccdf_frame, PlotSpec(x="x", y="ccdf", xscale="log", yscale="log", title="a < b & c"))
    root = ET.fromstring(svg.encode("utf-8"))
    assert root.tag == SVG_NS + "svg"
    assert root.get("viewBox") == "0 0 800 600"
    texts = [t.text for t in root.iter(SVG_NS + "text")]
    assert "a < b & c" in texts
    assert "href" not in svg


def test_nonpositive_value_under_log_scale_names_the_row():
    frame = pd.DataFrame({"x": [1.0, 0.0, 2.0], "y": [1.0, 1.0, 1.0]})
    with pytest.raises(UsageError, match="row 2"):
        render_svg(frame, PlotSpec(x="x", y="y", xscale="log"))


def test_missing_column():
    frame = pd.DataFrame({"x": [1.0]})
    with pytest.raises(UsageError, match="'wealth'"):
        render_svg(frame, PlotSpec(x="x", y="wealth"))


def test_non_numeric_value():
    frame = pd.DataFrame({"x": [1.0, 2.0], "y": ["1", "abc"]})
    with pytest.raises(UsageError, match="row 2"):
        render_svg(frame, PlotSpec(x="x", y="y"))


def test_rows_with_missing_values_are_skipped():
    frame = pd.DataFrame({"x": [1.0, 2.0, 3.0], "y": [1.0, float("nan"), 2.0]})
    assert render_svg(frame, PlotSpec(x="x", y="y")).count("<circle") == 2


def test_invalid_spec():
    with pytest.raises(UsageError):
        PlotSpec(x="x", y="y", xscale="sqrt")
    with pytest.raises(UsageError):
        PlotSpec(x="x", y="y", kind="bar")


def test_axis_ticks():
    linear = Axis.fit(pd.Series([0.3, 9.7]).to_numpy(), "linear")
    assert linear.ticks[0] <= 0.3 and linear.ticks[-1] >= 9.7
    assert 5 <= len(linear.ticks) <= 12
    log = Axis.fit(pd.Series([2.0, 300.0]).to_numpy(), "log")
    assert log.ticks == (1.0, 10.0, 100.0, 1000.0)


def test_emit_plot_svg_writes_through_sink(tmp_path, ccdf_frame):
    csv = tmp_path / "wealth_ccdf.csv"
    ccdf_frame.to_csv(csv, index=False)
    sink = DirectorySink(str(tmp_path / "plots"))
    path = emit_plot_svg(str(csv), PlotSpec(x="x", y="ccdf", xscale="log", yscale="log"), sink)
    assert path.endswith("wealth_ccdf_ccdf_vs_x.svg")
    assert "wealth_ccdf_ccdf_vs_x.svg" in sink.files
    again = DirectorySink(str(tmp_path / "again"))
    emit_plot_svg(str(csv), PlotSpec(x="x", y="ccdf", xscale="log", yscale="log"), again, "same.svg")
    assert (tmp_path / "again" / "same.svg").read_bytes() == (tmp_path / "plots" / "wealth_ccdf_ccdf_vs_x.svg").read_bytes()
