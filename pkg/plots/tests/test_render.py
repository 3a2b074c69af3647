"""Rendering of scenario CSVs into image files."""

from __future__ import annotations

import numpy as np
import pytest

from fxsmile_plots import (
    FIGURE_SCENARIOS,
    MissingInputError,
    load_curve_csv,
    render_scenario,
)
from fxsmile_plots.cli import main
from fxsmile_plots.csvdata import CsvFormatError


def _looks_like_svg(path) -> bool:
    head = path.read_bytes()[:512]
    return b"<svg" in head


def _looks_like_png(path) -> bool:
    return path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_every_figure_scenario_renders_svg(csv_dir, tmp_path):
    assert len(FIGURE_SCENARIOS) == 10
    for scenario in FIGURE_SCENARIOS:
        out = render_scenario(scenario, csv_dir, tmp_path, "svg")
        assert out.name == f"{scenario}.svg"
        assert _looks_like_svg(out)


def test_png_format(csv_dir, tmp_path):
    out = render_scenario("fig1-audnzd-svi-g", csv_dir, tmp_path, "png")
    assert _looks_like_png(out)


def test_nan_gaps_survive_the_loader(csv_dir, tmp_path):
    # The negative-variance interval shows up as NaN tokens; the loader
    # must keep them so the plotted line breaks instead of bridging.
    data = load_curve_csv(csv_dir / "fig6-eurtry-density-density.csv")
    raw = (csv_dir / "fig6-eurtry-density-density.csv").read_text()
    n_tokens = raw.count("NaN")
    n_loaded = sum(int(np.isnan(c.values).sum()) for c in data.curves)
    assert n_tokens > 0
    assert n_loaded == n_tokens
    render_scenario("fig6-eurtry-density", csv_dir, tmp_path, "svg")


def test_missing_csv_is_actionable(tmp_path):
    with pytest.raises(MissingInputError, match="fxsmile run-scenario"):
        render_scenario("fig1-audnzd-svi-g", tmp_path / "empty", tmp_path,
                        "svg")


def test_cli_exit_codes(csv_dir, tmp_path, capsys):
    ok = main(["fig8a-eurusd-1m-wings", "--in", str(csv_dir),
               "--out", str(tmp_path), "--format", "png"])
    assert ok == 0
    assert "fig8a-eurusd-1m-wings.png" in capsys.readouterr().out

    with pytest.raises(SystemExit) as exc:
        main(["no-such-scenario"])
    assert exc.value.code == 1

    missing = main(["fig1-audnzd-svi-g", "--in", str(tmp_path / "nowhere")])
    assert missing == 2
    assert "fxsmile run-scenario" in capsys.readouterr().err


def test_loader_rejects_bad_schema(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,header\n1,2\n")
    with pytest.raises(CsvFormatError, match="header"):
        load_curve_csv(bad)
    empty = tmp_path / "empty.csv"
    empty.write_text("x_kind,x,series,value\n")
    with pytest.raises(CsvFormatError, match="no data"):
        load_curve_csv(empty)
