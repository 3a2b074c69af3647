from __future__ import annotations

import pytest

from fxsmile.cli import main as fxsmile_main
from fxsmile_plots import FIGURE_SCENARIOS


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    """CSV output of every figure scenario, generated once per session."""
    out = tmp_path_factory.mktemp("scenario-csv")
    rc = fxsmile_main(["run-scenario", *sorted(FIGURE_SCENARIOS),
                       "--out", str(out), "--parallel"])
    assert rc == 0
    return out
