"""Figure rendering for fxsmile scenario CSV output.

Reads the curve CSVs written by ``fxsmile run-scenario`` and renders the
two-panel figures (smile on the left, density or g diagnostic on the
right).  Rendering is read-only over the CSVs: nothing is recomputed.
"""

from fxsmile_plots.csvdata import Curve, CurveData, MissingInputError, load_curve_csv
from fxsmile_plots.figures import (
    FIGURE_SCENARIOS,
    FigureSpec,
    PanelSpec,
    render_scenario,
)

__all__ = [
    "Curve",
    "CurveData",
    "FIGURE_SCENARIOS",
    "FigureSpec",
    "MissingInputError",
    "PanelSpec",
    "load_curve_csv",
    "render_scenario",
]
