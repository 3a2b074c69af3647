"""Figure layouts for the ten renderable scenarios and the renderer."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from fxsmile_plots.csvdata import CurveData, MissingInputError, load_curve_csv

X_LABELS = {
    "strike": "Strike",
    "log_moneyness": "Log-moneyness",
    "iteration": "Iteration",
}


@dataclass(frozen=True)
class PanelSpec:
    """One axes of a figure, fed by one CSV (optionally one series of it)."""

    suffix: str
    title: str
    y_label: str
    zero_line: bool = False
    series: tuple[str, ...] | None = None


@dataclass(frozen=True)
class FigureSpec:
    """Scenario name plus the panels laid out left to right."""

    scenario: str
    panels: tuple[PanelSpec, ...] = field(default=())

    def csv_paths(self, in_dir: Path) -> tuple[Path, ...]:
        return tuple(
            in_dir / f"{self.scenario}-{panel.suffix}.csv"
            for panel in self.panels)


def _smile(title: str = "Smile") -> PanelSpec:
    return PanelSpec("smile", title, "Implied volatility")


def _g() -> PanelSpec:
    return PanelSpec("g", "Butterfly diagnostic", "g", zero_line=True)


def _density() -> PanelSpec:
    return PanelSpec("density", "Implied density", "Density", zero_line=True)


FIGURE_SCENARIOS: dict[str, FigureSpec] = {
    spec.scenario: spec
    for spec in (
        FigureSpec("fig1-audnzd-svi-g", (_smile(), _g())),
        FigureSpec("fig2-audnzd-spline-density", (_smile(), _density())),
        FigureSpec("fig3-eurczk-poly-density", (_smile(), _density())),
        FigureSpec("fig4-usdaed-fixedpoint", (
            PanelSpec("trace", "Delta iterates", "Delta", series=("delta",)),
            PanelSpec("trace", "Vol iterates", "Implied volatility",
                      series=("vol",)),
        )),
        FigureSpec("fig5-usdaed-g", (_smile(), _g())),
        FigureSpec("fig6-eurtry-density", (_smile(), _density())),
        FigureSpec("fig7-manufactured-density", (_smile(), _density())),
        FigureSpec("fig8a-eurusd-1m-wings", (_smile("Smile and wings"),)),
        FigureSpec("fig8b-eurusd-1y-wings", (_smile("Smile and wings"),)),
        FigureSpec("varswap-model-independent", (
            PanelSpec("pillars", "Standard pillars", "Implied volatility"),
        )),
    )
}


def _is_marker_series(name: str) -> bool:
    return "pillars" in name or "market" in name


def _draw_panel(ax: plt.Axes, panel: PanelSpec, data: CurveData) -> None:
    for curve in data.curves:
        if panel.series is not None and curve.name not in panel.series:
            continue
        if _is_marker_series(curve.name):
            ax.plot(curve.x, curve.values, linestyle="none", marker="o",
                    markersize=3, label=curve.name)
        else:
            ax.plot(curve.x, curve.values, label=curve.name)
    if panel.zero_line:
        ax.axhline(0.0, color="black", linewidth=0.6)
    ax.set_title(panel.title)
    ax.set_xlabel(X_LABELS.get(data.x_kind, data.x_kind))
    ax.set_ylabel(panel.y_label)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")


def render_scenario(scenario: str, in_dir: str | Path,
                    out_dir: str | Path, fmt: str = "svg") -> Path:
    """Render one scenario's figure from its CSVs; return the output path.

    Raises :class:`MissingInputError` with the command to run when a CSV
    is absent, and :class:`KeyError` for an unknown scenario.
    """
    if fmt not in ("svg", "png"):
        raise ValueError(f"format must be svg or png, got {fmt!r}")
    spec = FIGURE_SCENARIOS[scenario]
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)

    datasets = []
    for panel, path in zip(spec.panels, spec.csv_paths(in_dir)):
        if not path.is_file():
            raise MissingInputError(
                f"{path} not found; run "
                f"`fxsmile run-scenario {scenario} --out {in_dir}` first")
        datasets.append(load_curve_csv(path))

    n = len(spec.panels)
    fig, axes = plt.subplots(1, n, figsize=(5.5 * n, 4.2))
    if n == 1:
        axes = [axes]
    for ax, panel, data in zip(axes, spec.panels, datasets):
        _draw_panel(ax, panel, data)
    fig.suptitle(scenario)
    fig.tight_layout()

    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{scenario}.{fmt}"
    fig.savefig(out_path, format=fmt)
    plt.close(fig)
    return out_path
