"""Command-line scenario runner, calibrator and pricer.

Scenarios write one CSV per chart panel (``<scenario>-<panel>.csv``, columns
x_kind,x,series,value with the literal token NaN for points where a
representation has no value) plus a ``<scenario>-summary.json`` carrying
the headline diagnostics.  Rendering those CSVs to figures is done by the
separate plotting package.

Exit codes: 0 success, 1 usage error, 2 scenario/computation failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
from pathlib import Path

import numpy as np

from .arbitrage import ScanReport, scan_report
from .blackscholes import OptionKind
from .market import FixtureError, SmileQuoteSet, load_fixture
from .models import build_smile, pillar_residuals
from .parametric import SabrSmile, SviSmile, XssviSmile
from .pricing import (
    auto_quanto_price,
    digital_price,
    variance_swap_model_independent,
    variance_swap_replication,
)
from .smiles import (
    Boundary,
    DeltaKind,
    Extrapolation,
    SplineAxis,
    StrikeSolver,
    fixed_point_lookup,
    lookup_vol,
    negative_variance_intervals,
)

SCENARIOS = (
    "fig1-audnzd-svi-g",
    "fig2-audnzd-spline-density",
    "fig3-eurczk-poly-density",
    "fig4-usdaed-fixedpoint",
    "fig5-usdaed-g",
    "fig6-eurtry-density",
    "fig7-manufactured-density",
    "fig8a-eurusd-1m-wings",
    "fig8b-eurusd-1y-wings",
    "table8-prices",
    "varswap-model-independent",
)

CSV_HEADER = "x_kind,x,series,value"


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NaN"
    return repr(float(value))


def _write_csv(path: Path, rows: list[tuple[str, float, str, float]]) -> None:
    lines = [CSV_HEADER]
    for x_kind, x, series, value in rows:
        lines.append(f"{x_kind},{_fmt(x)},{series},{_fmt(value)}")
    path.write_text("\n".join(lines) + "\n")


def _write_summary(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _summary_base() -> dict:
    return {
        "minG": None,
        "negativeIntervals": [],
        "modeCount": None,
        "pillarResiduals": {},
        "prices": {},
    }


def _intervals(iv) -> list[list[float]]:
    return [[float(a), float(b)] for a, b in iv]


def _curve_rows(series: str, report: ScanReport,
                which: str) -> list[tuple[str, float, str, float]]:
    rows = []
    if which == "g":
        for y, g in zip(report.g_curve.ys, report.g_curve.gs):
            rows.append(("log_moneyness", float(y), series,
                         float(g) if np.isfinite(g) else math.nan))
    else:
        for k, p in zip(report.density_curve.strikes,
                        report.density_curve.densities):
            rows.append(("strike", float(k), series,
                         float(p) if np.isfinite(p) else math.nan))
    return rows


def _smile_rows(series: str, smile, strikes) -> list[tuple[str, float, str, float]]:
    rows = []
    for k in strikes:
        try:
            v = smile.vol(float(k))
        except Exception:
            v = math.nan
        rows.append(("strike", float(k), series, v))
    return rows


def _market_rows(quotes: SmileQuoteSet,
                 series: str = "market") -> list[tuple[str, float, str, float]]:
    return [("strike", float(k), series, float(p.vol))
            for p, k in zip(quotes.pillars, quotes.pillar_strikes())]


def _strike_grid(quotes: SmileQuoteSet, n_std: float = 5.0,
                 n: int = 801) -> np.ndarray:
    w = quotes.atm_quote().vol * math.sqrt(quotes.expiry)
    half = n_std * w
    return quotes.forward * np.exp(np.linspace(-half, half, n))


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

def _scenario_fig1(out: Path) -> dict:
    quotes = load_fixture("audnzd-7d")
    smile = build_smile(quotes, "svi-a0")
    report = scan_report(smile, quotes.context)
    _write_csv(out / "fig1-audnzd-svi-g-smile.csv",
               _smile_rows("svi-a0", smile, _strike_grid(quotes))
               + _market_rows(quotes))
    _write_csv(out / "fig1-audnzd-svi-g-g.csv", _curve_rows("svi-a0", report, "g"))
    summary = _summary_base()
    summary["minG"] = report.min_g
    summary["negativeIntervals"] = _intervals(report.negative_g_intervals)
    summary["modeCount"] = report.mode_count
    summary["pillarResiduals"]["svi-a0"] = pillar_residuals(smile, quotes)
    return summary


def _scenario_fig2(out: Path) -> dict:
    quotes = load_fixture("audnzd-7d")
    variants = {
        "clamped-flat": build_smile(quotes, "spline",
                                    boundary=Boundary.CLAMPED_ZERO_SLOPE,
                                    extrapolation=Extrapolation.FLAT),
        "natural-linear": build_smile(quotes, "spline",
                                      boundary=Boundary.NATURAL,
                                      extrapolation=Extrapolation.LINEAR_BOUNDARY_SLOPE),
    }
    summary = _summary_base()
    smile_rows, dens_rows = _market_rows(quotes), []
    for name, smile in variants.items():
        report = scan_report(smile, quotes.context)
        smile_rows += _smile_rows(name, smile, _strike_grid(quotes))
        dens_rows += _curve_rows(name, report, "density")
        summary["pillarResiduals"][name] = pillar_residuals(smile, quotes)
        if name == "clamped-flat":
            summary["minG"] = report.min_g
            summary["negativeIntervals"] = _intervals(
                report.negative_density_intervals)
            summary["modeCount"] = report.mode_count
            summary["secondDerivativeJumps"] = [
                smile.second_derivative_jump(0),
                smile.second_derivative_jump(len(smile.nodes) - 1),
            ]
        else:
            summary["naturalLinearJumps"] = [
                smile.second_derivative_jump(0),
                smile.second_derivative_jump(len(smile.nodes) - 1),
            ]
    _write_csv(out / "fig2-audnzd-spline-density-smile.csv", smile_rows)
    _write_csv(out / "fig2-audnzd-spline-density-density.csv", dens_rows)
    return summary


def _scenario_fig3(out: Path) -> dict:
    quotes = load_fixture("eurczk-32d")
    smile = build_smile(quotes, "poly-delta", delta_kind=DeltaKind.REDUCED_ATM)
    report = scan_report(smile, quotes.context)
    _write_csv(out / "fig3-eurczk-poly-density-smile.csv",
               _smile_rows("poly-reduced", smile, _strike_grid(quotes))
               + _market_rows(quotes))
    _write_csv(out / "fig3-eurczk-poly-density-density.csv",
               _curve_rows("poly-reduced", report, "density"))
    summary = _summary_base()
    summary["minG"] = report.min_g
    summary["negativeIntervals"] = _intervals(report.negative_density_intervals)
    summary["modeCount"] = report.mode_count
    summary["pillarResiduals"]["poly-reduced"] = pillar_residuals(smile, quotes)
    return summary


def _scenario_fig4(out: Path) -> dict:
    quotes = load_fixture("usdaed-9m")
    poly = build_smile(quotes, "poly-delta", delta_kind=DeltaKind.BAR_FORWARD)
    strike = 3.7
    result = fixed_point_lookup(poly, strike)
    rows = []
    for i, (d, v) in enumerate(zip(result.deltas, result.vols[1:])):
        rows.append(("iteration", float(i), "delta", d))
        rows.append(("iteration", float(i), "vol", v))
    _write_csv(out / "fig4-usdaed-fixedpoint-trace.csv", rows)
    newton = lookup_vol(poly, strike, StrikeSolver.NEWTON)
    brent = lookup_vol(poly, strike, StrikeSolver.BRENT)
    summary = _summary_base()
    summary["converged"] = result.converged
    summary["cyclePoints"] = (list(result.cycle_points)
                              if result.cycle_points else None)
    summary["newtonVol"] = newton
    summary["brentVol"] = brent
    summary["solverAgreement"] = abs(newton - brent)
    summary["pillarResiduals"]["poly-bar"] = pillar_residuals(poly, quotes)
    return summary


def _scenario_fig5(out: Path) -> dict:
    quotes = load_fixture("usdaed-9m")
    variants = {
        "svi-a0": build_smile(quotes, "svi-a0"),
        "svi": build_smile(quotes, "svi"),
    }
    summary = _summary_base()
    smile_rows, g_rows = _market_rows(quotes), []
    for name, smile in variants.items():
        report = scan_report(smile, quotes.context)
        smile_rows += _smile_rows(name, smile, _strike_grid(quotes))
        g_rows += _curve_rows(name, report, "g")
        summary["pillarResiduals"][name] = pillar_residuals(smile, quotes)
        if name == "svi-a0":
            summary["minG"] = report.min_g
            summary["negativeIntervals"] = _intervals(report.negative_g_intervals)
            summary["modeCount"] = report.mode_count
        else:
            summary["minGUnconstrained"] = report.min_g
    _write_csv(out / "fig5-usdaed-g-smile.csv", smile_rows)
    _write_csv(out / "fig5-usdaed-g-g.csv", g_rows)
    return summary


def _scenario_fig6(out: Path) -> dict:
    quotes = load_fixture("eurtry-1y")
    spline = build_smile(quotes, "spline",
                         axis=SplineAxis.LOG_MONEYNESS_VARIANCE,
                         boundary=Boundary.NATURAL,
                         extrapolation=Extrapolation.LINEAR_BOUNDARY_SLOPE)
    variants = {
        "spline-natural": spline,
        "svi": build_smile(quotes, "svi-a0"),
        "xssvi": build_smile(quotes, "xssvi"),
    }
    summary = _summary_base()
    smile_rows, dens_rows = _market_rows(quotes), []
    for name, smile in variants.items():
        report = scan_report(smile, quotes.context)
        smile_rows += _smile_rows(name, smile, _strike_grid(quotes))
        dens_rows += _curve_rows(name, report, "density")
        summary["pillarResiduals"][name] = pillar_residuals(smile, quotes)
        if name == "spline-natural":
            summary["minG"] = report.min_g
            summary["modeCount"] = report.mode_count
    w_atm = quotes.atm_quote().vol ** 2 * quotes.expiry
    half = 5.0 * math.sqrt(w_atm)
    summary["negativeIntervals"] = _intervals(
        negative_variance_intervals(spline, (-half, half)))
    _write_csv(out / "fig6-eurtry-density-smile.csv", smile_rows)
    _write_csv(out / "fig6-eurtry-density-density.csv", dens_rows)
    return summary


def _scenario_fig7(out: Path) -> dict:
    quotes = load_fixture("manufactured-1y")
    variants = {
        "poly-bar": build_smile(quotes, "poly-delta",
                                delta_kind=DeltaKind.BAR_FORWARD),
        "svi": build_smile(quotes, "svi-a0"),
    }
    summary = _summary_base()
    smile_rows, dens_rows = _market_rows(quotes), []
    for name, smile in variants.items():
        report = scan_report(smile, quotes.context)
        smile_rows += _smile_rows(name, smile, _strike_grid(quotes))
        dens_rows += _curve_rows(name, report, "density")
        summary["pillarResiduals"][name] = pillar_residuals(smile, quotes)
        if name == "poly-bar":
            summary["minG"] = report.min_g
            summary["negativeIntervals"] = _intervals(
                report.negative_density_intervals)
            summary["modeCount"] = report.mode_count
    _write_csv(out / "fig7-manufactured-density-smile.csv", smile_rows)
    _write_csv(out / "fig7-manufactured-density-density.csv", dens_rows)
    return summary


def _scenario_wings(out: Path, tenor: str) -> dict:
    dense = load_fixture(f"eurusd-{tenor}-dense")
    quotes = dense.standard_pillars()
    name = f"fig8{'a' if tenor == '1m' else 'b'}-eurusd-{tenor}-wings"
    variants = {
        "poly-bar": build_smile(quotes, "poly-delta",
                                delta_kind=DeltaKind.BAR_FORWARD),
        "svi": build_smile(quotes, "svi-a0"),
        "xssvi": build_smile(quotes, "xssvi"),
        "sabr": build_smile(quotes, "sabr"),
    }
    lo = min(dense.pillar_strikes()) * 0.98
    hi = max(dense.pillar_strikes()) * 1.02
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), 801))
    rows = _market_rows(dense, series="market-dense")
    rows += _market_rows(quotes, series="market-pillars")
    summary = _summary_base()
    for label, smile in variants.items():
        rows += _smile_rows(label, smile, grid)
        summary["pillarResiduals"][label] = pillar_residuals(smile, quotes)
    _write_csv(out / f"{name}-smile.csv", rows)
    return summary


def _table8_strikes(dense: SmileQuoteSet) -> dict:
    strikes = {}
    for d in (0.10, 0.01):
        for kind in ("put", "call"):
            pillar = [p for p in dense.pillars
                      if p.kind == kind and p.delta is not None
                      and abs(p.delta - d) < 1e-12][0]
            strikes[(d, kind)] = dense.pillar_strike(pillar)
    return strikes


def _scenario_table8(out: Path) -> dict:
    summary = _summary_base()
    rows = []
    for tenor in ("1m", "1y"):
        dense = load_fixture(f"eurusd-{tenor}-dense")
        quotes = dense.standard_pillars()
        ctx = quotes.context
        strikes = _table8_strikes(dense)
        models = {
            "poly-delta": build_smile(quotes, "poly-delta",
                                      delta_kind=DeltaKind.BAR_FORWARD),
            "svi": build_smile(quotes, "svi-a0"),
            "xssvi": build_smile(quotes, "xssvi"),
            "sabr": build_smile(quotes, "sabr"),
        }
        for label, smile in models.items():
            prices = {}
            for d, tag in ((0.10, "10"), (0.01, "1")):
                kp, kc = strikes[(d, "put")], strikes[(d, "call")]
                prices[f"digital-put-K{tag}P"] = digital_price(
                    smile, ctx, kp, OptionKind.PUT, notional=10_000.0)
                prices[f"auto-quanto-call-K{tag}C"] = auto_quanto_price(
                    smile, ctx, kc, OptionKind.CALL, notional=10_000.0).price
                prices[f"auto-quanto-put-K{tag}P"] = auto_quanto_price(
                    smile, ctx, kp, OptionKind.PUT, notional=10_000.0).price
            prices["variance-swap"] = variance_swap_replication(smile, ctx)[0].fair_vol
            summary["prices"][f"{tenor}/{label}"] = prices
            summary["pillarResiduals"][f"{tenor}/{label}"] = pillar_residuals(
                smile, quotes)
            for product, value in prices.items():
                strike = 0.0
                for (d, kind), k in strikes.items():
                    tag = "10" if d == 0.10 else "1"
                    if product.endswith(f"K{tag}{kind[0].upper()}"):
                        strike = k
                rows.append(("strike", strike, f"{tenor}/{product}/{label}", value))
    _write_csv(out / "table8-prices-table.csv", rows)
    return summary


def _scenario_varswap_mi(out: Path) -> dict:
    summary = _summary_base()
    rows = []
    for tenor in ("1m", "1y"):
        dense = load_fixture(f"eurusd-{tenor}-dense")
        quotes = dense.standard_pillars()
        quote = variance_swap_model_independent(quotes)
        summary["prices"][f"eurusd-{tenor}"] = quote.fair_vol
        for pillar, strike in zip(quotes.pillars, quotes.pillar_strikes()):
            rows.append(("strike", float(strike), f"eurusd-{tenor}-pillars",
                         float(pillar.vol)))
    _write_csv(out / "varswap-model-independent-pillars.csv", rows)
    return summary


_SCENARIO_FUNCS = {
    "fig1-audnzd-svi-g": _scenario_fig1,
    "fig2-audnzd-spline-density": _scenario_fig2,
    "fig3-eurczk-poly-density": _scenario_fig3,
    "fig4-usdaed-fixedpoint": _scenario_fig4,
    "fig5-usdaed-g": _scenario_fig5,
    "fig6-eurtry-density": _scenario_fig6,
    "fig7-manufactured-density": _scenario_fig7,
    "fig8a-eurusd-1m-wings": lambda out: _scenario_wings(out, "1m"),
    "fig8b-eurusd-1y-wings": lambda out: _scenario_wings(out, "1y"),
    "table8-prices": _scenario_table8,
    "varswap-model-independent": _scenario_varswap_mi,
}


def run_scenario(name: str, out_dir: Path) -> dict:
    """Execute one scenario; returns the summary written alongside the CSVs."""
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = _SCENARIO_FUNCS[name](out_dir)
    summary["scenario"] = name
    _write_summary(out_dir / f"{name}-summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _load_quotes(spec: str) -> SmileQuoteSet:
    try:
        quotes = load_fixture(spec)
    except FixtureError:
        # Allow the dense EURUSD fixtures to be addressed by tenor alone.
        quotes = load_fixture(f"{spec}-dense")
    # Dense tables calibrate from the standard pillar subset.
    if len(quotes.pillars) > 5:
        try:
            return quotes.standard_pillars()
        except ValueError:
            return quotes
    return quotes


def _cmd_run_scenario(args) -> int:
    out_dir = Path(args.out)
    names = args.names

    def run(name: str) -> tuple[str, dict]:
        return name, run_scenario(name, out_dir)

    results = []
    if args.parallel and len(names) > 1:
        with concurrent.futures.ThreadPoolExecutor() as pool:
            results = list(pool.map(run, names))
    else:
        results = [run(n) for n in names]
    for name, summary in results:
        print(f"{name}: wrote {out_dir}/{name}-summary.json")
    return 0


def _model_parameters(smile) -> dict:
    if isinstance(smile, SviSmile):
        p = smile.params
        return {"a": p.a, "b": p.b, "rho": p.rho, "m": p.m, "s": p.s}
    if isinstance(smile, SabrSmile):
        p = smile.params
        return {"alpha": p.alpha, "rho": p.rho, "nu": p.nu}
    if isinstance(smile, XssviSmile):
        p = smile.params
        return {"theta": p.theta, "rho": p.rho, "phi": p.phi}
    if hasattr(smile, "coefficients"):
        return {"coefficients": list(smile.coefficients),
                "deltaKind": smile.delta_kind.value,
                "transform": smile.transform.value}
    if hasattr(smile, "nodes"):
        return {"nodes": [float(x) for x in smile.nodes],
                "values": [float(v) for v in smile.values],
                "axis": smile.axis.value,
                "boundary": smile.boundary.value,
                "extrapolation": smile.extrapolation.value}
    return {}


def _cmd_calibrate(args) -> int:
    quotes = _load_quotes(args.fixture)
    smile = build_smile(
        quotes, args.model,
        delta_kind=DeltaKind(args.delta_kind),
        axis=SplineAxis(args.axis),
        boundary=Boundary(args.boundary),
        extrapolation=Extrapolation(args.extrap),
    )
    result = {
        "model": args.model,
        "fixture": quotes.name,
        "parameters": _model_parameters(smile),
        "pillarResiduals": pillar_residuals(smile, quotes),
    }
    if args.model == "spline" and args.axis == "logm-var":
        w_atm = quotes.atm_quote().vol ** 2 * quotes.expiry
        half = 5.0 * math.sqrt(w_atm)
        result["negativeVarianceIntervals"] = _intervals(
            negative_variance_intervals(smile, (-half, half)))
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _cmd_price(args) -> int:
    quotes = _load_quotes(args.fixture)
    smile = build_smile(quotes, args.model,
                        delta_kind=DeltaKind(args.delta_kind),
                        axis=SplineAxis(args.axis),
                        boundary=Boundary(args.boundary),
                        extrapolation=Extrapolation(args.extrap))
    ctx = quotes.context
    result = {"product": args.product, "model": args.model,
              "fixture": quotes.name, "notional": args.notional}
    if args.product == "varswap":
        quote, repl = variance_swap_replication(smile, ctx)
        result["price"] = quote.fair_vol
        result["quadrature"] = {"nodes": repl.nodes,
                                "truncation": list(repl.truncation),
                                "estimatedError": repl.estimated_error}
    else:
        if args.strike is None:
            print(f"fxsmile price: error: --strike is required for product "
                  f"{args.product}", file=sys.stderr)
            return 1
        kind = OptionKind(args.kind)
        result["strike"] = args.strike
        result["kind"] = args.kind
        if args.product == "digital":
            result["price"] = digital_price(smile, ctx, args.strike, kind,
                                            notional=args.notional)
        else:
            repl = auto_quanto_price(smile, ctx, args.strike, kind,
                                     notional=args.notional)
            result["price"] = repl.price
            result["quadrature"] = {"nodes": repl.nodes,
                                    "truncation": list(repl.truncation),
                                    "estimatedError": repl.estimated_error}
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True,
                        choices=["svi", "svi-a0", "sabr", "xssvi",
                                 "poly-delta", "spline"])
    parser.add_argument("--fixture", required=True,
                        help="builtin fixture name or path to a fixture JSON")
    parser.add_argument("--delta-kind", default="bar",
                        choices=[k.value for k in DeltaKind])
    parser.add_argument("--axis", default="logm-var",
                        choices=[a.value for a in SplineAxis])
    parser.add_argument("--boundary", default="natural",
                        choices=[b.value for b in Boundary])
    parser.add_argument("--extrap", default="flat",
                        choices=[e.value for e in Extrapolation])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fxsmile",
                     description="FX smile scenario runner, calibrator and pricer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run-scenario", parents=[], help="run named scenarios")
    p_run.add_argument("names", nargs="+", metavar="name", choices=SCENARIOS)
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--parallel", action="store_true",
                       help="run independent scenarios concurrently")
    p_run.set_defaults(func=_cmd_run_scenario)

    p_cal = sub.add_parser("calibrate", help="calibrate a model to a fixture")
    _add_model_flags(p_cal)
    p_cal.set_defaults(func=_cmd_calibrate)

    p_price = sub.add_parser("price", help="price a product off a calibrated smile")
    p_price.add_argument("--product", required=True,
                         choices=["digital", "autoquanto", "varswap"])
    _add_model_flags(p_price)
    p_price.add_argument("--strike", type=float, default=None)
    p_price.add_argument("--kind", default="put", choices=["call", "put"])
    p_price.add_argument("--notional", type=float, default=1.0)
    p_price.set_defaults(func=_cmd_price)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Exception as exc:  # scenario/computation failure
        print(f"fxsmile: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
