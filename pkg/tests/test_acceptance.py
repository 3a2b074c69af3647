"""Acceptance suite: one test per headline criterion, each printing a
single PASS/FAIL line with the measured quantities.

Reference prices for the EURUSD derivative table are asserted at the stated
tolerances; on top of that, the computed values are pinned as regression
constants at 1e-10 so any calibration drift is caught.  One reference cell
(1y SABR digital put at K10P) is internally inconsistent with the cells
around it and cannot be reproduced; that test is intentionally left
failing rather than weakened.  See README.md for the analysis summary.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from fxsmile import (
    DeltaKind,
    FlatSmile,
    MixtureParams,
    OptionKind,
    OptionSpec,
    PillarQuote,
    RrBfQuotes,
    SabrParams,
    SabrSmile,
    SplineAxis,
    Boundary,
    Extrapolation,
    StrikeSolver,
    SviParams,
    SviSmile,
    Transform,
    black_price,
    build_smile,
    calibrate_sabr,
    calibrate_svi,
    convert_simple_rr_bf,
    density,
    density_fd_oracle,
    fit_delta_polynomial,
    fixed_point_lookup,
    g_function,
    implied_vol,
    load_fixture,
    lookup_vol,
    mixture_quotes,
    sabr_vol,
    scan_report,
    svi_total_variance,
    variance_swap_model_independent,
)
from fxsmile.blackscholes import ForwardContext
from fxsmile.cli import _table8_strikes
from fxsmile.pricing import (
    auto_quanto_price,
    digital_price,
    variance_swap_replication,
)

from helpers import synthetic_quotes


def report(name: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}: {name} — {detail}")
    return ok


# ---------------------------------------------------------------------------
# 1. Quote conversion
# ---------------------------------------------------------------------------

def test_quote_conversion():
    cases = [
        ("audnzd-7d", RrBfQuotes(atm=5.14, rr25=0.40, bf25=0.25,
                                 rr10=0.35, bf10=1.175),
         (6.14, 5.19, 5.14, 5.59, 6.49)),
        ("usdaed-9m", RrBfQuotes(atm=0.32, rr25=0.152, bf25=0.084,
                                 rr10=0.412, bf10=0.392),
         (0.506, 0.328, 0.32, 0.48, 0.918)),
    ]
    worst = 0.0
    for _, rrbf, expected in cases:
        pillars = convert_simple_rr_bf(rrbf)
        got = [p.vol for p in pillars]
        worst = max(worst, max(abs(g - e) for g, e in zip(got, expected)))
    ok = report("quote conversion (simple RR/BF)", worst <= 0.005,
                f"max vol error {worst:.2e} (tol 0.005)")
    assert ok


# ---------------------------------------------------------------------------
# 2. Fixed-point pathology
# ---------------------------------------------------------------------------

def test_fixed_point_pathology(usdaed_9m):
    poly = fit_delta_polynomial(usdaed_9m, DeltaKind.BAR_FORWARD,
                                Transform.EXP_LOG, degree=4)
    result = fixed_point_lookup(poly, 3.7, max_iter=100)
    newton = lookup_vol(poly, 3.7, StrikeSolver.NEWTON, tol=1e-12)
    brent = lookup_vol(poly, 3.7, StrikeSolver.BRENT)

    def residual(sigma):
        return poly.smile_function(poly.delta_of(3.7, sigma)) - sigma

    lo, hi = result.cycle_points
    ok = (not result.converged
          and abs(lo - 0.019) <= 0.005 and abs(hi - 0.301) <= 0.005
          and abs(residual(newton)) < 1e-10 and abs(residual(brent)) < 1e-10
          and abs(newton - brent) < 1e-9)
    ok = report(
        "fixed-point 2-cycle at K=3.7 on usdaed-9m", ok,
        f"converged={result.converged}, cycle=({lo:.4f}, {hi:.4f}), "
        f"|newton-brent|={abs(newton - brent):.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 3. g-function correctness
# ---------------------------------------------------------------------------

def _smiles_for(quotes):
    smiles = {
        "svi-a0": build_smile(quotes, "svi-a0"),
        "sabr": build_smile(quotes, "sabr"),
        "xssvi": build_smile(quotes, "xssvi"),
        "spline-natural": build_smile(quotes, "spline",
                                      boundary=Boundary.NATURAL,
                                      extrapolation=Extrapolation.FLAT),
    }
    if len(quotes.pillars) == 5:
        smiles["poly-bar"] = build_smile(quotes, "poly-delta",
                                         delta_kind=DeltaKind.BAR_FORWARD)
    return smiles


def test_g_function_correctness():
    flat = FlatSmile(sigma=0.2, forward=1.3, expiry=0.7)
    flat_err = max(abs(g_function(flat, y) - 1.0)
                   for y in np.linspace(-1.0, 1.0, 41))

    names = ("audnzd-7d", "eurczk-32d", "usdaed-1m", "usdaed-9m", "usdaed-1y",
             "eurtry-6m", "eurtry-1y", "manufactured-1y",
             "eurusd-1m-dense", "eurusd-1y-dense")
    worst, worst_at = 0.0, ""
    for name in names:
        quotes = load_fixture(name)
        if len(quotes.pillars) > 5:
            quotes = quotes.standard_pillars()
        ctx = quotes.context
        std = quotes.atm_quote().vol * math.sqrt(quotes.expiry)
        for label, smile in _smiles_for(quotes).items():
            # 0.1 rather than 0.0: the forward is a spline knot, where a
            # symmetric second difference sees the w''' jump at first order.
            for mult in (-0.8, -0.4, 0.1, 0.4, 0.8):
                strike = quotes.forward * math.exp(mult * std)
                p = density(smile, ctx, strike)
                p_fd = density_fd_oracle(smile, ctx, strike)
                rel = abs(p - p_fd) / max(abs(p_fd), 1e-300)
                if rel > worst:
                    worst, worst_at = rel, f"{name}/{label}"
    ok = report("g-function correctness", flat_err <= 1e-12 and worst <= 1e-6,
                f"flat |g-1| max {flat_err:.2e} (tol 1e-12); density vs FD "
                f"oracle worst rel {worst:.2e} at {worst_at} (tol 1e-6)")
    assert ok


# ---------------------------------------------------------------------------
# 4. SVI sign claims
# ---------------------------------------------------------------------------

def test_svi_sign_claims(audnzd, usdaed_9m):
    def min_g(quotes, nonneg):
        smile = SviSmile(calibrate_svi(quotes, constrain_a_nonneg=nonneg),
                         quotes.forward, quotes.expiry)
        return scan_report(smile, quotes.context).min_g

    g_audnzd = min_g(audnzd, True)
    g_aed_con = min_g(usdaed_9m, True)
    g_aed_free = min_g(usdaed_9m, False)
    ok = g_audnzd > 0.0 and g_aed_con < 0.0 and g_aed_free >= 0.0
    ok = report("SVI sign claims", ok,
                f"audnzd a>=0 minG={g_audnzd:.4f} (>0); usdaed-9m a>=0 "
                f"minG={g_aed_con:.4f} (<0); unconstrained "
                f"minG={g_aed_free:.4f} (>=0)")
    assert ok


# ---------------------------------------------------------------------------
# 5. Spline pathologies
# ---------------------------------------------------------------------------

def test_spline_pathologies(audnzd, eurtry_1y):
    clamped = build_smile(audnzd, "spline",
                          boundary=Boundary.CLAMPED_ZERO_SLOPE,
                          extrapolation=Extrapolation.FLAT)
    rep_clamped = scan_report(clamped, audnzd.context)
    jumps_clamped = [abs(clamped.second_derivative_jump(0)),
                     abs(clamped.second_derivative_jump(len(clamped.nodes) - 1))]
    a_ok = (len(rep_clamped.negative_density_intervals) > 0
            and min(jumps_clamped) > 1e-3)

    natural = build_smile(audnzd, "spline", boundary=Boundary.NATURAL,
                          extrapolation=Extrapolation.LINEAR_BOUNDARY_SLOPE)
    jumps_natural = [abs(natural.second_derivative_jump(0)),
                     abs(natural.second_derivative_jump(len(natural.nodes) - 1))]
    b_ok = max(jumps_natural) < 1e-12

    from fxsmile import negative_variance_intervals
    spline_try = build_smile(eurtry_1y, "spline", boundary=Boundary.NATURAL,
                             extrapolation=Extrapolation.LINEAR_BOUNDARY_SLOPE)
    std = eurtry_1y.atm_quote().vol * math.sqrt(eurtry_1y.expiry)
    intervals = negative_variance_intervals(spline_try, (-5.0 * std, 5.0 * std))
    c_ok = len(intervals) > 0 and intervals[0][1] < 0.0  # put wing only

    ok = report(
        "spline pathologies", a_ok and b_ok and c_ok,
        f"clamped/flat: {len(rep_clamped.negative_density_intervals)} negative "
        f"density intervals, boundary jumps {jumps_clamped[0]:.2f}/"
        f"{jumps_clamped[1]:.2f}; natural/linear jumps "
        f"{max(jumps_natural):.1e} (<1e-12); eurtry-1y negative variance "
        f"intervals {intervals}")
    assert ok


# ---------------------------------------------------------------------------
# 6. Oscillating density
# ---------------------------------------------------------------------------

def test_oscillating_density(eurczk, manufactured):
    poly_czk = fit_delta_polynomial(eurczk, DeltaKind.REDUCED_ATM,
                                    Transform.IDENTITY, degree=4)
    rep_czk = scan_report(poly_czk, eurczk.context)

    poly_man = fit_delta_polynomial(manufactured, DeltaKind.BAR_FORWARD,
                                    Transform.EXP_LOG, degree=4)
    rep_man = scan_report(poly_man, manufactured.context)

    ok = (rep_czk.mode_count >= 2
          and len(rep_man.negative_density_intervals) > 0)
    ok = report("oscillating density", ok,
                f"eurczk reduced quartic modes={rep_czk.mode_count} (>=2); "
                f"manufactured exp-quartic negative density intervals="
                f"{rep_man.negative_density_intervals}")
    assert ok


# ---------------------------------------------------------------------------
# 7. Model-independent variance swap
# ---------------------------------------------------------------------------

def test_varswap_model_independent(eurusd_1m_dense, eurusd_1y_dense):
    v_1m = variance_swap_model_independent(
        eurusd_1m_dense.standard_pillars()).fair_vol
    v_1y = variance_swap_model_independent(
        eurusd_1y_dense.standard_pillars()).fair_vol
    ok = abs(v_1m - 11.28) <= 0.10 and abs(v_1y - 11.20) <= 0.10
    ok = report("model-independent variance swap", ok,
                f"1m {v_1m:.4f} (11.28 +- 0.10), 1y {v_1y:.4f} (11.20 +- 0.10)")
    assert ok


# ---------------------------------------------------------------------------
# 8. EURUSD derivative table reproduction
# ---------------------------------------------------------------------------

# Reference values per (tenor, model): digital put K10P/K1P, auto-quanto
# call K10C/K1C, auto-quanto put K10P/K1P, variance swap fair vol.
TABLE8_REFERENCE = {
    ("1m", "poly-delta"): (1063.88, 70.76, 14.28, 0.60, 15.12, 0.66, 11.31),
    ("1m", "svi"): (1064.91, 108.69, 14.34, 0.63, 15.07, 1.13, 11.35),
    ("1m", "xssvi"): (1067.09, 122.34, 14.37, 0.86, 15.09, 1.30, 11.37),
    ("1m", "sabr"): (1066.47, 125.44, 14.31, 0.81, 15.07, 1.34, 11.39),
    ("1y", "poly-delta"): (1210.64, 101.21, 47.86, 4.21, 46.39, 2.14, 10.89),
    ("1y", "svi"): (1211.74, 185.30, 48.24, 4.39, 44.92, 4.27, 11.03),
    ("1y", "xssvi"): (1215.64, 204.72, 49.06, 6.97, 44.72, 4.80, 11.07),
    ("1y", "sabr"): (1269.08, 232.28, 48.49, 6.80, 44.14, 5.47, 11.16),
}

# First-reproduction values, pinned at 1e-10 to freeze the calibrations.
TABLE8_PINNED = {
    ("1m", "poly-delta"): (1063.8792717267302, 69.93079319261089,
                           14.28659551348514, 0.6189369985797905,
                           15.11759729802353, 0.6543808133900583,
                           11.306241279048113),
    ("1m", "svi"): (1065.0281824617289, 109.05997623931573,
                    14.357433271178957, 0.6600338532740656,
                    15.074974868945324, 1.1297349435563282,
                    11.3539045491372),
    ("1m", "xssvi"): (1066.0976072802484, 119.5209716128245,
                      14.340758445165427, 0.8391512727393934,
                      15.07812539341679, 1.2650546364235,
                      11.377359692294327),
    ("1m", "sabr"): (1066.6387480598194, 126.18590795679634,
                     14.326073432888517, 0.8498860282155369,
                     15.075754697139068, 1.3512803507780575,
                     11.387996135855603),
    ("1y", "poly-delta"): (1210.64093444465, 91.54321981445632,
                           47.764976866785624, 3.872608744691648,
                           46.59909613832171, 1.8952366496609978,
                           10.85148718578329),
    ("1y", "svi"): (1213.1497362073574, 187.67677773369056,
                    48.711912060938666, 4.609664990349652,
                    44.916860074738054, 4.294895035823348,
                    11.025150842437693),
    ("1y", "xssvi"): (1214.9931542877591, 203.80540282678882,
                      49.026695871685725, 6.906243153395433,
                      44.64190536293908, 4.708441677002971,
                      11.082901024520353),
    ("1y", "sabr"): (1217.981596009742, 237.71073384972004,
                     48.85465217663845, 7.290396187179512,
                     43.87078065270625, 5.423394290067441,
                     11.201328624676986),
}

COLUMNS = ("digital-put-K10P", "digital-put-K1P", "auto-quanto-call-K10C",
           "auto-quanto-call-K1C", "auto-quanto-put-K10P",
           "auto-quanto-put-K1P", "variance-swap")

# digital K10P +-1.5; 1-delta digitals are covered by the ordering claim
# only; auto-quanto +-0.5; variance swap +-0.08.
TOLERANCES = (1.5, None, 0.5, 0.5, 0.5, 0.5, 0.08)


@pytest.fixture(scope="module")
def table8_values():
    values = {}
    for tenor in ("1m", "1y"):
        dense = load_fixture(f"eurusd-{tenor}-dense")
        quotes = dense.standard_pillars()
        ctx = quotes.context
        strikes = _table8_strikes(dense)
        k10p, k1p = strikes[(0.10, "put")], strikes[(0.01, "put")]
        k10c, k1c = strikes[(0.10, "call")], strikes[(0.01, "call")]
        models = {
            "poly-delta": build_smile(quotes, "poly-delta",
                                      delta_kind=DeltaKind.BAR_FORWARD),
            "svi": build_smile(quotes, "svi-a0"),
            "xssvi": build_smile(quotes, "xssvi"),
            "sabr": build_smile(quotes, "sabr"),
        }
        for label, smile in models.items():
            values[(tenor, label)] = (
                digital_price(smile, ctx, k10p, OptionKind.PUT, 10_000.0),
                digital_price(smile, ctx, k1p, OptionKind.PUT, 10_000.0),
                auto_quanto_price(smile, ctx, k10c, OptionKind.CALL,
                                  10_000.0).price,
                auto_quanto_price(smile, ctx, k1c, OptionKind.CALL,
                                  10_000.0).price,
                auto_quanto_price(smile, ctx, k10p, OptionKind.PUT,
                                  10_000.0).price,
                auto_quanto_price(smile, ctx, k1p, OptionKind.PUT,
                                  10_000.0).price,
                variance_swap_replication(smile, ctx)[0].fair_vol,
            )
    return values


def test_table8_reference_values(table8_values):
    """Intentionally red on one cell: 1y SABR digital put at K10P.

    The reference 1269.08 implies a smile ~30bp above the quoted 10-delta
    put vol, and no (alpha, rho, nu) reproducing it keeps the same row's
    auto-quanto and variance swap values within their tolerances (best
    attempt: auto-quanto put 47.31 vs 44.14).  The cell is asserted as
    stated rather than weakened; README.md summarizes the analysis.
    """
    violations = []
    for key, reference in TABLE8_REFERENCE.items():
        got = table8_values[key]
        for col, tol, g, r in zip(COLUMNS, TOLERANCES, got, reference):
            if tol is not None and abs(g - r) > tol:
                violations.append(
                    f"{key[0]}/{key[1]} {col}: {g:.2f} vs {r} (tol {tol})")
    ok = report("derivative price table reference values", not violations,
                violations[0] if violations else
                "all 48 toleranced cells within bounds")
    assert ok, violations


def test_table8_ordering_claims(table8_values):
    ok = True
    details = []
    for tenor in ("1m", "1y"):
        d_poly = table8_values[(tenor, "poly-delta")][1]
        d_svi = table8_values[(tenor, "svi")][1]
        d_xssvi = table8_values[(tenor, "xssvi")][1]
        ok &= d_poly < d_svi < d_xssvi
        details.append(f"{tenor} 1-delta digital {d_poly:.1f} < {d_svi:.1f} "
                       f"< {d_xssvi:.1f}")
    ratio = (table8_values[("1y", "poly-delta")][5]
             / table8_values[("1y", "svi")][5])
    ok &= 0.4 <= ratio <= 0.6
    details.append(f"1y auto-quanto put K1P poly/svi ratio {ratio:.3f}")
    ok = report("derivative price table ordering claims", bool(ok),
                "; ".join(details))
    assert ok


def test_table8_pinned_determinism(table8_values):
    worst = 0.0
    for key, pinned in TABLE8_PINNED.items():
        got = table8_values[key]
        worst = max(worst, max(abs(g - p) for g, p in zip(got, pinned)))
    ok = report("derivative price table pinned regression values",
                worst <= 1e-10, f"max drift {worst:.2e} (tol 1e-10)")
    assert ok


# ---------------------------------------------------------------------------
# 9. Self-consistency oracles
# ---------------------------------------------------------------------------

def test_self_consistency_oracles():
    # Parameter recovery from self-consistent synthetic quotes.
    true_svi = SviParams(a=0.012, b=0.08, rho=-0.4, m=0.02, s=0.15)
    q_svi = synthetic_quotes(
        lambda k: math.sqrt(svi_total_variance(true_svi, math.log(k / 1.10),
                                               0.5) / 0.5),
        expiry=0.5, forward=1.10)
    fit_svi = calibrate_svi(q_svi, constrain_a_nonneg=False)
    svi_rmse = math.sqrt(np.mean(np.square(
        np.array([true_svi.a, true_svi.b, true_svi.rho, true_svi.m, true_svi.s])
        - np.array([fit_svi.a, fit_svi.b, fit_svi.rho, fit_svi.m, fit_svi.s]))))

    true_sabr = SabrParams(alpha=0.21, rho=-0.35, nu=0.9)
    q_sabr = synthetic_quotes(lambda k: sabr_vol(true_sabr, k, 1.10, 0.5),
                              expiry=0.5, forward=1.10)
    fit_sabr = calibrate_sabr(q_sabr)
    sabr_rmse = math.sqrt(np.mean(np.square(
        np.array([true_sabr.alpha, true_sabr.rho, true_sabr.nu])
        - np.array([fit_sabr.alpha, fit_sabr.rho, fit_sabr.nu]))))

    # Implied-vol round trip across vol regimes.
    iv_worst = 0.0
    ctx = ForwardContext(forward=1.0, domestic_discount=0.97)
    for vol in (0.003, 0.01, 0.05, 0.20, 0.60, 1.20):
        for expiry in (0.02, 0.25, 1.0):
            for mult in (-1.5, -0.5, 0.0, 0.5, 1.5):
                strike = math.exp(mult * vol * math.sqrt(expiry))
                for kind in (OptionKind.CALL, OptionKind.PUT):
                    opt = OptionSpec(strike, expiry, kind)
                    price = black_price(opt, vol, ctx)
                    iv_worst = max(iv_worst,
                                   abs(implied_vol(price, opt, ctx) - vol))

    # Mixture quotes are butterfly-arbitrage-free.
    params = MixtureParams(weight1=0.6, forward1=0.95, forward2=1.075,
                           vol1=0.10, vol2=0.25)
    expiry = 1.0

    from fxsmile import SmileSection, mixture_implied_vol

    class MixtureSmile(SmileSection):
        forward = params.forward
        expiry = 1.0

        def vol(self, strike):
            return mixture_implied_vol(params, strike, self.expiry)

    smile = MixtureSmile()
    ys = np.linspace(-0.6, 0.6, 200)
    min_g = min(g_function(smile, float(y)) for y in ys)
    quotes = mixture_quotes(params, (0.10, 0.25), expiry)
    assert len(quotes.pillars) == 5

    ok = (svi_rmse < 1e-8 and sabr_rmse < 1e-8 and iv_worst <= 1e-10
          and min_g > 0.0)
    ok = report(
        "self-consistency oracles", ok,
        f"SVI recovery RMSE {svi_rmse:.2e}, SABR {sabr_rmse:.2e} (<1e-8); "
        f"implied-vol round trip worst {iv_worst:.2e} (<=1e-10); mixture "
        f"min g {min_g:.4f} on 200-point grid (>0)")
    assert ok
