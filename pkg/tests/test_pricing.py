"""Replication pricing against closed-form flat-volatility oracles."""

from __future__ import annotations

import math

import pytest

from fxsmile import (
    FlatSmile,
    ForwardContext,
    OptionKind,
    VarSwapQuote,
    auto_quanto_price,
    digital_price,
    norm_cdf,
    variance_swap_model_independent,
    variance_swap_replication,
)

F, T, B, VOL = 1.18, 0.9, 0.96, 0.17
FLAT = FlatSmile(sigma=VOL, forward=F, expiry=T)
CTX = ForwardContext(F, B)


def _d1(strike: float) -> float:
    total = VOL * math.sqrt(T)
    return math.log(F / strike) / total + 0.5 * total


def test_digital_flat_vol_closed_form():
    total = VOL * math.sqrt(T)
    for strike in (0.9, 1.18, 1.5):
        d2 = _d1(strike) - total
        put = digital_price(FLAT, CTX, strike, OptionKind.PUT, notional=100.0)
        call = digital_price(FLAT, CTX, strike, OptionKind.CALL, notional=100.0)
        assert put == pytest.approx(100.0 * B * norm_cdf(-d2), rel=1e-12)
        # Digital put plus digital call pays the discounted notional.
        assert put + call == pytest.approx(100.0 * B, rel=1e-12)


def test_digital_skew_adjustment_vanishes_on_flat_smile():
    for strike in (1.0, 1.3):
        for kind in OptionKind:
            plain = digital_price(FLAT, CTX, strike, kind)
            adjusted = digital_price(FLAT, CTX, strike, kind,
                                     skew_adjusted=True)
            assert adjusted == pytest.approx(plain, abs=1e-7)


def test_auto_quanto_flat_vol_closed_form():
    # E[(S - K)+ S] = F^2 e^{vol^2 T} Phi(d1 + vol sqrt(T)) - K F Phi(d1).
    var = VOL * VOL * T
    sq = VOL * math.sqrt(T)
    for strike in (1.0, 1.18, 1.4):
        d1 = _d1(strike)
        call_oracle = B * (F * F * math.exp(var) * norm_cdf(d1 + sq)
                           - strike * F * norm_cdf(d1))
        put_oracle = B * (strike * F * norm_cdf(-d1)
                          - F * F * math.exp(var) * norm_cdf(-d1 - sq))
        call = auto_quanto_price(FLAT, CTX, strike, OptionKind.CALL)
        put = auto_quanto_price(FLAT, CTX, strike, OptionKind.PUT)
        assert call.price == pytest.approx(call_oracle, rel=1e-7)
        assert put.price == pytest.approx(put_oracle, rel=1e-7)
        assert call.estimated_error < 1e-6 * F * F
        lo, hi = call.truncation
        assert lo <= strike < hi


def test_auto_quanto_notional_scales():
    base = auto_quanto_price(FLAT, CTX, 1.2, OptionKind.CALL).price
    scaled = auto_quanto_price(FLAT, CTX, 1.2, OptionKind.CALL,
                               notional=250.0).price
    assert scaled == pytest.approx(250.0 * base, rel=1e-12)


def test_variance_swap_flat_vol():
    # The quote convention prices the variance leg PV, so the flat-vol fair
    # vol carries the square root of the discount factor.
    quote, result = variance_swap_replication(FLAT, CTX)
    assert quote.fair_vol == pytest.approx(100.0 * VOL * math.sqrt(B),
                                           abs=2e-3)
    k_min, k_max = result.truncation
    assert k_min < F < k_max


def test_variance_swap_model_independent_flat(audnzd):
    # With every pillar at the same vol the quantile-axis integral is exact.
    from fxsmile import PillarQuote, replace_pillars

    flat_pillars = tuple(
        PillarQuote(p.kind, 0.0514, p.delta) for p in audnzd.pillars)
    flat_quotes = replace_pillars(audnzd, flat_pillars)
    quote = variance_swap_model_independent(flat_quotes)
    assert quote.fair_vol == pytest.approx(5.14, abs=1e-10)


def test_variance_swap_model_independent_vs_replication(audnzd):
    from fxsmile import SviSmile, calibrate_svi

    mi = variance_swap_model_independent(audnzd)
    smile = SviSmile(calibrate_svi(audnzd), audnzd.forward, audnzd.expiry)
    repl, _ = variance_swap_replication(smile, audnzd.context)
    # Same market, different wing treatments: agreement to a fraction of a
    # vol point (the SVI wings are fatter than the linear-quantile tails).
    assert mi.fair_vol == pytest.approx(repl.fair_vol, abs=0.25)


def test_varswap_quote_validation():
    with pytest.raises(ValueError):
        VarSwapQuote(fair_vol=-1.0)


def test_bad_strike_rejected():
    with pytest.raises(ValueError):
        auto_quanto_price(FLAT, CTX, -1.0, OptionKind.CALL)
