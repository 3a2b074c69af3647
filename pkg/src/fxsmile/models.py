"""Shared model registry: build any smile representation by name.

Used by the CLI and the test suite so that both always calibrate the same
way for a given model label.
"""

from __future__ import annotations

import math

from .market import SmileQuoteSet
from .parametric import (
    SabrSmile,
    SviSmile,
    XssviSmile,
    calibrate_sabr,
    calibrate_svi,
    calibrate_xssvi,
)
from .smiles import (
    Boundary,
    DeltaKind,
    Extrapolation,
    SmileSection,
    SplineAxis,
    Transform,
    fit_delta_polynomial,
    fit_spline_smile,
)

MODEL_NAMES = ("svi", "svi-a0", "sabr", "xssvi", "poly-delta", "spline")


def build_smile(quotes: SmileQuoteSet, model: str,
                delta_kind: DeltaKind = DeltaKind.BAR_FORWARD,
                axis: SplineAxis = SplineAxis.LOG_MONEYNESS_VARIANCE,
                boundary: Boundary = Boundary.NATURAL,
                extrapolation: Extrapolation = Extrapolation.FLAT) -> SmileSection:
    """Calibrate the named model to the quote set.

    The polynomial transform follows the delta coordinate: the reduced
    (ATM-vol) delta uses the plain polynomial, the self-consistent deltas
    use the exponential of a polynomial in ln(vol).
    """
    if model == "svi":
        return SviSmile(calibrate_svi(quotes, constrain_a_nonneg=False),
                        quotes.forward, quotes.expiry)
    if model == "svi-a0":
        return SviSmile(calibrate_svi(quotes, constrain_a_nonneg=True),
                        quotes.forward, quotes.expiry)
    if model == "sabr":
        return SabrSmile(calibrate_sabr(quotes), quotes.forward, quotes.expiry)
    if model == "xssvi":
        return XssviSmile(calibrate_xssvi(quotes), quotes.forward, quotes.expiry)
    if model == "poly-delta":
        transform = (Transform.IDENTITY if delta_kind is DeltaKind.REDUCED_ATM
                     else Transform.EXP_LOG)
        return fit_delta_polynomial(quotes, delta_kind, transform,
                                    degree=len(quotes.pillars) - 1)
    if model == "spline":
        return fit_spline_smile(quotes, axis, boundary, extrapolation)
    raise ValueError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")


def pillar_residuals(smile: SmileSection, quotes: SmileQuoteSet) -> list[float]:
    """Model-minus-market vol at each pillar strike (NaN where evaluation fails)."""
    out = []
    for pillar, strike in zip(quotes.pillars, quotes.pillar_strikes()):
        try:
            out.append(smile.vol(strike) - pillar.vol)
        except Exception:
            out.append(math.nan)
    return out
