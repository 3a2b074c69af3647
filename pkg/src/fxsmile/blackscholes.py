"""Black-76 pricing, vega, implied volatility and normal-distribution helpers.

Everything here is undiscounted Black on the forward, with an optional
domestic discount factor carried by :class:`ForwardContext`.  The implied
volatility solver works in total volatility ``sigma * sqrt(T)`` so that the
very low-vol regimes (USD/AED, vols near 0.3%) and very short maturities
stay well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy.special import ndtr, ndtri

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class OptionKind(Enum):
    CALL = "call"
    PUT = "put"


@dataclass(frozen=True)
class OptionSpec:
    strike: float
    expiry: float
    kind: OptionKind

    def __post_init__(self):
        if self.strike <= 0.0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if self.expiry <= 0.0:
            raise ValueError(f"expiry must be positive, got {self.expiry}")


@dataclass(frozen=True)
class ForwardContext:
    forward: float
    domestic_discount: float = 1.0

    def __post_init__(self):
        if self.forward <= 0.0:
            raise ValueError(f"forward must be positive, got {self.forward}")
        if not 0.0 < self.domestic_discount <= 1.0:
            raise ValueError(
                f"domestic discount must be in (0, 1], got {self.domestic_discount}"
            )


class PriceOutOfBoundsError(ValueError):
    """Option price violates a no-arbitrage bound; carries the bound."""

    def __init__(self, price: float, bound: float, which: str):
        self.price = price
        self.bound = bound
        self.which = which
        super().__init__(f"price {price} violates {which} bound {bound}")


def norm_cdf(x: float) -> float:
    """Standard normal CDF (erfc-based, ~1e-16 absolute accuracy)."""
    return float(ndtr(x))


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def norm_inv_cdf(p: float) -> float:
    """Inverse standard normal CDF for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return float(ndtri(p))


def _black_undiscounted(forward: float, strike: float, total_vol: float,
                        is_call: bool) -> float:
    """Undiscounted Black price given total volatility sigma*sqrt(T)."""
    sign = 1.0 if is_call else -1.0
    if total_vol <= 0.0:
        return max(sign * (forward - strike), 0.0)
    d1 = math.log(forward / strike) / total_vol + 0.5 * total_vol
    d2 = d1 - total_vol
    return sign * (forward * norm_cdf(sign * d1) - strike * norm_cdf(sign * d2))


def black_price(opt: OptionSpec, vol: float, ctx: ForwardContext) -> float:
    if vol < 0.0:
        raise ValueError(f"vol must be non-negative, got {vol}")
    total_vol = vol * math.sqrt(opt.expiry)
    undisc = _black_undiscounted(ctx.forward, opt.strike, total_vol,
                                 opt.kind is OptionKind.CALL)
    return ctx.domestic_discount * undisc


def black_vega(opt: OptionSpec, vol: float, ctx: ForwardContext) -> float:
    """dPrice/dVol.  Zero at vol = 0."""
    if vol <= 0.0:
        return 0.0
    sqrt_t = math.sqrt(opt.expiry)
    total_vol = vol * sqrt_t
    d1 = math.log(ctx.forward / opt.strike) / total_vol + 0.5 * total_vol
    return ctx.domestic_discount * ctx.forward * norm_pdf(d1) * sqrt_t


def implied_vol(price: float, opt: OptionSpec, ctx: ForwardContext) -> float:
    """Invert Black for the volatility.

    Bracket in total volatility, then polish with Newton.  Raises
    :class:`PriceOutOfBoundsError` outside the no-arbitrage bounds.
    """
    is_call = opt.kind is OptionKind.CALL
    disc = ctx.domestic_discount
    forward, strike = ctx.forward, opt.strike

    intrinsic = disc * max((forward - strike) if is_call else (strike - forward), 0.0)
    upper = disc * (forward if is_call else strike)
    scale = disc * forward
    tol = 1e-14 * scale

    if price < intrinsic - tol:
        raise PriceOutOfBoundsError(price, intrinsic, "lower")
    if price > upper + tol:
        raise PriceOutOfBoundsError(price, upper, "upper")
    if price <= intrinsic + tol * 1e-2 and price <= intrinsic:
        return 0.0

    target = price / disc

    def f(total_vol: float) -> float:
        return _black_undiscounted(forward, strike, total_vol, is_call) - target

    # Expand the bracket until it straddles the root.
    lo, hi = 1e-12, 1.0
    while f(hi) < 0.0 and hi < 1e3:
        hi *= 2.0
    from scipy.optimize import brentq

    total = brentq(f, lo, hi, xtol=1e-16, rtol=8.9e-16, maxiter=200)

    # A couple of Newton polishing steps in total-vol space.
    sqrt_t = math.sqrt(opt.expiry)
    for _ in range(3):
        d1 = math.log(forward / strike) / total + 0.5 * total if total > 0 else 0.0
        vega = forward * norm_pdf(d1)
        if not math.isfinite(vega) or vega < 1e-300:
            break
        step = f(total) / vega
        if not math.isfinite(step):
            break
        total = max(total - step, 0.0)
    return total / sqrt_t
