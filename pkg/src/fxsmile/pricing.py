"""Static replication pricing on top of any smile section.

Digitals, auto-quanto calls/puts (vanilla-strip replication), variance swap
replication over the wings, and the model-independent variance swap price
built from the pillar quotes alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .blackscholes import (
    ForwardContext,
    OptionKind,
    OptionSpec,
    black_price,
    norm_cdf,
    norm_pdf,
)
from .market import SmileQuoteSet
from .smiles import SmileSection

_GL_NODES, _GL_WEIGHTS = leggauss(20)


class QuadratureError(RuntimeError):
    def __init__(self, msg: str, nodes: int):
        self.nodes = nodes
        super().__init__(f"{msg} ({nodes} nodes)")


@dataclass(frozen=True)
class ReplicationResult:
    price: float
    nodes: int
    truncation: tuple[float, float]
    estimated_error: float
    notional: float


@dataclass(frozen=True)
class VarSwapQuote:
    """Fair volatility in percentage points; PV is the square of the vol price."""

    fair_vol: float

    def __post_init__(self):
        if self.fair_vol <= 0.0:
            raise ValueError(f"fair vol must be positive, got {self.fair_vol}")


def _vanilla(smile: SmileSection, ctx: ForwardContext, strike: float,
             kind: OptionKind) -> float:
    return black_price(OptionSpec(strike, smile.expiry, kind),
                       smile.vol(strike), ctx)


def digital_price(smile: SmileSection, ctx: ForwardContext, strike: float,
                  kind: OptionKind, notional: float = 1.0,
                  skew_adjusted: bool = False) -> float:
    """Cash-or-nothing digital priced off the smile.

    Default is the Black binary at the interpolated smile vol,
    B_d Phi(-+d2(vol(K))); this is what makes two exact-interpolating
    smiles agree at a pillar strike and only differ through extrapolation.
    With ``skew_adjusted`` the price is the total strike derivative of the
    vanilla instead (central finite difference, step F * 1e-5), which adds
    the vega * dvol/dK term.
    """
    if not skew_adjusted:
        vol = smile.vol(strike)
        total = vol * math.sqrt(smile.expiry)
        d2 = math.log(ctx.forward / strike) / total - 0.5 * total
        p = norm_cdf(-d2) if kind is OptionKind.PUT else norm_cdf(d2)
        return notional * ctx.domestic_discount * p

    h = ctx.forward * 1e-5
    if kind is OptionKind.PUT:
        lo = _vanilla(smile, ctx, strike - h, OptionKind.PUT)
        hi = _vanilla(smile, ctx, strike + h, OptionKind.PUT)
        return notional * (hi - lo) / (2.0 * h)
    lo = _vanilla(smile, ctx, strike - h, OptionKind.CALL)
    hi = _vanilla(smile, ctx, strike + h, OptionKind.CALL)
    return notional * -(hi - lo) / (2.0 * h)


def _panel_integral(f, a: float, b: float, n_panels: int) -> float:
    """Composite 20-point Gauss-Legendre over [a, b]."""
    edges = np.linspace(a, b, n_panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        total += half * sum(w * f(mid + half * x)
                            for x, w in zip(_GL_NODES, _GL_WEIGHTS))
    return total


def _adaptive_integral(f, a: float, b: float, rel_tol: float = 1e-9,
                       n0: int = 8, max_panels: int = 512) -> tuple[float, float, int]:
    """Panel-doubling integral; returns (value, error estimate, node count)."""
    n = n0
    prev = _panel_integral(f, a, b, n)
    while n <= max_panels:
        n *= 2
        cur = _panel_integral(f, a, b, n)
        err = abs(cur - prev)
        if err <= rel_tol * max(abs(cur), 1e-300):
            return cur, err, n * 20
        prev = cur
    raise QuadratureError("strip quadrature did not converge", n * 20)


def _wing_bounds(smile: SmileSection, n_std: float = 8.0) -> tuple[float, float]:
    """Truncation strikes n_std wing standard deviations from the forward.

    One fixed-point sweep on the wing variance so fat wings widen their own
    truncation.
    """
    w_atm = max(smile.total_variance(0.0), 1e-12)
    y = n_std * math.sqrt(w_atm)
    w_right = max(smile.total_variance(y), w_atm)
    w_left = max(smile.total_variance(-y), w_atm)
    return (smile.forward * math.exp(-n_std * math.sqrt(w_left)),
            smile.forward * math.exp(n_std * math.sqrt(w_right)))


def auto_quanto_price(smile: SmileSection, ctx: ForwardContext, strike: float,
                      kind: OptionKind, notional: float = 1.0) -> ReplicationResult:
    """Replicate the foreign-paying vanilla by a strip of domestic vanillas.

    Call: 2 Int_K^inf C dK + K C(K);  Put: -2 Int_0^K P dK + K P(K).
    """
    if strike <= 0.0:
        raise ValueError(f"strike must be positive, got {strike}")
    k_min, k_max = _wing_bounds(smile)
    if kind is OptionKind.CALL:
        def f(k: float) -> float:
            return _vanilla(smile, ctx, k, OptionKind.CALL)

        upper = max(k_max, strike * 1.0001)
        integral, err, nodes = _adaptive_integral(f, strike, upper)
        price = 2.0 * integral + strike * f(strike)
        bounds = (strike, upper)
    else:
        def f(k: float) -> float:
            return _vanilla(smile, ctx, k, OptionKind.PUT)

        lower = min(k_min, strike * 0.9999)
        integral, err, nodes = _adaptive_integral(f, lower, strike)
        price = -2.0 * integral + strike * f(strike)
        bounds = (lower, strike)
    return ReplicationResult(price=notional * price, nodes=nodes,
                             truncation=bounds, estimated_error=notional * 2 * err,
                             notional=notional)


def variance_swap_replication(smile: SmileSection, ctx: ForwardContext,
                              n_std: float = 8.0) -> tuple[VarSwapQuote, ReplicationResult]:
    """Variance swap by the 1/K^2-weighted OTM strip (log-contract replication).

    The quote follows the vol-price convention: the present value of the
    variance leg is the square of the returned vol, so the strip is summed
    over discounted option prices.
    """
    T = smile.expiry
    F = ctx.forward
    k_min, k_max = _wing_bounds(smile, n_std)

    def otm(k: float) -> float:
        kind = OptionKind.PUT if k < F else OptionKind.CALL
        return _vanilla(smile, ctx, k, kind) / (k * k)

    put_part, err_p, n_p = _adaptive_integral(otm, k_min, F, n0=16)
    call_part, err_c, n_c = _adaptive_integral(otm, F, k_max, n0=16)
    fair_var = (2.0 / T) * (put_part + call_part)
    fair_vol = math.sqrt(fair_var)
    result = ReplicationResult(
        price=fair_var, nodes=n_p + n_c, truncation=(k_min, k_max),
        estimated_error=(2.0 / T) * (err_p + err_c), notional=1.0,
    )
    return VarSwapQuote(fair_vol=100.0 * fair_vol), result


def variance_swap_model_independent(quotes: SmileQuoteSet) -> VarSwapQuote:
    """Model-independent fair variance from the pillar quotes alone.

    Pillars are mapped to the d2 quantile axis z = -d2(K); the implied vol
    is taken piecewise linear in z with linear tail extrapolation from the
    end slopes, and the fair variance Int vol(z)^2 phi(z) dz is integrated
    in closed form per segment.
    """
    if len(quotes.pillars) < 2:
        raise ValueError("need at least 2 pillars")
    T = quotes.expiry
    F = quotes.forward
    sqrt_t = math.sqrt(T)
    pts = []
    for pillar, strike in zip(quotes.pillars, quotes.pillar_strikes()):
        vol = pillar.vol
        y = math.log(strike / F)
        total = vol * sqrt_t
        z = y / total + 0.5 * total  # -d2
        pts.append((z, vol))
    pts.sort()
    zs = np.array([z for z, _ in pts])
    vols = np.array([v for _, v in pts])
    if np.any(np.diff(zs) <= 0.0):
        raise ValueError("pillar quantiles not strictly increasing")

    def segment(c0: float, c1: float, a: float, b: float) -> float:
        """Int_a^b (c0 + c1 z)^2 phi(z) dz, a/b may be +-inf."""
        def cdf(x):
            return 0.0 if x == -math.inf else (1.0 if x == math.inf else norm_cdf(x))

        def pdf(x):
            return 0.0 if math.isinf(x) else norm_pdf(x)

        def xpdf(x):
            return 0.0 if math.isinf(x) else x * norm_pdf(x)

        return ((c0 * c0 + c1 * c1) * (cdf(b) - cdf(a))
                + 2.0 * c0 * c1 * (pdf(a) - pdf(b))
                + c1 * c1 * (xpdf(a) - xpdf(b)))

    total = 0.0
    # Interior: vol linear in z between pillars.
    for i in range(len(zs) - 1):
        c1 = (vols[i + 1] - vols[i]) / (zs[i + 1] - zs[i])
        c0 = vols[i] - c1 * zs[i]
        total += segment(c0, c1, zs[i], zs[i + 1])
    # Tails: extend the boundary segment slopes, clamped where the line
    # would cross zero volatility.
    c1 = (vols[1] - vols[0]) / (zs[1] - zs[0])
    c0 = vols[0] - c1 * zs[0]
    lo = -c0 / c1 if c1 > 0.0 and -c0 / c1 < zs[0] else -math.inf
    total += segment(c0, c1, lo, zs[0])
    c1 = (vols[-1] - vols[-2]) / (zs[-1] - zs[-2])
    c0 = vols[-1] - c1 * zs[-1]
    hi = -c0 / c1 if c1 < 0.0 and -c0 / c1 > zs[-1] else math.inf
    total += segment(c0, c1, zs[-1], hi)

    return VarSwapQuote(fair_vol=100.0 * math.sqrt(total))
