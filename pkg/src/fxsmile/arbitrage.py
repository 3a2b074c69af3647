"""Arbitrage diagnostics: the Dupire local-variance denominator and the
implied probability density, plus grid-scan reports.

A negative denominator g is equivalent to a negative implied density, but
its scale makes the location of the problem easier to see, so both curves
are exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blackscholes import ForwardContext, norm_pdf
from .smiles import NegativeVarianceError, SmileSection


def g_function(smile: SmileSection, y: float) -> float:
    """Dupire denominator g(y) = 1 - (y/w) w' + 1/4 (-1/4 - 1/w + y^2/w^2) w'^2 + w''/2."""
    w = smile.total_variance(y)
    if w <= 0.0:
        raise NegativeVarianceError(y, w)
    w1 = smile.d_total_variance(y)
    w2 = smile.d2_total_variance(y)
    return (1.0 - (y / w) * w1
            + 0.25 * (-0.25 - 1.0 / w + y * y / (w * w)) * w1 * w1
            + 0.5 * w2)


def density(smile: SmileSection, ctx: ForwardContext, strike: float) -> float:
    """Implied density p(K) = g(y) phi(d2) / (K sqrt(w))."""
    if strike <= 0.0:
        raise ValueError(f"strike must be positive, got {strike}")
    y = math.log(strike / ctx.forward)
    w = smile.total_variance(y)
    if w <= 0.0:
        raise NegativeVarianceError(y, w)
    sqrt_w = math.sqrt(w)
    d2 = -y / sqrt_w - 0.5 * sqrt_w
    return g_function(smile, y) * norm_pdf(d2) / (strike * sqrt_w)


def density_fd_oracle(smile: SmileSection, ctx: ForwardContext, strike: float,
                      rel_step: float = 1.5e-3) -> float:
    """Finite-difference density oracle: d2C/dK2 / B_d.

    Test/validation path only; the production density goes through
    :func:`density`.  The strike step is ``rel_step`` ATM standard
    deviations, wide enough that float64 noise in the vol lookup is not
    amplified by 1/h^2; the stencil is 4th order and the option prices are
    evaluated in 40-digit arithmetic, so the wider step costs no accuracy.
    """
    import mpmath

    atm_std = math.sqrt(smile.total_variance(0.0))

    with mpmath.workdps(40):
        forward = mpmath.mpf(ctx.forward)
        expiry = mpmath.mpf(smile.expiry)
        discount = mpmath.mpf(ctx.domestic_discount)

        def call(k: mpmath.mpf) -> mpmath.mpf:
            # The vol lookup stays in float64; everything downstream of the
            # (smooth) smile evaluation is high precision.
            total = mpmath.mpf(smile.vol(float(k))) * mpmath.sqrt(expiry)
            d1 = mpmath.log(forward / k) / total + total / 2
            d2 = d1 - total
            return discount * (forward * mpmath.ncdf(d1) - k * mpmath.ncdf(d2))

        k0 = mpmath.mpf(strike)
        h = forward * mpmath.mpf(rel_step * atm_std)
        stencil = (-call(k0 - 2 * h) + 16 * call(k0 - h) - 30 * call(k0)
                   + 16 * call(k0 + h) - call(k0 + 2 * h))
        return float(stencil / (12 * h * h) / discount)


@dataclass(frozen=True)
class GCurve:
    ys: np.ndarray
    gs: np.ndarray  # NaN where the variance is non-positive
    min_value: float
    negative_intervals: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class DensityCurve:
    strikes: np.ndarray
    densities: np.ndarray  # NaN where the variance is non-positive
    integrates_to: float
    modes: tuple[float, ...]  # strikes of the local maxima


@dataclass(frozen=True)
class ScanReport:
    g_curve: GCurve
    density_curve: DensityCurve
    mode_count: int
    negative_g_intervals: tuple[tuple[float, float], ...]
    negative_density_intervals: tuple[tuple[float, float], ...]
    negative_variance_intervals: tuple[tuple[float, float], ...]

    @property
    def min_g(self) -> float:
        return self.g_curve.min_value


def _negative_intervals(xs: np.ndarray, vals: np.ndarray) -> tuple[tuple[float, float], ...]:
    """Maximal intervals (linear-interpolation endpoints) where vals < 0."""
    intervals = []
    n = len(xs)
    i = 0
    finite_neg = np.isfinite(vals) & (vals < 0.0)
    while i < n:
        if not finite_neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and finite_neg[j + 1]:
            j += 1
        if i == 0 or not np.isfinite(vals[i - 1]):
            lo = xs[i]
        else:
            lo = xs[i - 1] + (xs[i] - xs[i - 1]) * vals[i - 1] / (vals[i - 1] - vals[i])
        if j == n - 1 or not np.isfinite(vals[j + 1]):
            hi = xs[j]
        else:
            hi = xs[j] + (xs[j + 1] - xs[j]) * vals[j] / (vals[j] - vals[j + 1])
        intervals.append((float(lo), float(hi)))
        i = j + 1
    return tuple(intervals)


def _modes(strikes: np.ndarray, densities: np.ndarray,
           rel_tol: float = 1e-6) -> tuple[float, ...]:
    """Strikes of local density maxima (relative prominence above both
    neighbours beyond rel_tol)."""
    modes = []
    p = densities
    scale = np.nanmax(np.abs(p)) or 1.0
    for i in range(1, len(p) - 1):
        if not (np.isfinite(p[i - 1]) and np.isfinite(p[i]) and np.isfinite(p[i + 1])):
            continue
        if p[i] <= 0.0:
            continue
        if (p[i] - p[i - 1] > rel_tol * scale
                and p[i] - p[i + 1] > rel_tol * scale):
            modes.append(i)
    # Merge plateau-adjacent detections.
    merged: list[int] = []
    for i in modes:
        if not merged or i - merged[-1] > 3:
            merged.append(i)
    return tuple(float(strikes[i]) for i in merged)


def scan_report(smile: SmileSection, ctx: ForwardContext,
                y_range: tuple[float, float] | None = None,
                n_points: int = 801) -> ScanReport:
    """Uniform log-moneyness scan of g and the implied density.

    The default range spans 5 ATM standard deviations either side of the
    forward.
    """
    if y_range is None:
        w_atm = smile.total_variance(0.0)
        half = 5.0 * math.sqrt(w_atm)
        y_range = (-half, half)
    ys = np.linspace(y_range[0], y_range[1], n_points)
    gs = np.full(n_points, np.nan)
    ps = np.full(n_points, np.nan)
    ws = np.full(n_points, np.nan)
    strikes = ctx.forward * np.exp(ys)
    for i, y in enumerate(ys):
        try:
            w = smile.total_variance(y)
            ws[i] = w
            if w <= 0.0:
                continue
            gs[i] = g_function(smile, y)
            sqrt_w = math.sqrt(w)
            d2 = -y / sqrt_w - 0.5 * sqrt_w
            ps[i] = gs[i] * norm_pdf(d2) / (strikes[i] * sqrt_w)
        except NegativeVarianceError:
            continue

    finite = np.isfinite(ps)
    trapezoid = getattr(np, "trapezoid", np.trapz)
    integrates_to = float(trapezoid(np.where(finite, ps, 0.0), strikes))
    modes = _modes(strikes, ps)
    g_curve = GCurve(
        ys=ys, gs=gs,
        min_value=float(np.nanmin(gs)) if np.any(np.isfinite(gs)) else math.nan,
        negative_intervals=_negative_intervals(ys, gs),
    )
    density_curve = DensityCurve(
        strikes=strikes, densities=ps,
        integrates_to=integrates_to, modes=modes,
    )
    return ScanReport(
        g_curve=g_curve,
        density_curve=density_curve,
        mode_count=len(modes),
        negative_g_intervals=g_curve.negative_intervals,
        negative_density_intervals=_negative_intervals(ys, ps),
        negative_variance_intervals=_negative_intervals(ys, ws),
    )
