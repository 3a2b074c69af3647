"""Non-parametric smile representations: delta polynomials and cubic splines.

Both expose the :class:`SmileSection` interface (vol by strike, total
variance and its derivatives in log-moneyness).  Pathological choices the
representations allow (flat extrapolation with clamped boundaries, fixed
point volatility lookup) are preserved on purpose: reproducing their
failure modes is part of what this package is for.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .blackscholes import norm_cdf, norm_pdf
from .market import (
    AtmKind,
    SmileQuoteSet,
    forward_delta,
    reduced_delta,
)


class NegativeVarianceError(ValueError):
    """Total variance is non-positive at the requested log-moneyness."""

    def __init__(self, y: float, w: float):
        self.y = y
        self.w = w
        super().__init__(f"total variance {w} <= 0 at log-moneyness {y}")


class SmileSection(abc.ABC):
    """Uniform interface over any calibrated smile representation."""

    forward: float
    expiry: float

    @abc.abstractmethod
    def vol(self, strike: float) -> float:
        ...

    def total_variance(self, y: float) -> float:
        """w(y) = vol(F e^y)^2 T."""
        sigma = self.vol(self.forward * math.exp(y))
        return sigma * sigma * self.expiry

    # Default derivative path: 5-point central differences in y.  Models
    # with analytic derivatives override these.
    _fd_step = 1e-4

    def _fd_h(self) -> float:
        # The smile varies on the scale of one ATM standard deviation, so
        # the step shrinks proportionally for sub-1%-vol sections.
        try:
            w0 = self.total_variance(0.0)
        except Exception:
            return self._fd_step
        if not w0 > 0.0:
            return self._fd_step
        return self._fd_step * min(1.0, math.sqrt(w0) / 0.01)

    def d_total_variance(self, y: float) -> float:
        h = self._fd_h()
        w = self.total_variance
        return (w(y - 2 * h) - 8 * w(y - h) + 8 * w(y + h) - w(y + 2 * h)) / (12 * h)

    def d2_total_variance(self, y: float) -> float:
        h = self._fd_h()
        w = self.total_variance
        return (-w(y - 2 * h) + 16 * w(y - h) - 30 * w(y)
                + 16 * w(y + h) - w(y + 2 * h)) / (12 * h * h)

    def supported_range(self) -> tuple[float, float]:
        """Strike interval over which evaluation is meaningful."""
        return (0.0, math.inf)


@dataclass(frozen=True)
class FlatSmile(SmileSection):
    """Constant volatility; the trivial reference section."""

    sigma: float
    forward: float
    expiry: float

    def vol(self, strike: float) -> float:
        return self.sigma

    def total_variance(self, y: float) -> float:
        return self.sigma * self.sigma * self.expiry

    def d_total_variance(self, y: float) -> float:
        return 0.0

    def d2_total_variance(self, y: float) -> float:
        return 0.0


# ---------------------------------------------------------------------------
# Delta polynomials
# ---------------------------------------------------------------------------

class DeltaKind(Enum):
    REDUCED_ATM = "reduced"        # Phi(ln(F/K)/(sigma_atm sqrt(T)))
    BAR_FORWARD = "bar"            # Phi(ln(F/K)/(sigma sqrt(T))), candidate vol
    FORWARD_NO_PREMIUM = "forward"  # Phi(d1) call delta, candidate vol


class Transform(Enum):
    IDENTITY = "identity"   # f = polynomial (Malz style)
    EXP_LOG = "exp"         # f = exp(polynomial), fitted against ln(vol)


class StrikeSolver(Enum):
    FIXED_POINT = "fixed-point"
    NEWTON = "newton"
    BRENT = "brent"


@dataclass(frozen=True)
class FixedPointResult:
    """Trace of the fixed-point volatility lookup sigma <- f(delta(K, sigma))."""

    converged: bool
    vols: tuple[float, ...]
    deltas: tuple[float, ...]
    cycle_points: tuple[float, float] | None

    @property
    def vol(self) -> float:
        return self.vols[-1]


class FixedPointDivergedError(RuntimeError):
    """Fixed-point lookup failed to converge; carries the full trace."""

    def __init__(self, result: FixedPointResult, strike: float):
        self.result = result
        self.strike = strike
        super().__init__(
            f"fixed-point volatility lookup diverged at strike {strike}"
        )


class NoBracketError(RuntimeError):
    pass


class SingularSystemError(ValueError):
    pass


@dataclass(frozen=True)
class DeltaPolynomial(SmileSection):
    """Polynomial smile f(delta) over the basis (delta - 1/2)^i.

    With Transform.EXP_LOG the polynomial acts on ln(vol), i.e. the smile is
    the exponential of the polynomial (Clark's exponential quartic).
    """

    delta_kind: DeltaKind
    transform: Transform
    coefficients: tuple[float, ...]
    forward: float
    expiry: float
    atm_vol: float
    pillar_deltas: tuple[float, ...]
    pillar_vols: tuple[float, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def smile_function(self, delta: float) -> float:
        """f(delta): the interpolated volatility at a delta coordinate."""
        x = delta - 0.5
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return math.exp(acc) if self.transform is Transform.EXP_LOG else acc

    def smile_function_derivative(self, delta: float) -> float:
        x = delta - 0.5
        acc = 0.0
        for i, c in enumerate(self.coefficients):
            if i >= 1:
                acc += i * c * x ** (i - 1)
        if self.transform is Transform.EXP_LOG:
            return acc * self.smile_function(delta)
        return acc

    def delta_of(self, strike: float, sigma: float) -> float:
        """Delta coordinate at (strike, sigma) under this smile's delta kind."""
        if self.delta_kind is DeltaKind.REDUCED_ATM:
            return reduced_delta(strike, self.atm_vol, self.expiry, self.forward)
        if self.delta_kind is DeltaKind.BAR_FORWARD:
            return reduced_delta(strike, sigma, self.expiry, self.forward)
        return forward_delta(strike, sigma, self.expiry, self.forward,
                             is_call=True, premium_adjusted=False)

    def _d_delta_d_sigma(self, strike: float, sigma: float) -> float:
        log_m = math.log(self.forward / strike)
        sqrt_t = math.sqrt(self.expiry)
        if self.delta_kind is DeltaKind.REDUCED_ATM:
            return 0.0
        if self.delta_kind is DeltaKind.BAR_FORWARD:
            u = log_m / (sigma * sqrt_t)
            return norm_pdf(u) * (-u / sigma)
        d1 = log_m / (sigma * sqrt_t) + 0.5 * sigma * sqrt_t
        dd1 = -log_m / (sigma * sigma * sqrt_t) + 0.5 * sqrt_t
        return norm_pdf(d1) * dd1

    def vol(self, strike: float, method: StrikeSolver = StrikeSolver.NEWTON) -> float:
        if self.delta_kind is DeltaKind.REDUCED_ATM:
            return self.smile_function(self.delta_of(strike, self.atm_vol))
        return lookup_vol(self, strike, method)

    def supported_range(self) -> tuple[float, float]:
        return (0.0, math.inf)


def fit_delta_polynomial(quotes: SmileQuoteSet, delta_kind: DeltaKind,
                         transform: Transform, degree: int) -> DeltaPolynomial:
    """Exactly interpolate the pillar quotes with a degree-n polynomial.

    The delta coordinate per pillar is computed at the pillar's resolved
    strike: the reduced delta uses the ATM vol, the bar delta the pillar
    vol, and the forward kind the plain call delta (put pillars land at
    1 - delta, which keeps the axis monotone).
    """
    pillars = quotes.pillars
    if len(pillars) != degree + 1:
        raise ValueError(
            f"degree {degree} needs {degree + 1} pillars, got {len(pillars)}"
        )
    atm_vol = quotes.atm_quote().vol
    strikes = quotes.pillar_strikes()

    deltas = []
    for pillar, strike in zip(pillars, strikes):
        if delta_kind is DeltaKind.REDUCED_ATM:
            d = reduced_delta(strike, atm_vol, quotes.expiry, quotes.forward)
        elif delta_kind is DeltaKind.BAR_FORWARD:
            d = reduced_delta(strike, pillar.vol, quotes.expiry, quotes.forward)
        else:
            d = forward_delta(strike, pillar.vol, quotes.expiry, quotes.forward,
                              is_call=True, premium_adjusted=False)
        deltas.append(d)

    for a, b in zip(sorted(deltas), sorted(deltas)[1:]):
        if abs(a - b) < 1e-12:
            raise SingularSystemError(f"two pillars share delta {a}")

    x = np.array(deltas) - 0.5
    vols = np.array([p.vol for p in pillars])
    rhs = np.log(vols) if transform is Transform.EXP_LOG else vols
    vander = np.vander(x, degree + 1, increasing=True)
    coeffs = np.linalg.solve(vander, rhs)

    return DeltaPolynomial(
        delta_kind=delta_kind, transform=transform,
        coefficients=tuple(float(c) for c in coeffs),
        forward=quotes.forward, expiry=quotes.expiry, atm_vol=atm_vol,
        pillar_deltas=tuple(deltas), pillar_vols=tuple(float(v) for v in vols),
    )


def fixed_point_lookup(poly: DeltaPolynomial, strike: float,
                       max_iter: int = 100, tol: float = 1e-10,
                       trace_length: int = 64) -> FixedPointResult:
    """Iterate sigma <- f(delta(K, sigma)) from the ATM vol, keeping a trace.

    Cycle accumulation points are estimated from the last 16 delta iterates
    split by parity.
    """
    sigma = poly.atm_vol
    vols = [sigma]
    deltas = []
    converged = False
    for _ in range(max_iter):
        delta = poly.delta_of(strike, sigma)
        nxt = poly.smile_function(delta)
        deltas.append(delta)
        vols.append(nxt)
        if abs(nxt - sigma) < tol:
            converged = True
            sigma = nxt
            break
        sigma = nxt

    cycle = None
    if not converged and len(deltas) >= 16:
        tail = deltas[-16:]
        even = sum(tail[0::2]) / len(tail[0::2])
        odd = sum(tail[1::2]) / len(tail[1::2])
        cycle = (min(even, odd), max(even, odd))
    return FixedPointResult(
        converged=converged,
        vols=tuple(vols[-trace_length:]),
        deltas=tuple(deltas[-trace_length:]),
        cycle_points=cycle,
    )


def lookup_vol(poly: DeltaPolynomial, strike: float,
               method: StrikeSolver = StrikeSolver.NEWTON,
               tol: float = 1e-12, max_iter: int = 100) -> float:
    """Solve sigma = f(delta(K, sigma)) for the volatility at a strike."""
    if strike <= 0.0:
        raise ValueError(f"strike must be positive, got {strike}")
    if poly.delta_kind is DeltaKind.REDUCED_ATM:
        return poly.smile_function(poly.delta_of(strike, poly.atm_vol))

    if method is StrikeSolver.FIXED_POINT:
        result = fixed_point_lookup(poly, strike, max_iter=max_iter)
        if not result.converged:
            raise FixedPointDivergedError(result, strike)
        return result.vol

    def residual(sigma: float) -> float:
        return poly.smile_function(poly.delta_of(strike, sigma)) - sigma

    if method is StrikeSolver.NEWTON:
        sigma = poly.atm_vol
        for _ in range(max_iter):
            g = residual(sigma)
            if abs(g) < tol:
                return sigma
            slope = (poly.smile_function_derivative(poly.delta_of(strike, sigma))
                     * poly._d_delta_d_sigma(strike, sigma) - 1.0)
            step = g / slope if slope != 0.0 else math.nan
            nxt = sigma - step
            if not math.isfinite(nxt) or nxt <= 0.0:
                return _brent_lookup(poly, strike, residual)
            sigma = nxt
        return _brent_lookup(poly, strike, residual)

    return _brent_lookup(poly, strike, residual)


def _brent_lookup(poly: DeltaPolynomial, strike: float, residual) -> float:
    lo, hi = 1e-6, 5.0 * poly.atm_vol + 1.0
    flo, fhi = residual(lo), residual(hi)
    if flo * fhi > 0.0:
        raise NoBracketError(
            f"no volatility bracket for strike {strike} in [{lo}, {hi}]"
        )
    return brentq(residual, lo, hi, xtol=1e-16, rtol=8.9e-16)


# ---------------------------------------------------------------------------
# Cubic splines
# ---------------------------------------------------------------------------

class SplineAxis(Enum):
    LOG_MONEYNESS_VARIANCE = "logm-var"  # x = ln(K/F), value = total variance
    DELTA_VOL = "delta-vol"              # x = call delta, value = vol


class Boundary(Enum):
    NATURAL = "natural"                  # second derivative zero at the ends
    CLAMPED_ZERO_SLOPE = "clamped"       # first derivative zero at the ends


class Extrapolation(Enum):
    FLAT = "flat"
    LINEAR_BOUNDARY_SLOPE = "linear"


class NodesNotMonotoneError(ValueError):
    pass


class CubicSplineSmile(SmileSection):
    """C2 cubic spline through the pillar nodes on the chosen axis.

    Boundary conditions and extrapolation are applied exactly as requested;
    in particular the clamped-zero-slope + flat combination keeps its
    second-derivative discontinuity at the boundary nodes.
    """

    def __init__(self, axis: SplineAxis, boundary: Boundary,
                 extrapolation: Extrapolation, nodes: np.ndarray,
                 values: np.ndarray, forward: float, expiry: float,
                 atm_vol: float):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(np.diff(nodes) <= 0.0):
            raise NodesNotMonotoneError(f"spline nodes not increasing: {nodes}")
        bc = "natural" if boundary is Boundary.NATURAL else ((1, 0.0), (1, 0.0))
        self.axis = axis
        self.boundary = boundary
        self.extrapolation = extrapolation
        self.nodes = nodes
        self.values = values
        self.forward = forward
        self.expiry = expiry
        self.atm_vol = atm_vol
        self._spline = CubicSpline(nodes, values, bc_type=bc)
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    # -- raw spline with extrapolation, on the spline's own axis -----------
    def value_at(self, x: float, derivative: int = 0) -> float:
        lo, hi = self.nodes[0], self.nodes[-1]
        if lo <= x <= hi:
            return float((self._spline, self._d1, self._d2)[derivative](x))
        edge = lo if x < lo else hi
        if self.extrapolation is Extrapolation.FLAT:
            if derivative == 0:
                return float(self._spline(edge))
            return 0.0
        slope = float(self._d1(edge))
        if derivative == 0:
            return float(self._spline(edge)) + slope * (x - edge)
        return slope if derivative == 1 else 0.0

    def second_derivative_jump(self, node_index: int) -> float:
        """Outside-minus-inside second derivative at a boundary node."""
        if node_index == 0:
            inside = float(self._d2(self.nodes[0]))
            outside = 0.0  # both flat and linear extrapolation have zero curvature
        elif node_index == len(self.nodes) - 1:
            inside = float(self._d2(self.nodes[-1]))
            outside = 0.0
        else:
            raise ValueError("jump is only defined at the boundary nodes")
        return outside - inside

    # -- SmileSection interface --------------------------------------------
    def total_variance(self, y: float) -> float:
        if self.axis is SplineAxis.LOG_MONEYNESS_VARIANCE:
            return self.value_at(y)
        sigma = self.vol(self.forward * math.exp(y))
        return sigma * sigma * self.expiry

    def d_total_variance(self, y: float) -> float:
        if self.axis is SplineAxis.LOG_MONEYNESS_VARIANCE:
            return self.value_at(y, derivative=1)
        return super().d_total_variance(y)

    def d2_total_variance(self, y: float) -> float:
        if self.axis is SplineAxis.LOG_MONEYNESS_VARIANCE:
            return self.value_at(y, derivative=2)
        return super().d2_total_variance(y)

    def vol(self, strike: float) -> float:
        if strike <= 0.0:
            raise ValueError(f"strike must be positive, got {strike}")
        if self.axis is SplineAxis.LOG_MONEYNESS_VARIANCE:
            y = math.log(strike / self.forward)
            w = self.value_at(y)
            if w <= 0.0:
                raise NegativeVarianceError(y, w)
            return math.sqrt(w / self.expiry)

        # Delta axis: the coordinate depends on the vol, solve Eq-1 style.
        def residual(sigma: float) -> float:
            delta = forward_delta(strike, sigma, self.expiry, self.forward,
                                  is_call=True, premium_adjusted=False)
            return self.value_at(delta) - sigma

        lo, hi = 1e-6, 5.0 * self.atm_vol + 1.0
        if residual(lo) * residual(hi) > 0.0:
            raise NoBracketError(f"no vol bracket at strike {strike}")
        return brentq(residual, lo, hi, xtol=1e-16, rtol=8.9e-16)


def fit_spline_smile(quotes: SmileQuoteSet, axis: SplineAxis,
                     boundary: Boundary,
                     extrapolation: Extrapolation) -> CubicSplineSmile:
    """Build a cubic-spline smile through the pillar quotes."""
    if len(quotes.pillars) < 3:
        raise ValueError("spline needs at least 3 pillars")
    strikes = quotes.pillar_strikes()
    vols = np.array([p.vol for p in quotes.pillars])

    if axis is SplineAxis.LOG_MONEYNESS_VARIANCE:
        nodes = np.log(np.array(strikes) / quotes.forward)
        values = vols * vols * quotes.expiry
    else:
        # Common monotone call-delta axis (puts land at 1 - quoted delta).
        nodes = np.array([
            forward_delta(k, p.vol, quotes.expiry, quotes.forward,
                          is_call=True, premium_adjusted=False)
            for k, p in zip(strikes, quotes.pillars)
        ])[::-1]
        values = vols[::-1]

    return CubicSplineSmile(axis, boundary, extrapolation, nodes, values,
                            quotes.forward, quotes.expiry,
                            quotes.atm_quote().vol)


def negative_variance_intervals(smile: CubicSplineSmile,
                                y_range: tuple[float, float],
                                n_points: int = 2001) -> list[tuple[float, float]]:
    """Maximal log-moneyness intervals where the extrapolated variance is < 0."""
    if smile.axis is not SplineAxis.LOG_MONEYNESS_VARIANCE:
        raise ValueError("negative-variance scan needs the log-moneyness axis")
    ys = np.linspace(y_range[0], y_range[1], n_points)
    ws = np.array([smile.value_at(y) for y in ys])
    return _sign_intervals(ys, ws, lambda y: smile.value_at(y))


def _sign_intervals(xs: np.ndarray, vals: np.ndarray, f) -> list[tuple[float, float]]:
    """Maximal intervals where vals < 0, endpoints refined by bisection on f."""
    neg = vals < 0.0
    intervals: list[tuple[float, float]] = []
    i = 0
    n = len(xs)
    while i < n:
        if not neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and neg[j + 1]:
            j += 1
        lo = xs[i] if i == 0 else brentq(f, xs[i - 1], xs[i],
                                         xtol=1e-12, rtol=8.9e-16)
        hi = xs[j] if j == n - 1 else brentq(f, xs[j], xs[j + 1],
                                             xtol=1e-12, rtol=8.9e-16)
        intervals.append((float(lo), float(hi)))
        i = j + 1
    return intervals
