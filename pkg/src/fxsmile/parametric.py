"""Parametric smile models: SVI, SABR (beta = 1) and a single-slice xSSVI.

SVI is calibrated with the quasi-explicit two-step scheme: a derivative-free
outer search over (m, s) and an exactly-solved constrained linear least
squares over the remaining three parameters.  All calibrations are
deterministic: fixed multi-start grids, no randomness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize

from .market import SmileQuoteSet
from .smiles import NegativeVarianceError, SmileSection


class CalibrationFailedError(RuntimeError):
    def __init__(self, msg: str, objective: float):
        self.objective = objective
        super().__init__(f"{msg} (objective {objective:g})")


# ---------------------------------------------------------------------------
# SVI
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SviParams:
    a: float
    b: float
    rho: float
    m: float
    s: float

    def __post_init__(self):
        if self.b < 0.0:
            raise ValueError(f"b must be >= 0, got {self.b}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (-1, 1), got {self.rho}")
        if self.s <= 0.0:
            raise ValueError(f"s must be positive, got {self.s}")


def svi_total_variance(p: SviParams, y: float, expiry: float) -> float:
    """w(y) = T (a + b (rho (y - m) + sqrt((y - m)^2 + s^2)))."""
    u = y - p.m
    return expiry * (p.a + p.b * (p.rho * u + math.sqrt(u * u + p.s * p.s)))


def svi_d_total_variance(p: SviParams, y: float, expiry: float) -> float:
    u = y - p.m
    root = math.sqrt(u * u + p.s * p.s)
    return expiry * p.b * (p.rho + u / root)


def svi_d2_total_variance(p: SviParams, y: float, expiry: float) -> float:
    u = y - p.m
    root = math.sqrt(u * u + p.s * p.s)
    return expiry * p.b * p.s * p.s / (root * root * root)


@dataclass(frozen=True)
class SviSmile(SmileSection):
    params: SviParams
    forward: float
    expiry: float

    def total_variance(self, y: float) -> float:
        return svi_total_variance(self.params, y, self.expiry)

    def d_total_variance(self, y: float) -> float:
        return svi_d_total_variance(self.params, y, self.expiry)

    def d2_total_variance(self, y: float) -> float:
        return svi_d2_total_variance(self.params, y, self.expiry)

    def vol(self, strike: float) -> float:
        y = math.log(strike / self.forward)
        w = self.total_variance(y)
        if w <= 0.0:
            raise NegativeVarianceError(y, w)
        return math.sqrt(w / self.expiry)


def _constrained_lls(A: np.ndarray, b: np.ndarray, G: np.ndarray,
                     h: np.ndarray) -> np.ndarray | None:
    """min ||Ax - b||^2 s.t. Gx <= h, by active-set enumeration.

    Small and exact: the problem has 3 unknowns and a handful of
    constraints, so every active subset is tried and the best feasible
    KKT point wins.
    """
    n = A.shape[1]
    AtA = A.T @ A
    Atb = A.T @ b
    best, best_obj = None, math.inf
    m = G.shape[0]
    for r in range(0, n + 1):
        for active in itertools.combinations(range(m), r):
            Ga = G[list(active)]
            ha = h[list(active)]
            kkt = np.zeros((n + r, n + r))
            kkt[:n, :n] = AtA
            if r:
                kkt[:n, n:] = Ga.T
                kkt[n:, :n] = Ga
            rhs = np.concatenate([Atb, ha])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x, lam = sol[:n], sol[n:]
            if np.any(lam < -1e-12):
                continue
            if np.any(G @ x - h > 1e-10):
                continue
            obj = float(np.sum((A @ x - b) ** 2))
            if obj < best_obj - 1e-15:
                best, best_obj = x, obj
    return best


def _svi_inner(ys: np.ndarray, ws: np.ndarray, m: float, s: float,
               constrain_a: bool) -> tuple[np.ndarray | None, float]:
    """Solve for (alpha, c, e) in w = alpha + c z + e sqrt(z^2+1), z=(y-m)/s."""
    z = (ys - m) / s
    A = np.column_stack([np.ones_like(z), z, np.sqrt(z * z + 1.0)])
    w_max = float(ws.max())
    # e >= 0, |c| <= e, e <= 4 s (slope cap of the quasi-explicit scheme),
    # optionally alpha >= 0, and alpha <= max w.
    G = [[0.0, 1.0, -1.0], [0.0, -1.0, -1.0], [0.0, 0.0, -1.0],
         [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]
    h = [0.0, 0.0, 0.0, 4.0 * s, w_max]
    if constrain_a:
        G.append([-1.0, 0.0, 0.0])
        h.append(0.0)
    x = _constrained_lls(A, ws, np.array(G), np.array(h))
    if x is None:
        return None, math.inf
    return x, float(np.sum((A @ x - ws) ** 2))


def calibrate_svi(quotes: SmileQuoteSet,
                  constrain_a_nonneg: bool = True) -> SviParams:
    """Quasi-explicit SVI calibration against pillar total variances.

    Outer Nelder-Mead over (m, s) from a 5x5 multi-start grid; inner
    constrained linear least squares solved exactly.
    """
    strikes = np.array(quotes.pillar_strikes())
    ys = np.log(strikes / quotes.forward)
    vols = np.array([p.vol for p in quotes.pillars])
    ws = vols * vols * quotes.expiry
    if len(ys) < 5:
        raise ValueError("SVI calibration needs at least 5 pillars")

    span = float(ys.max() - ys.min())

    def objective(x: np.ndarray) -> float:
        m, s = x
        if s <= 1e-8:
            return 1e10
        _, obj = _svi_inner(ys, ws, m, s, constrain_a_nonneg)
        return obj

    best_x, best_obj = None, math.inf
    m_seeds = np.linspace(ys.min(), ys.max(), 5)
    s_seeds = np.linspace(0.1 * span, 2.0 * span, 5)
    for m0, s0 in itertools.product(m_seeds, s_seeds):
        res = minimize(objective, np.array([m0, s0]), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16,
                                "maxiter": 400})
        if res.fun < best_obj:
            best_obj, best_x = res.fun, res.x

    if best_x is None or not math.isfinite(best_obj):
        raise CalibrationFailedError("SVI inner system infeasible", best_obj)

    m, s = float(best_x[0]), float(max(best_x[1], 1e-8))
    x, _ = _svi_inner(ys, ws, m, s, constrain_a_nonneg)
    if x is None:
        raise CalibrationFailedError("SVI inner system infeasible", best_obj)
    alpha, c, e = (float(v) for v in x)
    if constrain_a_nonneg:
        alpha = max(alpha, 0.0)  # active-set solution can carry -1e-20 noise
    T = quotes.expiry
    b = e / (s * T)
    rho = min(max(c / e if e > 1e-14 else 0.0, -0.9999), 0.9999)
    return SviParams(a=alpha / T, b=b, rho=rho, m=m, s=s)


# ---------------------------------------------------------------------------
# SABR, beta = 1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SabrParams:
    alpha: float
    rho: float
    nu: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (-1, 1), got {self.rho}")
        if self.nu < 0.0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")


def sabr_vol(p: SabrParams, strike: float, forward: float,
             expiry: float) -> float:
    """Hagan lognormal expansion with beta = 1."""
    if min(strike, forward, expiry) <= 0.0:
        raise ValueError("strike, forward and expiry must be positive")
    correction = 1.0 + (0.25 * p.rho * p.alpha * p.nu
                        + (2.0 - 3.0 * p.rho * p.rho) * p.nu * p.nu / 24.0) * expiry
    if p.nu == 0.0:
        return p.alpha * correction
    z = (p.nu / p.alpha) * math.log(forward / strike)
    if abs(z) < 1e-4:
        # Series of z / x(z) around z = 0 to avoid cancellation.
        zx = 1.0 - 0.5 * p.rho * z + (2.0 - 3.0 * p.rho * p.rho) * z * z / 12.0
    else:
        # sqrt((z-rho)^2 + 1-rho^2) + z - rho cancels to ~0 for large
        # negative z; floor it so extreme optimizer iterates stay finite.
        num = math.sqrt(1.0 - 2.0 * p.rho * z + z * z) + z - p.rho
        x = math.log(max(num, 1e-300) / (1.0 - p.rho))
        zx = z / x
    return p.alpha * zx * correction


@dataclass(frozen=True)
class SabrSmile(SmileSection):
    params: SabrParams
    forward: float
    expiry: float

    def vol(self, strike: float) -> float:
        return sabr_vol(self.params, strike, self.forward, self.expiry)


def calibrate_sabr(quotes: SmileQuoteSet) -> SabrParams:
    """Least-squares SABR fit (equal weights on the pillar vols)."""
    if len(quotes.pillars) < 3:
        raise ValueError("SABR calibration needs at least 3 pillars")
    strikes = np.array(quotes.pillar_strikes())
    vols = np.array([p.vol for p in quotes.pillars])
    atm = quotes.atm_quote().vol
    F, T = quotes.forward, quotes.expiry

    def residuals(x: np.ndarray) -> np.ndarray:
        p = SabrParams(alpha=x[0], rho=math.tanh(x[1]), nu=x[2])
        return np.array([sabr_vol(p, k, F, T) - v for k, v in zip(strikes, vols)])

    ys = np.log(strikes / F)
    skew0 = np.polyfit(ys, vols, 1)[0]
    nu0 = max(2.0 * abs(skew0) / max(atm, 1e-6), 0.1)
    rho0 = math.atanh(min(max(skew0 / max(nu0 * atm, 1e-8), -0.9), 0.9))

    # The expansion's O(nu^2 T) correction must stay small for the formula
    # to mean anything; cap nu accordingly to exclude degenerate optima.
    nu_max = math.sqrt(12.0 / T)
    nu0 = min(nu0, 0.5 * nu_max)

    # Multi-start: strongly convex low-vol smiles need a much larger vol of
    # vol than the skew heuristic suggests.
    starts = [np.array([atm, rho0, nu0])]
    for mult in (0.25, 1.0, 4.0):
        for r0 in (-0.5, 0.0, 0.5):
            starts.append(np.array([atm, math.atanh(r0),
                                    min(nu0 * mult, 0.9 * nu_max)]))

    best = None
    for x0 in starts:
        res = least_squares(residuals, x0, bounds=([1e-8, -5.0, 0.0],
                                                   [np.inf, 5.0, nu_max]),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or res.cost < best.cost:
            best = res
    rms = math.sqrt(2.0 * best.cost / len(vols))
    if rms > 0.25 * atm:
        raise CalibrationFailedError("SABR fit did not converge", best.cost)
    return SabrParams(alpha=float(best.x[0]), rho=float(math.tanh(best.x[1])),
                      nu=float(best.x[2]))


# ---------------------------------------------------------------------------
# xSSVI (single slice)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class XssviParams:
    """SSVI slice: w(y) = theta/2 (1 + rho phi y + sqrt((phi y + rho)^2 + 1 - rho^2)).

    The butterfly constraints theta phi (1 + |rho|) <= 4 and
    theta phi^2 (1 + |rho|) <= 4 are enforced at calibration time.
    """

    theta: float
    rho: float
    phi: float

    def __post_init__(self):
        if self.theta <= 0.0 or self.phi <= 0.0:
            raise ValueError("theta and phi must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (-1, 1), got {self.rho}")

    def satisfies_butterfly_bounds(self, tol: float = 1e-9) -> bool:
        cap = self.theta * (1.0 + abs(self.rho))
        return (cap * self.phi <= 4.0 + tol
                and cap * self.phi * self.phi <= 4.0 + tol)


def xssvi_total_variance(p: XssviParams, y: float) -> float:
    u = p.phi * y
    return 0.5 * p.theta * (1.0 + p.rho * u
                            + math.sqrt((u + p.rho) ** 2 + 1.0 - p.rho * p.rho))


@dataclass(frozen=True)
class XssviSmile(SmileSection):
    params: XssviParams
    forward: float
    expiry: float

    def total_variance(self, y: float) -> float:
        return xssvi_total_variance(self.params, y)

    def d_total_variance(self, y: float) -> float:
        p = self.params
        u = p.phi * y
        root = math.sqrt((u + p.rho) ** 2 + 1.0 - p.rho * p.rho)
        return 0.5 * p.theta * p.phi * (p.rho + (u + p.rho) / root)

    def d2_total_variance(self, y: float) -> float:
        p = self.params
        u = p.phi * y
        root = math.sqrt((u + p.rho) ** 2 + 1.0 - p.rho * p.rho)
        return 0.5 * p.theta * p.phi * p.phi * (1.0 - p.rho * p.rho) / root**3

    def vol(self, strike: float) -> float:
        y = math.log(strike / self.forward)
        w = self.total_variance(y)
        if w <= 0.0:
            raise NegativeVarianceError(y, w)
        return math.sqrt(w / self.expiry)


def _phi_cap(theta: float, rho: float) -> float:
    cap = theta * (1.0 + abs(rho))
    return min(4.0 / cap, math.sqrt(4.0 / cap))


def calibrate_xssvi(quotes: SmileQuoteSet) -> XssviParams:
    """Constrained SSVI-slice fit: least squares on vols with phi mapped
    into its butterfly-arbitrage-free cap, so the result always satisfies
    the positivity constraints."""
    if len(quotes.pillars) < 4:
        raise ValueError("xSSVI calibration needs at least 4 pillars")
    strikes = np.array(quotes.pillar_strikes())
    ys = np.log(strikes / quotes.forward)
    vols = np.array([p.vol for p in quotes.pillars])
    ws = vols * vols * quotes.expiry
    T = quotes.expiry
    atm_w = quotes.atm_quote().vol ** 2 * T

    def params_of(x: np.ndarray) -> XssviParams:
        theta = math.exp(x[0])
        rho = math.tanh(x[1])
        frac = 1.0 / (1.0 + math.exp(-x[2]))
        phi = _phi_cap(theta, rho) * frac
        return XssviParams(theta=theta, rho=rho, phi=max(phi, 1e-12))

    def residuals(x: np.ndarray) -> np.ndarray:
        p = params_of(x)
        w_model = np.array([xssvi_total_variance(p, y) for y in ys])
        return np.sqrt(np.maximum(w_model, 0.0) / T) - vols

    # Bound the tanh/sigmoid arguments so rho cannot saturate to +-1 and
    # theta stays within a sane multiple of the ATM variance.
    log_w = math.log(atm_w)
    bounds = ([log_w - 12.0, -5.0, -30.0], [log_w + 12.0, 5.0, 30.0])
    best, best_cost = None, math.inf
    for frac0 in (-1.0, 0.0, 1.0, 2.0):
        x0 = np.array([log_w, 0.0, frac0])
        res = least_squares(residuals, x0, bounds=bounds,
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if res.cost < best_cost:
            best, best_cost = res, res.cost
    if best is None:
        raise CalibrationFailedError("xSSVI fit failed", best_cost)
    p = params_of(best.x)
    if not p.satisfies_butterfly_bounds():
        raise CalibrationFailedError("xSSVI constraints violated", best_cost)
    return p
