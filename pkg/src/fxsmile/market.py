"""Market data types, FX delta conventions and quote conversions.

Volatilities are decimals in memory (0.0514 for a "5.14" quote) and percent
in fixture files.  Pillar strikes are resolved from the quote set's delta
convention: closed form for the no-premium conventions, bracketed Brent for
the premium-adjusted ones (the call branch uses the larger of the two roots,
which is the market convention for quoted call strikes).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Sequence

from scipy.optimize import brentq

from .blackscholes import (
    ForwardContext,
    OptionKind,
    OptionSpec,
    _black_undiscounted,
    implied_vol,
    norm_cdf,
    norm_inv_cdf,
)

BUILTIN_FIXTURES = (
    "audnzd-7d",
    "eurczk-32d",
    "usdaed-1m",
    "usdaed-9m",
    "usdaed-1y",
    "eurtry-6m",
    "eurtry-1y",
    "manufactured-1y",
    "eurusd-1m-dense",
    "eurusd-1y-dense",
)

FIXTURE_DIR_ENV = "FXSMILE_FIXTURE_DIR"


class DeltaMeasure(Enum):
    SPOT = "spot"
    FORWARD = "forward"


class AtmKind(Enum):
    DELTA_NEUTRAL_STRADDLE = "delta-neutral-straddle"
    FORWARD_ATM = "forward"


@dataclass(frozen=True)
class DeltaConvention:
    measure: DeltaMeasure
    premium_adjusted: bool
    atm_kind: AtmKind = AtmKind.FORWARD_ATM


@dataclass(frozen=True)
class PillarQuote:
    """One quoted pillar: kind is 'atm', 'put' or 'call'.

    ``delta`` is the quoted (positive) delta for put/call pillars, None for
    the ATM pillar.
    """

    kind: str
    vol: float
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("atm", "put", "call"):
            raise ValueError(f"unknown pillar kind {self.kind!r}")
        if self.vol <= 0.0:
            raise ValueError(f"pillar vol must be positive, got {self.vol}")
        if self.kind == "atm":
            if self.delta is not None:
                raise ValueError("ATM pillar carries no delta")
        else:
            if self.delta is None or not 0.0 < self.delta < 0.5:
                raise ValueError(
                    f"pillar delta must be in (0, 0.5), got {self.delta}"
                )


@dataclass(frozen=True)
class RrBfQuotes:
    """Simple-convention market snapshot: ATM plus RR/BF spreads."""

    atm: float
    rr25: float
    bf25: float
    rr10: float
    bf10: float

    def __post_init__(self):
        if self.atm <= 0.0:
            raise ValueError("ATM vol must be positive")
        for d, rr, bf in ((0.25, self.rr25, self.bf25), (0.10, self.rr10, self.bf10)):
            for sign in (+0.5, -0.5):
                if self.atm + bf + sign * rr <= 0.0:
                    raise ValueError(f"{d:.2f}-delta vol would be non-positive")


@dataclass(frozen=True)
class SmileQuoteSet:
    """One maturity's market snapshot."""

    name: str
    valuation_date: str
    expiry_date: str
    expiry: float  # years, ACT/365 unless the fixture overrides
    forward: float
    spot: float
    domestic_discount: float
    foreign_discount: float
    convention: DeltaConvention
    pillars: tuple[PillarQuote, ...]
    notes: str = ""

    def __post_init__(self):
        if self.expiry <= 0.0 or self.forward <= 0.0 or self.spot <= 0.0:
            raise ValueError("expiry, forward and spot must be positive")
        for b in (self.domestic_discount, self.foreign_discount):
            if not 0.0 < b <= 1.0:
                raise ValueError(f"discount factor must be in (0, 1], got {b}")
        strikes = self.pillar_strikes()
        for lo, hi in zip(strikes, strikes[1:]):
            if hi <= lo:
                raise ValueError(
                    f"pillar strikes not strictly increasing: {strikes}"
                )

    @property
    def context(self) -> ForwardContext:
        return ForwardContext(self.forward, self.domestic_discount)

    def atm_quote(self) -> PillarQuote:
        for p in self.pillars:
            if p.kind == "atm":
                return p
        raise ValueError(f"quote set {self.name} has no ATM pillar")

    def pillar_strikes(self) -> tuple[float, ...]:
        return tuple(self.pillar_strike(p) for p in self.pillars)

    def pillar_strike(self, pillar: PillarQuote) -> float:
        if pillar.kind == "atm":
            return atm_strike(pillar.vol, self.expiry, self.forward, self.convention)
        return strike_from_delta(
            pillar.delta, pillar.kind == "call", pillar.vol,
            self.expiry, self.forward, self.convention,
            foreign_discount=self.foreign_discount,
        )

    def standard_pillars(self) -> "SmileQuoteSet":
        """Reduce a dense quote set to the usual 5 pillars (10D, 25D, ATM)."""
        selected = []
        for p in self.pillars:
            if p.kind == "atm" or (p.delta is not None
                                   and abs(p.delta - 0.10) < 1e-12):
                selected.append(p)
            elif p.delta is not None and abs(p.delta - 0.25) < 1e-12:
                selected.append(p)
        if len(selected) != 5:
            raise ValueError(
                f"quote set {self.name} has no standard 5-pillar subset"
            )
        return replace_pillars(self, tuple(selected))


def replace_pillars(quotes: SmileQuoteSet, pillars: tuple[PillarQuote, ...],
                    suffix: str = "") -> SmileQuoteSet:
    from dataclasses import replace

    return replace(quotes, pillars=pillars,
                   name=quotes.name + suffix)


def convert_simple_rr_bf(q: RrBfQuotes) -> tuple[PillarQuote, ...]:
    """Simple smile convention: vol_call = ATM + BF + RR/2, vol_put = ATM + BF - RR/2."""
    return (
        PillarQuote("put", q.atm + q.bf10 - 0.5 * q.rr10, 0.10),
        PillarQuote("put", q.atm + q.bf25 - 0.5 * q.rr25, 0.25),
        PillarQuote("atm", q.atm),
        PillarQuote("call", q.atm + q.bf25 + 0.5 * q.rr25, 0.25),
        PillarQuote("call", q.atm + q.bf10 + 0.5 * q.rr10, 0.10),
    )


def forward_delta(strike: float, vol: float, expiry: float, forward: float,
                  is_call: bool, premium_adjusted: bool) -> float:
    """Forward delta: +/-Phi(+/-d1), or +/-(K/F)Phi(+/-d2) premium-adjusted."""
    if min(strike, vol, expiry, forward) <= 0.0:
        raise ValueError("strike, vol, expiry and forward must be positive")
    sign = 1.0 if is_call else -1.0
    total_vol = vol * math.sqrt(expiry)
    d1 = math.log(forward / strike) / total_vol + 0.5 * total_vol
    if not premium_adjusted:
        return sign * norm_cdf(sign * d1)
    d2 = d1 - total_vol
    return sign * (strike / forward) * norm_cdf(sign * d2)


def reduced_delta(strike: float, vol_ref: float, expiry: float,
                  forward: float) -> float:
    """Phi(ln(F/K) / (vol_ref sqrt(T))): the simplified delta without the vol drift.

    With the ATM vol as reference this is the "reduced" delta; with the
    candidate vol of the pillar/lookup it is the bar-delta.
    """
    if min(strike, vol_ref, expiry, forward) <= 0.0:
        raise ValueError("strike, vol_ref, expiry and forward must be positive")
    return norm_cdf(math.log(forward / strike) / (vol_ref * math.sqrt(expiry)))


class NoSolutionError(ValueError):
    """The premium-adjusted delta equation has no root in the bracket."""

    def __init__(self, msg: str, lo: float, hi: float):
        self.bracket = (lo, hi)
        super().__init__(f"{msg} (bracket [{lo}, {hi}])")


def atm_strike(vol: float, expiry: float, forward: float,
               convention: DeltaConvention) -> float:
    if convention.atm_kind is AtmKind.FORWARD_ATM:
        return forward
    # Delta-neutral straddle: d1 = 0 without premium, d2 = 0 with premium.
    half_var = 0.5 * vol * vol * expiry
    sign = -1.0 if convention.premium_adjusted else 1.0
    return forward * math.exp(sign * half_var)


def strike_from_delta(delta: float, is_call: bool, vol: float, expiry: float,
                      forward: float, convention: DeltaConvention,
                      foreign_discount: float = 1.0) -> float:
    """Strike for a quoted (positive) delta under the given convention."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if min(vol, expiry, forward) <= 0.0:
        raise ValueError("vol, expiry and forward must be positive")

    # Spot deltas are forward deltas scaled by the foreign discount factor.
    fwd_delta = delta
    if convention.measure is DeltaMeasure.SPOT:
        fwd_delta = delta / foreign_discount
    sign = 1.0 if is_call else -1.0
    target = sign * fwd_delta

    total_vol = vol * math.sqrt(expiry)
    if not convention.premium_adjusted:
        d1 = sign * norm_inv_cdf(fwd_delta)
        return forward * math.exp(0.5 * total_vol**2 - total_vol * d1)

    def residual(strike: float) -> float:
        return forward_delta(strike, vol, expiry, forward, is_call, True) - target

    lo = forward * math.exp(-8.0 * total_vol)
    hi = forward * math.exp(8.0 * total_vol)
    if not is_call:
        # Premium-adjusted put delta is monotone in the strike.
        if residual(lo) * residual(hi) > 0.0:
            raise NoSolutionError(f"no put strike for delta {delta}", lo, hi)
        return brentq(residual, lo, hi, xtol=1e-14, rtol=8.9e-16)

    # Premium-adjusted call delta is hump-shaped in K; quoted strikes use
    # the larger root, to the right of the maximum.
    k_peak = _premium_call_delta_peak(vol, expiry, forward, lo, hi)
    if residual(k_peak) < 0.0:
        raise NoSolutionError(
            f"call delta {delta} above the attainable maximum", k_peak, hi
        )
    if residual(hi) > 0.0:
        raise NoSolutionError(f"no call strike for delta {delta}", k_peak, hi)
    return brentq(residual, k_peak, hi, xtol=1e-14, rtol=8.9e-16)


def _premium_call_delta_peak(vol: float, expiry: float, forward: float,
                             lo: float, hi: float) -> float:
    """Strike maximizing the premium-adjusted call delta (golden-section)."""

    def f(strike: float) -> float:
        return forward_delta(strike, vol, expiry, forward, True, True)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    for _ in range(200):
        if b - a < 1e-13:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(math.exp(d))
    return math.exp(0.5 * (a + b))


@dataclass(frozen=True)
class MixtureParams:
    """Two-component lognormal mixture pinned to its forward mean."""

    weight1: float
    forward1: float
    forward2: float
    vol1: float
    vol2: float

    def __post_init__(self):
        if not 0.0 < self.weight1 < 1.0:
            raise ValueError("weight1 must be in (0, 1)")
        if min(self.forward1, self.forward2, self.vol1, self.vol2) <= 0.0:
            raise ValueError("component forwards and vols must be positive")

    @property
    def forward(self) -> float:
        return self.weight1 * self.forward1 + (1.0 - self.weight1) * self.forward2


def mixture_call_price(p: MixtureParams, strike: float, expiry: float) -> float:
    """Undiscounted call under the two-lognormal mixture."""
    w = p.weight1
    sq = math.sqrt(expiry)
    return (w * _black_undiscounted(p.forward1, strike, p.vol1 * sq, True)
            + (1.0 - w) * _black_undiscounted(p.forward2, strike, p.vol2 * sq, True))


def mixture_implied_vol(p: MixtureParams, strike: float, expiry: float) -> float:
    ctx = ForwardContext(p.forward)
    opt = OptionSpec(strike, expiry, OptionKind.CALL)
    return implied_vol(mixture_call_price(p, strike, expiry), opt, ctx)


def mixture_quotes(p: MixtureParams, deltas: Sequence[float], expiry: float,
                   forward: float | None = None,
                   name: str = "mixture") -> SmileQuoteSet:
    """Manufacture pillar quotes from a lognormal mixture.

    Pillars are quoted in the forward-delta-without-premium convention.  The
    (strike, vol) pair per pillar solves the joint system: the strike is the
    delta-implied strike at the pillar vol, and the vol is the mixture's
    implied vol at that strike.
    """
    if forward is not None and abs(forward - p.forward) > 1e-12 * p.forward:
        raise ValueError(
            f"forward {forward} inconsistent with mixture mean {p.forward}"
        )
    fwd = p.forward
    convention = DeltaConvention(DeltaMeasure.FORWARD, False, AtmKind.FORWARD_ATM)

    def solve_pillar(delta: float, is_call: bool) -> PillarQuote:
        def gap(vol: float) -> float:
            strike = strike_from_delta(delta, is_call, vol, expiry, fwd, convention)
            return mixture_implied_vol(p, strike, expiry) - vol

        lo, hi = 1e-6, 4.0 * max(p.vol1, p.vol2)
        vol = brentq(gap, lo, hi, xtol=1e-15, rtol=8.9e-16)
        strike = strike_from_delta(delta, is_call, vol, expiry, fwd, convention)
        sign = 1.0 if is_call else -1.0
        resid = forward_delta(strike, mixture_implied_vol(p, strike, expiry),
                              expiry, fwd, is_call, False) - sign * delta
        if abs(resid) > 1e-12:
            raise ValueError(f"pillar delta residual {resid} above tolerance")
        return PillarQuote("call" if is_call else "put",
                           mixture_implied_vol(p, strike, expiry), delta)

    puts = [solve_pillar(d, False) for d in sorted(deltas)]
    calls = [solve_pillar(d, True) for d in sorted(deltas, reverse=True)]
    atm = PillarQuote("atm", mixture_implied_vol(p, fwd, expiry))
    return SmileQuoteSet(
        name=name, valuation_date="", expiry_date="", expiry=expiry,
        forward=fwd, spot=fwd, domestic_discount=1.0, foreign_discount=1.0,
        convention=convention, pillars=tuple(puts) + (atm,) + tuple(calls),
    )


class FixtureError(ValueError):
    pass


def _parse_fixture(raw: dict, source: str) -> SmileQuoteSet:
    def need(key: str):
        if key not in raw:
            raise FixtureError(f"{source}: missing field {key!r}")
        return raw[key]

    conv = need("convention")
    for key in ("measure", "premium", "atm"):
        if key not in conv:
            raise FixtureError(f"{source}: convention missing field {key!r}")
    try:
        convention = DeltaConvention(
            DeltaMeasure(conv["measure"]),
            bool(conv["premium"]),
            AtmKind(conv["atm"]),
        )
    except ValueError as exc:
        raise FixtureError(f"{source}: bad convention: {exc}") from exc

    pillars = []
    for i, p in enumerate(need("pillars")):
        try:
            delta = p.get("delta")
            pillars.append(PillarQuote(
                kind=p["kind"],
                vol=float(p["vol"]) / 100.0,  # percent in files
                delta=None if delta is None else float(delta),
            ))
        except (KeyError, ValueError) as exc:
            raise FixtureError(f"{source}: pillar {i}: {exc}") from exc

    try:
        return SmileQuoteSet(
            name=raw.get("name", source),
            valuation_date=need("valuation"),
            expiry_date=need("expiry"),
            expiry=float(need("T")),
            forward=float(need("forward")),
            spot=float(need("spot")),
            domestic_discount=float(need("discountDomestic")),
            foreign_discount=float(need("discountForeign")),
            convention=convention,
            pillars=tuple(pillars),
            notes=raw.get("notes", ""),
        )
    except ValueError as exc:
        raise FixtureError(f"{source}: {exc}") from exc


def load_fixture(name_or_path: str | os.PathLike) -> SmileQuoteSet:
    """Load a built-in fixture by name, or any fixture file by path.

    The FXSMILE_FIXTURE_DIR environment variable prepends a search
    directory for named fixtures.
    """
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        raw = json.loads(path.read_text())
        return _parse_fixture(raw, str(path))

    name = str(name_or_path)
    override = os.environ.get(FIXTURE_DIR_ENV)
    if override:
        candidate = Path(override) / f"{name}.json"
        if candidate.exists():
            raw = json.loads(candidate.read_text())
            return _parse_fixture(raw, str(candidate))

    if name in BUILTIN_FIXTURES:
        ref = resources.files("fxsmile.fixtures") / f"{name}.json"
        raw = json.loads(ref.read_text())
        return _parse_fixture(raw, name)

    raise FixtureError(
        f"unknown fixture {name!r}; built-ins: {', '.join(BUILTIN_FIXTURES)}"
    )
