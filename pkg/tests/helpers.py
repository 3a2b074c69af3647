"""Shared helpers for building self-consistent synthetic quote sets."""

from __future__ import annotations

from fxsmile import (
    AtmKind,
    DeltaConvention,
    DeltaMeasure,
    PillarQuote,
    SmileQuoteSet,
    strike_from_delta,
)

STANDARD_DELTAS = (("put", 0.10), ("put", 0.25), ("atm", None),
                   ("call", 0.25), ("call", 0.10))


def synthetic_quotes(vol_of_strike, expiry: float, forward: float,
                     name: str = "synthetic") -> SmileQuoteSet:
    """Quote set whose pillar vols are self-consistent with a smile function.

    Strike and vol per pillar solve the joint system strike(delta, vol),
    vol = smile(strike) by fixed-point iteration (the smiles used in tests
    are mild, so this converges quickly).
    """
    conv = DeltaConvention(measure=DeltaMeasure.FORWARD, premium_adjusted=False,
                           atm_kind=AtmKind.FORWARD_ATM)
    pillars = []
    for kind, delta in STANDARD_DELTAS:
        vol = vol_of_strike(forward)
        for _ in range(80):
            if kind == "atm":
                strike = forward
            else:
                strike = strike_from_delta(delta, kind == "call", vol, expiry,
                                           forward, conv)
            nxt = vol_of_strike(strike)
            if abs(nxt - vol) < 1e-15:
                vol = nxt
                break
            vol = nxt
        pillars.append(PillarQuote(kind, vol, delta))
    return SmileQuoteSet(name=name, valuation_date="", expiry_date="",
                         expiry=expiry, forward=forward, spot=forward,
                         domestic_discount=1.0, foreign_discount=1.0,
                         convention=conv, pillars=tuple(pillars))
