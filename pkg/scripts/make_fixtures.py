"""Regenerate the built-in fixture files from the source table values."""

import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "fxsmile" / "fixtures"
OUT.mkdir(parents=True, exist_ok=True)


def pillar(kind, vol, delta=None):
    d = {"kind": kind, "vol": vol}
    if delta is not None:
        d["delta"] = delta
    return d


def five(p10, p25, atm, c25, c10, dput=0.10, dcall=0.10):
    return [
        pillar("put", p10, dput),
        pillar("put", p25, 0.25),
        pillar("atm", atm),
        pillar("call", c25, 0.25),
        pillar("call", c10, dcall),
    ]


def rrbf(atm, rr25, bf25, rr10, bf10):
    return five(
        atm + bf10 - 0.5 * rr10,
        atm + bf25 - 0.5 * rr25,
        atm,
        atm + bf25 + 0.5 * rr25,
        atm + bf10 + 0.5 * rr10,
    )


def write(name, doc):
    doc["name"] = name
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")


# --- AUD/NZD 7 days, spot delta with premium --------------------------------
T = 7 / 365
F, S0, Bd = 1.07845, 1.0784, 0.999712587139
write("audnzd-7d", {
    "valuation": "2014-07-02", "expiry": "2014-07-09", "T": T,
    "forward": F, "spot": S0,
    "discountDomestic": Bd, "discountForeign": F * Bd / S0,
    "convention": {"measure": "spot", "premium": True,
                   "atm": "delta-neutral-straddle"},
    "pillars": five(6.14, 5.19, 5.14, 5.59, 6.49),
})

# --- EUR/CZK 32 days, forward delta with premium, 5-delta wings -------------
# Forward/discounts are stored as printed in the source even though they
# look like a copy of the AUD/NZD header; only relative strikes matter for
# the scenarios run on this fixture.
T = 32 / 365
write("eurczk-32d", {
    "valuation": "2019-12-16", "expiry": "2020-01-17", "T": T,
    "forward": 1.07845, "spot": 1.0784,
    "discountDomestic": 0.999712587139,
    "discountForeign": 1.07845 * 0.999712587139 / 1.0784,
    "convention": {"measure": "forward", "premium": True, "atm": "forward"},
    "pillars": five(3.715, 2.765, 2.830, 3.340, 4.380, dput=0.05, dcall=0.05),
    "notes": "forward/discounts as printed (likely a caption copy error)",
})

# --- USD/AED, forward delta with premium ------------------------------------
r_usd = 0.03255
for tenor, T, F, rrbf_args, direct in [
    ("1m", 30 / 365, 3.67, (0.31, 0.142, 0.078, 0.343, 0.142), None),
    ("9m", 0.75, 3.67206, None, (0.506, 0.328, 0.32, 0.48, 0.918)),
    ("1y", 1.0, 3.67, (0.29, 0.132, 0.072, 0.359, 0.343), None),
]:
    Bd = math.exp(-r_usd * T)
    S0 = 3.67
    notes = ""
    if tenor != "9m":
        notes = ("forward and rate for this tenor are not printed in the "
                 "source; spot reused as forward, 9m USD rate reused")
    write(f"usdaed-{tenor}", {
        "valuation": "2023-01-24", "expiry": "", "T": T,
        "forward": F, "spot": S0,
        "discountDomestic": Bd, "discountForeign": F * Bd / S0,
        "convention": {"measure": "forward", "premium": True, "atm": "forward"},
        "pillars": five(*direct) if direct else rrbf(*rrbf_args),
        "notes": notes,
    })

# --- EUR/TRY, forward delta with premium ------------------------------------
S0 = 19.3483
for tenor, T, r_try, r_eur, direct in [
    ("6m", 184 / 365, 0.3677, 0.01167, None),
    ("1y", 1.0, 0.3773, 0.01784, (24.08, 28.64, 31.13, 40.21, 51.20)),
]:
    Bd = math.exp(-r_try * T)
    Bf = math.exp(-r_eur * T)
    F = S0 * Bf / Bd
    write(f"eurtry-{tenor}", {
        "valuation": "2022-11-29", "expiry": "", "T": T,
        "forward": F, "spot": S0,
        "discountDomestic": Bd, "discountForeign": Bf,
        "convention": {"measure": "forward", "premium": True, "atm": "forward"},
        "pillars": five(*direct) if direct
        else rrbf(22.12, 9.385, 2.187, 21.148, 7.633),
    })

# --- Manufactured mixture quotes, 1 year ------------------------------------
write("manufactured-1y", {
    "valuation": "", "expiry": "", "T": 1.0,
    "forward": 1.0, "spot": 1.0,
    "discountDomestic": 1.0, "discountForeign": 1.0,
    "convention": {"measure": "forward", "premium": False, "atm": "forward"},
    "pillars": five(26.00, 26.00, 19.50, 12.70, 12.70),
    "notes": "10-delta quotes are a flat extrapolation of the 25-delta quotes",
})

# --- EUR/USD dense quotes, forward delta without premium --------------------
put_deltas = [0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]
call_deltas = list(reversed(put_deltas))

for tenor, T, F, Bd, put_vols, atm_vol, call_vols in [
    ("1m", 30 / 365, 0.975848, math.exp(-0.00351836 * 30 / 365),
     [14.04, 13.01, 12.47, 12.16, 11.93, 11.73, 11.54, 11.38, 11.25], 11.02,
     [10.85, 10.78, 10.73, 10.68, 10.63, 10.58, 10.51, 10.45, 11.11]),
    ("1y", 1.0, 0.986772, 0.963113,
     [16.0, 14.57, 13.46, 12.73, 12.19, 11.74, 11.32, 10.96, 10.65], 10.19,
     [9.84, 9.68, 9.57, 9.48, 9.4, 9.31, 9.21, 9.02, 8.87]),
]:
    S0 = 0.9759
    pillars = [pillar("put", v, d) for d, v in zip(put_deltas, put_vols)]
    pillars.append(pillar("atm", atm_vol))
    # Call vols listed from 40-delta down to 1-delta (increasing strike).
    pillars += [pillar("call", v, d)
                for d, v in zip(sorted(call_deltas, reverse=True), call_vols)]
    write(f"eurusd-{tenor}-dense", {
        "valuation": "2022-03-11", "expiry": "", "T": T,
        "forward": F, "spot": S0,
        "discountDomestic": Bd, "discountForeign": F * Bd / S0,
        "convention": {"measure": "forward", "premium": False, "atm": "forward"},
        "pillars": pillars,
    })

print("wrote fixtures to", OUT)
