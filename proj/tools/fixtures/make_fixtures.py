"""Regenerates the JSON fixtures under data/.

Deterministic: running it twice produces identical files. Decimal amounts are
written as strings so no binary floating point touches them.
"""

import datetime as dt
import json
import random
from decimal import Decimal, ROUND_HALF_EVEN, getcontext
from fractions import Fraction
from pathlib import Path

getcontext().prec = 50
ROOT = Path(__file__).resolve().parents[2] / "data"

# Market depth of the crypto-loan collateral market, found with calm_calibrate.
MARKET_DEPTH = "651500000"
SLIPPAGE_COEFFICIENT = "1"


def cents(x):
    return Decimal(x).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)


def frac18(fr):
    q = Decimal(fr.numerator) / Decimal(fr.denominator)
    return q.quantize(Decimal("1e-18"), rounding=ROUND_HALF_EVEN)


def s(x):
    t = format(Decimal(x), "f")
    if "." in t:
        t = t.rstrip("0").rstrip(".")
    return t


def write(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


def daterange(start, end):
    d = start
    while d <= end:
        yield d
        d += dt.timedelta(days=1)


# ---------------------------------------------------------------- MakerDAO 2023-12-31

def makerdao():
    out = ROOT / "makerdao-2023-12-31"
    as_of = dt.date(2023, 12, 31)
    crypto_a, crypto_b = Decimal("1228440892"), Decimal("1151559108")
    debt_total = crypto_a + crypto_b

    # Thirty ETH-style vaults. Three liquidation-ratio tiers, collateralization
    # spread above each tier's trigger.
    rng = random.Random(20231231)
    price = Decimal("2281.85")
    tiers = [("1.30", 6), ("1.45", 12), ("1.70", 12)]
    weights = [Decimal(rng.randint(50, 150)) for _ in range(30)]
    wsum = sum(weights)
    debts = [cents(debt_total * w / wsum) for w in weights]
    debts[-1] += debt_total - sum(debts)
    vaults = []
    i = 0
    for lr, count in tiers:
        for k in range(count):
            cushion = Decimal("1.04") + Decimal(k) * Decimal("0.06")
            value = debts[i] * Decimal(lr) * cushion
            units = (value / price).quantize(Decimal("1e-6"))
            vaults.append({
                "collateral_units": s(units),
                "collateral_price": s(price),
                "debt": s(debts[i]),
                "liquidation_ratio": lr,
                "liquidation_penalty": "0.13",
            })
            i += 1
    write(out / "vaults_eth.json", {
        "schema_version": 1,
        "market_depth": MARKET_DEPTH,
        "slippage_coefficient": SLIPPAGE_COEFFICIENT,
        "vaults": vaults,
    })

    psm = Decimal("260424144")
    tbills = Decimal("2317252303")
    rwa = [("rwa-covered-bond", Decimal("26329492.90"), "2.5", "AAA"),
           ("rwa-mortgage-pool", Decimal("52658985.80"), "7.0", "unrated"),
           ("rwa-private-other", Decimal("184306450.30"), "4.0", "unrated")]
    assets = [
        {"id": "psm-usdc", "class": "stablecoin", "exposure": s(psm), "avg_maturity": "0",
         "liquidity_tenor": "day"},
        {"id": "vaults-eth-a", "class": "crypto_backed_loan", "exposure": s(crypto_a), "avg_maturity": "0",
         "liquidity_tenor": "week", "collateral_ref": "vaults_eth.json"},
        {"id": "vaults-eth-b", "class": "crypto_backed_loan", "exposure": s(crypto_b), "avg_maturity": "0",
         "liquidity_tenor": "month", "collateral_ref": "vaults_eth.json"},
        {"id": "tbills", "class": "public_credit", "exposure": s(tbills), "avg_maturity": "0.2568",
         "liquidity_tenor": "month"},
    ]
    for pid, exp, mat, rating in rwa:
        assets.append({"id": pid, "class": "private_credit", "exposure": s(exp), "avg_maturity": mat,
                       "rating": rating, "liquidity_tenor": "year"})
    total = psm + crypto_a + crypto_b + tbills + sum(x[1] for x in rwa)
    assert total == Decimal("5220971376"), total
    equity = Decimal("53400000")
    dsr = Decimal("1567571376")
    dai = total - equity - dsr
    write(out / "snapshot.json", {
        "schema_version": 1,
        "as_of": as_of.isoformat(),
        "assets": assets,
        "liabilities": [
            {"id": "dai-circulating", "kind": "circulating_stablecoin", "amount": s(dai)},
            {"id": "dai-savings-rate", "kind": "savings_deposit", "amount": s(dsr)},
            {"id": "surplus-buffer", "kind": "equity", "amount": s(equity)},
        ],
    })

    # Stressed outflows per bucket, expressed as cumulative fractions of the
    # holdings at as_of.
    outflows = [Fraction(988496652), Fraction(603190592), Fraction(333981595)]
    cum = []
    run = Fraction(0)
    for o in outflows:
        run += o
        cum.append(frac18(run / Fraction(int(total))))

    write(out / "scenario.json", {
        "schema_version": 1,
        "rate_shock_bps": "200",
        "credit_rating_table": {"AAA": "0.01", "unrated": "0.10"},
        "credit_class_overrides": {"public_credit": "0", "rwa-mortgage-pool": "0.05"},
        "operational_table": {"psm-usdc": "0"},
        "monte_carlo": {
            "n_paths": 10000,
            "horizon_days": 30,
            "daily_volatility": "0.05",
            "daily_drift": "0",
            "jump_probability": "0.01",
            "jump_size": "0.3",
            "seed": 20231231,
            "loss_statistic": "mean",
        },
        "bucket_drawdown_overrides": {"day": s(cum[0]), "week": s(cum[1]), "month": s(cum[2])},
        "haircuts": {},
        "tolerances": {"balance_identity": "1", "cr_threshold": "1"},
        "published_reference": {
            "total_car": "128900000",
            "car_by_class": {
                "crypto_backed_loan": "68200000",
                "public_credit": "11900000",
                "stablecoin": "2600000",
                "private_credit": "44700000",
            },
            "tolerance": "100000",
        },
    })

    # Holder balances, daily from 2022-04-01. Final balances add up to total
    # liabilities and equity, the surplus buffer included as a contract holder.
    rng = random.Random(7)
    start = dt.date(2022, 4, 1)
    days = list(daterange(start, as_of))
    finals = {
        "0xpsm-pool": ("contract", Decimal("1100000000")),
        "0xdsr-pot": ("contract", dsr),
        "0xsurplus-vow": ("contract", equity),
        "0xlending-market": ("contract", Decimal("640000000")),
        "0xamm-pool": ("contract", Decimal("410000000")),
        "0xbridge-escrow": ("contract", Decimal("285000000")),
        "eoa-cohort-large": ("externally_owned", Decimal("720000000")),
        "eoa-cohort-medium": ("externally_owned", Decimal("310000000")),
    }
    rest = total - sum(v for _, v in finals.values())
    finals["eoa-cohort-small"] = ("externally_owned", rest)
    holders = []
    for addr, (kind, final) in finals.items():
        series = []
        level = 1.0
        levels = []
        for d in days:
            shock = rng.gauss(0.0, 0.01)
            if dt.date(2022, 5, 9) <= d <= dt.date(2022, 5, 14):
                shock -= 0.04
            level *= max(0.5, 1.0 + shock)
            levels.append(level)
        scale = final / Decimal(repr(levels[-1]))
        for d, lv in zip(days, levels):
            series.append([d.isoformat(), s(cents(Decimal(repr(lv)) * scale))])
        series[-1][1] = s(final)
        holders.append({"address_id": addr, "holder_kind": kind, "balance_series": series})
    write(out / "holders.json", {"schema_version": 1, "holders": holders})


# ---------------------------------------------------------------- two-date synthetic series

def synthetic():
    out = ROOT / "synthetic-series"
    capital = Decimal("12950")
    for as_of, k in (("2024-01-31", 1), ("2024-02-29", 2)):
        assets = [
            {"id": "bills", "class": "public_credit", "exposure": s(1000000 * k), "avg_maturity": "0.25",
             "liquidity_tenor": "month"},
            {"id": "usdc", "class": "stablecoin", "exposure": s(200000 * k), "avg_maturity": "0",
             "liquidity_tenor": "day"},
            {"id": "loans", "class": "private_credit", "exposure": s(100000 * k), "avg_maturity": "4.45",
             "rating": "unrated", "liquidity_tenor": "year"},
        ]
        total = Decimal(1300000 * k)
        write(out / f"snapshot_{as_of}.json", {
            "schema_version": 1,
            "as_of": as_of,
            "assets": assets,
            "liabilities": [
                {"id": "coin", "kind": "circulating_stablecoin", "amount": s(total - capital)},
                {"id": "buffer", "kind": "equity", "amount": s(capital)},
            ],
        })

    # Aggregate holdings: worst one-day fall 10%, seven-day 20%, thirty-day 30%,
    # then a steady climb to 1,300,000 at as_of.
    path = {1: 1000000, 2: 900000, 3: 850000, 4: 800000, 5: 800000, 6: 800000, 7: 800000, 8: 800000,
            9: 760000, 10: 720000, 11: 700000}
    for day in range(12, 32):
        path[day] = 700000 + (day - 11) * 30000
    assert path[31] == 1300000
    contract = 200000
    hist_c, hist_e = [], []
    for day in range(1, 32):
        d = dt.date(2024, 1, day).isoformat()
        hist_c.append([d, s(contract)])
        hist_e.append([d, s(path[day] - contract)])
    write(out / "holders_2024-01-31.json", {"schema_version": 1, "holders": [
        {"address_id": "0xpool", "holder_kind": "contract", "balance_series": hist_c},
        {"address_id": "retail", "holder_kind": "externally_owned", "balance_series": hist_e},
    ]})
    write(out / "scenario.json", {
        "schema_version": 1,
        "rate_shock_bps": "200",
        "credit_rating_table": {"unrated": "0.10"},
        "credit_class_overrides": {"public_credit": "0"},
    })


if __name__ == "__main__":
    makerdao()
    synthetic()
