// Builds a small protocol balance sheet in code and prints its capital and
// liquidity position. No input files needed.

#include <iostream>

#include "calm/calm.hpp"

int main() {
    using namespace calm;

    BalanceSheetSnapshot sheet;
    sheet.as_of = Date(2024, 3, 31);
    sheet.assets = {
        {"treasury-bills", AssetClass::PublicCredit, Money(4'000'000), Decimal::parse("0.5"), std::nullopt, Bucket::Month, std::nullopt},
        {"usdc-reserve", AssetClass::Stablecoin, Money(1'000'000), Decimal(0), std::nullopt, Bucket::Day, std::nullopt},
        {"trade-finance", AssetClass::PrivateCredit, Money(500'000), Decimal(3), Rating::BBB, Bucket::Year, std::nullopt},
    };
    sheet.liabilities = {
        {"stablecoin", LiabilityKind::CirculatingStablecoin, Money(5'300'000)},
        {"surplus", LiabilityKind::Equity, Money(200'000)},
    };
    if (auto v = validate_snapshot(sheet); !v.ok()) {
        for (const auto& e : v.violations) std::cerr << e.position_id << ": " << e.message << '\n';
        return 1;
    }

    RiskParameterSet params;
    params.credit_rating_table[Rating::BBB] = Fraction::parse("0.04");
    params.credit_class_overrides[AssetClass::PublicCredit] = Fraction(0);
    params.market_model = default_monte_carlo();

    const auto car = car_report(sheet, params, {});
    std::cout << car_table_csv(car);
    std::cout << "capital ratio: " << car.cr.to_string() << " (" << to_string(car.classification) << ")\n\n";

    // Five weeks of holder balances ending in a run: -15% in a day, -25% over a week.
    HolderRecord holder{"all-holders", HolderKind::ExternallyOwned, {}};
    const Money tail[] = {Money(5'950'000), Money(5'600'000), Money(5'250'000), Money(5'300'000)};
    for (int i = -35; i <= 0; ++i)
        holder.balance_series.push_back({sheet.as_of.plus_days(i), i < -3 ? Money(7'000'000) : tail[i + 3]});
    BucketingOptions options;
    options.overrides[Bucket::Month] = Fraction::parse("0.3");
    const auto outflows = bucket_liabilities(std::span(&holder, 1), sheet.as_of, options);
    const auto gap = funding_gap(outflows, asset_liquidity_schedule(sheet));
    std::cout << funding_gap_csv(gap) << '\n';

    for (const auto& r : recommend(car, gap)) std::cout << to_string(r.kind) << ": " << r.amount.to_fixed(2) << '\n';
}
