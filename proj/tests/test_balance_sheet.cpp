#include <gtest/gtest.h>

#include "support.hpp"

namespace calm::test {
namespace {

TEST(BalanceSheet, EnumNamesRoundTrip) {
    for (AssetClass c : kAssetClasses) EXPECT_EQ(parse_asset_class(to_string(c)), c);
    for (Rating r : kRatings) EXPECT_EQ(parse_rating(to_string(r)), r);
    EXPECT_THROW(parse_asset_class("equity"), DomainError);
    EXPECT_THROW(parse_rating("aaa"), DomainError);
    EXPECT_THROW(parse_liability_kind("debt"), DomainError);
    EXPECT_FALSE(try_parse_asset_class("pos-1").has_value());
}

TEST(BalanceSheet, DefaultTenors) {
    EXPECT_EQ(default_liquidity_tenor(AssetClass::Stablecoin), Bucket::Day);
    EXPECT_EQ(default_liquidity_tenor(AssetClass::Cash), Bucket::Day);
    EXPECT_EQ(default_liquidity_tenor(AssetClass::CryptoBackedLoan), Bucket::Week);
    EXPECT_EQ(default_liquidity_tenor(AssetClass::PublicCredit), Bucket::Month);
    EXPECT_EQ(default_liquidity_tenor(AssetClass::PrivateCredit), Bucket::Year);
}

TEST(BalanceSheet, BalancedSheetValidates) {
    const auto s = small_sheet();
    EXPECT_TRUE(validate_snapshot(s).ok());
    EXPECT_EQ(total_assets(s), Money(1'300'000));
    EXPECT_EQ(total_liabilities_and_equity(s), Money(1'300'000));
    EXPECT_EQ(capital(s), Money(12'950));
}

TEST(BalanceSheet, ImbalanceBeyondToleranceIsReportedWithItsAmount) {
    auto s = small_sheet();
    s.liabilities[0].amount += D("1.5");
    const auto v = validate_snapshot(s);
    ASSERT_EQ(v.violations.size(), 1u);
    EXPECT_EQ(v.violations[0].kind, Violation::Kind::Imbalance);
    EXPECT_EQ(*v.violations[0].amount, D("-1.5"));
    EXPECT_TRUE(validate_snapshot(s, Money(2)).ok());
    s.liabilities[0].amount -= D("0.5");
    EXPECT_TRUE(validate_snapshot(s).ok()) << "a one-unit difference is within the default tolerance";
}

TEST(BalanceSheet, CollectsEveryViolationInStableOrder) {
    auto s = small_sheet();
    s.assets[0].exposure = D("-1");
    s.assets[1].avg_maturity = D("-0.5");
    s.assets[2].collateral_ref = "vaults.json";
    s.assets.push_back(asset("usdc", AssetClass::CryptoBackedLoan, "0"));
    s.liabilities.push_back(liability("buffer2", LiabilityKind::Equity, "0"));
    const auto v = validate_snapshot(s, Money(10'000'000));
    std::vector<std::string> ids;
    for (const auto& x : v.violations) ids.push_back(std::string(x.kind == Violation::Kind::Structural ? "S:" : "I:") + x.position_id);
    EXPECT_EQ(ids, (std::vector<std::string>{"S:", "S:usdc", "I:bills", "I:loans", "I:usdc", "I:usdc"}));

    auto reversed = s;
    std::reverse(reversed.assets.begin(), reversed.assets.end());
    EXPECT_EQ(validate_snapshot(reversed, Money(10'000'000)).violations, v.violations);
}

TEST(BalanceSheet, NegativeEquityIsAllowed) {
    auto s = small_sheet();
    s.liabilities[1].amount = D("-100");
    s.liabilities[0].amount = D("1300100");
    EXPECT_TRUE(validate_snapshot(s).ok());
    EXPECT_EQ(capital(s), D("-100"));
}

TEST(BalanceSheet, CapitalNeedsExactlyOneEquityPosition) {
    auto s = small_sheet();
    s.liabilities.pop_back();
    EXPECT_THROW(capital(s), StructuralError);
    s.liabilities.push_back(liability("e1", LiabilityKind::Equity, "1"));
    s.liabilities.push_back(liability("e2", LiabilityKind::Equity, "1"));
    EXPECT_THROW(capital(s), StructuralError);
}

}  // namespace
}  // namespace calm::test
