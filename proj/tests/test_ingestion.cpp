#include <gtest/gtest.h>

#include <functional>

#include "support.hpp"

namespace calm::test {
namespace {

using nlohmann::json;

json minimal_snapshot() {
    return json::parse(R"({
      "schema_version": 1, "as_of": "2024-01-31",
      "assets": [{"id": "usdc", "class": "stablecoin", "exposure": "100", "avg_maturity": "0", "liquidity_tenor": "day"}],
      "liabilities": [{"id": "coin", "kind": "circulating_stablecoin", "amount": "90"},
                      {"id": "eq", "kind": "equity", "amount": "10"}]
    })");
}

std::vector<std::string> diagnostics_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e.diagnostics();
    }
    return {};
}

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
    for (const auto& d : diags)
        if (d.find(needle) != std::string::npos) return true;
    return false;
}

TEST(Snapshot, ParsesMinimalDocument) {
    const auto s = parse_snapshot(minimal_snapshot());
    EXPECT_EQ(s.as_of, Date(2024, 1, 31));
    ASSERT_EQ(s.assets.size(), 1u);
    EXPECT_EQ(s.assets[0].asset_class, AssetClass::Stablecoin);
    EXPECT_EQ(s.assets[0].liquidity_tenor, Bucket::Day);
    EXPECT_EQ(capital(s), Money(10));
}

TEST(Snapshot, ReportsEveryProblemAtOnce) {
    auto doc = minimal_snapshot();
    doc["schema_version"] = 2;
    doc["assets"][0]["exposure"] = 100;            // number instead of decimal string
    doc["assets"][0]["class"] = "bond";            // unknown enum
    doc["assets"][0]["colour"] = "red";            // unknown key
    doc["assets"][0].erase("liquidity_tenor");     // missing required field
    doc["liabilities"][1]["amount"] = "1e3";       // malformed decimal
    const auto diags = diagnostics_of([&] { parse_snapshot(doc, "snap.json"); });
    EXPECT_TRUE(mentions(diags, "schema_version")) << ::testing::PrintToString(diags);
    EXPECT_TRUE(mentions(diags, "assets[0] (id=usdc).exposure: expected a decimal string"));
    EXPECT_TRUE(mentions(diags, "unknown asset class 'bond'"));
    EXPECT_TRUE(mentions(diags, "unknown field 'colour'"));
    EXPECT_TRUE(mentions(diags, "missing field 'liquidity_tenor'"));
    EXPECT_TRUE(mentions(diags, "malformed decimal '1e3'"));
    EXPECT_GE(diags.size(), 6u);
}

TEST(Snapshot, BalanceIdentityIsCheckedAtLoad) {
    auto doc = minimal_snapshot();
    doc["liabilities"][0]["amount"] = "95";
    const auto diags = diagnostics_of([&] { parse_snapshot(doc); });
    EXPECT_TRUE(mentions(diags, "assets differ from liabilities plus equity")) << ::testing::PrintToString(diags);
    EXPECT_NO_THROW(parse_snapshot(doc, "<snapshot>", Money(5)));
}

TEST(Snapshot, RoundTripsThroughJson) {
    const auto s = load_snapshot(maker_dir() / "snapshot.json");
    const auto again = parse_snapshot(json::parse(to_json(s).dump()));
    EXPECT_EQ(to_json(again).dump(), to_json(s).dump());
    EXPECT_EQ(again.assets.size(), s.assets.size());
}

TEST(Snapshot, MissingAndMalformedFiles) {
    EXPECT_THROW(load_snapshot(data_dir() / "does-not-exist.json"), ParseError);
    TempDir dir("ingest");
    write_text(dir / "bad.json", "{\"schema_version\": 1,");
    try {
        load_snapshot(dir / "bad.json");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(e.file().find("bad.json"), std::string::npos);
        EXPECT_EQ(e.diagnostics().size(), 1u);
    }
}

TEST(Vaults, ParseAndValidate) {
    const auto p = load_vault_portfolio(maker_dir() / "vaults_eth.json");
    EXPECT_EQ(p.vaults.size(), 30u);
    Money debt;
    for (const auto& v : p.vaults) debt += v.debt;
    EXPECT_EQ(debt, Money(2'380'000'000));
    EXPECT_EQ(parse_vault_portfolio(json::parse(to_json(p).dump())).vaults.size(), 30u);

    auto doc = json::parse(to_json(p).dump());
    doc["market_depth"] = "0";
    doc["vaults"][0]["collateral_units"] = "1";
    const auto diags = diagnostics_of([&] { parse_vault_portfolio(doc); });
    EXPECT_TRUE(mentions(diags, "market_depth")) << ::testing::PrintToString(diags);
    EXPECT_TRUE(mentions(diags, "below its liquidation ratio"));
}

TEST(Vaults, CollateralBookResolvesRelativeToTheSnapshot) {
    const auto s = load_snapshot(maker_dir() / "snapshot.json");
    const auto book = load_collateral_book(s, maker_dir());
    EXPECT_EQ(book.size(), 1u);
    EXPECT_TRUE(book.contains("vaults_eth.json"));
    EXPECT_THROW(load_collateral_book(s, data_dir()), ParseError);
}

TEST(Holders, ParseFixtureAndRejectBadPoints) {
    const auto hs = load_holders(maker_dir() / "holders.json");
    Money total;
    for (const auto& h : hs) total += h.balance_series.back().balance;
    EXPECT_EQ(total, Money(5'220'971'376));

    const auto doc = json::parse(R"({"schema_version": 1, "holders": [
        {"address_id": "a", "holder_kind": "contract", "balance_series": [["2024-01-02", "5"], ["2024-01-01", "4"]]},
        {"address_id": "b", "holder_kind": "robot", "balance_series": [["2024-13-01", "5"], ["2024-01-01"]]}]})");
    const auto diags = diagnostics_of([&] { parse_holders(doc); });
    EXPECT_TRUE(mentions(diags, "not strictly increasing")) << ::testing::PrintToString(diags);
    EXPECT_TRUE(mentions(diags, "unknown holder kind 'robot'"));
    EXPECT_TRUE(mentions(diags, "malformed date '2024-13-01'"));
    EXPECT_TRUE(mentions(diags, "balance_series[1]: expected"));
}

TEST(Scenario, EmptyScenarioTakesDocumentedDefaults) {
    const auto sc = parse_scenario(json::parse(R"({"schema_version": 1})"));
    EXPECT_EQ(sc.risk.rate_shock_bps, Decimal(200));
    EXPECT_EQ(sc.risk.market_model, default_monte_carlo());
    EXPECT_EQ(sc.tolerances.cr_threshold, Fraction(1));
    EXPECT_EQ(sc.tolerances.balance_identity, Money(1));
    EXPECT_FALSE(sc.reference.has_value());
    EXPECT_TRUE(mentions(sc.defaults_applied, "rate_shock_bps = 200"));
    EXPECT_TRUE(mentions(sc.defaults_applied, "monte_carlo = built-in default block"));
    EXPECT_TRUE(mentions(sc.defaults_applied, "stress_windows"));
}

TEST(Scenario, PartialMonteCarloBlockRecordsEachDefault) {
    const auto sc = parse_scenario(json::parse(R"({"schema_version": 1,
        "monte_carlo": {"n_paths": 500, "loss_statistic": {"percentile": "0.99"}}})"));
    EXPECT_EQ(sc.risk.market_model.n_paths, 500u);
    EXPECT_EQ(sc.risk.market_model.loss_statistic, LossStatistic::percentile(D("0.99")));
    EXPECT_TRUE(mentions(sc.defaults_applied, "monte_carlo.seed = 20231231"));
    EXPECT_FALSE(mentions(sc.defaults_applied, "monte_carlo.n_paths"));
}

TEST(Scenario, CreditKeysRouteToClassOrPosition) {
    const auto sc = parse_scenario(json::parse(R"({"schema_version": 1,
        "credit_class_overrides": {"public_credit": "0", "pos-7": {"pd": "0.1", "lgd": "0.4"}}})"));
    EXPECT_EQ(std::get<Fraction>(sc.risk.credit_class_overrides.at(AssetClass::PublicCredit)), Decimal(0));
    EXPECT_EQ(std::get<PdLgd>(sc.risk.credit_position_overrides.at("pos-7")), (PdLgd{D("0.1"), D("0.4")}));
}

TEST(Scenario, RejectsOutOfRangeAndUnknownEntries) {
    const auto doc = json::parse(R"({"schema_version": 1, "mystery": true,
        "rate_shock_bps": "-5",
        "credit_rating_table": {"AAA": "1.5", "Z": "0.1"},
        "monte_carlo": {"n_paths": -1, "jump_size": "1", "loss_statistic": "median"},
        "bucket_drawdown_overrides": {"day": "0.3", "week": "0.2", "year": "0.9"},
        "stress_windows": {"week": 0},
        "haircuts": {"cash": "2"}})");
    const auto diags = diagnostics_of([&] { parse_scenario(doc); });
    for (const char* needle : {"unknown field 'mystery'", "rate_shock_bps", "credit_rating_table.AAA",
                               "unknown rating 'Z'", "monte_carlo.n_paths", "loss_statistic",
                               "bucket_drawdown_overrides", "stress_windows.week", "haircuts.cash"})
        EXPECT_TRUE(mentions(diags, needle)) << needle << "\n" << ::testing::PrintToString(diags);
}

TEST(Scenario, RoundTripsThroughJson) {
    const auto sc = load_scenario(maker_dir() / "scenario.json");
    const auto again = parse_scenario(json::parse(to_json(sc).dump()));
    EXPECT_EQ(to_json(again).dump(), to_json(sc).dump());
    EXPECT_EQ(again.risk.market_model, sc.risk.market_model);
    ASSERT_TRUE(again.reference);
    EXPECT_EQ(again.reference->total_car, Money(128'900'000));
}

TEST(Scenario, ShippedMonteCarloBlockIsTheDefault) {
    EXPECT_EQ(load_scenario(maker_dir() / "scenario.json").risk.market_model, default_monte_carlo());
}

}  // namespace
}  // namespace calm::test
