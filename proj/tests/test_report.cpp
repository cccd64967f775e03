#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

namespace calm::test {
namespace {

CaRReport report_with(const char* capital, const char* car) {
    CaRReport r;
    r.as_of = Date(2024, 1, 31);
    r.capital = D(capital);
    r.total_car = D(car);
    r.cr = capital_ratio(r.capital, r.total_car);
    r.classification = classify(r.cr);
    return r;
}

FundingGapReport gaps(std::initializer_list<const char*> g) {
    FundingGapReport r;
    r.as_of = Date(2024, 1, 31);
    std::size_t i = 0;
    for (const char* v : g) r.cumulative_gap.values[i++] = D(v);
    r.terminal_gap = r.cumulative_gap[Bucket::Year];
    return r;
}

std::vector<Recommendation::Kind> kinds(const std::vector<Recommendation>& rs) {
    std::vector<Recommendation::Kind> out;
    for (const auto& r : rs) out.push_back(r.kind);
    return out;
}

using K = Recommendation::Kind;

TEST(Recommend, UndercapitalizedWithDayShortfall) {
    const auto recs = recommend(report_with("50", "120"), gaps({"-30", "-10", "40", "0"}));
    ASSERT_EQ(kinds(recs), (std::vector<K>{K::RetainEarnings, K::IncreaseDayLiquidity, K::ExtendMaturity}));
    EXPECT_EQ(recs[0].amount, Money(70));
    EXPECT_EQ(recs[1].amount, Money(30));
    EXPECT_EQ(recs[2].amount, Money(40));
}

TEST(Recommend, CapitalExactlyAtRiskRetainsNothing) {
    const auto recs = recommend(report_with("100", "100"), gaps({"0", "0", "0", "0"}));
    ASSERT_EQ(kinds(recs), (std::vector<K>{K::RetainEarnings}));
    EXPECT_EQ(recs[0].amount, Money(0));
}

TEST(Recommend, WellCapitalizedReleasesExcess) {
    const auto recs = recommend(report_with("150", "100"), gaps({"5", "5", "5", "5"}));
    ASSERT_EQ(kinds(recs), (std::vector<K>{K::ReleaseCapital, K::ExtendMaturity}));
    EXPECT_EQ(recs[0].amount, Money(50));
    EXPECT_EQ(recs[1].amount, Money(5));
}

TEST(Recommend, NoMaturityExtensionWhenTheSurplusIsLaterSpent) {
    const auto recs = recommend(report_with("150", "100"), gaps({"10", "20", "-5", "0"}));
    EXPECT_EQ(kinds(recs), (std::vector<K>{K::ReleaseCapital}));
}

TEST(Recommend, NothingAtRisk) {
    EXPECT_EQ(kinds(recommend(report_with("10", "0"), gaps({"0", "0", "0", "0"}))), (std::vector<K>{K::ReleaseCapital}));
    EXPECT_EQ(kinds(recommend(report_with("-10", "0"), gaps({"0", "0", "0", "0"}))), (std::vector<K>{K::RetainEarnings}));
}

TEST(Recommend, ReportsMustShareADate) {
    auto g = gaps({"0", "0", "0", "0"});
    g.as_of = Date(2024, 2, 1);
    EXPECT_THROW(recommend(report_with("1", "1"), g), StructuralError);
}

TEST(Svg, ChartsAreWellFormed) {
    const auto bar = bar_chart_svg("gap <&>", {"day", "week"}, {-1.5, 2.0});
    EXPECT_EQ(bar.rfind("<svg", 0), 0u);
    EXPECT_NE(bar.find("gap &lt;&amp;&gt;"), std::string::npos);
    EXPECT_EQ(std::count(bar.begin(), bar.end(), '<'), std::count(bar.begin(), bar.end(), '>'));
    const auto line = line_chart_svg("cr", {"a", "b"}, {{"x", {1.0, std::nan("")}}});
    EXPECT_NE(line.find("<polyline"), std::string::npos);
    EXPECT_EQ(line.find("nan"), std::string::npos);
}

RunOptions maker_options(const std::filesystem::path& out) {
    RunOptions o;
    o.snapshot = maker_dir() / "snapshot.json";
    o.holders = maker_dir() / "holders.json";
    o.scenario = maker_dir() / "scenario.json";
    o.out_dir = out;
    return o;
}

TEST(Runners, CarMatchesGoldenTablesAndFlagsBreach) {
    TempDir dir("car");
    std::ostringstream out, err;
    EXPECT_EQ(run_car(maker_options(dir.path()), out, err), kRiskBreach) << err.str();
    EXPECT_EQ(slurp(dir / "car_table.csv"), slurp(golden_dir() / "car_table.csv"));
    EXPECT_EQ(slurp(dir / "car_components.csv"), slurp(golden_dir() / "car_components.csv"));
    const auto j = nlohmann::json::parse(slurp(dir / "car_report.json"));
    EXPECT_EQ(j["schema"], "calm.car_report");
    EXPECT_EQ(j["classification"], "undercapitalized");
    EXPECT_TRUE(j["reference_check"]["discrepancy"].get<bool>());
    EXPECT_TRUE(j["provenance"]["defaults_applied"].is_array());
    for (const auto& e : std::filesystem::directory_iterator(dir.path()))
        EXPECT_NE(e.path().extension(), ".tmp") << "temporary file left behind";
}

TEST(Runners, ThresholdOverrideChangesTheExitStatus) {
    TempDir dir("car-threshold");
    auto o = maker_options(dir.path());
    o.cr_threshold = D("0.4");
    std::ostringstream out, err;
    EXPECT_EQ(run_car(o, out, err), kHealthy) << err.str();
}

TEST(Runners, OutputIsByteIdenticalAcrossRuns) {
    TempDir a("det-a"), b("det-b");
    std::ostringstream out, err;
    auto oa = maker_options(a.path()), ob = maker_options(b.path());
    ob.out_dir = b.path();
    oa.workers = 1;
    ob.workers = 4;
    run_car(oa, out, err);
    run_car(ob, out, err);
    EXPECT_EQ(slurp(a / "car_report.json"), slurp(b / "car_report.json"));
}

TEST(Runners, LiquidityMatchesGolden) {
    TempDir dir("liq");
    std::ostringstream out, err;
    EXPECT_EQ(run_liquidity(maker_options(dir.path()), out, err), kRiskBreach) << err.str();
    EXPECT_EQ(slurp(dir / "funding_gap.csv"), slurp(golden_dir() / "funding_gap.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "funding_gap.svg"));
    const auto j = nlohmann::json::parse(slurp(dir / "funding_gap.json"));
    EXPECT_EQ(j["sign_convention"], "liquidity_minus_outflow");
    EXPECT_EQ(j["buckets"][0]["cumulative_gap"], "-728072508");
}

TEST(Runners, RecommendWritesActions) {
    TempDir dir("rec");
    std::ostringstream out, err;
    EXPECT_EQ(run_recommend(maker_options(dir.path()), out, err), kRiskBreach) << err.str();
    const auto j = nlohmann::json::parse(slurp(dir / "recommendations.json"));
    ASSERT_EQ(j["recommendations"].size(), 3u);
    EXPECT_EQ(j["recommendations"][0]["kind"], "retain_earnings");
    EXPECT_EQ(j["recommendations"][1]["kind"], "increase_day_liquidity");
    EXPECT_EQ(j["recommendations"][1]["amount"], "728072508");
}

TEST(Runners, InputErrorsExitWithOne) {
    TempDir dir("bad");
    write_text(dir / "snapshot.json", R"({"schema_version": 1, "as_of": "2024-01-31", "assets": [], "liabilities": []})");
    auto o = maker_options(dir.path());
    o.snapshot = dir / "snapshot.json";
    std::ostringstream out, err;
    EXPECT_EQ(run_car(o, out, err), kInputError);
    EXPECT_NE(err.str().find("expected exactly one equity position"), std::string::npos) << err.str();
    o.snapshot = dir / "missing.json";
    EXPECT_EQ(run_liquidity(o, out, err), kInputError);
}

TEST(Runners, TimeseriesOverSyntheticDates) {
    TempDir dir("ts");
    RunOptions o;
    o.snapshot_dir = synthetic_dir();
    o.scenario = synthetic_dir() / "scenario.json";
    o.out_dir = dir.path();
    std::ostringstream out, err;
    EXPECT_EQ(run_timeseries(o, out, err), kHealthy) << err.str();
    EXPECT_EQ(slurp(dir / "timeseries.csv"), slurp(golden_dir() / "timeseries.csv"));
    for (const char* f : {"car_by_source.svg", "car_by_class.svg", "capital_ratio.svg", "timeseries.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
}

// Date 2 doubles every exposure against unchanged capital: CaR 25,900 -> 51,800,
// CR 0.5 -> 0.25.
TEST(Runners, TimeseriesRowsByHand) {
    const auto series = compute_timeseries(synthetic_dir(), load_scenario(synthetic_dir() / "scenario.json"));
    ASSERT_EQ(series.rows.size(), 2u);
    EXPECT_TRUE(series.skipped.empty());
    EXPECT_EQ(series.rows[0].car.total_car, Money(25'900));
    EXPECT_EQ(series.rows[1].car.total_car, Money(51'800));
    EXPECT_EQ(series.rows[0].car.cr.value(), D("0.5"));
    EXPECT_EQ(series.rows[1].car.cr.value(), D("0.25"));
    ASSERT_TRUE(series.rows[0].gap.has_value());
    EXPECT_EQ(series.rows[0].gap->cumulative_gap[Bucket::Week], Money(-60'000));
    EXPECT_FALSE(series.rows[1].gap.has_value());
}

TEST(Runners, TimeseriesSkipsBadFilesAndKeepsGoing) {
    TempDir dir("ts-bad");
    std::filesystem::copy(synthetic_dir() / "snapshot_2024-01-31.json", dir / "snapshot_2024-01-31.json");
    write_text(dir / "snapshot_2024-02-29.json", "not json");
    const auto series = compute_timeseries(dir.path(), load_scenario(synthetic_dir() / "scenario.json"));
    EXPECT_EQ(series.rows.size(), 1u);
    ASSERT_EQ(series.skipped.size(), 1u);
    EXPECT_NE(series.skipped[0].find("snapshot_2024-02-29.json"), std::string::npos);

    TempDir empty("ts-empty");
    RunOptions o;
    o.snapshot_dir = empty.path();
    o.scenario = synthetic_dir() / "scenario.json";
    o.out_dir = empty.path() / "out";
    std::ostringstream out, err;
    EXPECT_EQ(run_timeseries(o, out, err), kHealthy);
    EXPECT_NE(err.str().find("no dated snapshots"), std::string::npos);
    o.snapshot_dir = empty.path() / "nope";
    EXPECT_EQ(run_timeseries(o, out, err), kInputError);
}

}  // namespace
}  // namespace calm::test
