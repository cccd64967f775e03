#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calm/balance_sheet.hpp"
#include "calm/capital_risk.hpp"
#include "calm/crypto_mc.hpp"
#include "calm/ingestion.hpp"
#include "calm/liquidity.hpp"

namespace calm {

inline constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Recommendations

struct Recommendation {
    enum class Kind { RetainEarnings, ReleaseCapital, IncreaseDayLiquidity, ExtendMaturity };

    Kind kind;
    Money amount;
    std::string rationale;
};

inline std::string_view to_string(Recommendation::Kind k) {
    switch (k) {
        case Recommendation::Kind::RetainEarnings: return "retain_earnings";
        case Recommendation::Kind::ReleaseCapital: return "release_capital";
        case Recommendation::Kind::IncreaseDayLiquidity: return "increase_day_liquidity";
        case Recommendation::Kind::ExtendMaturity: return "extend_maturity";
    }
    return "";
}

/// Capital and liquidity actions implied by one date's reports.
///
/// - cr <= 1: retain earnings until capital covers CaR (amount = CaR - capital, floored at 0).
/// - cr > 1: the excess capital may be released; emitted when the excess is positive.
/// - negative Day gap: top up Day-bucket liquidity by the shortfall.
/// - a positive cumulative gap that stays non-negative through the Year bucket:
///   room to extend asset maturity by the largest such surplus.
inline std::vector<Recommendation> recommend(const CaRReport& car, const FundingGapReport& gap) {
    if (car.as_of != gap.as_of)
        throw StructuralError("capital report dated " + car.as_of.to_string() + " does not match funding gap report dated " +
                              gap.as_of.to_string());
    std::vector<Recommendation> out;
    using K = Recommendation::Kind;
    const std::string cr_text =
        car.cr.is_finite() ? (car.cr.value() * Decimal(100)).to_fixed(1) + "%" : car.cr.to_string();
    if (car.cr.at_or_below(Fraction(1))) {
        const Money shortfall = std::max(Money(0), car.total_car - car.capital);
        out.push_back({K::RetainEarnings, shortfall,
                       "capital ratio " + cr_text + " is at or below 100%; channel income into the capital "
                       "buffer until capital reaches capital at risk"});
    } else {
        const Money excess = car.capital - car.total_car;
        if (excess > Money(0))
            out.push_back({K::ReleaseCapital, excess,
                           "capital ratio " + cr_text + " exceeds 100%; capital above capital at risk may "
                           "be spent, pacing is left to the operator"});
    }

    const Money day_shortfall = std::max(Money(0), -gap.cumulative_gap[Bucket::Day]);
    if (day_shortfall > Money(0))
        out.push_back({K::IncreaseDayLiquidity, day_shortfall,
                       "stressed one-day outflows exceed one-day liquidity; add this much to Day-bucket reserves"});

    std::optional<Bucket> peak;
    for (Bucket b : kBuckets)
        if (gap.cumulative_gap[b] > Money(0) && (!peak || gap.cumulative_gap[b] > gap.cumulative_gap[*peak])) peak = b;
    if (peak) {
        bool persistent = true;
        for (Bucket b : kBuckets)
            if (index(b) >= index(*peak) && gap.cumulative_gap[b].is_negative()) persistent = false;
        if (persistent)
            out.push_back({K::ExtendMaturity, gap.cumulative_gap[*peak],
                           "liquidity surplus from the " + std::string(to_string(*peak)) +
                               " bucket onwards; asset maturity could be extended by up to this amount"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Formatting

namespace report_detail {

inline std::string millions(const Money& m) { return (m / Money(1'000'000)).to_fixed(1); }
inline std::string percent(const Fraction& f) { return (f * Decimal(100)).to_fixed(1); }
inline std::string units(const Money& m) { return m.to_fixed(0); }

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

}  // namespace report_detail

/// Per-class exposure, CaR and CaRR (millions / percent, one decimal) plus a total row.
inline std::string car_table_csv(const CaRReport& r) {
    using namespace report_detail;
    std::ostringstream os;
    os << "asset_class,exposure_musd,car_musd,carr_pct\n";
    for (const auto& row : class_breakdown(r))
        os << to_string(row.asset_class) << ',' << millions(row.exposure) << ',' << millions(row.car) << ','
           << percent(row.carr) << '\n';
    os << "balance_sheet," << millions(r.total_exposure) << ',' << millions(r.total_car) << ','
       << percent(r.aggregate_carr) << '\n';
    return os.str();
}

/// Per-class CaRR split into its four components (percent, one decimal).
inline std::string car_components_csv(const CaRReport& r) {
    using namespace report_detail;
    std::ostringstream os;
    os << "asset_class,duration_pct,credit_pct,market_pct,operational_pct\n";
    for (const auto& row : class_breakdown(r))
        os << to_string(row.asset_class) << ',' << percent(row.duration_carr) << ',' << percent(row.credit_carr) << ','
           << percent(row.market_carr) << ',' << percent(row.operational_carr) << '\n';
    return os.str();
}

/// Four-bucket funding gap table in whole units.
inline std::string funding_gap_csv(const FundingGapReport& g) {
    using namespace report_detail;
    std::ostringstream os;
    os << "bucket,possible_outflows,available_liquidity,funding_gap\n";
    for (Bucket b : kBuckets)
        os << to_string(b) << ',' << units(g.outflow[b]) << ',' << units(g.liquidity[b]) << ','
           << units(g.cumulative_gap[b]) << '\n';
    return os.str();
}

struct Provenance {
    std::map<std::string, std::string> inputs;
    std::vector<std::string> defaults_applied;
};

inline nlohmann::ordered_json provenance_json(const Provenance& p) {
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.inputs) j["inputs"][k] = v;
    j["defaults_applied"] = p.defaults_applied;
    return j;
}

/// Machine-readable capital report, full precision.
inline nlohmann::ordered_json car_report_json(const CaRReport& r, const MonteCarloConfig& mc, const Provenance& prov) {
    nlohmann::ordered_json j;
    j["schema"] = "calm.car_report";
    j["schema_version"] = kSchemaVersion;
    j["as_of"] = r.as_of.to_string();
    j["capital"] = r.capital.to_string();
    j["total_exposure"] = r.total_exposure.to_string();
    j["total_car"] = r.total_car.to_string();
    j["aggregate_carr"] = r.aggregate_carr.to_string();
    j["cr"] = r.cr.to_string();
    j["cr_threshold"] = r.cr_threshold.to_string();
    j["classification"] = to_string(r.classification);
    j["lines"] = nlohmann::ordered_json::array();
    for (const auto& l : r.lines) {
        j["lines"].push_back({{"position_id", l.position_id},
                              {"class", to_string(l.asset_class)},
                              {"exposure", l.exposure.to_string()},
                              {"duration_carr", l.duration_carr.to_string()},
                              {"credit_carr", l.credit_carr.to_string()},
                              {"market_carr", l.market_carr.to_string()},
                              {"operational_carr", l.operational_carr.to_string()},
                              {"carr", l.carr.to_string()},
                              {"car", l.car.to_string()},
                              {"clamped", l.clamped}});
    }
    j["by_class"] = nlohmann::ordered_json::array();
    for (const auto& c : class_breakdown(r)) {
        j["by_class"].push_back({{"class", to_string(c.asset_class)},
                                 {"exposure", c.exposure.to_string()},
                                 {"car", c.car.to_string()},
                                 {"carr", c.carr.to_string()},
                                 {"duration_carr", c.duration_carr.to_string()},
                                 {"credit_carr", c.credit_carr.to_string()},
                                 {"market_carr", c.market_carr.to_string()},
                                 {"operational_carr", c.operational_carr.to_string()}});
    }
    const auto src = source_breakdown(r);
    j["by_source"] = {{"duration", src.duration.to_string()},
                      {"credit", src.credit.to_string()},
                      {"market", src.market.to_string()},
                      {"operational", src.operational.to_string()}};
    if (r.reference) {
        const auto& c = *r.reference;
        j["reference_check"] = {{"published_total", c.published_total.to_string()},
                                {"published_row_sum", c.published_row_sum.to_string()},
                                {"computed_total", c.computed_total.to_string()},
                                {"published_inconsistent", c.published_inconsistent},
                                {"computed_differs", c.computed_differs},
                                {"discrepancy", c.discrepancy}};
    } else {
        j["reference_check"] = nullptr;
    }
    nlohmann::ordered_json m;
    m["n_paths"] = mc.n_paths;
    m["horizon_days"] = mc.horizon_days;
    m["daily_volatility"] = mc.daily_volatility.to_string();
    m["daily_drift"] = mc.daily_drift.to_string();
    m["jump_probability"] = mc.jump_probability.to_string();
    m["jump_size"] = mc.jump_size.to_string();
    m["seed"] = mc.seed;
    m["loss_statistic"] = mc.loss_statistic.kind == LossStatistic::Kind::Mean
                              ? std::string("mean")
                              : "percentile:" + mc.loss_statistic.level.to_string();
    j["market_model"] = std::move(m);
    j["provenance"] = provenance_json(prov);
    return j;
}

inline nlohmann::ordered_json funding_gap_json(const FundingGapReport& g, const BucketedLiabilityProfile& profile,
                                               const Provenance& prov) {
    nlohmann::ordered_json j;
    j["schema"] = "calm.funding_gap_report";
    j["schema_version"] = kSchemaVersion;
    j["as_of"] = g.as_of.to_string();
    j["sign_convention"] = kGapSignConvention;
    j["buckets"] = nlohmann::ordered_json::array();
    for (Bucket b : kBuckets)
        j["buckets"].push_back({{"bucket", to_string(b)},
                                {"outflow", g.outflow[b].to_string()},
                                {"liquidity", g.liquidity[b].to_string()},
                                {"cumulative_gap", g.cumulative_gap[b].to_string()}});
    j["terminal_gap"] = g.terminal_gap.to_string();
    nlohmann::ordered_json p;
    p["total"] = profile.total.to_string();
    p["groups"] = nlohmann::ordered_json::array();
    for (const auto& grp : profile.groups) {
        nlohmann::ordered_json gj;
        gj["label"] = grp.label;
        gj["total"] = grp.total.to_string();
        for (Bucket b : kBuckets)
            gj["buckets"].push_back({{"bucket", to_string(b)},
                                     {"cumulative_fraction", grp.cumulative_fraction[b].to_string()},
                                     {"source", to_string(grp.source[b])},
                                     {"outflow", grp.outflow[b].to_string()}});
        p["groups"].push_back(std::move(gj));
    }
    j["outflow_profile"] = std::move(p);
    j["provenance"] = provenance_json(prov);
    return j;
}

inline nlohmann::ordered_json recommendations_json(const Date& as_of, const std::vector<Recommendation>& recs,
                                                   const Provenance& prov) {
    nlohmann::ordered_json j;
    j["schema"] = "calm.recommendations";
    j["schema_version"] = kSchemaVersion;
    j["as_of"] = as_of.to_string();
    j["recommendations"] = nlohmann::ordered_json::array();
    for (const auto& r : recs)
        j["recommendations"].push_back(
            {{"kind", to_string(r.kind)}, {"amount", r.amount.to_string()}, {"rationale", r.rationale}});
    j["provenance"] = provenance_json(prov);
    return j;
}

// ---------------------------------------------------------------------------
// Static SVG plots

/// Vertical bar chart; negative bars hang below the zero line.
inline std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                                 const std::vector<double>& values) {
    using report_detail::num;
    const double width = 640, height = 400, left = 80, right = 20, top = 40, bottom = 50;
    double lo = 0, hi = 0;
    for (double v : values) lo = std::min(lo, v), hi = std::max(hi, v);
    if (hi == lo) hi = lo + 1;
    const double plot_h = height - top - bottom;
    auto y = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };
    const double slot = (width - left - right) / std::max<std::size_t>(1, values.size());

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << report_detail::svg_escape(title) << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << num(y(0)) << "\" x2=\"" << width - right << "\" y2=\"" << num(y(0))
       << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = left + slot * static_cast<double>(i) + slot * 0.15;
        const double top_y = std::min(y(values[i]), y(0));
        const double h = std::abs(y(values[i]) - y(0));
        os << "<rect x=\"" << num(x) << "\" y=\"" << num(top_y) << "\" width=\"" << num(slot * 0.7) << "\" height=\""
           << num(h) << "\" fill=\"" << (values[i] < 0 ? "#a33" : "#3a6") << "\"/>\n";
        os << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << height - bottom + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           << report_detail::svg_escape(i < labels.size() ? labels[i] : "") << "</text>\n";
        os << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << num(top_y - 4)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(values[i]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

struct LineSeries {
    std::string name;
    std::vector<double> values;
};

/// Multi-series line chart over categorical x labels (dates).
inline std::string line_chart_svg(const std::string& title, const std::vector<std::string>& x_labels,
                                  const std::vector<LineSeries>& series) {
    using report_detail::num;
    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    const double width = 720, height = 420, left = 80, right = 160, top = 40, bottom = 50;
    double lo = 0, hi = 0;
    for (const auto& s : series)
        for (double v : s.values)
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    if (hi == lo) hi = lo + 1;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    const std::size_t n = x_labels.size();
    auto x = [&](std::size_t i) { return left + (n <= 1 ? plot_w / 2 : plot_w * static_cast<double>(i) / static_cast<double>(n - 1)); };
    auto y = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<text x=\"" << (left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"16\">" << report_detail::svg_escape(title) << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << num(y(0)) << "\" x2=\"" << left + plot_w << "\" y2=\"" << num(y(0))
       << "\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << num(y(hi)) << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"11\">" << num(hi) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << num(y(lo)) << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"11\">" << num(lo) << "</text>\n";
    for (std::size_t i = 0; i < n; ++i)
        os << "<text x=\"" << num(x(i)) << "\" y=\"" << height - bottom + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << report_detail::svg_escape(x_labels[i]) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < series[s].values.size() && i < n; ++i)
            if (std::isfinite(series[s].values[i])) os << num(x(i)) << ',' << num(y(series[s].values[i])) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << top + 16 * (s + 1) << "\" fill=\"" << color
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << report_detail::svg_escape(series[s].name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Runners behind the command-line subcommands

/// Exit statuses: stable across releases.
enum ExitStatus : int { kHealthy = 0, kInputError = 1, kRiskBreach = 2 };

struct RunOptions {
    std::filesystem::path snapshot;
    std::filesystem::path holders;
    std::filesystem::path scenario;
    std::filesystem::path snapshot_dir;
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<Fraction> cr_threshold;
    std::optional<unsigned> workers;
    bool split_holder_classes = false;
};

namespace report_detail {

struct ScenarioInputs {
    Scenario scenario;
    Provenance provenance;
};

inline ScenarioInputs load_scenario_inputs(const RunOptions& opt) {
    ScenarioInputs in{load_scenario(opt.scenario), {}};
    auto& sc = in.scenario;
    if (opt.seed) sc.risk.market_model.seed = *opt.seed;
    if (opt.workers) sc.risk.market_model.workers = *opt.workers;
    if (opt.cr_threshold) sc.tolerances.cr_threshold = *opt.cr_threshold;
    if (opt.split_holder_classes) sc.bucketing.split_by_class = true;
    in.provenance.inputs["scenario"] = opt.scenario.generic_string();
    in.provenance.defaults_applied = sc.defaults_applied;
    if (opt.seed) in.provenance.defaults_applied.push_back("monte_carlo.seed overridden on the command line");
    return in;
}

inline CaRReport compute_car(const BalanceSheetSnapshot& s, const std::filesystem::path& snapshot_path,
                             const Scenario& sc) {
    const CollateralBook book = load_collateral_book(s, snapshot_path.parent_path());
    return car_report(s, sc.risk, book, CarOptions{sc.tolerances.cr_threshold, sc.reference});
}

inline FundingGapReport compute_gap(const BalanceSheetSnapshot& s, const std::vector<HolderRecord>& holders,
                                    const Scenario& sc, BucketedLiabilityProfile* profile_out = nullptr) {
    auto profile = bucket_liabilities(holders, s.as_of, sc.bucketing);
    auto schedule = asset_liquidity_schedule(s, sc.haircuts);
    auto gap = funding_gap(profile, schedule);
    if (profile_out) *profile_out = std::move(profile);
    return gap;
}

inline bool any_negative_gap(const FundingGapReport& g) {
    for (Bucket b : kBuckets)
        if (g.cumulative_gap[b].is_negative()) return true;
    return false;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
    } catch (const Error& e) {
        err << "input error: " << e.what() << '\n';
    } catch (const std::filesystem::filesystem_error& e) {
        err << "input error: " << e.what() << '\n';
    } catch (const nlohmann::json::exception& e) {
        err << "input error: " << e.what() << '\n';
    }
    return kInputError;
}

}  // namespace report_detail

/// `car`: capital tables, machine report. Exit 2 when undercapitalized.
inline int run_car(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    using namespace report_detail;
    return guarded(err, [&] {
        auto in = load_scenario_inputs(opt);
        const auto s = load_snapshot(opt.snapshot, in.scenario.tolerances.balance_identity);
        in.provenance.inputs["snapshot"] = opt.snapshot.generic_string();
        const auto report = compute_car(s, opt.snapshot, in.scenario);

        write_atomic(opt.out_dir / "car_table.csv", car_table_csv(report));
        write_atomic(opt.out_dir / "car_components.csv", car_components_csv(report));
        write_atomic(opt.out_dir / "car_report.json",
                     car_report_json(report, in.scenario.risk.market_model, in.provenance).dump(2) + "\n");

        out << car_table_csv(report);
        out << "capital=" << report.capital.to_fixed(2) << " total_car=" << report.total_car.to_fixed(2)
            << " cr=" << (report.cr.is_finite() ? percent(report.cr.value()) + "%" : report.cr.to_string())
            << " classification=" << to_string(report.classification) << '\n';
        if (report.reference && report.reference->discrepancy)
            out << "note: computed or published totals disagree with the published reference (see car_report.json)\n";
        return report.classification == Classification::Undercapitalized ? kRiskBreach : kHealthy;
    });
}

/// `liquidity`: funding gap table, machine report, bar chart. Exit 2 on any negative cumulative gap.
inline int run_liquidity(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    using namespace report_detail;
    return guarded(err, [&] {
        auto in = load_scenario_inputs(opt);
        const auto s = load_snapshot(opt.snapshot, in.scenario.tolerances.balance_identity);
        const auto holders = opt.holders.empty() ? std::vector<HolderRecord>{} : load_holders(opt.holders);
        in.provenance.inputs["snapshot"] = opt.snapshot.generic_string();
        if (!opt.holders.empty()) in.provenance.inputs["holders"] = opt.holders.generic_string();
        BucketedLiabilityProfile profile;
        const auto gap = compute_gap(s, holders, in.scenario, &profile);

        write_atomic(opt.out_dir / "funding_gap.csv", funding_gap_csv(gap));
        write_atomic(opt.out_dir / "funding_gap.json", funding_gap_json(gap, profile, in.provenance).dump(2) + "\n");
        std::vector<std::string> labels;
        std::vector<double> values;
        for (Bucket b : kBuckets) {
            labels.emplace_back(to_string(b));
            values.push_back((gap.cumulative_gap[b] / Money(1'000'000)).to_double());
        }
        write_atomic(opt.out_dir / "funding_gap.svg",
                     bar_chart_svg("Cumulative funding gap ($M), " + gap.as_of.to_string(), labels, values));

        out << funding_gap_csv(gap);
        return any_negative_gap(gap) ? kRiskBreach : kHealthy;
    });
}

/// `recommend`: capital and liquidity actions. Exit 2 when either metric is in breach.
inline int run_recommend(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    using namespace report_detail;
    return guarded(err, [&] {
        auto in = load_scenario_inputs(opt);
        const auto s = load_snapshot(opt.snapshot, in.scenario.tolerances.balance_identity);
        const auto holders = opt.holders.empty() ? std::vector<HolderRecord>{} : load_holders(opt.holders);
        in.provenance.inputs["snapshot"] = opt.snapshot.generic_string();
        if (!opt.holders.empty()) in.provenance.inputs["holders"] = opt.holders.generic_string();
        const auto car = compute_car(s, opt.snapshot, in.scenario);
        const auto gap = compute_gap(s, holders, in.scenario);
        const auto recs = recommend(car, gap);

        write_atomic(opt.out_dir / "recommendations.json", recommendations_json(s.as_of, recs, in.provenance).dump(2) + "\n");
        for (const auto& r : recs) out << to_string(r.kind) << ',' << r.amount.to_fixed(2) << ',' << r.rationale << '\n';
        const bool breach = car.classification == Classification::Undercapitalized || any_negative_gap(gap);
        return breach ? kRiskBreach : kHealthy;
    });
}

/// One date of a time series run.
struct SeriesRow {
    Date as_of;
    CaRReport car;
    std::optional<FundingGapReport> gap;
};

struct SeriesResult {
    std::vector<SeriesRow> rows;
    std::vector<std::string> skipped;  // "file: reason"
};

/// Runs the capital (and, where a matching holders file exists, liquidity)
/// engines over every `snapshot_*.json` in a directory. A bad file is skipped
/// and reported; the remaining dates still run.
inline SeriesResult compute_timeseries(const std::filesystem::path& dir, const Scenario& sc) {
    SeriesResult result;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("snapshot_") && name.ends_with(".json")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            const auto s = load_snapshot(f, sc.tolerances.balance_identity);
            SeriesRow row{s.as_of, report_detail::compute_car(s, f, sc), std::nullopt};
            const auto holders_path = dir / ("holders_" + s.as_of.to_string() + ".json");
            if (std::filesystem::exists(holders_path)) row.gap = report_detail::compute_gap(s, load_holders(holders_path), sc);
            result.rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            result.skipped.push_back(f.filename().string() + ": " + e.what());
        }
    }
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const auto& a, const auto& b) { return a.as_of < b.as_of; });
    return result;
}

inline std::string timeseries_csv(const SeriesResult& series) {
    using namespace report_detail;
    std::ostringstream os;
    os << "as_of,total_car,car_duration,car_credit,car_market,car_operational";
    for (AssetClass c : kAssetClasses) os << ",car_" << to_string(c);
    os << ",capital,cr";
    for (Bucket b : kBuckets) os << ",gap_" << to_string(b);
    os << '\n';
    for (const auto& row : series.rows) {
        const auto src = source_breakdown(row.car);
        os << row.as_of.to_string() << ',' << row.car.total_car.to_fixed(2) << ',' << src.duration.to_fixed(2) << ','
           << src.credit.to_fixed(2) << ',' << src.market.to_fixed(2) << ',' << src.operational.to_fixed(2);
        const auto classes = class_breakdown(row.car);
        for (AssetClass c : kAssetClasses) {
            Money car;
            for (const auto& cs : classes)
                if (cs.asset_class == c) car = cs.car;
            os << ',' << car.to_fixed(2);
        }
        os << ',' << row.car.capital.to_fixed(2) << ',' << row.car.cr.to_string();
        for (Bucket b : kBuckets) {
            os << ',';
            if (row.gap) os << row.gap->cumulative_gap[b].to_fixed(2);
        }
        os << '\n';
    }
    return os.str();
}

/// `timeseries`: one row per date plus line plots of CaR by source, CaR by class and CR.
inline int run_timeseries(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    using namespace report_detail;
    return guarded(err, [&] {
        auto in = load_scenario_inputs(opt);
        if (!std::filesystem::is_directory(opt.snapshot_dir))
            throw Error("snapshot directory '" + opt.snapshot_dir.string() + "' does not exist");
        const auto series = compute_timeseries(opt.snapshot_dir, in.scenario);
        for (const auto& s : series.skipped) err << "warning: skipped " << s << '\n';
        if (series.rows.empty()) err << "warning: no dated snapshots found in " << opt.snapshot_dir.string() << '\n';

        write_atomic(opt.out_dir / "timeseries.csv", timeseries_csv(series));

        nlohmann::ordered_json j;
        j["schema"] = "calm.timeseries";
        j["schema_version"] = kSchemaVersion;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : series.rows) {
            nlohmann::ordered_json r;
            r["car_report"] = car_report_json(row.car, in.scenario.risk.market_model, {});
            r["car_report"].erase("provenance");
            if (row.gap) {
                nlohmann::ordered_json g;
                for (Bucket b : kBuckets) g[std::string(to_string(b))] = row.gap->cumulative_gap[b].to_string();
                r["cumulative_gap"] = std::move(g);
            } else {
                r["cumulative_gap"] = nullptr;
            }
            j["rows"].push_back(std::move(r));
        }
        j["skipped"] = series.skipped;
        in.provenance.inputs["snapshot_dir"] = opt.snapshot_dir.generic_string();
        j["provenance"] = provenance_json(in.provenance);
        write_atomic(opt.out_dir / "timeseries.json", j.dump(2) + "\n");

        std::vector<std::string> dates;
        LineSeries dur{"duration", {}}, cred{"credit", {}}, mkt{"market", {}}, ops{"operational", {}}, cr{"CR (%)", {}};
        std::vector<LineSeries> by_class;
        for (AssetClass c : kAssetClasses) by_class.push_back({std::string(to_string(c)), {}});
        for (const auto& row : series.rows) {
            dates.push_back(row.as_of.to_string());
            const auto src = source_breakdown(row.car);
            const auto m = [](const Money& v) { return (v / Money(1'000'000)).to_double(); };
            dur.values.push_back(m(src.duration));
            cred.values.push_back(m(src.credit));
            mkt.values.push_back(m(src.market));
            ops.values.push_back(m(src.operational));
            const auto classes = class_breakdown(row.car);
            for (std::size_t k = 0; k < kAssetClasses.size(); ++k) {
                double v = 0;
                for (const auto& cs : classes)
                    if (cs.asset_class == kAssetClasses[k]) v = m(cs.car);
                by_class[k].values.push_back(v);
            }
            cr.values.push_back(row.car.cr.is_finite() ? (row.car.cr.value() * Decimal(100)).to_double()
                                                       : std::numeric_limits<double>::quiet_NaN());
        }
        write_atomic(opt.out_dir / "car_by_source.svg", line_chart_svg("Capital at risk by source ($M)", dates, {dur, cred, mkt, ops}));
        write_atomic(opt.out_dir / "car_by_class.svg", line_chart_svg("Capital at risk by asset class ($M)", dates, by_class));
        write_atomic(opt.out_dir / "capital_ratio.svg", line_chart_svg("Capital ratio (%)", dates, {cr}));

        out << timeseries_csv(series);
        return kHealthy;
    });
}

}  // namespace calm
