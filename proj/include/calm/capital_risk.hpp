#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "calm/balance_sheet.hpp"
#include "calm/crypto_mc.hpp"
#include "calm/decimal.hpp"
#include "calm/error.hpp"

namespace calm {

/// Credit loss as probability of default times loss given default.
struct PdLgd {
    Fraction pd;
    Fraction lgd;
    friend bool operator==(const PdLgd&, const PdLgd&) = default;
};

/// A credit override is either a flat loss fraction or a PD/LGD pair. The two
/// methods are alternatives per position and are never combined.
using CreditSpec = std::variant<Fraction, PdLgd>;

struct RiskParameterSet {
    Decimal rate_shock_bps = Decimal(200);
    std::map<Rating, Fraction> credit_rating_table;
    std::map<std::string, CreditSpec> credit_position_overrides;
    std::map<AssetClass, CreditSpec> credit_class_overrides;
    std::map<std::string, Fraction> operational_table;
    MonteCarloConfig market_model;
};

namespace detail {

inline void require_unit(const Fraction& f, const std::string& what) {
    if (f.is_negative() || f > Fraction(1)) throw DomainError(what + " must lie in [0, 1], got " + f.to_string());
}

inline void require_unit(const CreditSpec& c, const std::string& what) {
    if (const auto* f = std::get_if<Fraction>(&c)) {
        require_unit(*f, what);
    } else {
        const auto& p = std::get<PdLgd>(c);
        require_unit(p.pd, what + " pd");
        require_unit(p.lgd, what + " lgd");
    }
}

inline Fraction credit_fraction(const CreditSpec& c) {
    if (const auto* f = std::get_if<Fraction>(&c)) return *f;
    const auto& p = std::get<PdLgd>(c);
    return p.pd * p.lgd;
}

}  // namespace detail

inline void validate(const RiskParameterSet& params) {
    if (params.rate_shock_bps.is_negative()) throw DomainError("rate_shock must be >= 0 bps");
    for (const auto& [r, f] : params.credit_rating_table)
        detail::require_unit(f, "credit CaRR for rating " + std::string(to_string(r)));
    for (const auto& [id, c] : params.credit_position_overrides) detail::require_unit(c, "credit override '" + id + "'");
    for (const auto& [cls, c] : params.credit_class_overrides)
        detail::require_unit(c, "credit override '" + std::string(to_string(cls)) + "'");
    for (const auto& [id, f] : params.operational_table) detail::require_unit(f, "operational CaRR '" + id + "'");
    validate(params.market_model);
}

/// Interest-rate loss fraction under a parallel shock, with average maturity
/// standing in for modified duration: maturity * shock / 10000, clamped to [0, 1].
inline Fraction duration_carr(const AssetPosition& p, const Decimal& shock_bps) {
    if (shock_bps.is_negative()) throw DomainError("rate shock must be >= 0 bps");
    if (p.avg_maturity.is_negative()) throw DomainError("position '" + p.id + "' has negative avg_maturity");
    return clamp_unit(p.avg_maturity * shock_bps / Decimal(10'000));
}

/// Credit loss fraction. Lookup order: position override, class override, rating
/// table. Classes without credit risk fall back to 0 and stablecoins to 1%. A
/// rated or credit-bearing position with no applicable entry is a configuration
/// error rather than a silent zero.
inline Fraction credit_carr(const AssetPosition& p, const RiskParameterSet& params) {
    if (auto it = params.credit_position_overrides.find(p.id); it != params.credit_position_overrides.end())
        return detail::credit_fraction(it->second);
    if (auto it = params.credit_class_overrides.find(p.asset_class); it != params.credit_class_overrides.end())
        return detail::credit_fraction(it->second);
    if (p.rating) {
        if (auto it = params.credit_rating_table.find(*p.rating); it != params.credit_rating_table.end())
            return it->second;
        throw ConfigurationError("position '" + p.id + "' is rated " + std::string(to_string(*p.rating)) +
                                 " but the rating table has no entry and no override applies");
    }
    switch (p.asset_class) {
        case AssetClass::CryptoBackedLoan:
        case AssetClass::Cash: return Fraction(0);
        case AssetClass::Stablecoin: return Fraction::parse("0.01");
        default:
            throw ConfigurationError("position '" + p.id + "' (" + std::string(to_string(p.asset_class)) +
                                     ") carries credit risk but has no rating and no override");
    }
}

/// Expected credit loss in money: exposure * pd * lgd, rounded to cents.
inline Money credit_loss_pd_lgd(const Money& exposure, const Fraction& pd, const Fraction& lgd) {
    detail::require_unit(pd, "pd");
    detail::require_unit(lgd, "lgd");
    return round_cents(exposure * pd * lgd);
}

/// Crypto market loss fraction. Non-zero only for crypto-backed loans, where it
/// is the simulated expected loss ratio of the referenced vault portfolio.
inline Fraction market_carr(const AssetPosition& p, const RiskParameterSet& params, const CollateralBook& book) {
    if (p.asset_class != AssetClass::CryptoBackedLoan) return Fraction(0);
    if (!p.collateral_ref) throw ConfigurationError("crypto-backed loan '" + p.id + "' has no collateral_ref");
    auto it = book.find(*p.collateral_ref);
    if (it == book.end())
        throw ConfigurationError("crypto-backed loan '" + p.id + "' references unknown vault portfolio '" +
                                 *p.collateral_ref + "'");
    return expected_loss_ratio(it->second, params.market_model);
}

inline Fraction operational_carr(const AssetPosition& p, const RiskParameterSet& params) {
    auto it = params.operational_table.find(p.id);
    return it == params.operational_table.end() ? Fraction(0) : it->second;
}

struct CaRLine {
    std::string position_id;
    AssetClass asset_class = AssetClass::Other;
    Money exposure;
    Fraction duration_carr, credit_carr, market_carr, operational_carr;
    Fraction carr;
    Money car;
    bool clamped = false;  // component sum exceeded 1 and was capped
};

/// Assembles a line from already-computed components.
inline CaRLine make_line(const AssetPosition& p, Fraction duration, Fraction credit, Fraction market,
                         Fraction operational) {
    CaRLine line{p.id, p.asset_class, p.exposure, duration, credit, market, operational, {}, {}, false};
    const Fraction sum = duration + credit + market + operational;
    line.clamped = sum > Fraction(1);
    line.carr = line.clamped ? Fraction(1) : sum;
    line.car = round_cents(p.exposure * line.carr);
    return line;
}

inline CaRLine carr(const AssetPosition& p, const RiskParameterSet& params, const CollateralBook& book) {
    return make_line(p, duration_carr(p, params.rate_shock_bps), credit_carr(p, params), market_carr(p, params, book),
                     operational_carr(p, params));
}

/// Capital ratio; infinite when there is nothing at risk.
class CapitalRatio {
public:
    enum class Kind { Finite, PositiveInfinite, NegativeInfinite };

    static CapitalRatio finite(Fraction v) { return {Kind::Finite, v}; }
    static CapitalRatio infinite(bool negative = false) {
        return {negative ? Kind::NegativeInfinite : Kind::PositiveInfinite, {}};
    }

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    const Fraction& value() const { return value_; }

    /// True when the ratio is at or below `threshold`.
    bool at_or_below(const Fraction& threshold) const {
        switch (kind_) {
            case Kind::Finite: return value_ <= threshold;
            case Kind::PositiveInfinite: return false;
            case Kind::NegativeInfinite: return true;
        }
        return false;
    }

    std::string to_string() const {
        switch (kind_) {
            case Kind::Finite: return value_.to_string();
            case Kind::PositiveInfinite: return "inf";
            case Kind::NegativeInfinite: return "-inf";
        }
        return "";
    }

private:
    CapitalRatio(Kind k, Fraction v) : kind_(k), value_(v) {}
    Kind kind_;
    Fraction value_;
};

enum class Classification { Undercapitalized, SufficientlyCapitalized };

inline std::string_view to_string(Classification c) {
    return c == Classification::Undercapitalized ? "undercapitalized" : "sufficiently_capitalized";
}

/// Undercapitalized iff CR <= threshold (100% by default, the boundary is inclusive).
inline Classification classify(const CapitalRatio& cr, const Fraction& threshold = Fraction(1)) {
    return cr.at_or_below(threshold) ? Classification::Undercapitalized : Classification::SufficientlyCapitalized;
}

/// Published figures the computed report is checked against.
struct PublishedReference {
    std::map<AssetClass, Money> car_by_class;
    Money total_car;
    Money tolerance = Money(100'000);
};

/// Outcome of comparing a report with a PublishedReference. `discrepancy` is set
/// when the published total disagrees with its own rows, or with the computed total.
struct ReferenceCheck {
    Money published_total;
    Money published_row_sum;
    Money computed_total;
    bool published_inconsistent = false;
    bool computed_differs = false;
    bool discrepancy = false;
};

struct CaRReport {
    Date as_of;
    std::vector<CaRLine> lines;
    Money total_exposure;
    Money total_car;
    Fraction aggregate_carr;
    Money capital;
    CapitalRatio cr = CapitalRatio::infinite();
    Fraction cr_threshold = Fraction(1);
    Classification classification = Classification::SufficientlyCapitalized;
    std::optional<ReferenceCheck> reference;
};

inline ReferenceCheck check_reference(const PublishedReference& ref, const Money& computed_total) {
    ReferenceCheck chk;
    chk.published_total = ref.total_car;
    for (const auto& [cls, car] : ref.car_by_class) chk.published_row_sum += car;
    chk.computed_total = computed_total;
    chk.published_inconsistent = !ref.car_by_class.empty() && (chk.published_row_sum - ref.total_car).abs() > ref.tolerance;
    chk.computed_differs = (computed_total - ref.total_car).abs() > ref.tolerance;
    chk.discrepancy = chk.published_inconsistent || chk.computed_differs;
    return chk;
}

inline CapitalRatio capital_ratio(const Money& capital, const Money& total_car) {
    if (total_car.is_zero()) return CapitalRatio::infinite(capital.is_negative());
    return CapitalRatio::finite(capital / total_car);
}

struct CarOptions {
    Fraction cr_threshold = Fraction(1);
    std::optional<PublishedReference> reference;
};

/// Capital at risk over a validated snapshot: one line per asset, totals, the
/// capital ratio, and its classification.
///
/// Market ratios are simulated once per distinct vault portfolio. Sums run in
/// position-id order; decimal addition is exact so the order only fixes the
/// output, never the numbers.
inline CaRReport car_report(const BalanceSheetSnapshot& s, const RiskParameterSet& params, const CollateralBook& book,
                            const CarOptions& options = {}) {
    validate(params);
    CaRReport report;
    report.as_of = s.as_of;
    report.capital = capital(s);
    report.cr_threshold = options.cr_threshold;

    std::map<std::string, Fraction> market_by_ref;
    for (const auto& p : s.assets) {
        if (p.asset_class != AssetClass::CryptoBackedLoan) continue;
        if (!p.collateral_ref) throw ConfigurationError("crypto-backed loan '" + p.id + "' has no collateral_ref");
        if (!market_by_ref.contains(*p.collateral_ref))
            market_by_ref.emplace(*p.collateral_ref, market_carr(p, params, book));
    }

    std::vector<const AssetPosition*> ordered;
    for (const auto& p : s.assets) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });

    for (const AssetPosition* p : ordered) {
        const Fraction market =
            p->asset_class == AssetClass::CryptoBackedLoan ? market_by_ref.at(*p->collateral_ref) : Fraction(0);
        report.lines.push_back(make_line(*p, duration_carr(*p, params.rate_shock_bps), credit_carr(*p, params),
                                         market, operational_carr(*p, params)));
        report.total_exposure += p->exposure;
        report.total_car += report.lines.back().car;
    }
    report.aggregate_carr = report.total_exposure > Money(0) ? report.total_car / report.total_exposure : Fraction(0);
    report.cr = capital_ratio(report.capital, report.total_car);
    report.classification = classify(report.cr, options.cr_threshold);
    if (options.reference) report.reference = check_reference(*options.reference, report.total_car);
    return report;
}

/// Exposure-weighted view of a report for one asset class.
struct ClassSummary {
    AssetClass asset_class = AssetClass::Other;
    Money exposure;
    Money car;
    Fraction carr;
    Fraction duration_carr, credit_carr, market_carr, operational_carr;
};

/// Per-class rows in canonical class order; classes without positions are omitted.
inline std::vector<ClassSummary> class_breakdown(const CaRReport& report) {
    std::vector<ClassSummary> out;
    for (AssetClass cls : kAssetClasses) {
        ClassSummary row{cls, {}, {}, {}, {}, {}, {}, {}};
        Money d, c, m, o;
        bool any = false;
        for (const auto& line : report.lines) {
            if (line.asset_class != cls) continue;
            any = true;
            row.exposure += line.exposure;
            row.car += line.car;
            d += line.exposure * line.duration_carr;
            c += line.exposure * line.credit_carr;
            m += line.exposure * line.market_carr;
            o += line.exposure * line.operational_carr;
        }
        if (!any) continue;
        if (row.exposure > Money(0)) {
            row.carr = row.car / row.exposure;
            row.duration_carr = d / row.exposure;
            row.credit_carr = c / row.exposure;
            row.market_carr = m / row.exposure;
            row.operational_carr = o / row.exposure;
        }
        out.push_back(row);
    }
    return out;
}

/// Capital at risk split by risk source (unclamped component contributions, cents).
struct SourceBreakdown {
    Money duration, credit, market, operational;
};

inline SourceBreakdown source_breakdown(const CaRReport& report) {
    SourceBreakdown s;
    for (const auto& line : report.lines) {
        s.duration += line.exposure * line.duration_carr;
        s.credit += line.exposure * line.credit_carr;
        s.market += line.exposure * line.market_carr;
        s.operational += line.exposure * line.operational_carr;
    }
    s.duration = round_cents(s.duration);
    s.credit = round_cents(s.credit);
    s.market = round_cents(s.market);
    s.operational = round_cents(s.operational);
    return s;
}

}  // namespace calm
