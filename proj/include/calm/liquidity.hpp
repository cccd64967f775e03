#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calm/balance_sheet.hpp"
#include "calm/bucket.hpp"
#include "calm/date.hpp"
#include "calm/decimal.hpp"
#include "calm/error.hpp"

namespace calm {

enum class HolderKind { ExternallyOwned, Contract };

/// Contract-held balances are treated as flighty, externally-owned ones as sticky.
enum class HoldingClass { Volatile, Organic };

inline std::string_view to_string(HolderKind k) {
    return k == HolderKind::Contract ? "contract" : "externally_owned";
}

inline HolderKind parse_holder_kind(std::string_view s) {
    if (s == "contract") return HolderKind::Contract;
    if (s == "externally_owned") return HolderKind::ExternallyOwned;
    throw DomainError("unknown holder kind '" + std::string(s) + "'");
}

inline std::string_view to_string(HoldingClass c) { return c == HoldingClass::Volatile ? "volatile" : "organic"; }

struct BalancePoint {
    Date date;
    Money balance;
    friend bool operator==(const BalancePoint&, const BalancePoint&) = default;
};

struct HolderRecord {
    std::string address_id;
    HolderKind holder_kind = HolderKind::ExternallyOwned;
    std::vector<BalancePoint> balance_series;
};

inline void validate(const HolderRecord& h) {
    for (std::size_t i = 0; i < h.balance_series.size(); ++i) {
        if (h.balance_series[i].balance.is_negative())
            throw DomainError("holder '" + h.address_id + "' has a negative balance on " +
                              h.balance_series[i].date.to_string());
        if (i > 0 && !(h.balance_series[i - 1].date < h.balance_series[i].date))
            throw DomainError("holder '" + h.address_id + "' balance dates are not strictly increasing at " +
                              h.balance_series[i].date.to_string());
    }
}

inline HoldingClass classify_holder(const HolderRecord& h) {
    return h.holder_kind == HolderKind::Contract ? HoldingClass::Volatile : HoldingClass::Organic;
}

/// Largest relative fall within `window_days` after any start date:
/// max over starts s with positive balance of (b(s) - min{b(t) : s < t <= s + window}) / b(s).
/// Result in [0, 1]; 0 when no start has a positive balance.
inline Fraction max_drawdown(std::span<const BalancePoint> series, int window_days) {
    if (window_days < 1) throw DomainError("drawdown window must be >= 1 day");
    Fraction worst;
    std::deque<std::size_t> window;  // indices with increasing balances
    std::size_t next = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        while (next < series.size() && days_between(series[i].date, series[next].date) <= window_days) {
            while (!window.empty() && series[window.back()].balance >= series[next].balance) window.pop_back();
            window.push_back(next++);
        }
        while (!window.empty() && window.front() <= i) window.pop_front();
        const Money start = series[i].balance;
        if (window.empty() || start <= Money(0)) continue;
        const Money low = series[window.front()].balance;
        if (low < start) worst = std::max(worst, (start - low) / start);
    }
    return clamp_unit(worst);
}

/// Same as above for one balance per consecutive day.
inline Fraction max_drawdown(std::span<const Money> daily, int window_days) {
    std::vector<BalancePoint> series;
    series.reserve(daily.size());
    const Date origin(2000, 1, 1);
    for (std::size_t i = 0; i < daily.size(); ++i) series.push_back({origin.plus_days(static_cast<long>(i)), daily[i]});
    return max_drawdown(series, window_days);
}

/// Summed balance over every date any selected holder reports, up to `as_of`.
/// Each holder contributes its latest balance on or before the date (0 before its first).
template <class Pred>
std::vector<BalancePoint> aggregate_series(std::span<const HolderRecord> holders, const Date& as_of, Pred select) {
    std::map<Date, Money> sums;
    for (const auto& h : holders) {
        if (!select(h)) continue;
        for (const auto& p : h.balance_series)
            if (p.date <= as_of) sums.emplace(p.date, Money{});
    }
    for (const auto& h : holders) {
        if (!select(h)) continue;
        std::size_t k = 0;
        Money current;
        for (auto& [date, sum] : sums) {
            while (k < h.balance_series.size() && h.balance_series[k].date <= date) current = h.balance_series[k++].balance;
            sum += current;
        }
    }
    std::vector<BalancePoint> out;
    out.reserve(sums.size());
    for (const auto& [d, m] : sums) out.push_back({d, m});
    return out;
}

enum class DrawdownSource { Override, History, Remainder };

inline std::string_view to_string(DrawdownSource s) {
    switch (s) {
        case DrawdownSource::Override: return "override";
        case DrawdownSource::History: return "history";
        case DrawdownSource::Remainder: return "remainder";
    }
    return "";
}

struct BucketingOptions {
    /// Look-back window per bucket, in days. The Year entry is unused: the Year
    /// bucket takes whatever the shorter buckets leave.
    PerBucket<int> stress_windows{{1, 7, 30, 365}};
    /// Cumulative outflow fractions replacing the historical drawdown (Day, Week, Month only).
    std::map<Bucket, Fraction> overrides;
    /// Bucket volatile and organic holders separately, then add up.
    bool split_by_class = false;
};

/// One bucketing pass over a group of holders.
struct BucketedGroup {
    std::string label;  // "all", "volatile" or "organic"
    Money total;
    PerBucket<Fraction> cumulative_fraction;
    PerBucket<DrawdownSource> source;
    PerBucket<Money> outflow;
};

struct BucketedLiabilityProfile {
    Date as_of;
    PerBucket<Money> outflow;  // newly attributable to each bucket, not cumulative
    Money total;
    std::vector<BucketedGroup> groups;
};

namespace detail {

inline void check_overrides(const std::map<Bucket, Fraction>& overrides) {
    const std::pair<const Bucket, Fraction>* prev = nullptr;
    for (const auto& entry : overrides) {
        const auto& [bucket, fraction] = entry;
        if (bucket == Bucket::Year)
            throw DomainError("the year bucket absorbs the remainder and cannot be overridden");
        if (fraction.is_negative() || fraction > Fraction(1))
            throw DomainError("drawdown override for " + std::string(to_string(bucket)) + " must lie in [0, 1], got " +
                              fraction.to_string());
        if (prev && fraction < prev->second)
            throw DomainError("drawdown overrides must be non-decreasing: " + std::string(to_string(prev->first)) +
                              "=" + prev->second.to_string() + " > " + std::string(to_string(bucket)) + "=" +
                              fraction.to_string());
        prev = &entry;
    }
}

inline Money balance_at(std::span<const BalancePoint> series, const Date& as_of) {
    Money m;
    for (const auto& p : series) {
        if (p.date > as_of) break;
        m = p.balance;
    }
    return m;
}

inline BucketedGroup bucket_group(std::string label, std::span<const BalancePoint> series, const Date& as_of,
                                  const BucketingOptions& options) {
    BucketedGroup g;
    g.label = std::move(label);
    g.total = balance_at(series, as_of);

    Fraction cumulative;
    Money allocated;
    for (Bucket b : {Bucket::Day, Bucket::Week, Bucket::Month}) {
        Fraction d;
        if (auto it = options.overrides.find(b); it != options.overrides.end()) {
            d = it->second;
            g.source[b] = DrawdownSource::Override;
        } else {
            const int window = options.stress_windows[b];
            if (!series.empty() && days_between(series.front().date, as_of) < window)
                throw DomainError("holder history starting " + series.front().date.to_string() + " does not cover the " +
                                  std::to_string(window) + "-day " + std::string(to_string(b)) + " stress window");
            d = max_drawdown(series, window);
            g.source[b] = DrawdownSource::History;
        }
        cumulative = std::max(cumulative, d);
        g.cumulative_fraction[b] = cumulative;
        // Rounding the cumulative amount keeps the increments non-negative and telescoping.
        const Money reached = round_cents(g.total * cumulative);
        g.outflow[b] = reached - allocated;
        allocated = reached;
    }
    g.cumulative_fraction[Bucket::Year] = Fraction(1);
    g.source[Bucket::Year] = DrawdownSource::Remainder;
    g.outflow[Bucket::Year] = g.total - allocated;
    return g;
}

}  // namespace detail

/// Stressed outflows per bucket. Day takes total * d(Day); each later bucket takes
/// the increase in the cumulative fraction; Year takes the rest so the outflows
/// add up to the total holdings at `as_of`.
inline BucketedLiabilityProfile bucket_liabilities(std::span<const HolderRecord> holders, const Date& as_of,
                                                   const BucketingOptions& options = {}) {
    detail::check_overrides(options.overrides);
    for (Bucket b : kBuckets)
        if (options.stress_windows[b] < 1) throw DomainError("stress windows must be >= 1 day");
    for (const auto& h : holders) validate(h);

    BucketedLiabilityProfile profile;
    profile.as_of = as_of;
    if (options.split_by_class) {
        for (HoldingClass cls : {HoldingClass::Volatile, HoldingClass::Organic}) {
            const auto series = aggregate_series(holders, as_of, [&](const HolderRecord& h) { return classify_holder(h) == cls; });
            profile.groups.push_back(detail::bucket_group(std::string(to_string(cls)), series, as_of, options));
        }
    } else {
        const auto series = aggregate_series(holders, as_of, [](const HolderRecord&) { return true; });
        profile.groups.push_back(detail::bucket_group("all", series, as_of, options));
    }
    for (const auto& g : profile.groups) {
        profile.total += g.total;
        for (Bucket b : kBuckets) profile.outflow[b] += g.outflow[b];
    }
    return profile;
}

struct LiquiditySchedule {
    Date as_of;
    PerBucket<Money> available;  // newly available in each bucket after haircut
};

/// Each asset adds exposure * (1 - haircut(class)) to its liquidity tenor bucket.
/// Classes missing from `haircuts` take no haircut.
inline LiquiditySchedule asset_liquidity_schedule(const BalanceSheetSnapshot& s,
                                                  const std::map<AssetClass, Fraction>& haircuts = {}) {
    for (const auto& [cls, h] : haircuts)
        if (h.is_negative() || h > Fraction(1))
            throw DomainError("haircut for " + std::string(to_string(cls)) + " must lie in [0, 1], got " + h.to_string());
    LiquiditySchedule schedule;
    schedule.as_of = s.as_of;
    for (const auto& a : s.assets) {
        auto it = haircuts.find(a.asset_class);
        const Fraction haircut = it == haircuts.end() ? Fraction(0) : it->second;
        schedule.available[a.liquidity_tenor] += round_cents(a.exposure * (Fraction(1) - haircut));
    }
    return schedule;
}

/// Sign convention of reported gaps. Only liquidity minus outflow (negative means
/// shortfall) is produced; the tag is written into every report.
inline constexpr std::string_view kGapSignConvention = "liquidity_minus_outflow";

struct FundingGapReport {
    Date as_of;
    PerBucket<Money> outflow;
    PerBucket<Money> liquidity;
    PerBucket<Money> cumulative_gap;
    Money terminal_gap;
};

/// Cumulative funding gap: gap(b) = sum over buckets up to b of (liquidity - outflow).
inline FundingGapReport funding_gap(const BucketedLiabilityProfile& outflows, const LiquiditySchedule& liquidity) {
    if (outflows.as_of != liquidity.as_of)
        throw StructuralError("outflow profile dated " + outflows.as_of.to_string() +
                              " does not match liquidity schedule dated " + liquidity.as_of.to_string());
    FundingGapReport r;
    r.as_of = outflows.as_of;
    Money running;
    for (Bucket b : kBuckets) {
        r.outflow[b] = outflows.outflow[b];
        r.liquidity[b] = liquidity.available[b];
        running += liquidity.available[b] - outflows.outflow[b];
        r.cumulative_gap[b] = running;
    }
    r.terminal_gap = running;
    return r;
}

}  // namespace calm
