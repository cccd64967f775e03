#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "calm/bucket.hpp"
#include "calm/date.hpp"
#include "calm/decimal.hpp"
#include "calm/error.hpp"

namespace calm {

enum class AssetClass { CryptoBackedLoan, PublicCredit, PrivateCredit, Stablecoin, Cash, Other };

inline constexpr std::array<AssetClass, 6> kAssetClasses{AssetClass::CryptoBackedLoan, AssetClass::PublicCredit,
                                                         AssetClass::PrivateCredit,    AssetClass::Stablecoin,
                                                         AssetClass::Cash,             AssetClass::Other};

enum class Rating { AAA, AA, A, BBB, BB, B, Unrated };

inline constexpr std::array<Rating, 7> kRatings{Rating::AAA, Rating::AA, Rating::A,      Rating::BBB,
                                                Rating::BB,  Rating::B,  Rating::Unrated};

enum class LiabilityKind { CirculatingStablecoin, SavingsDeposit, Equity };

inline std::string_view to_string(AssetClass c) {
    constexpr std::array<std::string_view, 6> names{"crypto_backed_loan", "public_credit", "private_credit",
                                                    "stablecoin",         "cash",          "other"};
    return names[static_cast<std::size_t>(c)];
}

inline std::optional<AssetClass> try_parse_asset_class(std::string_view s) {
    for (AssetClass c : kAssetClasses)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

inline AssetClass parse_asset_class(std::string_view s) {
    if (auto c = try_parse_asset_class(s)) return *c;
    throw DomainError("unknown asset class '" + std::string(s) + "'");
}

inline std::string_view to_string(Rating r) {
    constexpr std::array<std::string_view, 7> names{"AAA", "AA", "A", "BBB", "BB", "B", "unrated"};
    return names[static_cast<std::size_t>(r)];
}

inline Rating parse_rating(std::string_view s) {
    for (Rating r : kRatings)
        if (to_string(r) == s) return r;
    throw DomainError("unknown rating '" + std::string(s) + "'");
}

inline std::string_view to_string(LiabilityKind k) {
    constexpr std::array<std::string_view, 3> names{"circulating_stablecoin", "savings_deposit", "equity"};
    return names[static_cast<std::size_t>(k)];
}

inline LiabilityKind parse_liability_kind(std::string_view s) {
    for (auto k : {LiabilityKind::CirculatingStablecoin, LiabilityKind::SavingsDeposit, LiabilityKind::Equity})
        if (to_string(k) == s) return k;
    throw DomainError("unknown liability kind '" + std::string(s) + "'");
}

/// Bucket an asset is assumed to liquidate in when the input does not say.
inline Bucket default_liquidity_tenor(AssetClass c) {
    switch (c) {
        case AssetClass::Stablecoin:
        case AssetClass::Cash: return Bucket::Day;
        case AssetClass::CryptoBackedLoan: return Bucket::Week;
        case AssetClass::PublicCredit: return Bucket::Month;
        case AssetClass::PrivateCredit:
        case AssetClass::Other: return Bucket::Year;
    }
    return Bucket::Year;
}

struct AssetPosition {
    std::string id;
    AssetClass asset_class = AssetClass::Other;
    Money exposure;
    Decimal avg_maturity;  // years
    std::optional<Rating> rating;
    Bucket liquidity_tenor = Bucket::Year;
    std::optional<std::string> collateral_ref;  // crypto-backed loans only
};

struct LiabilityPosition {
    std::string id;
    LiabilityKind kind = LiabilityKind::CirculatingStablecoin;
    Money amount;
};

struct BalanceSheetSnapshot {
    Date as_of;
    std::vector<AssetPosition> assets;
    std::vector<LiabilityPosition> liabilities;
};

struct Violation {
    enum class Kind { Structural, Invariant, Imbalance };

    Kind kind;
    std::string position_id;  // empty for sheet-level findings
    std::string message;
    std::optional<Money> amount;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

inline Money total_assets(const BalanceSheetSnapshot& s) {
    Money sum;
    for (const auto& a : s.assets) sum += a.exposure;
    return sum;
}

/// Sum of all liability-side positions, equity included.
inline Money total_liabilities_and_equity(const BalanceSheetSnapshot& s) {
    Money sum;
    for (const auto& l : s.liabilities) sum += l.amount;
    return sum;
}

/// Checks every type invariant plus the accounting identity
/// assets = non-equity liabilities + equity (within `tolerance`).
///
/// Never stops at the first problem. The violation list is sorted, so the result
/// does not depend on the order positions appear in.
inline ValidationResult validate_snapshot(const BalanceSheetSnapshot& s, Money tolerance = Money(1)) {
    ValidationResult result;
    auto add = [&](Violation::Kind k, std::string id, std::string msg, std::optional<Money> amount = std::nullopt) {
        result.violations.push_back({k, std::move(id), std::move(msg), amount});
    };

    std::set<std::string> seen, duplicated;
    auto track = [&](const std::string& id) {
        if (!seen.insert(id).second) duplicated.insert(id);
    };

    for (const auto& a : s.assets) {
        track(a.id);
        if (a.exposure.is_negative()) add(Violation::Kind::Invariant, a.id, "exposure must be >= 0", a.exposure);
        if (a.avg_maturity.is_negative()) add(Violation::Kind::Invariant, a.id, "avg_maturity must be >= 0");
        const bool is_crypto = a.asset_class == AssetClass::CryptoBackedLoan;
        if (is_crypto && !a.collateral_ref)
            add(Violation::Kind::Invariant, a.id, "crypto-backed loan requires collateral_ref");
        if (!is_crypto && a.collateral_ref)
            add(Violation::Kind::Invariant, a.id, "collateral_ref is only allowed on crypto-backed loans");
    }

    int equity_count = 0;
    for (const auto& l : s.liabilities) {
        track(l.id);
        if (l.kind == LiabilityKind::Equity) {
            ++equity_count;
        } else if (l.amount.is_negative()) {
            add(Violation::Kind::Invariant, l.id, "liability amount must be >= 0", l.amount);
        }
    }
    for (const auto& id : duplicated) add(Violation::Kind::Structural, id, "duplicate position id");
    if (equity_count != 1)
        add(Violation::Kind::Structural, "",
            "expected exactly one equity position, found " + std::to_string(equity_count));

    const Money imbalance = total_assets(s) - total_liabilities_and_equity(s);
    if (imbalance.abs() > tolerance)
        add(Violation::Kind::Imbalance, "", "assets differ from liabilities plus equity", imbalance);

    std::sort(result.violations.begin(), result.violations.end(), [](const Violation& x, const Violation& y) {
        return std::tie(x.kind, x.position_id, x.message) < std::tie(y.kind, y.position_id, y.message);
    });
    return result;
}

/// Equity of the protocol. Throws StructuralError unless there is exactly one equity position.
inline Money capital(const BalanceSheetSnapshot& s) {
    const LiabilityPosition* equity = nullptr;
    for (const auto& l : s.liabilities) {
        if (l.kind != LiabilityKind::Equity) continue;
        if (equity) throw StructuralError("snapshot has more than one equity position");
        equity = &l;
    }
    if (!equity) throw StructuralError("snapshot has no equity position");
    return equity->amount;
}

}  // namespace calm
