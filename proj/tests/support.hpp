#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "calm/calm.hpp"

namespace calm::test {

inline std::filesystem::path data_dir() { return CALM_DATA_DIR; }
inline std::filesystem::path golden_dir() { return CALM_GOLDEN_DIR; }
inline std::filesystem::path maker_dir() { return data_dir() / "makerdao-2023-12-31"; }
inline std::filesystem::path synthetic_dir() { return data_dir() / "synthetic-series"; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("calm-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline Decimal D(const char* s) { return Decimal::parse(s); }

inline AssetPosition asset(std::string id, AssetClass cls, const char* exposure, const char* maturity = "0",
                           Bucket tenor = Bucket::Year) {
    AssetPosition a;
    a.id = std::move(id);
    a.asset_class = cls;
    a.exposure = D(exposure);
    a.avg_maturity = D(maturity);
    a.liquidity_tenor = tenor;
    return a;
}

inline LiabilityPosition liability(std::string id, LiabilityKind kind, const char* amount) {
    return {std::move(id), kind, D(amount)};
}

/// A small balanced sheet: two credit assets and a stablecoin reserve.
inline BalanceSheetSnapshot small_sheet() {
    BalanceSheetSnapshot s;
    s.as_of = Date(2024, 1, 31);
    s.assets.push_back(asset("bills", AssetClass::PublicCredit, "1000000", "0.25", Bucket::Month));
    s.assets.push_back(asset("usdc", AssetClass::Stablecoin, "200000", "0", Bucket::Day));
    auto loans = asset("loans", AssetClass::PrivateCredit, "100000", "4.45", Bucket::Year);
    loans.rating = Rating::Unrated;
    s.assets.push_back(loans);
    s.liabilities.push_back(liability("coin", LiabilityKind::CirculatingStablecoin, "1287050"));
    s.liabilities.push_back(liability("buffer", LiabilityKind::Equity, "12950"));
    return s;
}

inline RiskParameterSet small_params() {
    RiskParameterSet p;
    p.rate_shock_bps = Decimal(200);
    p.credit_rating_table[Rating::Unrated] = D("0.10");
    p.credit_class_overrides[AssetClass::PublicCredit] = Fraction(0);
    p.market_model = default_monte_carlo();
    p.market_model.n_paths = 200;
    return p;
}

/// Seeded generator for property tests. Every draw is reproducible from the seed.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
    }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    /// Non-negative amount with whole cents, up to `max_units`.
    Money money(std::int64_t max_units) { return Money::from_raw(Decimal::rep(integer(0, max_units * 100)) * (Decimal::kOne / 100)); }

    /// Fraction in [0, hi] with 6 decimals.
    Fraction fraction(double hi = 1.0) {
        return Fraction::from_raw(Decimal::rep(integer(0, static_cast<std::int64_t>(hi * 1e6))) * (Decimal::kOne / 1'000'000));
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
    }

    /// Random balanced snapshot without crypto-backed loans (no simulation needed).
    BalanceSheetSnapshot snapshot(int max_assets = 8) {
        static const std::vector<AssetClass> classes{AssetClass::PublicCredit, AssetClass::PrivateCredit,
                                                     AssetClass::Stablecoin, AssetClass::Cash, AssetClass::Other};
        BalanceSheetSnapshot s;
        s.as_of = Date(2024, 6, 30);
        const int n = static_cast<int>(integer(1, max_assets));
        for (int i = 0; i < n; ++i) {
            AssetPosition a;
            a.id = "a" + std::to_string(i);
            a.asset_class = pick(classes);
            a.exposure = money(50'000'000);
            a.avg_maturity = fraction(10.0);
            a.liquidity_tenor = kBuckets[static_cast<std::size_t>(integer(0, 3))];
            if (a.asset_class == AssetClass::PrivateCredit || a.asset_class == AssetClass::Other)
                a.rating = coin() ? Rating::AAA : Rating::Unrated;
            s.assets.push_back(a);
        }
        const Money total = total_assets(s);
        const Money equity = Money::from_raw((total.raw() / 20 / (Decimal::kOne / 100)) * (Decimal::kOne / 100));
        s.liabilities.push_back({"coin", LiabilityKind::CirculatingStablecoin, total - equity});
        s.liabilities.push_back({"equity", LiabilityKind::Equity, equity});
        return s;
    }

    RiskParameterSet params() {
        RiskParameterSet p;
        p.rate_shock_bps = Decimal(integer(0, 500));
        p.credit_rating_table[Rating::AAA] = fraction(0.05);
        p.credit_rating_table[Rating::Unrated] = fraction(0.3);
        p.credit_class_overrides[AssetClass::PublicCredit] = fraction(0.02);
        p.market_model = default_monte_carlo();
        return p;
    }

    /// Daily or gappy balance series with occasional sharp falls.
    std::vector<BalancePoint> series(int max_len) {
        std::vector<BalancePoint> out;
        const int n = static_cast<int>(integer(0, max_len));
        Date d(2023, 1, 1);
        std::int64_t level = integer(0, 1'000'000);
        for (int i = 0; i < n; ++i) {
            d = d.plus_days(coin(0.8) ? 1 : integer(2, 5));
            const auto move = coin(0.15) ? -integer(0, level) : integer(-level / 10, level / 10 + 1);
            level = std::max<std::int64_t>(0, level + move);
            out.push_back({d, Money(level)});
        }
        return out;
    }

    Vault vault() {
        Vault v;
        v.debt = money(10'000'000) + Money(1);
        v.liquidation_ratio = Fraction(1) + fraction(1.0) + D("0.01");
        v.liquidation_penalty = fraction(0.2);
        v.collateral_price = Money(integer(10, 5000));
        const Decimal cushion = Decimal(1) + fraction(1.0);
        v.collateral_units = (v.debt * v.liquidation_ratio * cushion / v.collateral_price).round(6) + D("0.000001");
        return v;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace calm::test
