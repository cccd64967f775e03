#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "calm/decimal.hpp"
#include "calm/error.hpp"

namespace calm {

/// An over-collateralized loan backed by a single crypto collateral.
struct Vault {
    Decimal collateral_units;
    Money collateral_price;  // per unit
    Money debt;
    Fraction liquidation_ratio;  // e.g. 1.70: liquidate once value < debt * ratio
    Fraction liquidation_penalty;
};

/// Vaults sharing one collateral market. Liquidating `market_depth` of value in a
/// single day moves the execution price down by `slippage_coefficient`.
struct VaultPortfolio {
    std::vector<Vault> vaults;
    Money market_depth;
    Fraction slippage_coefficient;
};

/// Vault portfolios keyed by the `collateral_ref` that asset positions carry.
using CollateralBook = std::map<std::string, VaultPortfolio>;

struct LossStatistic {
    enum class Kind { Mean, Percentile };

    Kind kind = Kind::Mean;
    Fraction level;  // percentile level in (0, 1], used when kind == Percentile

    static LossStatistic mean() { return {}; }
    static LossStatistic percentile(Fraction p) { return {Kind::Percentile, p}; }
    friend bool operator==(const LossStatistic&, const LossStatistic&) = default;
};

struct MonteCarloConfig {
    std::uint64_t n_paths = 10'000;
    int horizon_days = 30;
    Fraction daily_volatility;
    Decimal daily_drift;
    Fraction jump_probability;
    Fraction jump_size;
    std::uint64_t seed = 0;
    LossStatistic loss_statistic;
    /// Worker threads; 0 picks hardware concurrency. Never changes results.
    unsigned workers = 0;

    friend bool operator==(const MonteCarloConfig&, const MonteCarloConfig&) = default;
};

inline void validate(const MonteCarloConfig& cfg) {
    if (cfg.n_paths < 1) throw DomainError("monte carlo n_paths must be >= 1");
    if (cfg.horizon_days < 1) throw DomainError("monte carlo horizon_days must be >= 1");
    if (cfg.daily_volatility.is_negative()) throw DomainError("daily_volatility must be >= 0");
    if (cfg.jump_probability.is_negative() || cfg.jump_probability > Fraction(1))
        throw DomainError("jump_probability must lie in [0, 1]");
    if (cfg.jump_size.is_negative() || cfg.jump_size >= Fraction(1))
        throw DomainError("jump_size must lie in [0, 1)");
    if (cfg.loss_statistic.kind == LossStatistic::Kind::Percentile &&
        (cfg.loss_statistic.level <= Fraction(0) || cfg.loss_statistic.level > Fraction(1)))
        throw DomainError("percentile level must lie in (0, 1]");
}

inline void validate(const Vault& v) {
    if (v.collateral_units.is_negative()) throw DomainError("vault collateral_units must be >= 0");
    if (v.collateral_price.is_negative()) throw DomainError("vault collateral_price must be >= 0");
    if (v.debt.is_negative()) throw DomainError("vault debt must be >= 0");
    if (v.liquidation_ratio <= Fraction(1)) throw DomainError("vault liquidation_ratio must be > 1");
    if (v.liquidation_penalty.is_negative()) throw DomainError("vault liquidation_penalty must be >= 0");
    if (!v.debt.is_zero() && v.collateral_units * v.collateral_price < v.debt * v.liquidation_ratio)
        throw DomainError("vault starts below its liquidation ratio");
}

inline void validate(const VaultPortfolio& p) {
    if (p.market_depth <= Money(0)) throw DomainError("portfolio market_depth must be > 0");
    if (p.slippage_coefficient.is_negative()) throw DomainError("portfolio slippage_coefficient must be >= 0");
    for (const auto& v : p.vaults) validate(v);
}

namespace detail {

/// Random stream for one path. Depends only on (seed, path_index).
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32)};
    return std::mt19937_64(seq);
}

struct PathModel {
    double log_drift;  // drift - vol^2/2
    double vol;
    double jump_probability;
    double jump_factor;  // 1 - jump_size
    int horizon;

    explicit PathModel(const MonteCarloConfig& cfg)
        : log_drift(cfg.daily_drift.to_double() -
                    0.5 * cfg.daily_volatility.to_double() * cfg.daily_volatility.to_double()),
          vol(cfg.daily_volatility.to_double()),
          jump_probability(cfg.jump_probability.to_double()),
          jump_factor(1.0 - cfg.jump_size.to_double()),
          horizon(cfg.horizon_days) {}

    /// Fills `out` with daily multipliers. Draws one normal and one uniform per
    /// day regardless of parameters, so streams line up across configurations.
    void fill(std::uint64_t seed, std::uint64_t path_index, std::span<double> out) const {
        auto rng = path_engine(seed, path_index);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (double& m : out) {
            const double z = normal(rng);
            const double u = uniform(rng);
            m = std::exp(log_drift + vol * z);
            if (u < jump_probability) m *= jump_factor;
        }
    }
};

/// Vault and market parameters pre-converted for the simulation kernel.
struct VaultKernel {
    double units, price0, debt, trigger, owed;

    explicit VaultKernel(const Vault& v)
        : units(v.collateral_units.to_double()),
          price0(v.collateral_price.to_double()),
          debt(v.debt.to_double()),
          trigger(v.debt.to_double() * v.liquidation_ratio.to_double()),
          owed(v.debt.to_double() * (1.0 + v.liquidation_penalty.to_double())) {}
};

/// Loss of one vault along a path of daily multipliers, in USD.
inline double vault_loss(const VaultKernel& v, std::span<const double> path, double depth, double coefficient) {
    if (v.debt <= 0.0) return 0.0;
    double price = v.price0;
    for (double m : path) {
        price *= m;
        const double value = v.units * price;
        if (value < v.trigger) {
            const double slippage = std::min(1.0, coefficient * (value / depth));
            const double recovered = value * (1.0 - slippage);
            return std::max(0.0, v.owed - recovered);
        }
    }
    return 0.0;
}

}  // namespace detail

/// Daily price multipliers of path `path_index`: exp(drift - vol^2/2 + vol*z),
/// times (1 - jump_size) on days with a jump.
inline std::vector<double> simulate_price_path(const MonteCarloConfig& cfg, std::uint64_t path_index) {
    validate(cfg);
    std::vector<double> path(static_cast<std::size_t>(cfg.horizon_days));
    detail::PathModel(cfg).fill(cfg.seed, path_index, path);
    return path;
}

/// Bad debt left after liquidating `v` on the first day its collateral value
/// drops below debt * liquidation_ratio. The sale happens at that day's price
/// less linear slippage; the protocol is owed debt * (1 + penalty).
inline Money liquidation_loss(const Vault& v, std::span<const double> path, const VaultPortfolio& p) {
    if (path.empty()) throw DomainError("liquidation_loss needs a non-empty price path");
    const double loss = detail::vault_loss(detail::VaultKernel(v), path, p.market_depth.to_double(),
                                           p.slippage_coefficient.to_double());
    return Money::from_double(loss, 2);
}

/// Per-path portfolio loss divided by total debt, in path-index order.
inline std::vector<Fraction> simulate_loss_ratios(const VaultPortfolio& p, const MonteCarloConfig& cfg) {
    validate(cfg);
    validate(p);
    Money total_debt;
    for (const auto& v : p.vaults) total_debt += v.debt;
    const auto n = static_cast<std::size_t>(cfg.n_paths);
    if (total_debt.is_zero()) return std::vector<Fraction>(n);

    std::vector<detail::VaultKernel> kernels;
    kernels.reserve(p.vaults.size());
    for (const auto& v : p.vaults) kernels.emplace_back(v);
    const detail::PathModel model(cfg);
    const double depth = p.market_depth.to_double();
    const double coefficient = p.slippage_coefficient.to_double();

    // Whole cents per path; each slot is written by exactly one worker.
    std::vector<Money> path_loss(n);
    auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> path(static_cast<std::size_t>(cfg.horizon_days));
        for (std::size_t i = begin; i < end; ++i) {
            model.fill(cfg.seed, i, path);
            Money loss;
            for (const auto& k : kernels) loss += Money::from_double(detail::vault_loss(k, path, depth, coefficient), 2);
            path_loss[i] = loss;
        }
    };

    unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t begin = 0; begin < n; begin += chunk)
            pool.emplace_back(run_range, begin, std::min(n, begin + chunk));
    }

    std::vector<Fraction> ratios(n);
    for (std::size_t i = 0; i < n; ++i) ratios[i] = path_loss[i] / total_debt;
    return ratios;
}

/// Applies the configured statistic to per-path loss ratios. Percentile uses the
/// nearest-rank definition: the ceil(p * n)-th smallest value.
inline Fraction summarize_losses(std::vector<Fraction> ratios, const LossStatistic& stat) {
    if (ratios.empty()) return Fraction(0);
    if (stat.kind == LossStatistic::Kind::Mean) {
        Decimal sum;
        for (const auto& r : ratios) sum += r;
        return sum / Decimal(static_cast<std::int64_t>(ratios.size()));
    }
    const auto n = static_cast<std::int64_t>(ratios.size());
    const Decimal exact_rank = stat.level * Decimal(n);
    auto rank = static_cast<std::int64_t>(exact_rank.raw() / Decimal::kOne);
    if (exact_rank.raw() % Decimal::kOne != 0) ++rank;
    rank = std::clamp<std::int64_t>(rank, 1, n);
    std::nth_element(ratios.begin(), ratios.begin() + (rank - 1), ratios.end());
    return ratios[static_cast<std::size_t>(rank - 1)];
}

/// Expected capital loss per unit of debt on a vault portfolio; feeds the market
/// component of the capital-at-risk ratio. Zero when the portfolio has no debt.
inline Fraction expected_loss_ratio(const VaultPortfolio& p, const MonteCarloConfig& cfg) {
    return clamp_unit(summarize_losses(simulate_loss_ratios(p, cfg), cfg.loss_statistic));
}

}  // namespace calm
