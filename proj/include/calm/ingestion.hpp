#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calm/balance_sheet.hpp"
#include "calm/capital_risk.hpp"
#include "calm/crypto_mc.hpp"
#include "calm/liquidity.hpp"

namespace calm {

inline constexpr int kSchemaVersion = 1;

struct Tolerances {
    Money balance_identity = Money(1);
    Fraction cr_threshold = Fraction(1);
    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// Everything a run needs besides the balance-sheet data itself.
struct Scenario {
    RiskParameterSet risk;
    BucketingOptions bucketing;
    std::map<AssetClass, Fraction> haircuts;
    Tolerances tolerances;
    std::optional<PublishedReference> reference;
    /// One entry per default the loader filled in, e.g. "monte_carlo.seed = 20231231".
    std::vector<std::string> defaults_applied;
};

/// Monte Carlo block used when a scenario omits it: the adverse crash model
/// calibrated for the shipped 2023-12-31 crypto-loan book (see tools/calm_calibrate).
inline MonteCarloConfig default_monte_carlo() {
    MonteCarloConfig cfg;
    cfg.n_paths = 10'000;
    cfg.horizon_days = 30;
    cfg.daily_volatility = Fraction::parse("0.05");
    cfg.daily_drift = Decimal(0);
    cfg.jump_probability = Fraction::parse("0.01");
    cfg.jump_size = Fraction::parse("0.3");
    cfg.seed = 20231231;
    cfg.loss_statistic = LossStatistic::mean();
    return cfg;
}

namespace ingest_detail {

using nlohmann::json;

/// Collects diagnostics while walking a document.
class Reader {
public:
    std::vector<std::string> diags;

    void error(const std::string& ctx, const std::string& msg) { diags.push_back(ctx.empty() ? msg : ctx + ": " + msg); }

    bool require_object(const json& j, const std::string& ctx) {
        if (j.is_object()) return true;
        error(ctx, "expected an object");
        return false;
    }

    void allow_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& ctx) {
        if (!obj.is_object()) return;
        for (const auto& [key, value] : obj.items()) {
            bool known = false;
            for (const char* a : allowed) known = known || key == a;
            if (!known) error(ctx, "unknown field '" + key + "'");
        }
    }

    const json* find(const json& obj, const char* key, const std::string& ctx, bool required) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) error(ctx, "missing field '" + std::string(key) + "'");
            return nullptr;
        }
        return &*it;
    }

    std::optional<Decimal> decimal_value(const json& v, const std::string& ctx) {
        if (!v.is_string()) {
            error(ctx, "expected a decimal string");
            return std::nullopt;
        }
        try {
            return Decimal::parse(v.get<std::string>());
        } catch (const DomainError& e) {
            error(ctx, e.what());
            return std::nullopt;
        }
    }

    std::optional<Decimal> decimal(const json& obj, const char* key, const std::string& ctx, bool required = true) {
        const json* v = find(obj, key, ctx, required);
        return v ? decimal_value(*v, join(ctx, key)) : std::nullopt;
    }

    std::optional<std::string> string(const json& obj, const char* key, const std::string& ctx, bool required = true) {
        const json* v = find(obj, key, ctx, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            error(join(ctx, key), "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<std::uint64_t> unsigned_int(const json& obj, const char* key, const std::string& ctx,
                                              bool required = true) {
        const json* v = find(obj, key, ctx, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned())) {
            error(join(ctx, key), "expected a non-negative integer");
            return std::nullopt;
        }
        return v->get<std::uint64_t>();
    }

    std::optional<bool> boolean(const json& obj, const char* key, const std::string& ctx, bool required = true) {
        const json* v = find(obj, key, ctx, required);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            error(join(ctx, key), "expected true or false");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    template <class F>
    auto parsed(const std::optional<std::string>& s, const std::string& ctx, F parse) -> std::optional<decltype(parse(*s))> {
        if (!s) return std::nullopt;
        try {
            return parse(*s);
        } catch (const DomainError& e) {
            error(ctx, e.what());
            return std::nullopt;
        }
    }

    void schema_version(const json& doc, const std::string& ctx) {
        auto v = unsigned_int(doc, "schema_version", ctx);
        if (v && *v != static_cast<std::uint64_t>(kSchemaVersion))
            error(ctx, "unsupported schema_version " + std::to_string(*v) + " (supported: " +
                           std::to_string(kSchemaVersion) + ")");
    }

    static std::string join(const std::string& ctx, const std::string& key) { return ctx.empty() ? key : ctx + "." + key; }
};

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), {"cannot open file"});
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), {e.what()});
    }
}

inline std::string record_ctx(const std::string& array, std::size_t i, const json& rec, const char* id_key) {
    std::string ctx = array + "[" + std::to_string(i) + "]";
    if (rec.is_object()) {
        auto it = rec.find(id_key);
        if (it != rec.end() && it->is_string()) ctx += " (" + std::string(id_key) + "=" + it->get<std::string>() + ")";
    }
    return ctx;
}

inline void throw_if_errors(const std::string& file, Reader& r) {
    if (!r.diags.empty()) throw ParseError(file, std::move(r.diags));
}

}  // namespace ingest_detail

/// Parses a snapshot document and validates it against `tolerance`.
inline BalanceSheetSnapshot parse_snapshot(const nlohmann::json& doc, const std::string& file = "<snapshot>",
                                           Money tolerance = Money(1)) {
    using namespace ingest_detail;
    Reader r;
    BalanceSheetSnapshot s;
    if (!r.require_object(doc, "")) throw_if_errors(file, r);
    r.allow_keys(doc, {"schema_version", "as_of", "assets", "liabilities"}, "");
    r.schema_version(doc, "");
    if (auto d = r.parsed(r.string(doc, "as_of", ""), "as_of", [](const std::string& x) { return Date::parse(x); }))
        s.as_of = *d;

    if (const json* assets = r.find(doc, "assets", "", true)) {
        if (!assets->is_array()) r.error("assets", "expected an array");
        for (std::size_t i = 0; assets->is_array() && i < assets->size(); ++i) {
            const json& rec = (*assets)[i];
            const std::string ctx = record_ctx("assets", i, rec, "id");
            if (!r.require_object(rec, ctx)) continue;
            r.allow_keys(rec, {"id", "class", "exposure", "avg_maturity", "rating", "liquidity_tenor", "collateral_ref"}, ctx);
            AssetPosition a;
            a.id = r.string(rec, "id", ctx).value_or("");
            if (auto c = r.parsed(r.string(rec, "class", ctx), ctx, [](const std::string& x) { return parse_asset_class(x); }))
                a.asset_class = *c;
            a.exposure = r.decimal(rec, "exposure", ctx).value_or(Money{});
            a.avg_maturity = r.decimal(rec, "avg_maturity", ctx).value_or(Decimal{});
            a.rating = r.parsed(r.string(rec, "rating", ctx, false), ctx, [](const std::string& x) { return parse_rating(x); });
            if (auto t = r.parsed(r.string(rec, "liquidity_tenor", ctx), ctx, [](const std::string& x) { return parse_bucket(x); }))
                a.liquidity_tenor = *t;
            a.collateral_ref = r.string(rec, "collateral_ref", ctx, false);
            s.assets.push_back(std::move(a));
        }
    }
    if (const json* liabilities = r.find(doc, "liabilities", "", true)) {
        if (!liabilities->is_array()) r.error("liabilities", "expected an array");
        for (std::size_t i = 0; liabilities->is_array() && i < liabilities->size(); ++i) {
            const json& rec = (*liabilities)[i];
            const std::string ctx = record_ctx("liabilities", i, rec, "id");
            if (!r.require_object(rec, ctx)) continue;
            r.allow_keys(rec, {"id", "kind", "amount"}, ctx);
            LiabilityPosition l;
            l.id = r.string(rec, "id", ctx).value_or("");
            if (auto k = r.parsed(r.string(rec, "kind", ctx), ctx, [](const std::string& x) { return parse_liability_kind(x); }))
                l.kind = *k;
            l.amount = r.decimal(rec, "amount", ctx).value_or(Money{});
            s.liabilities.push_back(std::move(l));
        }
    }
    if (r.diags.empty()) {
        for (const auto& v : validate_snapshot(s, tolerance).violations) {
            std::string msg = v.message;
            if (v.amount) msg += " (" + v.amount->to_string() + ")";
            r.error(v.position_id.empty() ? "snapshot" : "position " + v.position_id, msg);
        }
    }
    throw_if_errors(file, r);
    return s;
}

/// Loads and fully validates a snapshot file; every problem is reported at once.
inline BalanceSheetSnapshot load_snapshot(const std::filesystem::path& path, Money tolerance = Money(1)) {
    return parse_snapshot(ingest_detail::read_json(path), path.string(), tolerance);
}

inline VaultPortfolio parse_vault_portfolio(const nlohmann::json& doc, const std::string& file = "<vaults>") {
    using namespace ingest_detail;
    Reader r;
    VaultPortfolio p;
    if (!r.require_object(doc, "")) throw_if_errors(file, r);
    r.allow_keys(doc, {"schema_version", "market_depth", "slippage_coefficient", "vaults"}, "");
    r.schema_version(doc, "");
    p.market_depth = r.decimal(doc, "market_depth", "").value_or(Money{});
    p.slippage_coefficient = r.decimal(doc, "slippage_coefficient", "").value_or(Fraction{});
    if (const json* vaults = r.find(doc, "vaults", "", true)) {
        if (!vaults->is_array()) r.error("vaults", "expected an array");
        for (std::size_t i = 0; vaults->is_array() && i < vaults->size(); ++i) {
            const json& rec = (*vaults)[i];
            const std::string ctx = "vaults[" + std::to_string(i) + "]";
            if (!r.require_object(rec, ctx)) continue;
            r.allow_keys(rec, {"collateral_units", "collateral_price", "debt", "liquidation_ratio", "liquidation_penalty"}, ctx);
            Vault v;
            v.collateral_units = r.decimal(rec, "collateral_units", ctx).value_or(Decimal{});
            v.collateral_price = r.decimal(rec, "collateral_price", ctx).value_or(Money{});
            v.debt = r.decimal(rec, "debt", ctx).value_or(Money{});
            v.liquidation_ratio = r.decimal(rec, "liquidation_ratio", ctx).value_or(Fraction{});
            v.liquidation_penalty = r.decimal(rec, "liquidation_penalty", ctx).value_or(Fraction{});
            try {
                validate(v);
            } catch (const DomainError& e) {
                r.error(ctx, e.what());
            }
            p.vaults.push_back(v);
        }
    }
    if (p.market_depth <= Money(0)) r.error("market_depth", "must be > 0");
    if (p.slippage_coefficient.is_negative()) r.error("slippage_coefficient", "must be >= 0");
    throw_if_errors(file, r);
    return p;
}

inline VaultPortfolio load_vault_portfolio(const std::filesystem::path& path) {
    return parse_vault_portfolio(ingest_detail::read_json(path), path.string());
}

/// Loads every vault file referenced by the snapshot's crypto-backed loans,
/// resolving references relative to `base_dir`.
inline CollateralBook load_collateral_book(const BalanceSheetSnapshot& s, const std::filesystem::path& base_dir) {
    CollateralBook book;
    for (const auto& a : s.assets) {
        if (!a.collateral_ref || book.contains(*a.collateral_ref)) continue;
        book.emplace(*a.collateral_ref, load_vault_portfolio(base_dir / *a.collateral_ref));
    }
    return book;
}

inline std::vector<HolderRecord> parse_holders(const nlohmann::json& doc, const std::string& file = "<holders>") {
    using namespace ingest_detail;
    Reader r;
    std::vector<HolderRecord> out;
    if (!r.require_object(doc, "")) throw_if_errors(file, r);
    r.allow_keys(doc, {"schema_version", "holders"}, "");
    r.schema_version(doc, "");
    if (const json* holders = r.find(doc, "holders", "", true)) {
        if (!holders->is_array()) r.error("holders", "expected an array");
        for (std::size_t i = 0; holders->is_array() && i < holders->size(); ++i) {
            const json& rec = (*holders)[i];
            const std::string ctx = record_ctx("holders", i, rec, "address_id");
            if (!r.require_object(rec, ctx)) continue;
            r.allow_keys(rec, {"address_id", "holder_kind", "balance_series"}, ctx);
            HolderRecord h;
            h.address_id = r.string(rec, "address_id", ctx).value_or("");
            if (auto k = r.parsed(r.string(rec, "holder_kind", ctx), ctx, [](const std::string& x) { return parse_holder_kind(x); }))
                h.holder_kind = *k;
            if (const json* series = r.find(rec, "balance_series", ctx, true)) {
                if (!series->is_array()) r.error(ctx + ".balance_series", "expected an array");
                for (std::size_t k = 0; series->is_array() && k < series->size(); ++k) {
                    const json& pt = (*series)[k];
                    const std::string pctx = ctx + ".balance_series[" + std::to_string(k) + "]";
                    if (!pt.is_array() || pt.size() != 2 || !pt[0].is_string()) {
                        r.error(pctx, "expected [\"YYYY-MM-DD\", \"balance\"]");
                        continue;
                    }
                    auto date = r.parsed(std::optional<std::string>(pt[0].get<std::string>()), pctx,
                                         [](const std::string& x) { return Date::parse(x); });
                    auto bal = r.decimal_value(pt[1], pctx);
                    if (date && bal) h.balance_series.push_back({*date, *bal});
                }
            }
            try {
                validate(h);
            } catch (const DomainError& e) {
                r.error(ctx, e.what());
            }
            out.push_back(std::move(h));
        }
    }
    throw_if_errors(file, r);
    return out;
}

inline std::vector<HolderRecord> load_holders(const std::filesystem::path& path) {
    return parse_holders(ingest_detail::read_json(path), path.string());
}

namespace ingest_detail {

inline std::optional<CreditSpec> credit_spec(Reader& r, const json& v, const std::string& ctx) {
    if (v.is_object()) {
        r.allow_keys(v, {"pd", "lgd"}, ctx);
        auto pd = r.decimal(v, "pd", ctx);
        auto lgd = r.decimal(v, "lgd", ctx);
        if (pd && lgd) return CreditSpec{PdLgd{*pd, *lgd}};
        return std::nullopt;
    }
    if (auto f = r.decimal_value(v, ctx)) return CreditSpec{*f};
    return std::nullopt;
}

inline void check_unit(Reader& r, const Decimal& f, const std::string& ctx) {
    if (f.is_negative() || f > Decimal(1)) r.error(ctx, "must lie in [0, 1], got " + f.to_string());
}

inline void check_unit(Reader& r, const CreditSpec& c, const std::string& ctx) {
    if (const auto* f = std::get_if<Fraction>(&c)) return check_unit(r, *f, ctx);
    check_unit(r, std::get<PdLgd>(c).pd, ctx + ".pd");
    check_unit(r, std::get<PdLgd>(c).lgd, ctx + ".lgd");
}

inline MonteCarloConfig monte_carlo(Reader& r, const json* block, std::vector<std::string>& defaults) {
    const MonteCarloConfig fallback = default_monte_carlo();
    if (!block) {
        defaults.push_back("monte_carlo = built-in default block");
        return fallback;
    }
    const std::string ctx = "monte_carlo";
    if (!r.require_object(*block, ctx)) return fallback;
    r.allow_keys(*block,
                 {"n_paths", "horizon_days", "daily_volatility", "daily_drift", "jump_probability", "jump_size", "seed",
                  "loss_statistic"},
                 ctx);
    MonteCarloConfig cfg = fallback;
    auto take_uint = [&](const char* key, auto& field) {
        if (!block->contains(key)) {
            defaults.push_back(ctx + "." + key + " = " + std::to_string(field));
            return;
        }
        if (auto v = r.unsigned_int(*block, key, ctx)) field = static_cast<std::remove_reference_t<decltype(field)>>(*v);
    };
    auto take_dec = [&](const char* key, Decimal& field) {
        if (!block->contains(key)) {
            defaults.push_back(ctx + "." + key + " = " + field.to_string());
            return;
        }
        if (auto v = r.decimal(*block, key, ctx)) field = *v;
    };
    take_uint("n_paths", cfg.n_paths);
    take_uint("horizon_days", cfg.horizon_days);
    take_dec("daily_volatility", cfg.daily_volatility);
    take_dec("daily_drift", cfg.daily_drift);
    take_dec("jump_probability", cfg.jump_probability);
    take_dec("jump_size", cfg.jump_size);
    take_uint("seed", cfg.seed);
    if (auto it = block->find("loss_statistic"); it == block->end()) {
        defaults.push_back(ctx + ".loss_statistic = mean");
    } else if (it->is_string() && it->get<std::string>() == "mean") {
        cfg.loss_statistic = LossStatistic::mean();
    } else if (it->is_object() && it->size() == 1 && it->contains("percentile")) {
        if (auto p = r.decimal(*it, "percentile", ctx + ".loss_statistic")) cfg.loss_statistic = LossStatistic::percentile(*p);
    } else {
        r.error(ctx + ".loss_statistic", "expected \"mean\" or {\"percentile\": \"p\"}");
    }
    try {
        validate(cfg);
    } catch (const DomainError& e) {
        r.error(ctx, e.what());
    }
    return cfg;
}

template <class Key, class F>
void bucket_map(Reader& r, const json* obj, const std::string& ctx, F&& on_entry) {
    if (!obj) return;
    if (!r.require_object(*obj, ctx)) return;
    for (const auto& [key, value] : obj->items()) {
        try {
            on_entry(Key(parse_bucket(key)), value, ctx + "." + key);
        } catch (const DomainError& e) {
            r.error(ctx, e.what());
        }
    }
}

}  // namespace ingest_detail

/// Parses a scenario. Closed schema: unknown keys are errors. Omitted optional
/// blocks take the documented defaults and are listed in `defaults_applied`.
inline Scenario parse_scenario(const nlohmann::json& doc, const std::string& file = "<scenario>") {
    using namespace ingest_detail;
    Reader r;
    Scenario sc;
    auto& defaults = sc.defaults_applied;
    if (!r.require_object(doc, "")) throw_if_errors(file, r);
    r.allow_keys(doc,
                 {"schema_version", "rate_shock_bps", "credit_rating_table", "credit_class_overrides",
                  "operational_table", "monte_carlo", "bucket_drawdown_overrides", "stress_windows",
                  "split_holder_classes", "haircuts", "tolerances", "published_reference"},
                 "");
    r.schema_version(doc, "");

    if (!doc.contains("rate_shock_bps")) {
        defaults.push_back("rate_shock_bps = 200");
    } else if (auto v = r.decimal(doc, "rate_shock_bps", "")) {
        sc.risk.rate_shock_bps = *v;
        if (v->is_negative()) r.error("rate_shock_bps", "must be >= 0, got " + v->to_string());
    }

    if (const json* table = r.find(doc, "credit_rating_table", "", false); table && r.require_object(*table, "credit_rating_table")) {
        for (const auto& [key, value] : table->items()) {
            const std::string ctx = "credit_rating_table." + key;
            auto rating = r.parsed(std::optional<std::string>(key), ctx, [](const std::string& x) { return parse_rating(x); });
            auto f = r.decimal_value(value, ctx);
            if (rating && f) {
                check_unit(r, *f, ctx);
                sc.risk.credit_rating_table[*rating] = *f;
            }
        }
    } else if (!table) {
        defaults.push_back("credit_rating_table = {}");
    }

    if (const json* table = r.find(doc, "credit_class_overrides", "", false);
        table && r.require_object(*table, "credit_class_overrides")) {
        for (const auto& [key, value] : table->items()) {
            const std::string ctx = "credit_class_overrides." + key;
            auto spec = credit_spec(r, value, ctx);
            if (!spec) continue;
            check_unit(r, *spec, ctx);
            if (auto cls = try_parse_asset_class(key))
                sc.risk.credit_class_overrides[*cls] = *spec;
            else
                sc.risk.credit_position_overrides[key] = *spec;
        }
    } else if (!table) {
        defaults.push_back("credit_class_overrides = {}");
    }

    if (const json* table = r.find(doc, "operational_table", "", false); table && r.require_object(*table, "operational_table")) {
        for (const auto& [key, value] : table->items()) {
            const std::string ctx = "operational_table." + key;
            if (auto f = r.decimal_value(value, ctx)) {
                check_unit(r, *f, ctx);
                sc.risk.operational_table[key] = *f;
            }
        }
    } else if (!table) {
        defaults.push_back("operational_table = {} (operational CaRR 0 for every position)");
    }

    sc.risk.market_model = monte_carlo(r, r.find(doc, "monte_carlo", "", false), defaults);

    if (const json* ov = r.find(doc, "bucket_drawdown_overrides", "", false)) {
        bucket_map<Bucket>(r, ov, "bucket_drawdown_overrides", [&](Bucket b, const json& v, const std::string& ctx) {
            if (auto f = r.decimal_value(v, ctx)) sc.bucketing.overrides[b] = *f;
        });
        try {
            detail::check_overrides(sc.bucketing.overrides);
        } catch (const DomainError& e) {
            r.error("bucket_drawdown_overrides", e.what());
        }
    } else {
        defaults.push_back("bucket_drawdown_overrides = {} (drawdowns from holder history)");
    }

    if (const json* sw = r.find(doc, "stress_windows", "", false)) {
        bucket_map<Bucket>(r, sw, "stress_windows", [&](Bucket b, const json& v, const std::string& ctx) {
            if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1 || v.get<std::uint64_t>() > 100'000)
                r.error(ctx, "expected a positive number of days");
            else
                sc.bucketing.stress_windows[b] = static_cast<int>(v.get<std::uint64_t>());
        });
    } else {
        defaults.push_back("stress_windows = {day: 1, week: 7, month: 30, year: 365}");
    }

    if (doc.contains("split_holder_classes")) {
        sc.bucketing.split_by_class = r.boolean(doc, "split_holder_classes", "").value_or(false);
    } else {
        defaults.push_back("split_holder_classes = false");
    }

    if (const json* hc = r.find(doc, "haircuts", "", false); hc && r.require_object(*hc, "haircuts")) {
        for (const auto& [key, value] : hc->items()) {
            const std::string ctx = "haircuts." + key;
            auto cls = r.parsed(std::optional<std::string>(key), ctx, [](const std::string& x) { return parse_asset_class(x); });
            auto f = r.decimal_value(value, ctx);
            if (cls && f) {
                check_unit(r, *f, ctx);
                sc.haircuts[*cls] = *f;
            }
        }
    } else if (!hc) {
        defaults.push_back("haircuts = {} (no haircut for any class)");
    }

    if (const json* tol = r.find(doc, "tolerances", "", false); tol && r.require_object(*tol, "tolerances")) {
        r.allow_keys(*tol, {"balance_identity", "cr_threshold"}, "tolerances");
        if (tol->contains("balance_identity"))
            sc.tolerances.balance_identity = r.decimal(*tol, "balance_identity", "tolerances").value_or(Money(1));
        else
            defaults.push_back("tolerances.balance_identity = 1");
        if (tol->contains("cr_threshold"))
            sc.tolerances.cr_threshold = r.decimal(*tol, "cr_threshold", "tolerances").value_or(Fraction(1));
        else
            defaults.push_back("tolerances.cr_threshold = 1");
        if (sc.tolerances.balance_identity.is_negative()) r.error("tolerances.balance_identity", "must be >= 0");
        if (sc.tolerances.cr_threshold.is_negative()) r.error("tolerances.cr_threshold", "must be >= 0");
    } else if (!tol) {
        defaults.push_back("tolerances = {balance_identity: 1, cr_threshold: 1}");
    }

    if (const json* ref = r.find(doc, "published_reference", "", false); ref && r.require_object(*ref, "published_reference")) {
        const std::string ctx = "published_reference";
        r.allow_keys(*ref, {"total_car", "car_by_class", "tolerance"}, ctx);
        PublishedReference pr;
        pr.total_car = r.decimal(*ref, "total_car", ctx).value_or(Money{});
        if (ref->contains("tolerance")) pr.tolerance = r.decimal(*ref, "tolerance", ctx).value_or(pr.tolerance);
        if (const json* rows = r.find(*ref, "car_by_class", ctx, false); rows && r.require_object(*rows, ctx + ".car_by_class")) {
            for (const auto& [key, value] : rows->items()) {
                const std::string rctx = ctx + ".car_by_class." + key;
                auto cls = r.parsed(std::optional<std::string>(key), rctx, [](const std::string& x) { return parse_asset_class(x); });
                auto m = r.decimal_value(value, rctx);
                if (cls && m) pr.car_by_class[*cls] = *m;
            }
        }
        sc.reference = pr;
    }

    throw_if_errors(file, r);
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(ingest_detail::read_json(path), path.string());
}

// ---------------------------------------------------------------------------
// Serialization. Field order is normalized; every value is written explicitly.

inline nlohmann::ordered_json to_json(const BalanceSheetSnapshot& s) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["as_of"] = s.as_of.to_string();
    doc["assets"] = nlohmann::ordered_json::array();
    for (const auto& a : s.assets) {
        nlohmann::ordered_json rec;
        rec["id"] = a.id;
        rec["class"] = to_string(a.asset_class);
        rec["exposure"] = a.exposure.to_string();
        rec["avg_maturity"] = a.avg_maturity.to_string();
        if (a.rating) rec["rating"] = to_string(*a.rating);
        rec["liquidity_tenor"] = to_string(a.liquidity_tenor);
        if (a.collateral_ref) rec["collateral_ref"] = *a.collateral_ref;
        doc["assets"].push_back(std::move(rec));
    }
    doc["liabilities"] = nlohmann::ordered_json::array();
    for (const auto& l : s.liabilities)
        doc["liabilities"].push_back({{"id", l.id}, {"kind", to_string(l.kind)}, {"amount", l.amount.to_string()}});
    return doc;
}

inline nlohmann::ordered_json to_json(const VaultPortfolio& p) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["market_depth"] = p.market_depth.to_string();
    doc["slippage_coefficient"] = p.slippage_coefficient.to_string();
    doc["vaults"] = nlohmann::ordered_json::array();
    for (const auto& v : p.vaults)
        doc["vaults"].push_back({{"collateral_units", v.collateral_units.to_string()},
                                 {"collateral_price", v.collateral_price.to_string()},
                                 {"debt", v.debt.to_string()},
                                 {"liquidation_ratio", v.liquidation_ratio.to_string()},
                                 {"liquidation_penalty", v.liquidation_penalty.to_string()}});
    return doc;
}

inline nlohmann::ordered_json to_json(std::span<const HolderRecord> holders) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["holders"] = nlohmann::ordered_json::array();
    for (const auto& h : holders) {
        nlohmann::ordered_json rec;
        rec["address_id"] = h.address_id;
        rec["holder_kind"] = to_string(h.holder_kind);
        rec["balance_series"] = nlohmann::ordered_json::array();
        for (const auto& p : h.balance_series) rec["balance_series"].push_back({p.date.to_string(), p.balance.to_string()});
        doc["holders"].push_back(std::move(rec));
    }
    return doc;
}

namespace ingest_detail {

inline nlohmann::ordered_json credit_json(const CreditSpec& c) {
    if (const auto* f = std::get_if<Fraction>(&c)) return f->to_string();
    const auto& p = std::get<PdLgd>(c);
    return {{"pd", p.pd.to_string()}, {"lgd", p.lgd.to_string()}};
}

}  // namespace ingest_detail

inline nlohmann::ordered_json to_json(const Scenario& sc) {
    using ingest_detail::credit_json;
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["rate_shock_bps"] = sc.risk.rate_shock_bps.to_string();
    doc["credit_rating_table"] = nlohmann::ordered_json::object();
    for (const auto& [r, f] : sc.risk.credit_rating_table) doc["credit_rating_table"][std::string(to_string(r))] = f.to_string();
    doc["credit_class_overrides"] = nlohmann::ordered_json::object();
    for (const auto& [c, spec] : sc.risk.credit_class_overrides)
        doc["credit_class_overrides"][std::string(to_string(c))] = credit_json(spec);
    for (const auto& [id, spec] : sc.risk.credit_position_overrides) doc["credit_class_overrides"][id] = credit_json(spec);
    doc["operational_table"] = nlohmann::ordered_json::object();
    for (const auto& [id, f] : sc.risk.operational_table) doc["operational_table"][id] = f.to_string();

    const auto& mc = sc.risk.market_model;
    nlohmann::ordered_json m;
    m["n_paths"] = mc.n_paths;
    m["horizon_days"] = mc.horizon_days;
    m["daily_volatility"] = mc.daily_volatility.to_string();
    m["daily_drift"] = mc.daily_drift.to_string();
    m["jump_probability"] = mc.jump_probability.to_string();
    m["jump_size"] = mc.jump_size.to_string();
    m["seed"] = mc.seed;
    if (mc.loss_statistic.kind == LossStatistic::Kind::Mean)
        m["loss_statistic"] = "mean";
    else
        m["loss_statistic"] = {{"percentile", mc.loss_statistic.level.to_string()}};
    doc["monte_carlo"] = std::move(m);

    doc["bucket_drawdown_overrides"] = nlohmann::ordered_json::object();
    for (const auto& [b, f] : sc.bucketing.overrides) doc["bucket_drawdown_overrides"][std::string(to_string(b))] = f.to_string();
    doc["stress_windows"] = nlohmann::ordered_json::object();
    for (Bucket b : kBuckets) doc["stress_windows"][std::string(to_string(b))] = sc.bucketing.stress_windows[b];
    doc["split_holder_classes"] = sc.bucketing.split_by_class;
    doc["haircuts"] = nlohmann::ordered_json::object();
    for (const auto& [c, f] : sc.haircuts) doc["haircuts"][std::string(to_string(c))] = f.to_string();
    doc["tolerances"] = {{"balance_identity", sc.tolerances.balance_identity.to_string()},
                         {"cr_threshold", sc.tolerances.cr_threshold.to_string()}};
    if (sc.reference) {
        nlohmann::ordered_json ref;
        ref["total_car"] = sc.reference->total_car.to_string();
        ref["car_by_class"] = nlohmann::ordered_json::object();
        for (const auto& [c, m2] : sc.reference->car_by_class) ref["car_by_class"][std::string(to_string(c))] = m2.to_string();
        ref["tolerance"] = sc.reference->tolerance.to_string();
        doc["published_reference"] = std::move(ref);
    }
    return doc;
}

}  // namespace calm
