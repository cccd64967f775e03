// Finds the collateral market depth at which the simulated expected loss of a
// vault portfolio equals a target loss ratio. Loss is decreasing in depth, so a
// bisection over log(depth) suffices.
//
//   calm_calibrate --vaults data/.../vaults_eth.json --scenario data/.../scenario.json --target 0.028655

#include <chrono>
#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "calm/calm.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Calibrate vault-portfolio market depth to a target expected loss ratio"};
    std::string vaults_path, scenario_path, target_text;
    double lo = 1e7, hi = 1e11;
    int iterations = 40;
    std::vector<std::uint64_t> check_paths{100'000};
    app.add_option("--vaults", vaults_path)->required()->check(CLI::ExistingFile);
    app.add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
    app.add_option("--target", target_text, "target loss ratio")->required();
    app.add_option("--lo", lo)->capture_default_str();
    app.add_option("--hi", hi)->capture_default_str();
    app.add_option("--iterations", iterations)->capture_default_str();
    app.add_option("--check-paths", check_paths, "re-run the result at these path counts")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        auto portfolio = calm::load_vault_portfolio(vaults_path);
        const auto scenario = calm::load_scenario(scenario_path);
        const auto cfg = scenario.risk.market_model;
        const auto target = calm::Fraction::parse(target_text);

        auto loss_at = [&](double depth, const calm::MonteCarloConfig& c) {
            portfolio.market_depth = calm::Money::from_double(depth, 0);
            return calm::expected_loss_ratio(portfolio, c);
        };
        if (loss_at(lo, cfg) < target || loss_at(hi, cfg) > target) {
            std::cerr << "target not bracketed by [" << lo << ", " << hi << "]\n";
            return 1;
        }
        for (int i = 0; i < iterations && hi / lo > 1.0 + 1e-9; ++i) {
            const double mid = std::sqrt(lo * hi);
            const auto l = loss_at(mid, cfg);
            std::cout << "depth=" << calm::Money::from_double(mid, 0).to_fixed(0) << " loss=" << l.to_fixed(6) << '\n';
            (l > target ? lo : hi) = mid;
        }
        const double depth = std::round(std::sqrt(lo * hi) / 1e6) * 1e6;
        const auto t0 = std::chrono::steady_clock::now();
        const auto l = loss_at(depth, cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "market_depth=" << calm::Money::from_double(depth, 0).to_fixed(0) << " loss=" << l.to_fixed(6)
                  << " (" << cfg.n_paths << " paths, " << secs << " s)\n";
        for (auto n : check_paths) {
            auto c = cfg;
            c.n_paths = n;
            std::cout << "  at " << n << " paths: loss=" << loss_at(depth, c).to_fixed(6) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
