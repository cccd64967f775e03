#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "calm/calm.hpp"

namespace {

void add_common(CLI::App& cmd, calm::RunOptions& opt, std::string& threshold) {
    cmd.add_option("--scenario", opt.scenario, "scenario parameters (JSON)")->required()->check(CLI::ExistingFile);
    cmd.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    cmd.add_option("--seed", opt.seed, "override the Monte Carlo seed");
    cmd.add_option("--workers", opt.workers, "Monte Carlo worker threads (0 = all cores)");
    cmd.add_option("--cr-threshold", threshold, "capital ratio at or below which the protocol is undercapitalized");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capital and liquidity risk metrics for stablecoin balance sheets"};
    app.set_version_flag("--version", calm::kToolVersion);
    app.require_subcommand(1);

    calm::RunOptions opt;
    std::string threshold;

    auto* car = app.add_subcommand("car", "capital at risk and capital ratio for one snapshot");
    car->add_option("--snapshot", opt.snapshot, "balance sheet snapshot (JSON)")->required()->check(CLI::ExistingFile);
    add_common(*car, opt, threshold);

    auto* liq = app.add_subcommand("liquidity", "bucketed cumulative funding gap for one snapshot");
    liq->add_option("--snapshot", opt.snapshot, "balance sheet snapshot (JSON)")->required()->check(CLI::ExistingFile);
    liq->add_option("--holders", opt.holders, "stablecoin holder balances (JSON)")->check(CLI::ExistingFile);
    liq->add_flag("--split-holder-classes", opt.split_holder_classes, "bucket volatile and organic holders separately");
    add_common(*liq, opt, threshold);

    auto* rec = app.add_subcommand("recommend", "capital and liquidity recommendations for one snapshot");
    rec->add_option("--snapshot", opt.snapshot, "balance sheet snapshot (JSON)")->required()->check(CLI::ExistingFile);
    rec->add_option("--holders", opt.holders, "stablecoin holder balances (JSON)")->check(CLI::ExistingFile);
    rec->add_flag("--split-holder-classes", opt.split_holder_classes, "bucket volatile and organic holders separately");
    add_common(*rec, opt, threshold);

    auto* ts = app.add_subcommand("timeseries", "metrics for every snapshot_YYYY-MM-DD.json in a directory");
    ts->add_option("--snapshot-dir", opt.snapshot_dir, "directory of dated snapshots")->required();
    add_common(*ts, opt, threshold);

    CLI11_PARSE(app, argc, argv);

    if (!threshold.empty()) {
        try {
            opt.cr_threshold = calm::Fraction::parse(threshold);
        } catch (const calm::Error& e) {
            std::cerr << "input error: --cr-threshold: " << e.what() << '\n';
            return calm::kInputError;
        }
    }

    if (car->parsed()) return calm::run_car(opt, std::cout, std::cerr);
    if (liq->parsed()) return calm::run_liquidity(opt, std::cout, std::cerr);
    if (rec->parsed()) return calm::run_recommend(opt, std::cout, std::cerr);
    return calm::run_timeseries(opt, std::cout, std::cerr);
}
