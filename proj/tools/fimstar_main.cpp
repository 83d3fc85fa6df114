// Command-line front end: scenario experiments, complexity report and
// learning-curve aggregation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "fimstar/config.hpp"
#include "fimstar/experiments.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"FIM + STAR-BD-RIS downlink simulator and Meta-SAC optimizer"};
    app.require_subcommand(1);

    // run <experiment> --config <path> --seeds <list> --out <dir>
    std::string run_experiment_name;
    std::string run_config_path;
    std::vector<std::uint64_t> run_seeds;
    std::string run_out_dir = "out";
    int run_threads = 0;
    CLI::App* run = app.add_subcommand("run", "run a named experiment");
    run->add_option("experiment", run_experiment_name,
                    "one of: lr_sweep, user_sweep, variant_compare, power_curve")
        ->required();
    run->add_option("--config", run_config_path, "scenario config file (JSON)")->required();
    run->add_option("--seeds", run_seeds, "seeds to run (default: config run.seeds)")
        ->delimiter(',');
    run->add_option("--out", run_out_dir, "output directory");
    run->add_option("--threads", run_threads, "worker threads (default: hardware)");

    // report complexity --config <path>
    CLI::App* report = app.add_subcommand("report", "print reports");
    std::string report_config_path;
    CLI::App* complexity = report->add_subcommand("complexity", "network complexity report");
    complexity->add_option("--config", report_config_path, "scenario config file (JSON)")
        ->required();
    report->require_subcommand(1);

    // aggregate --out <file> [--metric ee] <inputs...>
    std::string agg_out;
    std::string agg_metric = "ee";
    std::vector<std::string> agg_inputs;
    CLI::App* aggregate = app.add_subcommand("aggregate", "aggregate seed CSVs into a long-format curve");
    aggregate->add_option("--out", agg_out, "output CSV path")->required();
    aggregate->add_option("--metric", agg_metric, "column to aggregate (default ee)");
    aggregate->add_option("inputs", agg_inputs, "per-seed training CSVs")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const fimstar::ScenarioConfig cfg = fimstar::load_config(run_config_path);
            std::vector<std::uint64_t> seeds = run_seeds.empty() ? cfg.seeds : run_seeds;
            fimstar::run_experiment(run_experiment_name, cfg, seeds, run_out_dir, run_threads);
            std::printf("wrote %s\n", run_out_dir.c_str());
        } else if (report->parsed()) {
            const fimstar::ScenarioConfig cfg = fimstar::load_config(report_config_path);
            std::fputs(fimstar::complexity_report_text(fimstar::complexity_report(cfg)).c_str(),
                       stdout);
        } else if (aggregate->parsed()) {
            std::vector<fs::path> inputs(agg_inputs.begin(), agg_inputs.end());
            fimstar::emit_plot_data_file(inputs, agg_out, agg_metric);
            std::printf("wrote %s\n", agg_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
