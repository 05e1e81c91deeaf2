// Experiment front door: `run` executes a configured federated simulation
// and writes per-seed metrics CSVs plus a summary; `report` prints the
// rounds-to-threshold figure for existing metrics files.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedavo/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path, long long seed_override,
            const std::string& algorithm, const std::string& out_dir) {
    fedavo::ExperimentConfig cfg = fedavo::load_config_file(config_path);
    if (seed_override >= 0)
        cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
    if (!algorithm.empty()) {
        if (algorithm == "fedavg") cfg.fl.algorithm = fedavo::Algorithm::fedavg;
        else if (algorithm == "fedavo") cfg.fl.algorithm = fedavo::Algorithm::fedavo;
        else if (algorithm == "fedpso") cfg.fl.algorithm = fedavo::Algorithm::fedpso;
        else if (algorithm == "fedgwo") cfg.fl.algorithm = fedavo::Algorithm::fedgwo;
        else throw std::invalid_argument("unknown algorithm: " + algorithm);
    }
    const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;

    const fedavo::ExperimentResult result = fedavo::run_experiment(cfg, dir);
    for (const fedavo::SeedRun& run : result.runs) {
        const auto& last = run.rounds.back();
        std::cout << "seed " << run.seed << ": rounds=" << last.round
                  << " final_accuracy=" << last.global_accuracy
                  << " final_loss=" << last.global_loss << " -> "
                  << run.csv_path << "\n";
    }
    std::cout << "final accuracy over " << result.runs.size()
              << " seed(s): " << result.final_accuracy_mean << " +/- "
              << result.final_accuracy_stddev << " -> " << result.summary_path
              << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& csv_paths, double threshold) {
    for (const std::string& path : csv_paths) {
        const auto series = fedavo::read_accuracy_series(path);
        const auto crossing = fedavo::rounds_to_threshold(series, threshold);
        std::cout << path << ",";
        if (crossing)
            std::cout << *crossing;
        else
            std::cout << "none";
        std::cout << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning simulator with per-client metaheuristic "
                 "hyperparameter tuning"};
    app.require_subcommand(1);

    std::string config_path;
    long long seed_override = -1;
    std::string algorithm;
    std::string out_dir;
    CLI::App* run = app.add_subcommand("run", "Run a configured experiment");
    run->add_option("--config", config_path, "JSON experiment config")
        ->required();
    run->add_option("--seed-override", seed_override,
                    "Run only this seed instead of the configured list");
    run->add_option("--algorithm", algorithm,
                    "Override the configured algorithm "
                    "(fedavg|fedavo|fedpso|fedgwo)");
    run->add_option("--out", out_dir, "Output directory for CSV files");

    std::vector<std::string> csv_paths;
    double threshold = 0.9;
    CLI::App* report = app.add_subcommand(
        "report", "Print rounds-to-threshold for metrics CSV files");
    report->add_option("--csv", csv_paths, "Metrics CSV path(s)")->required();
    report->add_option("--threshold", threshold, "Accuracy threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, seed_override, algorithm, out_dir);
        return cmd_report(csv_paths, threshold);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
