#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedavo/federated.hpp"

namespace fedavo {

enum class DatasetKind { mnist_idx, synthetic };
enum class Distribution { iid, noniid };

/// Full experiment description as parsed from a strict flat JSON document.
/// Unset bounds fall back to the published per-distribution defaults.
struct ExperimentConfig {
    DatasetKind dataset = DatasetKind::synthetic;
    std::string train_images, train_labels, test_images, test_labels;
    std::size_t subsample_train = 0;  // 0 = keep everything
    std::size_t subsample_test = 0;
    bool subsample_stratified = true;

    std::size_t synthetic_train_samples = 20000;
    std::size_t synthetic_test_samples = 2000;
    std::size_t synthetic_classes = 10;
    std::size_t synthetic_dims = 10;
    double synthetic_spread = 1.0;

    Distribution distribution = Distribution::iid;
    std::size_t classes_per_client = 3;
    std::size_t shard_size = 500;
    double threshold = 0.9;
    std::vector<std::uint64_t> seeds = {1};
    std::vector<std::size_t> hidden_layers = {32};
    std::string output_dir = "out";

    FLConfig fl;  // search_space filled from distribution + overrides

    void validate() const;
};

/// Parses and validates a config document. Unknown keys are rejected, every
/// error names the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

std::string algorithm_name(Algorithm a);

/// Round-metrics file in the stable schema:
/// round,global_accuracy,global_loss then one
/// client_id,local_accuracy,local_loss,eta,beta,lambda,epochs,tuning_evaluations
/// group per participating client slot. The round-0 row carries empty client
/// fields.
std::string metrics_to_csv(const std::vector<RoundMetrics>& metrics,
                           std::size_t clients_per_round);

/// (round, global_accuracy) pairs read back from a metrics CSV.
std::vector<std::pair<std::size_t, double>> read_accuracy_series(
    const std::string& csv_path);

/// First round whose accuracy reaches the threshold; nullopt if never.
std::optional<std::size_t> rounds_to_threshold(
    const std::vector<std::pair<std::size_t, double>>& series,
    double threshold);

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<RoundMetrics> rounds;
    std::string csv_path;
};

struct ExperimentResult {
    std::vector<SeedRun> runs;
    double final_accuracy_mean = 0.0;
    double final_accuracy_stddev = 0.0;  // sample (n-1); 0 for a single seed
    std::string summary_path;
};

/// Runs every configured seed, writes one metrics CSV per seed plus a
/// summary CSV of the final-accuracy mean and spread.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& output_dir);

} // namespace fedavo
