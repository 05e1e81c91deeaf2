#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedavo/avo.hpp"
#include "fedavo/dataset.hpp"
#include "fedavo/model.hpp"
#include "fedavo/partition.hpp"
#include "fedavo/pso.hpp"
#include "fedavo/search_space.hpp"

namespace fedavo {

enum class Algorithm { fedavg, fedavo, fedpso, fedgwo };

/// Per-run federated configuration shared by all algorithms. The search
/// space covers the tuned tuple (eta, beta, lambda, epochs) in that order,
/// with the epoch dimension flagged integer.
struct FLConfig {
    std::size_t num_clients = 10;
    double client_fraction = 1.0;
    std::size_t batch_size = 16;
    std::size_t rounds = 100;
    Algorithm algorithm = Algorithm::fedavg;
    std::size_t tuning_epochs = 3;     // generations of the inner optimizer
    std::size_t population_size = 50;
    SearchSpace search_space;
    HyperParams fixed_hp;              // used by fedavg and as NaN fallback
    std::uint64_t seed = 1;
    UpdateMode update_mode = UpdateMode::velocity;
    AvoConfig avo;

    void validate() const;
};

/// Index order of the tuned hyperparameters inside the search space.
inline constexpr std::size_t kDimEta = 0;
inline constexpr std::size_t kDimBeta = 1;
inline constexpr std::size_t kDimLambda = 2;
inline constexpr std::size_t kDimEpochs = 3;

/// Search space with the published tuning bounds for uniformly distributed
/// client data.
SearchSpace iid_search_space();
/// Same for label-skewed client data (higher learning rate, vanishing
/// momentum and decay).
SearchSpace noniid_search_space();

/// Position <-> hyperparameter decoding (epochs rounded half-up, clamped).
HyperParams decode_hyperparams(std::span<const double> position,
                               const SearchSpace& space);

struct ClientRecord {
    std::int32_t client_id = 0;
    double local_accuracy = 0.0;
    double local_loss = 0.0;
    HyperParams chosen;
    std::size_t tuning_evaluations = 0;
};

struct RoundMetrics {
    std::size_t round = 0;
    double global_accuracy = 0.0;
    double global_loss = 0.0;
    std::vector<ClientRecord> per_client;
    std::vector<std::int32_t> selected_clients;
};

/// max(floor(K*p), 1) distinct client ids for the round, sorted ascending.
std::vector<std::int32_t> select_clients(std::size_t num_clients, double fraction,
                                         std::size_t round, std::uint64_t seed);

/// Sample-size-weighted average of client parameters, accumulated in
/// ascending position order.
ModelParams aggregate(
    const std::vector<std::pair<ModelParams, std::size_t>>& updates);

/// Plain local training on the full shard with fixed hyperparameters.
std::pair<ModelParams, std::size_t> client_update_fedavg(
    const ModelSpec& spec, const ModelParams& global, const ClientShard& shard,
    const HyperParams& hp, std::size_t batch_size, UpdateMode mode,
    std::uint64_t seed);

struct TunedUpdate {
    ModelParams params;
    std::size_t n = 0;
    HyperParams chosen;
    std::size_t evaluations = 0;
    bool fallback = false;  // every tuning evaluation came back NaN
};

/// Per-round hyperparameter tuning followed by full-shard training with the
/// winning tuple. Fitness of a candidate = validation loss after training a
/// clone of the global model on the shard's training split. The inner
/// optimizer (vulture search, PSO, or GWO per cfg.algorithm) runs
/// cfg.tuning_epochs generations on one population.
TunedUpdate client_update_tuned(const ModelSpec& spec, const ModelParams& global,
                                const ClientShard& shard, const FLConfig& cfg,
                                std::size_t round, std::int32_t client_id);

/// Full federated run over pre-partitioned shards. Round 0 records the
/// evaluation of the freshly initialized global model; each subsequent
/// round selects clients, trains them, aggregates, and evaluates on the
/// test set.
std::vector<RoundMetrics> run_federated(const ModelSpec& spec,
                                        const std::vector<ClientShard>& shards,
                                        const Dataset& test, const FLConfig& cfg);

} // namespace fedavo
