#include "fedavo/federated.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedavo/gwo.hpp"

namespace fedavo {

namespace {

bool is_tuning(Algorithm a) { return a != Algorithm::fedavg; }

// Substream tags under a run seed.
constexpr std::uint64_t kInitTag = 0;
constexpr std::uint64_t kTuneTag = 1;
constexpr std::uint64_t kFitTrainTag = 2;
constexpr std::uint64_t kFinalTrainTag = 3;

} // namespace

void FLConfig::validate() const {
    if (num_clients < 1)
        throw std::invalid_argument("fl config: need at least one client");
    if (!(client_fraction > 0.0 && client_fraction <= 1.0))
        throw std::invalid_argument("fl config: client fraction outside (0,1]");
    if (batch_size < 1)
        throw std::invalid_argument("fl config: batch size must be >= 1");
    fixed_hp.validate();
    if (is_tuning(algorithm)) {
        if (tuning_epochs < 1)
            throw std::invalid_argument("fl config: tuning epochs must be >= 1");
        if (population_size < 2)
            throw std::invalid_argument("fl config: population must be >= 2");
        search_space.validate();
        if (search_space.dims() != 4)
            throw std::invalid_argument(
                "fl config: search space must cover (eta, beta, lambda, epochs)");
        if (std::find(search_space.integer_dims.begin(),
                      search_space.integer_dims.end(),
                      kDimEpochs) == search_space.integer_dims.end())
            throw std::invalid_argument(
                "fl config: epoch dimension must be integer");
        avo.validate();
    }
}

SearchSpace iid_search_space() {
    SearchSpace space;
    space.lower = {1e-5, 0.1, 1e-4, 1.0};
    space.upper = {0.01, 0.9, 0.01, 5.0};
    space.integer_dims = {kDimEpochs};
    return space;
}

SearchSpace noniid_search_space() {
    SearchSpace space;
    space.lower = {0.01, 1e-10, 1e-10, 1.0};
    space.upper = {0.1, 1e-9, 1e-8, 5.0};
    space.integer_dims = {kDimEpochs};
    return space;
}

HyperParams decode_hyperparams(std::span<const double> position,
                               const SearchSpace& space) {
    if (position.size() != 4 || space.dims() != 4)
        throw std::invalid_argument("decode: expected 4 hyperparameter dims");
    HyperParams hp;
    hp.eta = position[kDimEta];
    hp.beta = position[kDimBeta];
    hp.lambda = position[kDimLambda];
    double epochs = std::floor(position[kDimEpochs] + 0.5);
    epochs = std::clamp(epochs, space.lower[kDimEpochs],
                        space.upper[kDimEpochs]);
    hp.epochs = static_cast<int>(epochs);
    return hp;
}

std::vector<std::int32_t> select_clients(std::size_t num_clients,
                                         double fraction, std::size_t round,
                                         std::uint64_t seed) {
    if (num_clients < 1)
        throw std::invalid_argument("select: need at least one client");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("select: fraction outside (0,1]");

    const std::size_t q = std::max<std::size_t>(
        static_cast<std::size_t>(
            std::floor(static_cast<double>(num_clients) * fraction)),
        1);
    std::vector<std::int32_t> ids(num_clients);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(derive_seed(seed, round));
    rng.shuffle(ids);
    ids.resize(q);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ModelParams aggregate(
    const std::vector<std::pair<ModelParams, std::size_t>>& updates) {
    if (updates.empty()) throw std::invalid_argument("aggregate: no updates");
    const std::size_t len = updates.front().first.values.size();
    std::size_t total = 0;
    for (const auto& [params, n] : updates) {
        if (params.values.size() != len)
            throw std::invalid_argument("aggregate: parameter length mismatch");
        if (n < 1) throw std::invalid_argument("aggregate: empty client");
        total += n;
    }
    ModelParams out;
    out.values.assign(len, 0.0);
    for (const auto& [params, n] : updates) {
        const double weight =
            static_cast<double>(n) / static_cast<double>(total);
        for (std::size_t i = 0; i < len; ++i)
            out.values[i] += weight * params.values[i];
    }
    return out;
}

std::pair<ModelParams, std::size_t> client_update_fedavg(
    const ModelSpec& spec, const ModelParams& global, const ClientShard& shard,
    const HyperParams& hp, std::size_t batch_size, UpdateMode mode,
    std::uint64_t seed) {
    const auto rows = shard.all_rows();
    ModelParams updated = train_local(spec, global, shard.inputs, shard.labels,
                                      rows, hp, batch_size, mode, seed);
    return {std::move(updated), shard.size()};
}

TunedUpdate client_update_tuned(const ModelSpec& spec, const ModelParams& global,
                                const ClientShard& shard, const FLConfig& cfg,
                                std::size_t round, std::int32_t client_id) {
    if (shard.train_split.empty() || shard.val_split.empty())
        throw std::invalid_argument("tuned update: shard too small to split");

    const std::uint64_t client_seed =
        derive_seed(cfg.seed, round, static_cast<std::uint64_t>(client_id));
    const std::uint64_t fit_train_seed = derive_seed(client_seed, kFitTrainTag);

    std::size_t evaluations = 0;
    std::size_t finite_evaluations = 0;
    const Objective fitness = [&](std::span<const double> position) -> double {
        ++evaluations;
        const HyperParams hp = decode_hyperparams(position, cfg.search_space);
        double loss;
        try {
            const ModelParams trained = train_local(
                spec, global, shard.inputs, shard.labels, shard.train_split,
                hp, cfg.batch_size, cfg.update_mode, fit_train_seed);
            loss = evaluate(spec, trained, shard.inputs, shard.labels,
                            shard.val_split)
                       .loss;
        } catch (const std::runtime_error&) {  // diverged
            return std::numeric_limits<double>::quiet_NaN();
        }
        if (std::isnan(loss)) return loss;
        ++finite_evaluations;
        return loss;
    };

    const std::uint64_t tune_seed = derive_seed(client_seed, kTuneTag);
    OptimizeResult tuned;
    switch (cfg.algorithm) {
        case Algorithm::fedavo: {
            AvoConfig avo = cfg.avo;
            avo.max_iterations = cfg.tuning_epochs;
            tuned = avo_optimize(cfg.search_space, fitness, avo,
                                 cfg.population_size, tune_seed);
            break;
        }
        case Algorithm::fedpso: {
            PsoConfig pso;
            pso.max_iterations = cfg.tuning_epochs;
            tuned = pso_optimize(cfg.search_space, fitness, pso,
                                 cfg.population_size, tune_seed);
            break;
        }
        case Algorithm::fedgwo:
            tuned = gwo_optimize(cfg.search_space, fitness, cfg.population_size,
                                 cfg.tuning_epochs, tune_seed);
            break;
        case Algorithm::fedavg:
            throw std::logic_error("tuned update called for fedavg");
    }

    TunedUpdate result;
    result.evaluations = evaluations;
    if (finite_evaluations == 0) {
        std::cerr << "warning: client " << client_id << " round " << round
                  << ": all tuning evaluations diverged, falling back to "
                     "fixed hyperparameters\n";
        result.chosen = cfg.fixed_hp;
        result.fallback = true;
    } else {
        result.chosen = decode_hyperparams(tuned.best_position,
                                           cfg.search_space);
    }

    const auto rows = shard.all_rows();
    result.params = train_local(spec, global, shard.inputs, shard.labels, rows,
                                result.chosen, cfg.batch_size, cfg.update_mode,
                                derive_seed(client_seed, kFinalTrainTag));
    result.n = shard.size();
    return result;
}

std::vector<RoundMetrics> run_federated(const ModelSpec& spec,
                                        const std::vector<ClientShard>& shards,
                                        const Dataset& test,
                                        const FLConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (shards.size() != cfg.num_clients)
        throw std::invalid_argument("run: shard count != num_clients");
    if (test.size() == 0) throw std::invalid_argument("run: empty test set");

    ModelParams global = init_params(spec, derive_seed(cfg.seed, kInitTag));

    std::vector<RoundMetrics> metrics;
    metrics.reserve(cfg.rounds + 1);
    {
        RoundMetrics initial;
        initial.round = 0;
        const EvalResult ev = evaluate(spec, global, test.inputs, test.labels);
        initial.global_accuracy = ev.accuracy;
        initial.global_loss = ev.loss;
        metrics.push_back(std::move(initial));
    }

    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
        RoundMetrics rm;
        rm.round = round;
        rm.selected_clients = select_clients(cfg.num_clients,
                                             cfg.client_fraction, round,
                                             cfg.seed);
        std::vector<std::pair<ModelParams, std::size_t>> updates;
        updates.reserve(rm.selected_clients.size());
        for (std::int32_t id : rm.selected_clients) {
            const ClientShard& shard = shards[static_cast<std::size_t>(id)];
            ClientRecord record;
            record.client_id = id;
            try {
                if (cfg.algorithm == Algorithm::fedavg) {
                    auto [params, n] = client_update_fedavg(
                        spec, global, shard, cfg.fixed_hp, cfg.batch_size,
                        cfg.update_mode,
                        derive_seed(cfg.seed, round,
                                    static_cast<std::uint64_t>(id)));
                    record.chosen = cfg.fixed_hp;
                    record.tuning_evaluations = 0;
                    const EvalResult local =
                        evaluate(spec, params, shard.inputs, shard.labels);
                    record.local_accuracy = local.accuracy;
                    record.local_loss = local.loss;
                    updates.emplace_back(std::move(params), n);
                } else {
                    TunedUpdate tuned =
                        client_update_tuned(spec, global, shard, cfg, round, id);
                    record.chosen = tuned.chosen;
                    record.tuning_evaluations = tuned.evaluations;
                    const EvalResult local = evaluate(spec, tuned.params,
                                                      shard.inputs,
                                                      shard.labels);
                    record.local_accuracy = local.accuracy;
                    record.local_loss = local.loss;
                    updates.emplace_back(std::move(tuned.params), tuned.n);
                }
            } catch (const std::exception& e) {
                throw std::runtime_error("round " + std::to_string(round) +
                                         ", client " + std::to_string(id) +
                                         ": " + e.what());
            }
            rm.per_client.push_back(std::move(record));
        }

        global = aggregate(updates);
        const EvalResult ev = evaluate(spec, global, test.inputs, test.labels);
        rm.global_accuracy = ev.accuracy;
        rm.global_loss = ev.loss;
        metrics.push_back(std::move(rm));
    }
    return metrics;
}

} // namespace fedavo
