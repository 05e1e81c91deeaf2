#include "fedavo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fedavo {

namespace {

using nlohmann::json;

// Substream tags for per-seed derived streams.
constexpr std::uint64_t kDataTag = 11;
constexpr std::uint64_t kPartitionTag = 12;
constexpr std::uint64_t kSubsampleTag = 13;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key '" + key + "': " + why);
}

double get_number(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) bad_key(key, "expected a number");
    return j.at(key).get<double>();
}

std::size_t get_count(const json& j, const std::string& key) {
    if (!j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() < 0)
        bad_key(key, "expected a nonnegative integer");
    return j.at(key).get<std::size_t>();
}

std::string get_string(const json& j, const std::string& key) {
    if (!j.at(key).is_string()) bad_key(key, "expected a string");
    return j.at(key).get<std::string>();
}

std::pair<double, double> get_bounds(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number())
        bad_key(key, "expected [lower, upper]");
    return {v[0].get<double>(), v[1].get<double>()};
}

} // namespace

void ExperimentConfig::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("config key 'threshold': threshold out of range");
    if (seeds.empty())
        throw std::invalid_argument("config key 'seeds': seeds nonempty required");
    if (shard_size < 1)
        throw std::invalid_argument("config key 'shard_size': must be >= 1");
    if (dataset == DatasetKind::mnist_idx &&
        (train_images.empty() || train_labels.empty() || test_images.empty() ||
         test_labels.empty()))
        throw std::invalid_argument(
            "config key 'dataset': mnist_idx requires the four idx paths");
    if (distribution == Distribution::noniid && classes_per_client < 1)
        throw std::invalid_argument(
            "config key 'classes_per_client': must be >= 1");
    for (std::size_t h : hidden_layers)
        if (h < 1)
            throw std::invalid_argument(
                "config key 'hidden_layers': zero-width layer");
    fl.validate();
}

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                    e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("config: expected a JSON object");

    static const std::vector<std::string> known = {
        "dataset", "train_images", "train_labels", "test_images",
        "test_labels", "subsample_train", "subsample_test",
        "subsample_stratified", "synthetic_train_samples",
        "synthetic_test_samples", "synthetic_classes", "synthetic_dims",
        "synthetic_spread", "distribution", "classes_per_client", "shard_size",
        "threshold", "seeds", "hidden_layers", "output_dir", "num_clients",
        "client_fraction", "batch_size", "rounds", "algorithm",
        "tuning_epochs", "population_size", "update_mode", "fixed_eta",
        "fixed_beta", "fixed_lambda", "fixed_epochs", "eta_bounds",
        "beta_bounds", "lambda_bounds", "epoch_bounds"};
    for (const auto& [key, value] : doc.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("unknown config key: " + key);

    ExperimentConfig cfg;

    if (doc.contains("dataset")) {
        const std::string v = get_string(doc, "dataset");
        if (v == "mnist_idx") cfg.dataset = DatasetKind::mnist_idx;
        else if (v == "synthetic") cfg.dataset = DatasetKind::synthetic;
        else bad_key("dataset", "expected 'mnist_idx' or 'synthetic'");
    }
    if (doc.contains("train_images")) cfg.train_images = get_string(doc, "train_images");
    if (doc.contains("train_labels")) cfg.train_labels = get_string(doc, "train_labels");
    if (doc.contains("test_images")) cfg.test_images = get_string(doc, "test_images");
    if (doc.contains("test_labels")) cfg.test_labels = get_string(doc, "test_labels");
    if (doc.contains("subsample_train")) cfg.subsample_train = get_count(doc, "subsample_train");
    if (doc.contains("subsample_test")) cfg.subsample_test = get_count(doc, "subsample_test");
    if (doc.contains("subsample_stratified")) {
        if (!doc.at("subsample_stratified").is_boolean())
            bad_key("subsample_stratified", "expected a boolean");
        cfg.subsample_stratified = doc.at("subsample_stratified").get<bool>();
    }
    if (doc.contains("synthetic_train_samples"))
        cfg.synthetic_train_samples = get_count(doc, "synthetic_train_samples");
    if (doc.contains("synthetic_test_samples"))
        cfg.synthetic_test_samples = get_count(doc, "synthetic_test_samples");
    if (doc.contains("synthetic_classes"))
        cfg.synthetic_classes = get_count(doc, "synthetic_classes");
    if (doc.contains("synthetic_dims"))
        cfg.synthetic_dims = get_count(doc, "synthetic_dims");
    if (doc.contains("synthetic_spread"))
        cfg.synthetic_spread = get_number(doc, "synthetic_spread");
    if (doc.contains("distribution")) {
        const std::string v = get_string(doc, "distribution");
        if (v == "iid") cfg.distribution = Distribution::iid;
        else if (v == "noniid") cfg.distribution = Distribution::noniid;
        else bad_key("distribution", "expected 'iid' or 'noniid'");
    }
    if (doc.contains("classes_per_client"))
        cfg.classes_per_client = get_count(doc, "classes_per_client");
    if (doc.contains("shard_size")) cfg.shard_size = get_count(doc, "shard_size");
    if (doc.contains("threshold")) cfg.threshold = get_number(doc, "threshold");
    if (doc.contains("seeds")) {
        const auto& v = doc.at("seeds");
        if (!v.is_array() || v.empty()) bad_key("seeds", "expected a nonempty array");
        cfg.seeds.clear();
        for (const auto& s : v) {
            if (!s.is_number_integer()) bad_key("seeds", "expected integers");
            cfg.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    if (doc.contains("hidden_layers")) {
        const auto& v = doc.at("hidden_layers");
        if (!v.is_array()) bad_key("hidden_layers", "expected an array");
        cfg.hidden_layers.clear();
        for (const auto& s : v) {
            if (!s.is_number_integer() || s.get<std::int64_t>() < 1)
                bad_key("hidden_layers", "expected positive integers");
            cfg.hidden_layers.push_back(s.get<std::size_t>());
        }
    }
    if (doc.contains("output_dir")) cfg.output_dir = get_string(doc, "output_dir");

    if (doc.contains("num_clients")) cfg.fl.num_clients = get_count(doc, "num_clients");
    if (doc.contains("client_fraction"))
        cfg.fl.client_fraction = get_number(doc, "client_fraction");
    if (doc.contains("batch_size")) cfg.fl.batch_size = get_count(doc, "batch_size");
    if (doc.contains("rounds")) cfg.fl.rounds = get_count(doc, "rounds");
    if (doc.contains("algorithm")) {
        const std::string v = get_string(doc, "algorithm");
        if (v == "fedavg") cfg.fl.algorithm = Algorithm::fedavg;
        else if (v == "fedavo") cfg.fl.algorithm = Algorithm::fedavo;
        else if (v == "fedpso") cfg.fl.algorithm = Algorithm::fedpso;
        else if (v == "fedgwo") cfg.fl.algorithm = Algorithm::fedgwo;
        else bad_key("algorithm", "expected fedavg|fedavo|fedpso|fedgwo");
    }
    if (doc.contains("tuning_epochs"))
        cfg.fl.tuning_epochs = get_count(doc, "tuning_epochs");
    if (doc.contains("population_size"))
        cfg.fl.population_size = get_count(doc, "population_size");
    if (doc.contains("update_mode")) {
        const std::string v = get_string(doc, "update_mode");
        if (v == "velocity") cfg.fl.update_mode = UpdateMode::velocity;
        else if (v == "literal") cfg.fl.update_mode = UpdateMode::literal;
        else bad_key("update_mode", "expected 'velocity' or 'literal'");
    }

    // Fixed training knobs for the non-tuning baseline. In the literal
    // update mode the published baseline constants are restored for
    // fidelity runs; the velocity default leaves momentum and decay off.
    cfg.fl.fixed_hp.eta = 0.01;
    cfg.fl.fixed_hp.epochs = 5;
    if (cfg.fl.update_mode == UpdateMode::literal) {
        cfg.fl.fixed_hp.beta = 0.9;
        cfg.fl.fixed_hp.lambda = 0.991;
    } else {
        cfg.fl.fixed_hp.beta = 0.0;
        cfg.fl.fixed_hp.lambda = 0.0;
    }
    if (doc.contains("fixed_eta")) cfg.fl.fixed_hp.eta = get_number(doc, "fixed_eta");
    if (doc.contains("fixed_beta")) cfg.fl.fixed_hp.beta = get_number(doc, "fixed_beta");
    if (doc.contains("fixed_lambda"))
        cfg.fl.fixed_hp.lambda = get_number(doc, "fixed_lambda");
    if (doc.contains("fixed_epochs"))
        cfg.fl.fixed_hp.epochs = static_cast<int>(get_count(doc, "fixed_epochs"));

    cfg.fl.search_space = cfg.distribution == Distribution::noniid
                              ? noniid_search_space()
                              : iid_search_space();
    if (doc.contains("eta_bounds")) {
        auto [lo, hi] = get_bounds(doc, "eta_bounds");
        cfg.fl.search_space.lower[kDimEta] = lo;
        cfg.fl.search_space.upper[kDimEta] = hi;
    }
    if (doc.contains("beta_bounds")) {
        auto [lo, hi] = get_bounds(doc, "beta_bounds");
        cfg.fl.search_space.lower[kDimBeta] = lo;
        cfg.fl.search_space.upper[kDimBeta] = hi;
    }
    if (doc.contains("lambda_bounds")) {
        auto [lo, hi] = get_bounds(doc, "lambda_bounds");
        cfg.fl.search_space.lower[kDimLambda] = lo;
        cfg.fl.search_space.upper[kDimLambda] = hi;
    }
    if (doc.contains("epoch_bounds")) {
        auto [lo, hi] = get_bounds(doc, "epoch_bounds");
        cfg.fl.search_space.lower[kDimEpochs] = lo;
        cfg.fl.search_space.upper[kDimEpochs] = hi;
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::fedavg: return "fedavg";
        case Algorithm::fedavo: return "fedavo";
        case Algorithm::fedpso: return "fedpso";
        case Algorithm::fedgwo: return "fedgwo";
    }
    return "unknown";
}

std::string metrics_to_csv(const std::vector<RoundMetrics>& metrics,
                           std::size_t clients_per_round) {
    std::string out = "round,global_accuracy,global_loss";
    for (std::size_t i = 0; i < clients_per_round; ++i)
        out += ",client_id,local_accuracy,local_loss,eta,beta,lambda,epochs,"
               "tuning_evaluations";
    out += "\n";

    for (const RoundMetrics& rm : metrics) {
        out += std::to_string(rm.round);
        out += "," + fmt_double(rm.global_accuracy);
        out += "," + fmt_double(rm.global_loss);
        for (std::size_t i = 0; i < clients_per_round; ++i) {
            if (i < rm.per_client.size()) {
                const ClientRecord& c = rm.per_client[i];
                out += "," + std::to_string(c.client_id);
                out += "," + fmt_double(c.local_accuracy);
                out += "," + fmt_double(c.local_loss);
                out += "," + fmt_double(c.chosen.eta);
                out += "," + fmt_double(c.chosen.beta);
                out += "," + fmt_double(c.chosen.lambda);
                out += "," + std::to_string(c.chosen.epochs);
                out += "," + std::to_string(c.tuning_evaluations);
            } else {
                out += ",,,,,,,,";
            }
        }
        out += "\n";
    }
    return out;
}

std::vector<std::pair<std::size_t, double>> read_accuracy_series(
    const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open csv: " + csv_path);
    std::vector<std::pair<std::size_t, double>> series;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error("malformed csv row in " + csv_path);
        series.emplace_back(std::stoul(line.substr(0, c1)),
                            std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    return series;
}

std::optional<std::size_t> rounds_to_threshold(
    const std::vector<std::pair<std::size_t, double>>& series,
    double threshold) {
    if (series.empty()) throw std::invalid_argument("empty series");
    for (const auto& [round, accuracy] : series)
        if (accuracy >= threshold) return round;
    return std::nullopt;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& output_dir) {
    cfg.validate();
    std::filesystem::create_directories(output_dir);

    // File-backed data loads once; synthetic data is regenerated per seed.
    Dataset base_train, base_test;
    if (cfg.dataset == DatasetKind::mnist_idx) {
        base_train = load_idx(cfg.train_images, cfg.train_labels);
        base_test = load_idx(cfg.test_images, cfg.test_labels);
    }

    ExperimentResult result;
    const std::string algo = algorithm_name(cfg.fl.algorithm);
    const std::size_t q = std::max<std::size_t>(
        static_cast<std::size_t>(std::floor(
            static_cast<double>(cfg.fl.num_clients) * cfg.fl.client_fraction)),
        1);

    for (std::uint64_t seed : cfg.seeds) {
        Dataset train, test;
        if (cfg.dataset == DatasetKind::synthetic) {
            train = synthetic_classification(
                cfg.synthetic_train_samples, cfg.synthetic_classes,
                cfg.synthetic_dims, cfg.synthetic_spread,
                derive_seed(seed, kDataTag, 0));
            test = synthetic_classification(
                cfg.synthetic_test_samples, cfg.synthetic_classes,
                cfg.synthetic_dims, cfg.synthetic_spread,
                derive_seed(seed, kDataTag, 1));
        } else {
            train = base_train;
            test = base_test;
        }
        if (cfg.subsample_train > 0)
            train = subsample(train, cfg.subsample_train,
                              cfg.subsample_stratified,
                              derive_seed(seed, kSubsampleTag, 0));
        if (cfg.subsample_test > 0)
            test = subsample(test, cfg.subsample_test, cfg.subsample_stratified,
                             derive_seed(seed, kSubsampleTag, 1));

        const std::uint64_t part_seed = derive_seed(seed, kPartitionTag);
        std::vector<ClientShard> shards =
            cfg.distribution == Distribution::noniid
                ? partition_noniid(train, cfg.fl.num_clients,
                                   cfg.classes_per_client, cfg.shard_size,
                                   part_seed)
                : partition_iid(train, cfg.fl.num_clients, cfg.shard_size,
                                part_seed);

        ModelSpec spec;
        spec.layer_sizes.push_back(train.inputs.cols);
        for (std::size_t h : cfg.hidden_layers) spec.layer_sizes.push_back(h);
        spec.layer_sizes.push_back(
            static_cast<std::size_t>(train.num_classes));

        FLConfig fl = cfg.fl;
        fl.seed = seed;
        SeedRun run;
        run.seed = seed;
        run.rounds = run_federated(spec, shards, test, fl);
        run.csv_path = (std::filesystem::path(output_dir) /
                        (algo + "_seed" + std::to_string(seed) + ".csv"))
                           .string();
        {
            std::ofstream out(run.csv_path, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot write: " + run.csv_path);
            out << metrics_to_csv(run.rounds, q);
        }
        result.runs.push_back(std::move(run));
    }

    // Table-style summary: mean +/- sample standard deviation of the final
    // global accuracy across seeds.
    std::vector<double> finals;
    finals.reserve(result.runs.size());
    for (const SeedRun& run : result.runs)
        finals.push_back(run.rounds.back().global_accuracy);
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= static_cast<double>(finals.size());
    double var = 0.0;
    if (finals.size() > 1) {
        for (double f : finals) var += (f - mean) * (f - mean);
        var /= static_cast<double>(finals.size() - 1);
    }
    result.final_accuracy_mean = mean;
    result.final_accuracy_stddev = std::sqrt(var);

    result.summary_path =
        (std::filesystem::path(output_dir) / (algo + "_summary.csv")).string();
    std::ofstream out(result.summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + result.summary_path);
    out << "algorithm,seeds,final_accuracy_mean,final_accuracy_stddev\n"
        << algo << "," << result.runs.size() << ","
        << fmt_double(result.final_accuracy_mean) << ","
        << fmt_double(result.final_accuracy_stddev) << "\n";
    return result;
}

} // namespace fedavo
