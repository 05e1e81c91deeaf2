#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedavo/matrix.hpp"
#include "fedavo/rng.hpp"

namespace fedavo {

/// Fully-connected classifier shape: input width, hidden widths (ReLU), and
/// the class count as the final entry. Output layer is a softmax.
struct ModelSpec {
    std::vector<std::size_t> layer_sizes;

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t num_classes() const { return layer_sizes.back(); }
    std::size_t num_layers() const { return layer_sizes.size() - 1; }

    /// Flat parameter count: per layer, an n_in x n_out weight block followed
    /// by n_out biases, in layer order.
    std::size_t param_count() const {
        std::size_t total = 0;
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
            total += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
        return total;
    }

    void validate() const {
        if (layer_sizes.size() < 2)
            throw std::invalid_argument("model spec: need input and output sizes");
        for (std::size_t s : layer_sizes)
            if (s < 1) throw std::invalid_argument("model spec: zero-width layer");
        if (num_classes() < 2)
            throw std::invalid_argument("model spec: need at least two classes");
    }
};

/// Flat vector of all weights and biases, laid out per ModelSpec.
struct ModelParams {
    std::vector<double> values;
};

/// Uniform small random weights in [-scale, scale].
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed,
                        double scale = 0.05);

/// The tunable per-client training knobs.
struct HyperParams {
    double eta = 0.01;     // learning rate
    double beta = 0.0;     // momentum
    double lambda = 0.0;   // weight decay
    int epochs = 1;        // local epochs

    void validate() const {
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
        if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
        if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
        if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    }
};

/// Non-owning view of a labelled batch; rows are selected from a backing
/// matrix through an index list so shards can hand out arbitrary subsets.
struct BatchView {
    const Matrix* inputs = nullptr;
    const std::int32_t* labels = nullptr;  // parallel to the backing rows
    std::span<const std::size_t> rows;     // row indices into *inputs

    std::size_t size() const { return rows.size(); }
};

/// Class probabilities for every row of the batch (softmax with
/// max-subtraction; each output row sums to 1).
Matrix forward(const ModelSpec& spec, const ModelParams& params,
               const BatchView& batch);

/// Mean negative log-probability of the true class, probabilities floored
/// at 1e-12 before the log.
double cross_entropy(const Matrix& probs, std::span<const std::int32_t> labels,
                     std::span<const std::size_t> rows);

/// Analytic gradient of cross_entropy(forward(.)) in the flat parameter
/// layout. Per-row contributions are accumulated in a canonical order
/// (rows sorted by content), so the result is exactly invariant under row
/// permutation of the batch.
std::vector<double> gradient(const ModelSpec& spec, const ModelParams& params,
                             const BatchView& batch);

enum class UpdateMode {
    velocity,  // momentum buffer: v <- beta v + g + lambda w;  w <- w - eta v
    literal,   // printed update:  w <- beta w - eta g - lambda eta w
};

/// One SGD step in the chosen mode. Both params and velocity are updated.
void sgd_step(ModelParams& params, std::span<const double> grad,
              const HyperParams& hp, std::vector<double>& velocity,
              UpdateMode mode);

/// Mini-batch SGD over the given rows: contiguous batches of batch_size
/// (last one may be short), visited in a shuffled order re-seeded per epoch.
/// The velocity buffer starts at zero and persists across the epochs of
/// this call.
ModelParams train_local(const ModelSpec& spec, ModelParams params,
                        const Matrix& inputs,
                        std::span<const std::int32_t> labels,
                        std::span<const std::size_t> rows,
                        const HyperParams& hp, std::size_t batch_size,
                        UpdateMode mode, std::uint64_t seed);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Full-set loss and argmax accuracy (ties break toward the lowest class).
EvalResult evaluate(const ModelSpec& spec, const ModelParams& params,
                    const Matrix& inputs, std::span<const std::int32_t> labels,
                    std::span<const std::size_t> rows);

/// Convenience overload over all rows of a dataset-shaped pair.
EvalResult evaluate(const ModelSpec& spec, const ModelParams& params,
                    const Matrix& inputs, std::span<const std::int32_t> labels);

} // namespace fedavo
