#include "fedavo/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace fedavo {

namespace {

// Offset of layer l's weight block in the flat layout.
std::size_t layer_offset(const ModelSpec& spec, std::size_t l) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k)
        off += spec.layer_sizes[k] * spec.layer_sizes[k + 1] +
               spec.layer_sizes[k + 1];
    return off;
}

void check_batch(const ModelSpec& spec, const ModelParams& params,
                 const BatchView& batch) {
    spec.validate();
    if (params.values.size() != spec.param_count())
        throw std::invalid_argument("model: parameter vector size mismatch");
    if (!batch.inputs || !batch.labels)
        throw std::invalid_argument("model: null batch");
    if (batch.inputs->cols != spec.input_dim())
        throw std::invalid_argument("model: input width mismatch");
    for (std::size_t r : batch.rows) {
        if (r >= batch.inputs->rows)
            throw std::invalid_argument("model: batch row out of range");
        const std::int32_t y = batch.labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes())
            throw std::invalid_argument("model: label out of range");
    }
}

// Activations of every layer; index 0 is the gathered input batch.
std::vector<Matrix> forward_all(const ModelSpec& spec, const ModelParams& params,
                                const BatchView& batch) {
    const std::size_t B = batch.rows.size();
    std::vector<Matrix> acts;
    acts.reserve(spec.num_layers() + 1);

    Matrix a0(B, spec.input_dim());
    for (std::size_t b = 0; b < B; ++b)
        std::memcpy(a0.row(b), batch.inputs->row(batch.rows[b]),
                    spec.input_dim() * sizeof(double));
    acts.push_back(std::move(a0));

    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        const std::size_t n_in = spec.layer_sizes[l];
        const std::size_t n_out = spec.layer_sizes[l + 1];
        const double* w = params.values.data() + layer_offset(spec, l);
        const double* bias = w + n_in * n_out;
        const Matrix& prev = acts.back();

        Matrix z(B, n_out);
        for (std::size_t b = 0; b < B; ++b) {
            double* zrow = z.row(b);
            const double* arow = prev.row(b);
            for (std::size_t j = 0; j < n_out; ++j) zrow[j] = bias[j];
            for (std::size_t i = 0; i < n_in; ++i) {
                const double a = arow[i];
                const double* wrow = w + i * n_out;
                for (std::size_t j = 0; j < n_out; ++j) zrow[j] += a * wrow[j];
            }
        }

        if (l + 1 < spec.num_layers()) {
            for (double& v : z.data) v = v > 0.0 ? v : 0.0;
        } else {
            for (std::size_t b = 0; b < B; ++b) {
                double* zrow = z.row(b);
                double zmax = zrow[0];
                for (std::size_t j = 1; j < n_out; ++j)
                    zmax = std::max(zmax, zrow[j]);
                double sum = 0.0;
                for (std::size_t j = 0; j < n_out; ++j) {
                    zrow[j] = std::exp(zrow[j] - zmax);
                    sum += zrow[j];
                }
                for (std::size_t j = 0; j < n_out; ++j) zrow[j] /= sum;
            }
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

// Canonical processing order: batch positions sorted by row content, then
// label. Makes floating-point accumulation independent of row order.
std::vector<std::size_t> canonical_order(const BatchView& batch) {
    std::vector<std::size_t> order(batch.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Matrix& m = *batch.inputs;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double* ra = m.row(batch.rows[a]);
        const double* rb = m.row(batch.rows[b]);
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (ra[c] < rb[c]) return true;
            if (ra[c] > rb[c]) return false;
        }
        return batch.labels[batch.rows[a]] < batch.labels[batch.rows[b]];
    });
    return order;
}

} // namespace

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed, double scale) {
    spec.validate();
    Rng rng(seed);
    ModelParams params;
    params.values.resize(spec.param_count());
    for (double& v : params.values) v = rng.uniform(-scale, scale);
    return params;
}

Matrix forward(const ModelSpec& spec, const ModelParams& params,
               const BatchView& batch) {
    check_batch(spec, params, batch);
    auto acts = forward_all(spec, params, batch);
    return std::move(acts.back());
}

double cross_entropy(const Matrix& probs, std::span<const std::int32_t> labels,
                     std::span<const std::size_t> rows) {
    if (probs.rows == 0 || rows.empty())
        throw std::invalid_argument("empty batch");
    if (probs.rows != rows.size())
        throw std::invalid_argument("cross entropy: row count mismatch");
    double total = 0.0;
    for (std::size_t b = 0; b < probs.rows; ++b) {
        const std::int32_t y = labels[rows[b]];
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols)
            throw std::invalid_argument("cross entropy: label out of range");
        total += -std::log(std::max(probs.at(b, static_cast<std::size_t>(y)),
                                    1e-12));
    }
    return total / static_cast<double>(probs.rows);
}

std::vector<double> gradient(const ModelSpec& spec, const ModelParams& params,
                             const BatchView& batch) {
    check_batch(spec, params, batch);
    if (batch.rows.empty()) throw std::invalid_argument("empty batch");

    const auto acts = forward_all(spec, params, batch);
    const auto order = canonical_order(batch);
    const std::size_t B = batch.rows.size();
    const std::size_t L = spec.num_layers();
    const double inv_b = 1.0 / static_cast<double>(B);

    std::vector<double> grad(spec.param_count(), 0.0);
    std::vector<double> delta, delta_prev;

    for (std::size_t pos : order) {
        // Output delta for this row: (softmax - onehot) / B.
        const std::size_t m = spec.num_classes();
        delta.assign(acts[L].row(pos), acts[L].row(pos) + m);
        for (double& v : delta) v *= inv_b;
        delta[static_cast<std::size_t>(batch.labels[batch.rows[pos]])] -= inv_b;

        for (std::size_t l = L; l-- > 0;) {
            const std::size_t n_in = spec.layer_sizes[l];
            const std::size_t n_out = spec.layer_sizes[l + 1];
            const std::size_t off = layer_offset(spec, l);
            double* gw = grad.data() + off;
            double* gb = gw + n_in * n_out;
            const double* arow = acts[l].row(pos);

            for (std::size_t i = 0; i < n_in; ++i) {
                const double a = arow[i];
                double* gwrow = gw + i * n_out;
                for (std::size_t j = 0; j < n_out; ++j)
                    gwrow[j] += a * delta[j];
            }
            for (std::size_t j = 0; j < n_out; ++j) gb[j] += delta[j];

            if (l == 0) break;
            const double* w = params.values.data() + off;
            delta_prev.assign(n_in, 0.0);
            for (std::size_t i = 0; i < n_in; ++i) {
                if (arow[i] <= 0.0) continue;  // ReLU gate
                const double* wrow = w + i * n_out;
                double s = 0.0;
                for (std::size_t j = 0; j < n_out; ++j) s += wrow[j] * delta[j];
                delta_prev[i] = s;
            }
            delta.swap(delta_prev);
        }
    }
    return grad;
}

void sgd_step(ModelParams& params, std::span<const double> grad,
              const HyperParams& hp, std::vector<double>& velocity,
              UpdateMode mode) {
    if (grad.size() != params.values.size())
        throw std::invalid_argument("sgd step: gradient size mismatch");
    if (velocity.size() != params.values.size())
        throw std::invalid_argument("sgd step: velocity size mismatch");
    for (double g : grad)
        if (!std::isfinite(g)) throw std::runtime_error("diverged");

    double* w = params.values.data();
    const std::size_t n = params.values.size();
    if (mode == UpdateMode::velocity) {
        for (std::size_t i = 0; i < n; ++i) {
            velocity[i] = hp.beta * velocity[i] + grad[i] + hp.lambda * w[i];
            w[i] -= hp.eta * velocity[i];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = hp.beta * w[i] - hp.eta * grad[i] - hp.lambda * hp.eta * w[i];
    }
}

ModelParams train_local(const ModelSpec& spec, ModelParams params,
                        const Matrix& inputs,
                        std::span<const std::int32_t> labels,
                        std::span<const std::size_t> rows,
                        const HyperParams& hp, std::size_t batch_size,
                        UpdateMode mode, std::uint64_t seed) {
    hp.validate();
    if (rows.empty()) throw std::invalid_argument("empty shard");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");

    const std::size_t num_batches = (rows.size() + batch_size - 1) / batch_size;
    std::vector<double> velocity(params.values.size(), 0.0);
    std::vector<std::size_t> batch_order(num_batches);

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
        std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});
        rng.shuffle(batch_order);
        for (std::size_t b : batch_order) {
            const std::size_t begin = b * batch_size;
            const std::size_t count = std::min(batch_size, rows.size() - begin);
            BatchView batch{&inputs, labels.data(),
                            rows.subspan(begin, count)};
            const auto grad = gradient(spec, params, batch);
            sgd_step(params, grad, hp, velocity, mode);
        }
    }
    return params;
}

EvalResult evaluate(const ModelSpec& spec, const ModelParams& params,
                    const Matrix& inputs, std::span<const std::int32_t> labels,
                    std::span<const std::size_t> rows) {
    if (rows.empty()) throw std::invalid_argument("empty dataset");

    constexpr std::size_t chunk = 256;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < rows.size(); begin += chunk) {
        const std::size_t count = std::min(chunk, rows.size() - begin);
        BatchView batch{&inputs, labels.data(), rows.subspan(begin, count)};
        const Matrix probs = forward(spec, params, batch);
        for (std::size_t b = 0; b < count; ++b) {
            const double* prow = probs.row(b);
            std::size_t argmax = 0;
            for (std::size_t j = 1; j < probs.cols; ++j)
                if (prow[j] > prow[argmax]) argmax = j;
            const std::int32_t y = labels[rows[begin + b]];
            if (static_cast<std::size_t>(y) == argmax) ++correct;
            loss_sum += -std::log(std::max(prow[static_cast<std::size_t>(y)],
                                           1e-12));
        }
    }
    return {loss_sum / static_cast<double>(rows.size()),
            static_cast<double>(correct) / static_cast<double>(rows.size())};
}

EvalResult evaluate(const ModelSpec& spec, const ModelParams& params,
                    const Matrix& inputs,
                    std::span<const std::int32_t> labels) {
    std::vector<std::size_t> rows(inputs.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return evaluate(spec, params, inputs, labels, rows);
}

} // namespace fedavo
