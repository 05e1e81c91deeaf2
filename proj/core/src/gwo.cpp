#include "fedavo/gwo.hpp"

#include <cmath>

namespace fedavo {

namespace {

struct Leader {
    std::vector<double> position;
    double fitness = std::numeric_limits<double>::infinity();
};

void offer(Leader& alpha, Leader& beta, Leader& delta,
           const std::vector<double>& pos, double fit) {
    if (fit < alpha.fitness) {
        delta = beta;
        beta = alpha;
        alpha = {pos, fit};
    } else if (fit < beta.fitness) {
        delta = beta;
        beta = {pos, fit};
    } else if (fit < delta.fitness) {
        delta = {pos, fit};
    }
}

} // namespace

OptimizeResult gwo_optimize(const SearchSpace& space, const Objective& objective,
                            std::size_t population_size,
                            std::size_t max_iterations, std::uint64_t seed) {
    space.validate();
    if (population_size < 2)
        throw std::invalid_argument("need two leaders");

    Rng rng(seed);
    const std::size_t d = space.dims();
    const std::size_t n = population_size;

    std::vector<std::vector<double>> pos(n, std::vector<double>(d));
    Leader alpha, beta, delta;

    OptimizeResult result;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j)
            pos[i][j] = rng.uniform(space.lower[j], space.upper[j]);
        double f = objective(pos[i]);
        ++result.evaluations;
        if (std::isnan(f)) {
            f = std::numeric_limits<double>::infinity();
            ++result.rejected_moves;
        }
        offer(alpha, beta, delta, pos[i], f);
    }
    result.best_fitness = alpha.fitness;
    result.best_position = alpha.position.empty() ? pos[0] : alpha.position;
    result.trace.push_back(result.best_fitness);

    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        const double a = 2.0 - 2.0 * static_cast<double>(iter) /
                                   static_cast<double>(max_iterations);
        const Leader leaders[3] = {alpha, beta, delta};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                double sum = 0.0;
                for (const Leader& lead : leaders) {
                    const double r1 = rng.uniform();
                    const double r2 = rng.uniform();
                    const double A = 2.0 * a * r1 - a;
                    const double C = 2.0 * r2;
                    const double lead_j =
                        lead.position.empty() ? 0.0 : lead.position[j];
                    const double dist = std::abs(C * lead_j - pos[i][j]);
                    sum += lead_j - A * dist;
                }
                pos[i][j] = sum / 3.0;
            }
            space.clamp(pos[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double f = objective(pos[i]);
            ++result.evaluations;
            if (std::isnan(f)) {
                ++result.rejected_moves;
                continue;
            }
            offer(alpha, beta, delta, pos[i], f);
        }
        result.best_fitness = alpha.fitness;
        if (!alpha.position.empty()) result.best_position = alpha.position;
        result.trace.push_back(result.best_fitness);
    }
    result.best_position = space.round_integers(std::move(result.best_position));
    return result;
}

} // namespace fedavo
