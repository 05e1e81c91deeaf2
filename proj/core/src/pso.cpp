#include "fedavo/pso.hpp"

#include <cmath>

namespace fedavo {

OptimizeResult pso_optimize(const SearchSpace& space, const Objective& objective,
                            const PsoConfig& cfg, std::size_t population_size,
                            std::uint64_t seed) {
    space.validate();
    if (population_size < 2)
        throw std::invalid_argument("need two leaders");

    Rng rng(seed);
    const std::size_t d = space.dims();
    const std::size_t n = population_size;

    std::vector<std::vector<double>> pos(n, std::vector<double>(d));
    std::vector<std::vector<double>> vel(n, std::vector<double>(d, 0.0));
    std::vector<std::vector<double>> pbest(n);
    std::vector<double> pbest_fit(n);

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
        pbest[i] = pos[i];
        pbest_fit[i] = f;
        if (f < result.best_fitness) {
            result.best_fitness = f;
            result.best_position = pos[i];
        }
    }
    if (result.best_position.empty()) result.best_position = pos[0];
    result.trace.push_back(result.best_fitness);

    for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double v = cfg.inertia * vel[i][j] +
                           cfg.cognitive * r1 * (pbest[i][j] - pos[i][j]) +
                           cfg.social * r2 * (result.best_position[j] - pos[i][j]);
                const double vmax = space.upper[j] - space.lower[j];
                if (v > vmax) v = vmax;
                if (v < -vmax) v = -vmax;
                vel[i][j] = v;
                pos[i][j] += v;
            }
            space.clamp(pos[i]);
        }
        // Evaluate after all moves; the swarm best used above is the
        // iteration-start snapshot, so results do not depend on evaluation
        // order within the sweep.
        double round_best = std::numeric_limits<double>::infinity();
        std::size_t round_best_idx = n;
        for (std::size_t i = 0; i < n; ++i) {
            double f = objective(pos[i]);
            ++result.evaluations;
            if (std::isnan(f)) {
                ++result.rejected_moves;
                continue;
            }
            if (f < pbest_fit[i]) {
                pbest_fit[i] = f;
                pbest[i] = pos[i];
            }
            if (f < round_best) {
                round_best = f;
                round_best_idx = i;
            }
        }
        if (round_best_idx < n && round_best < result.best_fitness) {
            result.best_fitness = round_best;
            result.best_position = pos[round_best_idx];
        }
        result.trace.push_back(result.best_fitness);
    }
    result.best_position = space.round_integers(std::move(result.best_position));
    return result;
}

} // namespace fedavo
