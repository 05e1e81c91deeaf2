#include "fedavo/avo.hpp"

#include <algorithm>
#include <cmath>

namespace fedavo {

void Population::refresh_leaders() {
    if (vultures.size() < 2)
        throw std::invalid_argument("need two leaders");
    std::size_t b1 = 0, b2 = 1;
    if (vultures[b2].fitness < vultures[b1].fitness) std::swap(b1, b2);
    for (std::size_t i = 2; i < vultures.size(); ++i) {
        const double f = vultures[i].fitness;
        if (f < vultures[b1].fitness) {
            b2 = b1;
            b1 = i;
        } else if (f < vultures[b2].fitness) {
            b2 = i;
        }
    }
    best1 = b1;
    best2 = b2;
}

std::vector<double> selection_probabilities(std::span<const double> fitnesses) {
    if (fitnesses.empty()) throw std::invalid_argument("empty population");
    double min_f = fitnesses[0];
    for (double f : fitnesses) {
        if (!std::isfinite(f)) throw std::invalid_argument("non-finite fitness");
        min_f = std::min(min_f, f);
    }
    std::vector<double> probs(fitnesses.size());
    double total = 0.0;
    for (std::size_t i = 0; i < fitnesses.size(); ++i) {
        probs[i] = 1.0 / (1.0 + fitnesses[i] - min_f);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

double mantegna_sigma(double beta) {
    const double num =
        std::tgamma(1.0 + beta) * std::sin(std::numbers::pi * beta / 2.0);
    const double den = std::tgamma((1.0 + beta) / 2.0) * beta *
                       std::pow(2.0, (beta - 1.0) / 2.0);
    return std::pow(num / den, 1.0 / beta);
}

void avo_generation(Population& pop, const Objective& objective,
                    std::size_t iteration, const AvoConfig& cfg,
                    const SearchSpace& space, Rng& rng,
                    GenerationStats* stats) {
    if (iteration >= cfg.max_iterations)
        throw std::out_of_range("iteration out of range");
    pop.refresh_leaders();

    // Incumbent best, kept alive across the generation.
    const Vulture incumbent = pop.vultures[pop.best1];

    // Phase 1: draw every vulture's transcript and proposed move in index
    // order. Leaders are the generation-start snapshot, so the proposals do
    // not depend on evaluation scheduling.
    const std::size_t n = pop.vultures.size();
    std::vector<std::vector<double>> proposed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vulture& v = pop.vultures[i];
        const std::vector<double> ref = select_reference_vulture(pop, cfg, rng);
        const double s = starvation_rate(iteration, cfg, rng);
        if (std::abs(s) >= 1.0) {
            proposed[i] = exploration_step(v, ref, s, space, cfg, rng);
        } else if (std::abs(s) >= 0.5) {
            proposed[i] = develop_stage1_step(v, ref, s, cfg, rng, space);
        } else {
            proposed[i] = develop_stage2_step(v, pop, s, cfg, rng, space);
        }
    }

    // Phase 2: evaluate proposals. Positions are already fixed, so these
    // calls are independent and could run concurrently.
    std::vector<double> fitness(n);
    for (std::size_t i = 0; i < n; ++i) fitness[i] = objective(proposed[i]);

    // Phase 3: commit moves; NaN evaluations are rejected and the vulture
    // keeps its previous position and fitness.
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(fitness[i])) {
            if (stats) ++stats->rejected_moves;
            continue;
        }
        pop.vultures[i].position = std::move(proposed[i]);
        pop.vultures[i].fitness = fitness[i];
    }
    pop.refresh_leaders();

    // Elitism: if every move lost ground, the incumbent replaces the worst
    // member so the population best never degrades.
    if (pop.vultures[pop.best1].fitness > incumbent.fitness) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (pop.vultures[i].fitness > pop.vultures[worst].fitness) worst = i;
        pop.vultures[worst] = incumbent;
        pop.refresh_leaders();
    }
}

OptimizeResult avo_optimize(const SearchSpace& space, const Objective& objective,
                            const AvoConfig& cfg, std::size_t population_size,
                            std::uint64_t seed) {
    space.validate();
    cfg.validate();
    if (population_size < 2)
        throw std::invalid_argument("need two leaders");

    Rng rng(seed);
    const std::size_t d = space.dims();

    Population pop;
    pop.vultures.resize(population_size);
    for (auto& v : pop.vultures) {
        v.position.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            v.position[i] = rng.uniform(space.lower[i], space.upper[i]);
    }

    OptimizeResult result;
    for (auto& v : pop.vultures) {
        double f = objective(v.position);
        ++result.evaluations;
        if (std::isnan(f)) f = std::numeric_limits<double>::infinity();
        v.fitness = f;
        if (f < result.best_fitness) {
            result.best_fitness = f;
            result.best_position = v.position;
        }
    }
    pop.refresh_leaders();
    if (result.best_position.empty())  // every initial evaluation was NaN
        result.best_position = pop.vultures[pop.best1].position;
    result.trace.push_back(result.best_fitness);

    GenerationStats stats;
    Objective counting = [&](std::span<const double> x) {
        ++result.evaluations;
        return objective(x);
    };
    for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
        avo_generation(pop, counting, iter, cfg, space, rng, &stats);
        const Vulture& best = pop.vultures[pop.best1];
        if (best.fitness < result.best_fitness) {
            result.best_fitness = best.fitness;
            result.best_position = best.position;
        }
        result.trace.push_back(result.best_fitness);
    }
    result.rejected_moves = stats.rejected_moves;
    result.best_position = space.round_integers(std::move(result.best_position));
    return result;
}

} // namespace fedavo
