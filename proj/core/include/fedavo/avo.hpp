#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedavo/rng.hpp"
#include "fedavo/search_space.hpp"

namespace fedavo {

/// One candidate solution. Fitness is the objective value at the current
/// position; lower is better.
struct Vulture {
    std::vector<double> position;
    double fitness = std::numeric_limits<double>::infinity();
};

/// Candidate population with the two incumbent leaders tracked by index.
struct Population {
    std::vector<Vulture> vultures;
    std::size_t best1 = 0;
    std::size_t best2 = 0;

    /// Recomputes best1/best2 as the indices of the two lowest fitnesses
    /// (ties resolved toward the lower index).
    void refresh_leaders();
};

/// Tunable constants of the vulture search. Defaults follow the common
/// reference settings for this family of optimizers; every value can be
/// overridden per run.
struct AvoConfig {
    double p1 = 0.6;  // exploration strategy split
    double p2 = 0.4;  // first development stage: siege vs. spiral
    double p3 = 0.6;  // final stage: aggregation vs. levy swoop
    double l1 = 0.8;  // probability of steering toward the best leader
    double l2 = 0.2;  // complement of l1; must sum to 1
    double omega_exponent = 2.5;
    double levy_beta = 1.5;
    std::size_t max_iterations = 100;

    void validate() const {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!in01(p1) || !in01(p2) || !in01(p3) || !in01(l1) || !in01(l2))
            throw std::invalid_argument("avo config: probabilities must lie in [0,1]");
        if (std::abs(l1 + l2 - 1.0) > 1e-12)
            throw std::invalid_argument("avo config: l1 + l2 must equal 1");
        if (!(omega_exponent > 0.0))
            throw std::invalid_argument("avo config: omega exponent must be positive");
        if (!(levy_beta > 1.0 && levy_beta <= 2.0))
            throw std::invalid_argument("avo config: levy beta must lie in (1,2]");
    }
};

using Objective = std::function<double(std::span<const double>)>;

/// Roulette-wheel selection probabilities for a minimized objective.
/// Raw fitnesses are mapped through u_i = 1/(1 + f_i - min f) so that lower
/// loss earns higher probability, then normalized.
std::vector<double> selection_probabilities(std::span<const double> fitnesses);

/// Scale factor of the Mantegna heavy-tailed step generator.
double mantegna_sigma(double beta);

/// Heavy-tailed random step, one value per dimension.
template <RandomSource R>
std::vector<double> levy_flight(std::size_t dims, double levy_beta, R& rng) {
    if (dims < 1) throw std::invalid_argument("levy flight: dims must be >= 1");
    if (!(levy_beta > 1.0 && levy_beta <= 2.0))
        throw std::invalid_argument("levy flight: beta must lie in (1,2]");
    const double sigma = mantegna_sigma(levy_beta);
    std::vector<double> step(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        const double u = sigma * standard_normal(rng);
        double v = standard_normal(rng);
        while (std::abs(v) < 1e-300) v = standard_normal(rng);
        step[i] = 0.01 * u / std::pow(std::abs(v), 1.0 / levy_beta);
    }
    return step;
}

/// Picks the movement reference: the best leader with probability l1,
/// otherwise the runner-up. Returns a copy of the chosen position.
template <RandomSource R>
std::vector<double> select_reference_vulture(const Population& pop,
                                             const AvoConfig& cfg, R& rng) {
    if (pop.vultures.size() < 2)
        throw std::invalid_argument("need two leaders");
    const double u = rng.uniform();
    const std::size_t pick = (u < cfg.l1) ? pop.best1 : pop.best2;
    return pop.vultures[pick].position;
}

/// Starvation rate controlling the search stage. Decays with iteration and
/// carries a random perturbation term that vanishes exactly at iteration 0
/// and at max_iterations. Draw order: rand, h, z.
template <RandomSource R>
double starvation_rate(std::size_t iteration, const AvoConfig& cfg, R& rng) {
    if (cfg.max_iterations < 1)
        throw std::invalid_argument("avo config: need at least one iteration");
    if (iteration > cfg.max_iterations)
        throw std::out_of_range("iteration out of range");
    const double rand_i = rng.uniform();
    const double h = rng.uniform() * 2.0 - 1.0;
    const double z = rng.uniform() * 4.0 - 2.0;

    const double ratio = static_cast<double>(iteration) /
                         static_cast<double>(cfg.max_iterations);
    // cos(pi/2 * r) computed as sin(pi/2 * (1-r)) so both endpoints hit
    // exactly 0 and 1, making t identically zero there for any exponent.
    constexpr double half_pi = std::numbers::pi / 2.0;
    const double s = std::sin(half_pi * ratio);
    const double c = std::sin(half_pi * (1.0 - ratio));
    const double t = z * ((std::pow(s, cfg.omega_exponent) +
                           std::pow(c, cfg.omega_exponent)) -
                          1.0);
    return (2.0 * rand_i + 1.0) * h * (1.0 - ratio) + t;
}

namespace detail {
inline void check_dims(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}
} // namespace detail

/// Long-range search move, active while |S| >= 1. Either dives toward the
/// reference scaled by the randomized distance, or scatters to a random
/// point between the bounds. Draw order: rand_p1, then per-component
/// distance factors (dive) or rand2, rand3 (scatter).
template <RandomSource R>
std::vector<double> exploration_step(const Vulture& v,
                                     std::span<const double> ref_pos, double S,
                                     const SearchSpace& space,
                                     const AvoConfig& cfg, R& rng) {
    const std::size_t d = v.position.size();
    detail::check_dims(d, ref_pos.size(), "exploration step");
    detail::check_dims(d, space.dims(), "exploration step");

    std::vector<double> next(d);
    const double rand_p1 = rng.uniform();
    if (cfg.p1 >= rand_p1) {
        for (std::size_t i = 0; i < d; ++i) {
            const double x = 2.0 * rng.uniform();
            const double dist = std::abs(x * ref_pos[i] - v.position[i]);
            next[i] = ref_pos[i] - dist * S;
        }
    } else {
        const double rand2 = rng.uniform();
        const double rand3 = rng.uniform();
        for (std::size_t i = 0; i < d; ++i) {
            next[i] = ref_pos[i] - S +
                      rand2 * ((space.upper[i] - space.lower[i]) * rand3 +
                               space.lower[i]);
        }
    }
    space.clamp(next);
    return next;
}

/// First development stage, active while 0.5 <= |S| < 1. Either a slow
/// siege-fight around the reference or a spiral flight toward it.
/// Draw order: rand_p2, then per-component distance factors plus rand4
/// (siege) or rand5, rand6 (spiral).
template <RandomSource R>
std::vector<double> develop_stage1_step(const Vulture& v,
                                        std::span<const double> ref_pos,
                                        double S, const AvoConfig& cfg, R& rng,
                                        const SearchSpace& space) {
    const std::size_t d = v.position.size();
    detail::check_dims(d, ref_pos.size(), "develop stage 1");
    detail::check_dims(d, space.dims(), "develop stage 1");

    std::vector<double> next(d);
    const double rand_p2 = rng.uniform();
    if (cfg.p2 >= rand_p2) {
        for (std::size_t i = 0; i < d; ++i) {
            const double x = 2.0 * rng.uniform();
            const double dist = std::abs(x * ref_pos[i] - v.position[i]);
            // store distance, finish after rand4 is drawn
            next[i] = dist;
        }
        const double rand4 = rng.uniform();
        for (std::size_t i = 0; i < d; ++i)
            next[i] = next[i] * (S + rand4) - (ref_pos[i] - v.position[i]);
    } else {
        const double rand5 = rng.uniform();
        const double rand6 = rng.uniform();
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t i = 0; i < d; ++i) {
            const double q1 = ref_pos[i] * (rand5 * v.position[i] / two_pi) *
                              std::cos(v.position[i]);
            const double q2 = ref_pos[i] * (rand6 * v.position[i] / two_pi) *
                              std::sin(v.position[i]);
            next[i] = ref_pos[i] - (q1 + q2);
        }
    }
    space.clamp(next);
    return next;
}

/// Final stage, active while |S| < 0.5. Either both leaders pull the vulture
/// to the midpoint of their siege moves, or the vulture swoops at a leader
/// along a heavy-tailed step. Draw order: rand_p3; the swoop branch then
/// draws the leader choice and the levy components.
template <RandomSource R>
std::vector<double> develop_stage2_step(const Vulture& v, const Population& pop,
                                        double S, const AvoConfig& cfg, R& rng,
                                        const SearchSpace& space) {
    const std::size_t d = v.position.size();
    detail::check_dims(d, space.dims(), "develop stage 2");
    if (pop.vultures.size() < 2)
        throw std::invalid_argument("need two leaders");

    std::vector<double> next(d);
    const double rand_p3 = rng.uniform();
    if (cfg.p3 >= rand_p3) {
        const auto& b1 = pop.vultures[pop.best1].position;
        const auto& b2 = pop.vultures[pop.best2].position;
        detail::check_dims(d, b1.size(), "develop stage 2");
        for (std::size_t i = 0; i < d; ++i) {
            const double p = v.position[i];
            double den1 = b1[i] - p * p;
            if (std::abs(den1) < 1e-12) den1 = std::signbit(den1) ? -1e-12 : 1e-12;
            double den2 = b2[i] - p * p;
            if (std::abs(den2) < 1e-12) den2 = std::signbit(den2) ? -1e-12 : 1e-12;
            const double a1 = b1[i] - (b1[i] * p) / den1 * S;
            const double a2 = b2[i] - (b2[i] * p) / den2 * S;
            next[i] = 0.5 * (a1 + a2);
        }
    } else {
        const std::vector<double> ref = select_reference_vulture(pop, cfg, rng);
        detail::check_dims(d, ref.size(), "develop stage 2");
        const std::vector<double> levy = levy_flight(d, cfg.levy_beta, rng);
        for (std::size_t i = 0; i < d; ++i)
            next[i] = ref[i] - std::abs(ref[i] - v.position[i]) * S * levy[i];
    }
    space.clamp(next);
    return next;
}

struct GenerationStats {
    std::size_t rejected_moves = 0;
};

/// Advances the population by one generation: every vulture draws its
/// transcript and moves in index order against the generation-start leaders,
/// then all new positions are evaluated and the leaders refreshed. A NaN
/// objective rejects the move and the vulture keeps its previous state.
/// The incumbent best survives the generation (elitist reinsertion).
void avo_generation(Population& pop, const Objective& objective,
                    std::size_t iteration, const AvoConfig& cfg,
                    const SearchSpace& space, Rng& rng,
                    GenerationStats* stats = nullptr);

struct OptimizeResult {
    std::vector<double> best_position;
    double best_fitness = std::numeric_limits<double>::infinity();
    std::vector<double> trace;  // all-time best after init, then per generation
    std::size_t rejected_moves = 0;
    std::size_t evaluations = 0;
};

/// Full optimizer run: uniform random initialization inside the bounds,
/// max_iterations generations, all-time best returned with integer
/// dimensions rounded.
OptimizeResult avo_optimize(const SearchSpace& space, const Objective& objective,
                            const AvoConfig& cfg, std::size_t population_size,
                            std::uint64_t seed);

} // namespace fedavo
