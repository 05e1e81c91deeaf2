#pragma once

#include <cstdint>

#include "fedavo/avo.hpp"
#include "fedavo/search_space.hpp"

namespace fedavo {

/// Canonical global-best particle swarm settings (constriction-equivalent
/// inertia with the usual acceleration coefficients).
struct PsoConfig {
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    std::size_t max_iterations = 100;
};

/// Global-best PSO over a box-constrained space. Velocities are clamped to
/// +/-(ub - lb) per dimension, positions clamped into the bounds. Same
/// return contract as avo_optimize.
OptimizeResult pso_optimize(const SearchSpace& space, const Objective& objective,
                            const PsoConfig& cfg, std::size_t population_size,
                            std::uint64_t seed);

} // namespace fedavo
