#pragma once

#include <cstdint>

#include "fedavo/avo.hpp"
#include "fedavo/search_space.hpp"

namespace fedavo {

/// Canonical grey wolf optimizer: encircling coefficient decays linearly
/// from 2 to 0, each wolf averages the pulls of the three leading wolves.
/// Same return contract as avo_optimize.
OptimizeResult gwo_optimize(const SearchSpace& space, const Objective& objective,
                            std::size_t population_size,
                            std::size_t max_iterations, std::uint64_t seed);

} // namespace fedavo
