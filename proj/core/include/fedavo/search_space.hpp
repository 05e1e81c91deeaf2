#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fedavo {

/// Box-constrained continuous search domain. Dimensions listed in
/// integer_dims are rounded half-up when a final position is reported.
struct SearchSpace {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::size_t> integer_dims;

    std::size_t dims() const { return lower.size(); }

    void validate() const {
        if (lower.empty() || lower.size() != upper.size())
            throw std::invalid_argument("search space: bounds size mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw std::invalid_argument(
                    "search space: lower bound must be below upper bound");
        for (std::size_t d : integer_dims)
            if (d >= lower.size())
                throw std::invalid_argument(
                    "search space: integer dimension out of range");
    }

    void clamp(std::span<double> position) const {
        for (std::size_t i = 0; i < position.size(); ++i) {
            if (position[i] < lower[i]) position[i] = lower[i];
            if (position[i] > upper[i]) position[i] = upper[i];
        }
    }

    /// Round-half-up on integer dimensions, then clamp back into bounds.
    std::vector<double> round_integers(std::vector<double> position) const {
        for (std::size_t d : integer_dims) {
            position[d] = std::floor(position[d] + 0.5);
            if (position[d] < lower[d]) position[d] = lower[d];
            if (position[d] > upper[d]) position[d] = upper[d];
        }
        return position;
    }
};

} // namespace fedavo
