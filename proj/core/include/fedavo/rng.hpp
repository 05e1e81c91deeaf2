#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace fedavo {

// Anything that yields uniform draws in [0,1). Concrete code uses Rng;
// tests may substitute a scripted source to pin individual draws.
template <class R>
concept RandomSource = requires(R r) {
    { r.uniform() } -> std::convertible_to<double>;
};

/// Deterministic random stream. All randomness in the library flows through
/// this class so that a (seed, config) pair fully determines every result.
/// Doubles are built from the raw 64-bit engine output instead of
/// std::uniform_real_distribution, whose draw sequence is not pinned by the
/// standard.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform draw in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform draw in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform index in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; always consumes exactly two uniforms.
    double normal();

    /// Fisher-Yates shuffle with draws from this stream.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
};

/// Standard normal from any uniform source (Box-Muller, two draws).
template <RandomSource R>
double standard_normal(R& rng) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

inline double Rng::normal() { return standard_normal(*this); }

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

/// Derives an independent substream seed from a base seed and stream tags
/// (round, client id, purpose, ...). Mixing is order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t base) {
    return detail::splitmix64(base);
}

template <class... Tags>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Tags... rest) {
    return derive_seed(detail::splitmix64(base ^ detail::splitmix64(tag)),
                       rest...);
}

} // namespace fedavo
