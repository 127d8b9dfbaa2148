#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace popsim {

/// Seedable generator used by every run: std::mt19937_64 (whose output
/// sequence is fixed by the C++ standard) with Lemire's unbiased bounded draw,
/// so streams are identical across standard libraries.
class Rng {
public:
    static constexpr std::string_view algorithm_id = "mt19937_64-lemire";

    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t uniform(std::uint64_t bound) {
        auto x = engine_();
        auto m = static_cast<unsigned __int128>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = -bound % bound;
            while (low < threshold) {
                x = engine_();
                m = static_cast<unsigned __int128>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-row seed: a stable hash of (master seed, row index).
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t row) noexcept {
    return mix64(mix64(master_seed) ^ mix64(row + 0x632be59bd9b4e019ULL));
}

} // namespace popsim
