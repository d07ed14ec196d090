#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dtsm::math {

/// splitmix64 finalizer; used to decorrelate per-path seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-style seed for path `index` under a master seed. Results are
/// independent of how paths are scheduled across tasks.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Deterministic random source. All draws are defined in terms of the
/// 53-bit uniform below, so sequences are reproducible across platforms:
///   uniform:     (mt19937_64() >> 11) * 2^-53            in [0,1)
///   uniform_pos: ((mt19937_64() >> 11) + 0.5) * 2^-53    in (0,1)
///   exponential: -log(uniform_pos)                        (inverse CDF)
///   normal:      Box-Muller on (uniform_pos, uniform) with the second
///                variate cached
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform_pos() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform_pos()); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double a = 2.0 * kPi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

  private:
    static constexpr double kPi = 3.14159265358979323846264338327950288;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace dtsm::math
