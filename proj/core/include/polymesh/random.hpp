#pragma once

#include <cstdint>
#include <random>

#include "polymesh/types.hpp"

namespace polymesh {

// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Seeded generator with platform-independent conversions (std::*_distribution
// output is implementation-defined, so we do not use them).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    // Uniform on the unit sphere S^{d-1}.
    Vec unit_vector(int dim);
    // Uniform in the ball B(0, radius).
    Vec in_ball(int dim, double radius);
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace polymesh
