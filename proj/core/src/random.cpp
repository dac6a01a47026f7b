#include "polymesh/random.hpp"

#include <cmath>
#include <numbers>

namespace polymesh {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

Vec Rng::unit_vector(int dim) {
    Vec v(dim);
    double n = 0.0;
    do {
        for (int i = 0; i < dim; ++i) v[i] = normal();
        n = v.norm();
    } while (n < 1e-300);
    return v / n;
}

Vec Rng::in_ball(int dim, double radius) {
    Vec u = unit_vector(dim);
    return u * (radius * std::pow(uniform(), 1.0 / dim));
}

}  // namespace polymesh
