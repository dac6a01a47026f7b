#include "polymesh/directions.hpp"

#include <cmath>
#include <numbers>

#include "polymesh/error.hpp"
#include "polymesh/random.hpp"

namespace polymesh {

PointCloud angular_grid(std::size_t count, double phase) {
    PointCloud out(2);
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count) + phase;
        const double p[2] = {std::cos(t), std::sin(t)};
        out.push_back(std::span<const double>(p, 2));
    }
    return out;
}

PointCloud fibonacci_sphere(std::size_t count) {
    PointCloud out(3);
    out.reserve(count);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
        const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double t = golden * static_cast<double>(k);
        Vec p(3);
        p << r * std::cos(t), r * std::sin(t), z;
        p.normalize();
        out.push_back(p);
    }
    return out;
}

PointCloud random_directions(int dim, std::size_t count, std::uint64_t seed) {
    if (dim < 1) throw InputError("direction dimension must be >= 1");
    PointCloud out(dim);
    out.reserve(count);
    Rng rng(seed);
    for (std::size_t k = 0; k < count; ++k) out.push_back(rng.unit_vector(dim));
    return out;
}

PointCloud default_directions(int dim, std::size_t count, std::uint64_t seed) {
    if (dim == 1) {
        PointCloud out(1);
        const double plus = 1.0, minus = -1.0;
        out.push_back(std::span<const double>(&plus, 1));
        out.push_back(std::span<const double>(&minus, 1));
        return out;
    }
    if (dim == 2) return angular_grid(count);
    if (dim == 3) return fibonacci_sphere(count);
    return random_directions(dim, count, seed);
}

}  // namespace polymesh
