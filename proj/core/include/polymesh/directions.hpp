#pragma once

#include <cstdint>
#include <string>

#include "polymesh/types.hpp"

namespace polymesh {

// Unit-vector families on S^{d-1}, stored one direction per PointCloud row.

// (cos(2 pi k / M + phase), sin(2 pi k / M + phase)), k = 0..M-1.
PointCloud angular_grid(std::size_t count, double phase = 0.0);

// Golden-angle spiral on S^2.
PointCloud fibonacci_sphere(std::size_t count);

// Normalized Gaussian vectors; dim 1 yields +-1.
PointCloud random_directions(int dim, std::size_t count, std::uint64_t seed);

// Family suited to dim: {+-1} for d=1, angular grid for d=2, Fibonacci for
// d=3, random beyond.
PointCloud default_directions(int dim, std::size_t count, std::uint64_t seed);

}  // namespace polymesh
