#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polymesh/dubiner.hpp"
#include "polymesh/json_util.hpp"
#include "polymesh/mesh.hpp"
#include "polymesh/poly.hpp"

namespace polymesh::verify {

struct NormingOptions {
    std::size_t adversarial = 32;
    double pool_factor = 20.0;  // evaluation pool size relative to the mesh
    std::size_t min_pool = 4000;
    double boundary_fraction = 0.8;
    double alpha = 0.5;
    double L = 4.0;
    std::size_t witness_pool = 4096;
};

struct AdversarialWitness {
    Vec center;
    int degree = 0;
    double ratio = 0.0;
};

struct NormingReport {
    std::string body_fingerprint;
    std::string mesh_fingerprint;
    std::size_t mesh_size = 0;
    int n = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::size_t eval_pool_size = 0;
    double axis_scale = 1.0;
    std::vector<double> trial_ratios;  // trial i uses random_poly seed mix_seed(seed, i)
    double ensemble_max_ratio = 0.0;
    std::vector<AdversarialWitness> adversarial;
    double adversarial_max_ratio = 0.0;
    // Quantiles of trial_ratios at 0.5, 0.9, 0.99 and 1.
    std::vector<std::pair<double, double>> quantiles;
};

// Ratio sup over an evaluation pool (mesh plus fresh samples) to max over
// the mesh, for random polynomials and fast-decreasing witnesses centered at
// the pool points farthest from the mesh. Throws FingerprintMismatch when
// the mesh was built on another body.
NormingReport norming_constant(const dubiner::MetricContext& ctx, const mesh::Mesh& mesh, int n, std::size_t trials,
                               std::uint64_t seed, const NormingOptions& options = {});

// Passes iff both maxima are <= target (target >= 1).
std::pair<bool, NormingReport> certify(const dubiner::MetricContext& ctx, const mesh::Mesh& mesh, double target,
                                       int n, std::size_t trials, std::uint64_t seed,
                                       const NormingOptions& options = {});

struct BernsteinWitness {
    Vec x, y;
    std::size_t trial = 0;
    std::uint64_t trial_seed = 0;
    double rho = 0.0;
    double norm = 0.0;
    double ratio = 0.0;
};

struct BernsteinReport {
    int n = 0;
    std::size_t trials = 0;
    std::size_t pairs_tested = 0;
    std::uint64_t seed = 0;
    std::size_t eval_pool_size = 0;
    double axis_scale = 1.0;
    double max_ratio = 0.0;
    BernsteinWitness witness;
};

struct BernsteinOptions {
    std::size_t eval_pool = 4000;
    double close_fraction = 0.5;  // share of pairs at Euclidean distance 10^U(-4, 0)
};

// max |Q(x) - Q(y)| / (n rho(x, y) ||Q||) over random polynomials and pairs.
BernsteinReport bernstein_ratio(const dubiner::MetricContext& ctx, int n, std::size_t trials, std::size_t pairs,
                                std::uint64_t seed, const BernsteinOptions& options = {});

// Recomputes the witness ratio from the recorded seeds and points.
double replay_bernstein(const dubiner::MetricContext& ctx, const BernsteinReport& report,
                        const BernsteinOptions& options = {});

// Half-width of an axis box around the origin containing the body; random
// polynomials are scaled by it so Chebyshev arguments stay in [-1, 1].
double axis_scale(const geometry::ConvexBody& body);

std::string mesh_fingerprint(const mesh::Mesh& mesh);

json norming_to_json(const NormingReport& r);
NormingReport norming_from_json(const json& j);
json bernstein_to_json(const BernsteinReport& r);

}  // namespace polymesh::verify
