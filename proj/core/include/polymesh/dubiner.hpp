#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polymesh/geometry.hpp"
#include "polymesh/types.hpp"

namespace polymesh::dubiner {

enum class Generator { Axis, AngularGrid, FibonacciSphere, RandomUniform };

const char* generator_name(Generator g);

// Finite subset of S^{d-1} standing in for the sphere in the metric's max,
// plus the local refinement policy. Reconstructible from its metadata.
struct DirectionSet {
    int dim = 0;
    Generator generator = Generator::AngularGrid;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    int refinement_rounds = 6;
    double refinement_factor = 0.5;
    PointCloud directions;

    std::size_t size() const { return directions.size(); }

    static DirectionSet make(int dim, std::size_t count, std::uint64_t seed = 0x5eed, int rounds = 6,
                             double factor = 0.5);
    static DirectionSet make(Generator generator, int dim, std::size_t count, std::uint64_t seed, int rounds,
                             double factor);
};

// 4096 in the plane, 8192 in R^3, 4096 d beyond; 2 on the line.
std::size_t default_direction_count(int dim);

struct RhoValue {
    double value = 0.0;
    Vec direction;  // a unit vector attaining `value`
};

// Which coordinates the context works in.
enum class Frame { Normalized, Original };

// Metric evaluation context: a body, a direction set and the cached support
// pairs (a_xi, b_xi) for every base direction. Immutable once constructed;
// all evaluations are const and thread-safe.
class MetricContext {
  public:
    // Works in normalized coordinates (on T(body)).
    MetricContext(const geometry::NormalizedBody& body, DirectionSet directions, bool include_chord = true);
    // Works directly on `body` in its own coordinates.
    MetricContext(const geometry::ConvexBody& body, DirectionSet directions, bool include_chord = true);

    Frame frame() const { return frame_; }
    int dim() const { return dim_; }
    const geometry::ConvexBody& body() const { return body_; }
    const std::optional<geometry::NormalizedBody>& normalization() const { return normalization_; }
    const DirectionSet& directions() const { return dirs_; }
    // Directions the kernels scan: the base set followed by the negated facet
    // normals of a polytope body (at most kMaxKinkDirections of them).
    const PointCloud& kernel_directions() const { return kernel_dirs_; }
    std::size_t kernel_size() const { return kernel_dirs_.size(); }
    std::size_t kink_count() const { return kink_count_; }
    static constexpr std::size_t kMaxKinkDirections = 4096;
    bool include_chord() const { return include_chord_; }
    const std::string& fingerprint() const { return fingerprint_; }

    // Radius of a ball around the origin (normalized frame) or the interior
    // point containing the body.
    double outer_radius() const { return outer_radius_; }
    // Upper bound W on the width; chord bound reads rho >= |x-y| / (2 sqrt W).
    double width_bound() const { return width_; }
    // sqrt(W): an upper bound on the metric diameter.
    double diameter_bound() const;
    // Center and radius of the ball that uniform samplers draw from: the
    // origin and outer radius in the normalized frame, the interior point
    // and a bounding radius otherwise.
    const Vec& sampling_origin() const { return sampling_origin_; }
    double sampling_radius() const { return outer_radius_; }

    double a(std::size_t k) const { return a_[static_cast<Eigen::Index>(k)]; }
    double b(std::size_t k) const { return b_[static_cast<Eigen::Index>(k)]; }
    // (a_xi, b_xi) for an arbitrary unit direction.
    std::pair<double, double> support_pair(const Vec& xi) const;
    // Max deviation of `samples` cache entries from a fresh support query.
    double audit(std::size_t samples = 64) const;

    bool contains(std::span<const double> z, double tol = 1e-9) const { return body_.contains(z, tol); }

    // ---- unchecked kernels (points assumed inside the body) ----

    // r_k(x) = sqrt(max(x.xi_k - a_k, 0)) for every kernel direction.
    void roots(std::span<const double> x, double* out) const;
    // Max over base directions (and chord) of the directional term. Stops
    // early and returns a value >= stop once that is certain.
    double lower(std::span<const double> x, std::span<const double> y,
                 double stop = std::numeric_limits<double>::infinity()) const;
    // Same as lower(x, y) with x's root vector precomputed.
    double lower_from_roots(const double* x_roots, std::span<const double> x, std::span<const double> y,
                            double stop = std::numeric_limits<double>::infinity()) const;
    // Max over a coarse subset of base directions and the chord; a cheap
    // lower bound for lower().
    double coarse(std::span<const double> x, std::span<const double> y) const;
    double chord_term(std::span<const double> x, std::span<const double> y) const;
    RhoValue lower_argmax(std::span<const double> x, std::span<const double> y) const;
    RhoValue refined(std::span<const double> x, std::span<const double> y, int rounds) const;

    static constexpr std::size_t kBlock = 512;

  private:
    void init(DirectionSet directions, bool include_chord);
    double directional(std::span<const double> x, std::span<const double> y, const Vec& xi, double a) const;

    Frame frame_;
    int dim_ = 0;
    geometry::ConvexBody body_;
    std::optional<geometry::NormalizedBody> normalization_;
    DirectionSet dirs_;
    PointCloud kernel_dirs_;
    std::size_t kink_count_ = 0;
    bool include_chord_ = true;
    std::string fingerprint_;
    double outer_radius_ = 0.0;
    double width_ = 0.0;
    Vec sampling_origin_;

    std::vector<Eigen::ArrayXd> comp_;  // comp_[i][k] = xi_k[i]
    Eigen::ArrayXd a_, b_;
    std::vector<Eigen::ArrayXd> coarse_comp_;
    Eigen::ArrayXd coarse_a_;
};

// ---- checked public operations ----

double rho_directional(const MetricContext& ctx, const Vec& x, const Vec& y, const Vec& xi);
double rho_lower(const MetricContext& ctx, const Vec& x, const Vec& y);
RhoValue rho_lower_argmax(const MetricContext& ctx, const Vec& x, const Vec& y);
double rho_refined(const MetricContext& ctx, const Vec& x, const Vec& y, int rounds);
double rho_refined(const MetricContext& ctx, const Vec& x, const Vec& y);
RhoValue rho_refined_argmax(const MetricContext& ctx, const Vec& x, const Vec& y, int rounds);

struct RhoBallSample {
    Vec center;
    double radius_h = 0.0;
    PointCloud hits;
    double volume_estimate = 0.0;
    double stderr_estimate = 0.0;
};

// Pool points with rho_refined(center, .) <= h. The volume estimate is
// (hits / sample_count) * reference_volume; by default sample_count is the
// pool size and reference_volume is that of B(0, outer_radius).
RhoBallSample rho_ball_membership(const MetricContext& ctx, const Vec& center, double h, const PointCloud& pool,
                                  std::optional<double> reference_volume = std::nullopt,
                                  std::optional<std::size_t> sample_count = std::nullopt);

struct DoublingResult {
    double ratio = 0.0;
    double stderr_estimate = 0.0;
    std::size_t hits_h = 0;
    std::size_t hits_2h = 0;
    std::size_t samples = 0;
};

// vol B(center, 2h) / vol B(center, h) from one shared uniform sample of the
// bounding ball; stderr accounts for the nesting of the two balls.
DoublingResult doubling_ratio(const MetricContext& ctx, const Vec& center, double h, std::size_t samples,
                              std::uint64_t seed);

bool strip_shrink_check(double s, double t, double h);

struct TransferBound {
    double lhs = 0.0;
    double rhs = 0.0;
};

// lhs = rho on map(body) between map(x), map(y); rhs = ||A^T||^{1/2} rho(x, y).
TransferBound affine_transfer_bound(const MetricContext& ctx, const geometry::AffineMap& map, const Vec& x,
                                    const Vec& y);

// Volume of the d-ball of radius r.
double ball_volume(int dim, double r);

// Direction-discretization slack: max relative gap between the context's
// refined value and a fine brute-force value over `pairs` sample pairs.
double estimate_tau_dir(const MetricContext& ctx, std::size_t pairs, std::uint64_t seed);

}  // namespace polymesh::dubiner
