#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "polymesh/types.hpp"

namespace polymesh::geometry {

// z -> matrix * z + shift, with the inverse stored alongside.
class AffineMap {
  public:
    AffineMap(Mat matrix, Vec shift);
    static AffineMap identity(int dim);

    int dim() const { return static_cast<int>(shift_.size()); }
    const Mat& matrix() const { return matrix_; }
    const Vec& shift() const { return shift_; }
    const Mat& inverse_matrix() const { return inverse_; }

    Vec apply(const Vec& z) const { return matrix_ * z + shift_; }
    Vec apply_inverse(const Vec& z) const { return inverse_ * (z - shift_); }
    PointCloud apply(const PointCloud& points) const;

    AffineMap inverse() const;
    // (next o this): first this map, then `next`.
    AffineMap then(const AffineMap& next) const;

    // Spectral norm of the linear part by power iteration on A^T A.
    double operator_norm(double tol = 1e-10) const;

  private:
    Mat matrix_;
    Vec shift_;
    Mat inverse_;
};

struct HalfSpace {
    Vec normal;  // unit length after construction
    double offset = 0.0;
};

struct HPolytope {
    std::vector<HalfSpace> halfspaces;  // normal . x <= offset
};

struct VPolytope {
    std::vector<Vec> vertices;
};

struct Ball {
    Vec center;
    double radius = 1.0;
};

// {center + axes^{1/2} u : |u| <= 1}, i.e. (z-c)^T axes^{-1} (z-c) <= 1.
struct Ellipsoid {
    Vec center;
    Mat axes;
};

using Shape = std::variant<HPolytope, VPolytope, Ball, Ellipsoid>;

// A convex body: a base shape plus an optional affine transform. The shape is
// validated (bounded, nonempty interior) and the transform is folded into a
// world-space representation at construction, after which the value is
// immutable and safe to share between threads.
class ConvexBody {
  public:
    explicit ConvexBody(Shape shape, std::optional<AffineMap> transform = std::nullopt);

    static ConvexBody ball(const Vec& center, double radius);
    static ConvexBody box(const Vec& lo, const Vec& hi);  // as an H-polytope
    static ConvexBody polygon(std::vector<Vec> vertices);  // as a V-polytope
    static ConvexBody ellipsoid(const Vec& center, const Mat& axes);

    int dim() const;
    const Shape& shape() const;
    const std::optional<AffineMap>& transform() const;

    // A body whose points are map(z) for z in this body.
    ConvexBody transformed(const AffineMap& map) const;

    // Support function max_{z in body} z.v for any nonzero v (not only unit
    // vectors); positively homogeneous.
    double support(const Vec& v) const;
    double support(std::span<const double> v) const;
    Vec support_point(const Vec& v) const;

    bool contains(const Vec& z, double tol) const;
    bool contains(std::span<const double> z, double tol) const;

    // max{t >= 0 : origin + t u in body}; origin may lie on the boundary.
    // Returns 0 when origin is (numerically) outside.
    double chord_extent(const Vec& origin, const Vec& u) const;

    const Vec& interior_point() const;
    // Upper bound on the width max_xi (h(xi) + h(-xi)); exact for every shape
    // except large H-polytopes.
    double width_bound() const;
    // Radius of a ball around `center` containing the body.
    double bounding_radius(const Vec& center) const;
    // Largest r with B(0, r) inside the body when it is cheap to get exactly;
    // nullopt otherwise.
    std::optional<double> exact_inradius_about_origin() const;

    // Number of vertices used by the support oracle (0 when LP-backed).
    std::size_t cached_vertex_count() const;
    // The cached vertices (empty when LP-backed or smooth).
    PointCloud extreme_points() const;
    // Unit outer normals of the halfspace description (empty for smooth
    // bodies and for V-polytopes beyond the plane).
    PointCloud facet_normals() const;

    struct World;

  private:
    std::shared_ptr<const World> world_;
};

// Validating front ends for the support oracle.
double support_value(const ConvexBody& body, const Vec& xi);
Vec support_point(const ConvexBody& body, const Vec& xi);
bool contains(const ConvexBody& body, const Vec& z, double tol);
double ray_extent(const ConvexBody& body, const Vec& origin, const Vec& u);

// Minimum-volume enclosing ellipsoid {z : (z-c)^T shape (z-c) <= 1}.
struct EnclosingEllipsoid {
    Vec center;
    Mat shape;
    int iterations = 0;
};

EnclosingEllipsoid minimum_volume_ellipsoid(const PointCloud& points, double tol, int max_iterations = 200000);

struct NormalizedBody {
    ConvexBody body;        // as given
    ConvexBody normalized;  // T(body)
    AffineMap to_normalized;
    AffineMap from_normalized;
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    double tau_norm = 0.02;

    int dim() const { return body.dim(); }
};

inline constexpr double kDefaultTauNorm = 0.02;

int default_support_samples(int dim);

// Affine normalization so that B(0, ~1) lies inside T(body) and T(body) lies
// inside B(0, ~d). Uses the Loewner ellipsoid of a support-point sample.
NormalizedBody john_normalize(const ConvexBody& body, int num_support_samples, double tol = 1e-7,
                              double tau_norm = kDefaultTauNorm);

// Candidate pool inside the normalized body (normalized coordinates).
// A (1 - boundary_fraction) share is uniform, the rest is clustered toward
// the boundary along rays from the origin with radial factor cos(theta/2).
PointCloud sample_candidates(const NormalizedBody& body, std::size_t pool_size, double boundary_fraction,
                             std::uint64_t seed);

// Same construction on an arbitrary body, rays emanating from `origin`
// (an interior point) and uniform samples drawn from B(origin, radius).
PointCloud sample_candidates(const ConvexBody& body, const Vec& origin, double radius, std::size_t pool_size,
                             double boundary_fraction, std::uint64_t seed);

}  // namespace polymesh::geometry
