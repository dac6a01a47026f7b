#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polymesh/dubiner.hpp"
#include "polymesh/geometry.hpp"
#include "polymesh/json_util.hpp"
#include "polymesh/types.hpp"

namespace polymesh::poly {

// T_m(t) for t in [-1, 1]; arguments within 1e-12 of the interval are
// clamped. Larger overshoot is evaluated by the recurrence (no clamping).
double cheb_eval(int m, double t);

// Child values of a Cheb node may exceed [-1, 1] by this much before the
// range certificate counts as broken.
inline constexpr double kChebRangeTol = 1e-9;

class PolyExpr;

struct Affine {
    Vec coeffs;
    double constant = 0.0;
};
struct Cheb {
    int m = 0;
    std::shared_ptr<const PolyExpr> child;
};
struct Sum {
    std::vector<PolyExpr> children;
    std::vector<double> weights;
};
struct Product {
    std::vector<PolyExpr> children;
};
struct Power {
    std::shared_ptr<const PolyExpr> child;
    int k = 1;
};
struct Scale {
    std::shared_ptr<const PolyExpr> child;
    double factor = 1.0;
};
struct Shift {
    std::shared_ptr<const PolyExpr> child;
    double constant = 0.0;
};

// Immutable expression-tree polynomial. Copies share structure; the total
// degree is computed structurally at construction.
class PolyExpr {
  public:
    using Node = std::variant<Affine, Cheb, Sum, Product, Power, Scale, Shift>;

    static PolyExpr affine(Vec coeffs, double constant);
    static PolyExpr constant(int dim, double value);
    static PolyExpr cheb(int m, PolyExpr child);
    static PolyExpr sum(std::vector<PolyExpr> children, std::vector<double> weights);
    static PolyExpr product(std::vector<PolyExpr> children);
    static PolyExpr power(PolyExpr child, int k);
    static PolyExpr scale(PolyExpr child, double factor);
    static PolyExpr shift(PolyExpr child, double constant);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    const Node& node() const { return *node_; }
    // Number of nodes in the tree (shared subtrees counted once per use).
    std::size_t size() const { return size_; }

    // Throws RangeViolation if a Cheb child leaves [-1, 1] by more than
    // kChebRangeTol.
    double eval(std::span<const double> z) const;
    double eval(const Vec& z) const { return eval(as_span(z)); }
    std::vector<double> eval_many(const PointCloud& points) const;

    // p(A z + b) for the affine map z -> A z + b (rewrites the leaves).
    PolyExpr compose_affine(const Mat& A, const Vec& b) const;

  private:
    PolyExpr(Node node, int dim, int degree, std::size_t size);
    std::shared_ptr<const Node> node_;
    int dim_ = 0;
    int degree_ = 0;
    std::size_t size_ = 1;
};

// Recomputes the structural degree from the tree (audit of degree()).
int structural_degree(const PolyExpr& p);

// Multi-indices of total degree <= n in dimension d, graded then
// lexicographically descending in the first coordinate.
std::vector<std::vector<int>> multi_indices(int dim, int n);

// Coefficients in the tensor Chebyshev basis prod_i T_{alpha_i}(z_i / s_i)
// restricted to |alpha| <= degree.
struct DensePoly {
    int dim = 0;
    int degree = 0;
    Vec scale;  // per-axis s_i
    std::vector<std::vector<int>> indices;
    std::vector<double> coeffs;

    double eval(std::span<const double> z) const;
    double eval(const Vec& z) const { return eval(as_span(z)); }
    std::vector<double> eval_many(const PointCloud& points) const;
    // Highest |alpha| whose coefficient exceeds tol * max |coeff|.
    int effective_degree(double tol = 1e-12) const;
    // The same polynomial as a Sum of Products of Cheb(Affine) leaves.
    PolyExpr to_expr() const;
};

// Standard-normal coefficients over every |alpha| <= degree.
DensePoly random_poly(int dim, int degree, std::uint64_t seed, double axis_scale = 1.0);

// Exact expansion of an expression tree into the tensor Chebyshev basis with
// unit axis scale. Cost grows like degree^(2d); meant as a test oracle for
// small degrees.
DensePoly expand(const PolyExpr& p);

// Max |p| over a pool plus a golden-section polish along every axis from
// the 16 best pool points. A lower bound of the sup norm over the body.
double sup_norm_estimate(const PolyExpr& p, const geometry::ConvexBody& body, const PointCloud& pool);
double sup_norm_estimate(const DensePoly& p, const geometry::ConvexBody& body, const PointCloud& pool);
// Pool of `pool_size` points drawn inside the normalized body with boundary
// fraction 0.8 and mapped back; p is evaluated in original coordinates.
double sup_norm_estimate(const PolyExpr& p, const geometry::NormalizedBody& body, std::size_t pool_size,
                         std::uint64_t seed);
double sup_norm_estimate(const DensePoly& p, const geometry::NormalizedBody& body, std::size_t pool_size,
                         std::uint64_t seed);

// Construction trace of a resolving polynomial.
struct ResolvingInfo {
    Vec xi;  // direction of the ridge function (oriented so x.xi <= y.xi)
    double a = 0.0, b = 0.0;
    double theta1 = 0.0, theta2 = 0.0;
    int m = 0;
    int ell = 0;
    double rho = 0.0;  // rho_refined(x, y)
};

// Smallest degree n for which a pair at metric distance rho is admissible.
int min_resolving_degree(int dim, double rho);

// Degree-m (m <= n) polynomial with P(y) = 1, P(x) = 0 and 0 <= P <= 1 on
// the body. Throws SeparationError when rho_refined(x, y) is below
// 2 pi sqrt(2d) / (n - 1).
PolyExpr resolving_poly(const dubiner::MetricContext& ctx, const Vec& x, const Vec& y, int n,
                        ResolvingInfo* info = nullptr);

enum class BudgetPolicy {
    Strict,    // throw BudgetExceeded if the product degree exceeds n
    Truncate,  // keep factors in annulus order while the degree fits in n
    Report,    // keep every factor; the caller inspects the degree
};

struct FastDecreasingOptions {
    double alpha = 0.5;
    double L = 4.0;
    std::size_t pool_size = 4096;
    double boundary_fraction = 0.7;
    std::uint64_t seed = 11;
    BudgetPolicy policy = BudgetPolicy::Strict;
};

struct FastDecreasingResult {
    PolyExpr poly = PolyExpr::constant(1, 1.0);
    int degree = 0;              // structural degree of poly
    int full_degree = 0;         // degree with every factor kept
    int annuli = 0;              // m
    double n1 = 0.0;             // n / L
    std::vector<std::size_t> annulus_sizes;  // |Lambda_j| before truncation
    std::size_t factors_kept = 0;
    std::size_t factors_total = 0;
};

// prod_j (prod_{w in Lambda_j} p_w)^(2^j) with p_w(x) = 1 and p_w(w) = 0.
FastDecreasingResult fast_decreasing_poly(const dubiner::MetricContext& ctx, const Vec& x, int n,
                                          const FastDecreasingOptions& options = {});

// Fitted decay constant: min over samples z with rho_refined(x, z) >= 4/n of
// -ln P(z) / sqrt(n rho); +inf if P vanishes there.
double fit_decay_constant(const dubiner::MetricContext& ctx, const PolyExpr& p, const Vec& x, int n,
                          const PointCloud& samples);

// Bound on |d/dt p(a + t (b - a))| at t = 1/2 from the one-dimensional
// Bernstein inequality: 2 n max_{t} |p|, with the max taken over `samples`
// equispaced points (endpoints included). Throws InputError if the segment
// leaves the body.
double bernstein_segment_bound(const PolyExpr& p, const geometry::ConvexBody& body, const Vec& a, const Vec& b,
                               std::size_t samples);

json poly_to_json(const PolyExpr& p);
PolyExpr poly_from_json(const json& j);
PolyExpr load_poly(const std::string& path);

}  // namespace polymesh::poly
