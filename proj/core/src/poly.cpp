#include "polymesh/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "polymesh/error.hpp"
#include "polymesh/parallel.hpp"
#include "polymesh/random.hpp"

namespace polymesh::poly {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this order the three-term recurrence is accurate to a few ulps times
// m^2; above it the trigonometric form in extended precision is used.
constexpr int kRecurrenceMaxOrder = 16;

double cheb_recurrence(int m, double t) {
    double prev = 1.0, cur = t;
    for (int k = 1; k < m; ++k) {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

template <class T>
std::shared_ptr<const PolyExpr> share(T&& p) {
    return std::make_shared<const PolyExpr>(std::forward<T>(p));
}

}  // namespace

double cheb_eval(int m, double t) {
    if (m < 0) throw InputError("Chebyshev order must be >= 0");
    if (m == 0) return 1.0;
    if (std::abs(t) <= 1.0 + 1e-12) t = std::clamp(t, -1.0, 1.0);
    if (m == 1) return t;
    if (m <= kRecurrenceMaxOrder || std::abs(t) > 1.0) return cheb_recurrence(m, t);
    const long double theta = std::acos(static_cast<long double>(t));
    return static_cast<double>(std::cos(static_cast<long double>(m) * theta));
}

// ---------------------------------------------------------------- PolyExpr

PolyExpr::PolyExpr(Node node, int dim, int degree, std::size_t size)
    : node_(std::make_shared<const Node>(std::move(node))), dim_(dim), degree_(degree), size_(size) {}

PolyExpr PolyExpr::affine(Vec coeffs, double constant) {
    if (coeffs.size() < 1) throw InputError("affine leaf needs dimension >= 1");
    if (!coeffs.allFinite() || !std::isfinite(constant)) throw InputError("affine leaf has non-finite entries");
    const int dim = static_cast<int>(coeffs.size());
    const int deg = coeffs.isZero(0.0) ? 0 : 1;
    return PolyExpr(Affine{std::move(coeffs), constant}, dim, deg, 1);
}

PolyExpr PolyExpr::constant(int dim, double value) { return affine(Vec::Zero(dim), value); }

PolyExpr PolyExpr::cheb(int m, PolyExpr child) {
    if (m < 0) throw InputError("Chebyshev order must be >= 0");
    const int dim = child.dim(), deg = m * child.degree();
    const std::size_t size = 1 + child.size();
    return PolyExpr(Cheb{m, share(std::move(child))}, dim, deg, size);
}

PolyExpr PolyExpr::sum(std::vector<PolyExpr> children, std::vector<double> weights) {
    if (children.empty()) throw InputError("sum needs at least one child");
    if (children.size() != weights.size()) throw InputError("sum needs one weight per child");
    const int dim = children.front().dim();
    int deg = 0;
    std::size_t size = 1;
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (children[i].dim() != dim) throw InputError("sum children differ in dimension");
        if (!std::isfinite(weights[i])) throw InputError("sum weight is not finite");
        if (weights[i] != 0.0) deg = std::max(deg, children[i].degree());
        size += children[i].size();
    }
    return PolyExpr(Sum{std::move(children), std::move(weights)}, dim, deg, size);
}

PolyExpr PolyExpr::product(std::vector<PolyExpr> children) {
    if (children.empty()) throw InputError("product needs at least one child");
    const int dim = children.front().dim();
    long long deg = 0;
    std::size_t size = 1;
    for (const auto& c : children) {
        if (c.dim() != dim) throw InputError("product children differ in dimension");
        deg += c.degree();
        size += c.size();
    }
    if (deg > std::numeric_limits<int>::max()) throw InputError("product degree overflows");
    return PolyExpr(Product{std::move(children)}, dim, static_cast<int>(deg), size);
}

PolyExpr PolyExpr::power(PolyExpr child, int k) {
    if (k < 1) throw InputError("power exponent must be >= 1");
    const long long deg = static_cast<long long>(k) * child.degree();
    if (deg > std::numeric_limits<int>::max()) throw InputError("power degree overflows");
    const int dim = child.dim();
    const std::size_t size = 1 + child.size();
    return PolyExpr(Power{share(std::move(child)), k}, dim, static_cast<int>(deg), size);
}

PolyExpr PolyExpr::scale(PolyExpr child, double factor) {
    if (!std::isfinite(factor)) throw InputError("scale factor is not finite");
    const int dim = child.dim(), deg = factor == 0.0 ? 0 : child.degree();
    const std::size_t size = 1 + child.size();
    return PolyExpr(Scale{share(std::move(child)), factor}, dim, deg, size);
}

PolyExpr PolyExpr::shift(PolyExpr child, double constant) {
    if (!std::isfinite(constant)) throw InputError("shift constant is not finite");
    const int dim = child.dim(), deg = child.degree();
    const std::size_t size = 1 + child.size();
    return PolyExpr(Shift{share(std::move(child)), constant}, dim, deg, size);
}

namespace {

double ipow(double v, int k) {
    double r = 1.0;
    while (k > 0) {
        if (k & 1) r *= v;
        v *= v;
        k >>= 1;
    }
    return r;
}

double eval_node(const PolyExpr& p, std::span<const double> z) {
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Affine>) {
                double s = n.constant;
                for (std::size_t i = 0; i < z.size(); ++i) s += n.coeffs[static_cast<Eigen::Index>(i)] * z[i];
                return s;
            } else if constexpr (std::is_same_v<T, Cheb>) {
                const double v = eval_node(*n.child, z);
                if (!(std::abs(v) <= 1.0 + kChebRangeTol))
                    throw RangeViolation("Chebyshev argument " + std::to_string(v) + " outside [-1, 1]");
                return cheb_eval(n.m, std::clamp(v, -1.0, 1.0));
            } else if constexpr (std::is_same_v<T, Sum>) {
                double s = 0.0;
                for (std::size_t i = 0; i < n.children.size(); ++i)
                    if (n.weights[i] != 0.0) s += n.weights[i] * eval_node(n.children[i], z);
                return s;
            } else if constexpr (std::is_same_v<T, Product>) {
                double s = 1.0;
                for (const auto& c : n.children) {
                    s *= eval_node(c, z);
                    if (s == 0.0) break;
                }
                return s;
            } else if constexpr (std::is_same_v<T, Power>) {
                return ipow(eval_node(*n.child, z), n.k);
            } else if constexpr (std::is_same_v<T, Scale>) {
                return n.factor * eval_node(*n.child, z);
            } else {
                return eval_node(*n.child, z) + n.constant;
            }
        },
        p.node());
}

}  // namespace

double PolyExpr::eval(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dim_) throw InputError("point dimension does not match polynomial");
    return eval_node(*this, z);
}

std::vector<double> PolyExpr::eval_many(const PointCloud& points) const {
    if (!points.empty() && points.dim() != dim_) throw InputError("point dimension does not match polynomial");
    std::vector<double> out(points.size());
    parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = eval_node(*this, points[i]);
    }, 64);
    return out;
}

PolyExpr PolyExpr::compose_affine(const Mat& A, const Vec& b) const {
    if (A.rows() != dim_ || b.size() != dim_) throw InputError("affine map does not match polynomial dimension");
    return std::visit(
        [&](const auto& n) -> PolyExpr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return affine(A.transpose() * n.coeffs, n.coeffs.dot(b) + n.constant);
            } else if constexpr (std::is_same_v<T, Cheb>) {
                return cheb(n.m, n.child->compose_affine(A, b));
            } else if constexpr (std::is_same_v<T, Sum>) {
                std::vector<PolyExpr> kids;
                for (const auto& c : n.children) kids.push_back(c.compose_affine(A, b));
                return sum(std::move(kids), n.weights);
            } else if constexpr (std::is_same_v<T, Product>) {
                std::vector<PolyExpr> kids;
                for (const auto& c : n.children) kids.push_back(c.compose_affine(A, b));
                return product(std::move(kids));
            } else if constexpr (std::is_same_v<T, Power>) {
                return power(n.child->compose_affine(A, b), n.k);
            } else if constexpr (std::is_same_v<T, Scale>) {
                return scale(n.child->compose_affine(A, b), n.factor);
            } else {
                return shift(n.child->compose_affine(A, b), n.constant);
            }
        },
        node());
}

int structural_degree(const PolyExpr& p) {
    return std::visit(
        [&](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return n.coeffs.isZero(0.0) ? 0 : 1;
            } else if constexpr (std::is_same_v<T, Cheb>) {
                return n.m * structural_degree(*n.child);
            } else if constexpr (std::is_same_v<T, Sum>) {
                int d = 0;
                for (std::size_t i = 0; i < n.children.size(); ++i)
                    if (n.weights[i] != 0.0) d = std::max(d, structural_degree(n.children[i]));
                return d;
            } else if constexpr (std::is_same_v<T, Product>) {
                int d = 0;
                for (const auto& c : n.children) d += structural_degree(c);
                return d;
            } else if constexpr (std::is_same_v<T, Power>) {
                return n.k * structural_degree(*n.child);
            } else if constexpr (std::is_same_v<T, Scale>) {
                return n.factor == 0.0 ? 0 : structural_degree(*n.child);
            } else {
                return structural_degree(*n.child);
            }
        },
        p.node());
}

// ---------------------------------------------------------------- DensePoly

namespace {

void compositions(int dim, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    const int i = static_cast<int>(cur.size());
    if (i == dim - 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int k = total; k >= 0; --k) {
        cur.push_back(k);
        compositions(dim, total - k, cur, out);
        cur.pop_back();
    }
}

int total_of(const std::vector<int>& a) { return std::accumulate(a.begin(), a.end(), 0); }

}  // namespace

std::vector<std::vector<int>> multi_indices(int dim, int n) {
    if (dim < 1 || n < 0) throw InputError("multi_indices needs dim >= 1 and n >= 0");
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    for (int t = 0; t <= n; ++t) compositions(dim, t, cur, out);
    return out;
}

double DensePoly::eval(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dim) throw InputError("point dimension does not match polynomial");
    const int stride = degree + 1;
    std::vector<double> T(static_cast<std::size_t>(dim * stride));
    for (int i = 0; i < dim; ++i) {
        const double t = z[static_cast<std::size_t>(i)] / scale[i];
        double* row = T.data() + i * stride;
        row[0] = 1.0;
        if (degree >= 1) row[1] = t;
        for (int k = 2; k <= degree; ++k) row[k] = 2.0 * t * row[k - 1] - row[k - 2];
    }
    double s = 0.0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        double term = coeffs[j];
        for (int i = 0; i < dim; ++i) term *= T[static_cast<std::size_t>(i * stride + indices[j][static_cast<std::size_t>(i)])];
        s += term;
    }
    return s;
}

std::vector<double> DensePoly::eval_many(const PointCloud& points) const {
    std::vector<double> out(points.size());
    parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = eval(points[i]);
    }, 64);
    return out;
}

int DensePoly::effective_degree(double tol) const {
    double big = 0.0;
    for (double c : coeffs) big = std::max(big, std::abs(c));
    int d = 0;
    for (std::size_t j = 0; j < indices.size(); ++j)
        if (std::abs(coeffs[j]) > tol * big) d = std::max(d, total_of(indices[j]));
    return d;
}

PolyExpr DensePoly::to_expr() const {
    std::vector<PolyExpr> terms;
    for (const auto& alpha : indices) {
        std::vector<PolyExpr> factors;
        for (int i = 0; i < dim; ++i) {
            const int k = alpha[static_cast<std::size_t>(i)];
            if (k == 0) continue;
            Vec e = Vec::Zero(dim);
            e[i] = 1.0 / scale[i];
            factors.push_back(PolyExpr::cheb(k, PolyExpr::affine(e, 0.0)));
        }
        terms.push_back(factors.empty() ? PolyExpr::constant(dim, 1.0) : PolyExpr::product(std::move(factors)));
    }
    return PolyExpr::sum(std::move(terms), coeffs);
}

DensePoly random_poly(int dim, int degree, std::uint64_t seed, double axis_scale) {
    if (degree < 0) throw InputError("degree must be >= 0");
    if (!(axis_scale > 0.0)) throw InputError("axis scale must be positive");
    DensePoly p;
    p.dim = dim;
    p.degree = degree;
    p.scale = Vec::Constant(dim, axis_scale);
    p.indices = multi_indices(dim, degree);
    Rng rng(seed);
    p.coeffs.reserve(p.indices.size());
    for (std::size_t j = 0; j < p.indices.size(); ++j) p.coeffs.push_back(rng.normal());
    return p;
}

// ---------------------------------------------------------------- expansion

namespace {

using Coeffs = std::map<std::vector<int>, double>;

Coeffs mul(const Coeffs& A, const Coeffs& B, int dim) {
    Coeffs out;
    const double w = std::ldexp(1.0, -dim);
    std::vector<int> idx(static_cast<std::size_t>(dim));
    for (const auto& [a, ca] : A)
        for (const auto& [b, cb] : B) {
            // T_a T_b = (T_{a+b} + T_{|a-b|}) / 2 on every axis.
            for (int mask = 0; mask < (1 << dim); ++mask) {
                for (int i = 0; i < dim; ++i) {
                    const auto u = static_cast<std::size_t>(i);
                    idx[u] = (mask >> i & 1) ? std::abs(a[u] - b[u]) : a[u] + b[u];
                }
                out[idx] += w * ca * cb;
            }
        }
    return out;
}

Coeffs add(Coeffs A, const Coeffs& B, double wb) {
    for (const auto& [b, cb] : B) A[b] += wb * cb;
    return A;
}

Coeffs expand_node(const PolyExpr& p) {
    const int dim = p.dim();
    const std::vector<int> zero(static_cast<std::size_t>(dim), 0);
    return std::visit(
        [&](const auto& n) -> Coeffs {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Affine>) {
                Coeffs c;
                c[zero] = n.constant;
                for (int i = 0; i < dim; ++i) {
                    if (n.coeffs[i] == 0.0) continue;
                    auto e = zero;
                    e[static_cast<std::size_t>(i)] = 1;
                    c[e] = n.coeffs[i];
                }
                return c;
            } else if constexpr (std::is_same_v<T, Cheb>) {
                const Coeffs q = expand_node(*n.child);
                Coeffs prev{{zero, 1.0}};
                if (n.m == 0) return prev;
                Coeffs cur = q;
                for (int k = 1; k < n.m; ++k) {
                    Coeffs next = mul(q, cur, dim);
                    for (auto& [i, c] : next) c *= 2.0;
                    next = add(std::move(next), prev, -1.0);
                    prev = std::move(cur);
                    cur = std::move(next);
                }
                return cur;
            } else if constexpr (std::is_same_v<T, Sum>) {
                Coeffs c;
                for (std::size_t i = 0; i < n.children.size(); ++i)
                    if (n.weights[i] != 0.0) c = add(std::move(c), expand_node(n.children[i]), n.weights[i]);
                return c;
            } else if constexpr (std::is_same_v<T, Product>) {
                Coeffs c = expand_node(n.children.front());
                for (std::size_t i = 1; i < n.children.size(); ++i) c = mul(c, expand_node(n.children[i]), dim);
                return c;
            } else if constexpr (std::is_same_v<T, Power>) {
                const Coeffs base = expand_node(*n.child);
                Coeffs c = base;
                for (int i = 1; i < n.k; ++i) c = mul(c, base, dim);
                return c;
            } else if constexpr (std::is_same_v<T, Scale>) {
                Coeffs c = expand_node(*n.child);
                for (auto& [i, v] : c) v *= n.factor;
                return c;
            } else {
                Coeffs c = expand_node(*n.child);
                c[zero] += n.constant;
                return c;
            }
        },
        p.node());
}

}  // namespace

DensePoly expand(const PolyExpr& p) {
    const Coeffs c = expand_node(p);
    DensePoly out;
    out.dim = p.dim();
    out.scale = Vec::Ones(p.dim());
    out.degree = 0;
    for (const auto& [a, v] : c) out.degree = std::max(out.degree, total_of(a));
    out.indices = multi_indices(out.dim, out.degree);
    out.coeffs.assign(out.indices.size(), 0.0);
    for (std::size_t j = 0; j < out.indices.size(); ++j) {
        const auto it = c.find(out.indices[j]);
        if (it != c.end()) out.coeffs[j] = it->second;
    }
    return out;
}

// ---------------------------------------------------------------- sup norm

namespace {

constexpr std::size_t kPolishSeeds = 16;
constexpr int kGoldenIterations = 48;
// Keeps polish probes strictly inside the body.
constexpr double kInsetFactor = 1.0 - 1e-12;

template <class P>
double sup_norm_impl(const P& p, int degree, const geometry::ConvexBody& body, const PointCloud& pool) {
    if (pool.empty()) throw InputError("evaluation pool is empty");
    if (pool.dim() != body.dim()) throw InputError("pool dimension does not match the body");
    const std::vector<double> vals = p.eval_many(pool);
    std::vector<std::size_t> order(vals.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min(kPolishSeeds, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::size_t i, std::size_t j) {
                          const double a = std::abs(vals[i]), b = std::abs(vals[j]);
                          return a != b ? a > b : i < j;
                      });
    double best = std::abs(vals[order[0]]);
    if (degree == 0) return best;

    const int d = body.dim();
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    std::vector<double> polished(top, 0.0);
    parallel_for(top, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            Vec z = pool.point(order[s]);
            double fz = std::abs(p.eval(z));
            for (int i = 0; i < d; ++i) {
                Vec u = Vec::Zero(d);
                u[i] = 1.0;
                const double tp = body.chord_extent(z, u) * kInsetFactor;
                const double tm = body.chord_extent(z, -u) * kInsetFactor;
                // A window of about one oscillation of a degree-n polynomial.
                const double w = (tp + tm) / (degree + 1.0);
                double lo = -std::min(tm, w), hi = std::min(tp, w);
                if (!(hi > lo)) continue;
                auto f = [&](double t) {
                    Vec q = z;
                    q[i] += t;
                    return std::abs(p.eval(q));
                };
                double c1 = hi - inv_phi * (hi - lo), c2 = lo + inv_phi * (hi - lo);
                double f1 = f(c1), f2 = f(c2);
                for (int it = 0; it < kGoldenIterations; ++it) {
                    if (f1 >= f2) {
                        hi = c2;
                        c2 = c1;
                        f2 = f1;
                        c1 = hi - inv_phi * (hi - lo);
                        f1 = f(c1);
                    } else {
                        lo = c1;
                        c1 = c2;
                        f1 = f2;
                        c2 = lo + inv_phi * (hi - lo);
                        f2 = f(c2);
                    }
                }
                const double t = f1 >= f2 ? c1 : c2;
                const double ft = std::max(f1, f2);
                if (ft > fz) {
                    z[i] += t;
                    fz = ft;
                }
            }
            polished[s] = fz;
        }
    }, 1);
    for (double v : polished) best = std::max(best, v);
    return best;
}

}  // namespace

double sup_norm_estimate(const PolyExpr& p, const geometry::ConvexBody& body, const PointCloud& pool) {
    if (p.dim() != body.dim()) throw InputError("polynomial dimension does not match the body");
    return sup_norm_impl(p, p.degree(), body, pool);
}

double sup_norm_estimate(const DensePoly& p, const geometry::ConvexBody& body, const PointCloud& pool) {
    if (p.dim != body.dim()) throw InputError("polynomial dimension does not match the body");
    return sup_norm_impl(p, p.degree, body, pool);
}

double sup_norm_estimate(const PolyExpr& p, const geometry::NormalizedBody& body, std::size_t pool_size,
                         std::uint64_t seed) {
    if (pool_size < 1000) throw InputError("sup-norm evaluation pool must hold at least 1000 points");
    const PointCloud pool = geometry::sample_candidates(body, pool_size, 0.8, seed);
    return sup_norm_estimate(p, body.body, body.from_normalized.apply(pool));
}

double sup_norm_estimate(const DensePoly& p, const geometry::NormalizedBody& body, std::size_t pool_size,
                         std::uint64_t seed) {
    if (pool_size < 1000) throw InputError("sup-norm evaluation pool must hold at least 1000 points");
    const PointCloud pool = geometry::sample_candidates(body, pool_size, 0.8, seed);
    return sup_norm_estimate(p, body.body, body.from_normalized.apply(pool));
}

// ---------------------------------------------------------------- resolving

namespace {

double resolving_threshold(int dim) { return 2.0 * kPi * std::sqrt(2.0 * dim); }

void check_inside(const dubiner::MetricContext& ctx, const Vec& z, const char* name) {
    if (z.size() != ctx.dim()) throw InputError(std::string(name) + " has the wrong dimension");
    if (!ctx.contains(as_span(z), 1e-9)) throw InputError(std::string(name) + " lies outside the body");
}

}  // namespace

int min_resolving_degree(int dim, double rho) {
    if (!(rho > 0.0)) return std::numeric_limits<int>::max();
    const double q = resolving_threshold(dim) / rho;
    if (q > 1e9) return std::numeric_limits<int>::max();
    return static_cast<int>(std::floor(q)) + 2;
}

PolyExpr resolving_poly(const dubiner::MetricContext& ctx, const Vec& x, const Vec& y, int n, ResolvingInfo* info) {
    check_inside(ctx, x, "x");
    check_inside(ctx, y, "y");
    if (n < 2) throw InputError("resolving polynomial needs n >= 2");
    const int d = ctx.dim();
    const dubiner::RhoValue rv = ctx.refined(as_span(x), as_span(y), ctx.directions().refinement_rounds);
    const int need = min_resolving_degree(d, rv.value);
    if (rv.value < resolving_threshold(d) / (n - 1)) {
        throw SeparationError("points too close for degree " + std::to_string(n) + " (rho = " +
                                  std::to_string(rv.value) + "); minimum usable degree is " + std::to_string(need),
                              need);
    }

    Vec xi = rv.direction;
    if (x.dot(xi) > y.dot(xi)) xi = -xi;
    const auto [a, b] = ctx.support_pair(xi);
    // p(z) = g.z + h maps the body onto [-1, 1].
    const Vec g = (2.0 / (b - a)) * xi;
    const double h = -(a + b) / (b - a);
    const double px = std::clamp(g.dot(x) + h, -1.0, 1.0);
    const double py = std::clamp(g.dot(y) + h, -1.0, 1.0);
    const double theta1 = std::acos(px), theta2 = std::acos(py);
    const double gap = theta1 - theta2;
    if (!(gap > 0.0)) throw SeparationError("ridge direction does not separate the points", need);

    int m = std::max(3, static_cast<int>(std::floor(2.0 * kPi / gap)) + 1);
    while (2.0 * kPi / m >= gap) ++m;
    if (m > n) {
        throw SeparationError("ridge angle gap needs degree " + std::to_string(m) + " > " + std::to_string(n), m);
    }
    int ell = static_cast<int>(std::floor(theta2 * m / kPi)) + 1;
    if (ell * kPi / m <= theta2) ++ell;
    if ((ell - 1) * kPi / m > theta2) --ell;

    // phi maps [p(x), p(y)] onto [cos((ell+1) pi/m), cos(ell pi/m)].
    const double lo = std::cos((ell + 1) * kPi / m), hi = std::cos(ell * kPi / m);
    const double s = (hi - lo) / (py - px);
    const PolyExpr u = PolyExpr::affine(s * g, lo + s * (h - px));
    const double sign = (ell % 2 == 0) ? 1.0 : -1.0;
    PolyExpr P = PolyExpr::sum({PolyExpr::constant(d, 1.0), PolyExpr::cheb(m, u)}, {0.5, 0.5 * sign});

    if (info) {
        info->xi = xi;
        info->a = a;
        info->b = b;
        info->theta1 = theta1;
        info->theta2 = theta2;
        info->m = m;
        info->ell = ell;
        info->rho = rv.value;
    }
    return P;
}

// ---------------------------------------------------------------- fast decreasing

FastDecreasingResult fast_decreasing_poly(const dubiner::MetricContext& ctx, const Vec& x, int n,
                                          const FastDecreasingOptions& options) {
    check_inside(ctx, x, "x");
    if (n < 2) throw InputError("fast-decreasing polynomial needs n >= 2");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (!(options.L >= 1.0)) throw InputError("L must be >= 1");
    if (options.pool_size == 0) throw InputError("annulus pool is empty");
    const int d = ctx.dim();

    FastDecreasingResult res;
    res.poly = PolyExpr::constant(d, 1.0);
    res.n1 = n / options.L;
    if (n <= options.L) return res;

    int m = 1;
    while (std::pow(4.0, m) <= std::sqrt(2.0 * d) * res.n1) ++m;
    res.annuli = m;

    const PointCloud pool = geometry::sample_candidates(ctx.body(), ctx.sampling_origin(), ctx.sampling_radius(),
                                                        options.pool_size, options.boundary_fraction, options.seed);
    const int rounds = ctx.directions().refinement_rounds;
    std::vector<double> rho(pool.size());
    parallel_for(pool.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) rho[i] = ctx.refined(as_span(x), pool[i], rounds).value;
    }, 64);

    struct Group {
        int exponent;
        std::vector<PolyExpr> factors;
    };
    std::vector<Group> groups;
    long long full = 0;
    for (int j = 1; j <= m; ++j) {
        const double inner = std::pow(4.0, j - 1) / res.n1, outer = std::pow(4.0, j) / res.n1;
        const double sep = options.alpha * inner;
        std::vector<std::size_t> lambda;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (rho[i] < inner || rho[i] >= outer) continue;
            bool far = true;
            for (auto k : lambda)
                if (ctx.lower(pool[i], pool[k], sep) < sep) {
                    far = false;
                    break;
                }
            if (far) lambda.push_back(i);
        }
        res.annulus_sizes.push_back(lambda.size());
        Group g{1 << j, {}};
        for (auto k : lambda) {
            const Vec w = pool.point(k);
            const int budget = std::max(static_cast<int>(std::ceil(11.0 * std::sqrt(d) / rho[k])),
                                        min_resolving_degree(d, rho[k]));
            g.factors.push_back(resolving_poly(ctx, w, x, budget));
            full += static_cast<long long>(g.exponent) * g.factors.back().degree();
        }
        res.factors_total += g.factors.size();
        groups.push_back(std::move(g));
    }
    res.full_degree = static_cast<int>(std::min<long long>(full, std::numeric_limits<int>::max()));

    if (options.policy == BudgetPolicy::Strict && full > n) {
        throw BudgetExceeded("fast-decreasing product has degree " + std::to_string(res.full_degree) +
                                 " > " + std::to_string(n) + "; raise L or n",
                             res.full_degree, n);
    }
    if (options.policy == BudgetPolicy::Truncate) {
        long long used = 0;
        bool stop = false;
        for (auto& g : groups) {
            std::size_t keep = 0;
            while (!stop && keep < g.factors.size()) {
                const long long add = static_cast<long long>(g.exponent) * g.factors[keep].degree();
                if (used + add > n) {
                    stop = true;
                    break;
                }
                used += add;
                ++keep;
            }
            g.factors.erase(g.factors.begin() + static_cast<std::ptrdiff_t>(keep), g.factors.end());
        }
    }

    std::vector<PolyExpr> parts;
    for (auto& g : groups) {
        if (g.factors.empty()) continue;
        res.factors_kept += g.factors.size();
        PolyExpr inner = g.factors.size() == 1 ? g.factors.front() : PolyExpr::product(std::move(g.factors));
        parts.push_back(PolyExpr::power(std::move(inner), g.exponent));
    }
    if (!parts.empty()) res.poly = parts.size() == 1 ? parts.front() : PolyExpr::product(std::move(parts));
    res.degree = res.poly.degree();
    return res;
}

double fit_decay_constant(const dubiner::MetricContext& ctx, const PolyExpr& p, const Vec& x, int n,
                          const PointCloud& samples) {
    if (n < 1) throw InputError("degree must be >= 1");
    const std::vector<double> vals = p.eval_many(samples);
    const int rounds = ctx.directions().refinement_rounds;
    double c = std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double r = ctx.refined(as_span(x), samples[i], rounds).value;
        if (r < 4.0 / n) continue;
        ++used;
        if (vals[i] <= 0.0) continue;
        c = std::min(c, -std::log(vals[i]) / std::sqrt(n * r));
    }
    if (used == 0) throw InputError("no samples at metric distance >= 4/n from x");
    return c;
}

double bernstein_segment_bound(const PolyExpr& p, const geometry::ConvexBody& body, const Vec& a, const Vec& b,
                               std::size_t samples) {
    if (a.size() != p.dim() || b.size() != p.dim()) throw InputError("segment dimension does not match polynomial");
    if (!body.contains(a, 1e-9) || !body.contains(b, 1e-9)) throw InputError("segment leaves the body");
    if (samples < 2) throw InputError("need at least 2 samples on the segment");
    if (p.degree() == 0) return 0.0;
    double sup = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
        sup = std::max(sup, std::abs(p.eval(Vec(a + t * (b - a)))));
    }
    // |g'(t)| sqrt(t (1 - t)) <= n ||g|| on [0, 1], evaluated at t = 1/2.
    return 2.0 * p.degree() * sup;
}

}  // namespace polymesh::poly
