#include "polymesh/dubiner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polymesh/body_io.hpp"
#include "polymesh/directions.hpp"
#include "polymesh/error.hpp"
#include "polymesh/random.hpp"

namespace polymesh::dubiner {

using geometry::AffineMap;
using geometry::ConvexBody;
using geometry::NormalizedBody;

const char* generator_name(Generator g) {
    switch (g) {
        case Generator::Axis: return "axis";
        case Generator::AngularGrid: return "angular-grid";
        case Generator::FibonacciSphere: return "fibonacci-sphere";
        case Generator::RandomUniform: return "random-uniform";
    }
    return "unknown";
}

std::size_t default_direction_count(int dim) {
    if (dim <= 1) return 2;
    if (dim == 2) return 4096;
    if (dim == 3) return 8192;
    return 4096 * static_cast<std::size_t>(dim);
}

DirectionSet DirectionSet::make(Generator generator, int dim, std::size_t count, std::uint64_t seed, int rounds,
                                double factor) {
    if (dim < 1) throw InputError("direction set dimension must be >= 1");
    if (rounds < 0) throw InputError("refinement rounds must be >= 0");
    if (!(factor > 0.0 && factor < 1.0)) throw InputError("refinement factor must lie in (0,1)");
    DirectionSet s;
    s.dim = dim;
    s.generator = generator;
    s.seed = seed;
    s.refinement_rounds = rounds;
    s.refinement_factor = factor;
    switch (generator) {
        case Generator::Axis:
            if (dim != 1) throw InputError("axis generator is for d = 1");
            s.directions = default_directions(1, 2, 0);
            break;
        case Generator::AngularGrid:
            if (dim != 2) throw InputError("angular grid requires d = 2");
            if (count < 4) throw InputError("angular grid needs at least 4 directions");
            s.directions = angular_grid(count);
            break;
        case Generator::FibonacciSphere:
            if (dim != 3) throw InputError("Fibonacci sphere requires d = 3");
            if (count < 8) throw InputError("Fibonacci sphere needs at least 8 directions");
            s.directions = fibonacci_sphere(count);
            break;
        case Generator::RandomUniform:
            if (count < 2) throw InputError("random direction set needs at least 2 directions");
            s.directions = random_directions(dim, count, seed);
            break;
    }
    s.count = s.directions.size();
    return s;
}

DirectionSet DirectionSet::make(int dim, std::size_t count, std::uint64_t seed, int rounds, double factor) {
    Generator g = Generator::RandomUniform;
    if (dim == 1) g = Generator::Axis;
    if (dim == 2) g = Generator::AngularGrid;
    if (dim == 3) g = Generator::FibonacciSphere;
    return make(g, dim, count, seed, rounds, factor);
}

// ---------------------------------------------------------------- context

MetricContext::MetricContext(const NormalizedBody& body, DirectionSet directions, bool include_chord)
    : frame_(Frame::Normalized), dim_(body.dim()), body_(body.normalized), normalization_(body) {
    fingerprint_ = geometry::body_fingerprint(body.body);
    outer_radius_ = body.outer_radius;
    sampling_origin_ = Vec::Zero(dim_);
    init(std::move(directions), include_chord);
}

MetricContext::MetricContext(const ConvexBody& body, DirectionSet directions, bool include_chord)
    : frame_(Frame::Original), dim_(body.dim()), body_(body) {
    fingerprint_ = geometry::body_fingerprint(body);
    outer_radius_ = body.bounding_radius(body.interior_point());
    sampling_origin_ = body.interior_point();
    init(std::move(directions), include_chord);
}

void MetricContext::init(DirectionSet directions, bool include_chord) {
    if (directions.dim != dim_ || directions.directions.dim() != dim_)
        throw InputError("direction set dimension does not match body");
    if (directions.size() == 0) throw InputError("direction set is empty");
    dirs_ = std::move(directions);
    include_chord_ = include_chord;
    width_ = body_.width_bound();

    // Kinks of a_xi sit at the negated facet normals; adding them makes the
    // max exact at the nonsmooth critical directions of polytopes.
    kernel_dirs_ = dirs_.directions;
    const PointCloud normals = body_.facet_normals();
    if (normals.size() <= kMaxKinkDirections) {
        for (std::size_t f = 0; f < normals.size(); ++f) kernel_dirs_.push_back(Vec(-normals.point(f)));
        kink_count_ = normals.size();
    }

    const auto K = static_cast<Eigen::Index>(kernel_dirs_.size());
    comp_.assign(static_cast<std::size_t>(dim_), Eigen::ArrayXd(K));
    a_.resize(K);
    b_.resize(K);
    Vec xi(dim_);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto row = kernel_dirs_[static_cast<std::size_t>(k)];
        for (int i = 0; i < dim_; ++i) {
            comp_[static_cast<std::size_t>(i)][k] = row[static_cast<std::size_t>(i)];
            xi[i] = row[static_cast<std::size_t>(i)];
        }
        b_[k] = body_.support(xi);
        a_[k] = -body_.support(Vec(-xi));
        if (!(a_[k] <= b_[k])) throw MalformedBody("support values are inconsistent (a > b)");
    }

    const Eigen::Index kc = std::min<Eigen::Index>(K, 64);
    coarse_comp_.assign(static_cast<std::size_t>(dim_), Eigen::ArrayXd(kc));
    coarse_a_.resize(kc);
    for (Eigen::Index j = 0; j < kc; ++j) {
        const Eigen::Index k = j * K / kc;
        for (int i = 0; i < dim_; ++i) coarse_comp_[static_cast<std::size_t>(i)][j] = comp_[static_cast<std::size_t>(i)][k];
        coarse_a_[j] = a_[k];
    }
}

double MetricContext::diameter_bound() const { return std::sqrt(width_); }

std::pair<double, double> MetricContext::support_pair(const Vec& xi) const {
    return {-body_.support(Vec(-xi)), body_.support(xi)};
}

double MetricContext::audit(std::size_t samples) const {
    const std::size_t K = kernel_dirs_.size();
    double worst = 0.0;
    const std::size_t step = std::max<std::size_t>(1, K / std::max<std::size_t>(1, samples));
    for (std::size_t k = 0; k < K; k += step) {
        const Vec xi = to_vec(kernel_dirs_[k]);
        worst = std::max(worst, std::abs(b(k) - geometry::support_value(body_, xi)));
        worst = std::max(worst, std::abs(a(k) + geometry::support_value(body_, Vec(-xi))));
    }
    return worst;
}

namespace {

// out = x . xi_k - a_k over the block [k0, k0 + len).
inline void radicands(const std::vector<Eigen::ArrayXd>& comp, const Eigen::ArrayXd& a, const double* x, int d,
                      Eigen::Index k0, Eigen::Index len, double* out) {
    Eigen::Map<Eigen::ArrayXd> o(out, len);
    o = comp[0].segment(k0, len) * x[0];
    for (int i = 1; i < d; ++i) o += comp[static_cast<std::size_t>(i)].segment(k0, len) * x[i];
    o -= a.segment(k0, len);
}

inline double root(double s) { return std::sqrt(std::max(s, 0.0)); }

bool lex_less(std::span<const double> x, std::span<const double> y) {
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

}  // namespace

void MetricContext::roots(std::span<const double> x, double* out) const {
    const auto K = a_.size();
    for (Eigen::Index k0 = 0; k0 < K; k0 += kBlock) {
        const Eigen::Index len = std::min<Eigen::Index>(kBlock, K - k0);
        radicands(comp_, a_, x.data(), dim_, k0, len, out + k0);
        Eigen::Map<Eigen::ArrayXd> o(out + k0, len);
        o = o.max(0.0).sqrt();
    }
}

double MetricContext::directional(std::span<const double> x, std::span<const double> y, const Vec& xi,
                                  double a) const {
    const double sx = ConstVecMap(x.data(), dim_).dot(xi) - a;
    const double sy = ConstVecMap(y.data(), dim_).dot(xi) - a;
    return std::abs(root(sx) - root(sy));
}

double MetricContext::chord_term(std::span<const double> x, std::span<const double> y) const {
    if (lex_less(y, x)) std::swap(x, y);
    const Vec diff = ConstVecMap(x.data(), dim_) - ConstVecMap(y.data(), dim_);
    const double n = diff.norm();
    if (n == 0.0) return 0.0;
    const Vec u = diff / n;
    const double hp = body_.support(u);
    const double hm = body_.support(Vec(-u));
    // Direction u has a = -h(-u); direction -u has a = -h(u).
    const double t1 = directional(x, y, u, -hm);
    const double t2 = directional(x, y, Vec(-u), -hp);
    return std::max(t1, t2);
}

double MetricContext::lower(std::span<const double> x, std::span<const double> y, double stop) const {
    double m = include_chord_ ? chord_term(x, y) : 0.0;
    if (m >= stop) return m;
    const auto K = a_.size();
    alignas(64) double bx[kBlock];
    alignas(64) double by[kBlock];
    for (Eigen::Index k0 = 0; k0 < K; k0 += kBlock) {
        const Eigen::Index len = std::min<Eigen::Index>(kBlock, K - k0);
        radicands(comp_, a_, x.data(), dim_, k0, len, bx);
        radicands(comp_, a_, y.data(), dim_, k0, len, by);
        Eigen::Map<Eigen::ArrayXd> mx(bx, len), my(by, len);
        m = std::max(m, (mx.max(0.0).sqrt() - my.max(0.0).sqrt()).abs().maxCoeff());
        if (m >= stop) return m;
    }
    return m;
}

double MetricContext::lower_from_roots(const double* x_roots, std::span<const double> x, std::span<const double> y,
                                       double stop) const {
    double m = include_chord_ ? chord_term(x, y) : 0.0;
    if (m >= stop) return m;
    const auto K = a_.size();
    alignas(64) double by[kBlock];
    for (Eigen::Index k0 = 0; k0 < K; k0 += kBlock) {
        const Eigen::Index len = std::min<Eigen::Index>(kBlock, K - k0);
        radicands(comp_, a_, y.data(), dim_, k0, len, by);
        Eigen::Map<Eigen::ArrayXd> my(by, len);
        Eigen::Map<const Eigen::ArrayXd> rx(x_roots + k0, len);
        m = std::max(m, (rx - my.max(0.0).sqrt()).abs().maxCoeff());
        if (m >= stop) return m;
    }
    return m;
}

double MetricContext::coarse(std::span<const double> x, std::span<const double> y) const {
    double m = include_chord_ ? chord_term(x, y) : 0.0;
    const auto kc = coarse_a_.size();
    alignas(64) double bx[64];
    alignas(64) double by[64];
    radicands(coarse_comp_, coarse_a_, x.data(), dim_, 0, kc, bx);
    radicands(coarse_comp_, coarse_a_, y.data(), dim_, 0, kc, by);
    Eigen::Map<Eigen::ArrayXd> mx(bx, kc), my(by, kc);
    return std::max(m, (mx.max(0.0).sqrt() - my.max(0.0).sqrt()).abs().maxCoeff());
}

RhoValue MetricContext::lower_argmax(std::span<const double> x, std::span<const double> y) const {
    if (lex_less(y, x)) std::swap(x, y);
    RhoValue best{0.0, to_vec(kernel_dirs_[0])};
    const auto K = a_.size();
    alignas(64) double bx[kBlock];
    alignas(64) double by[kBlock];
    Eigen::Index arg = 0;
    for (Eigen::Index k0 = 0; k0 < K; k0 += kBlock) {
        const Eigen::Index len = std::min<Eigen::Index>(kBlock, K - k0);
        radicands(comp_, a_, x.data(), dim_, k0, len, bx);
        radicands(comp_, a_, y.data(), dim_, k0, len, by);
        Eigen::Map<Eigen::ArrayXd> mx(bx, len), my(by, len);
        Eigen::Index j = 0;
        const double v = (mx.max(0.0).sqrt() - my.max(0.0).sqrt()).abs().maxCoeff(&j);
        if (v > best.value) {
            best.value = v;
            arg = k0 + j;
        }
    }
    best.direction = to_vec(kernel_dirs_[static_cast<std::size_t>(arg)]);
    if (include_chord_) {
        const Vec diff = ConstVecMap(x.data(), dim_) - ConstVecMap(y.data(), dim_);
        const double n = diff.norm();
        if (n > 0.0) {
            const Vec u = diff / n;
            const double hp = body_.support(u);
            const double hm = body_.support(Vec(-u));
            const double t1 = directional(x, y, u, -hm);
            const double t2 = directional(x, y, Vec(-u), -hp);
            if (t1 > best.value) best = {t1, u};
            if (t2 > best.value) best = {t2, Vec(-u)};
        }
    }
    return best;
}

RhoValue MetricContext::refined(std::span<const double> x, std::span<const double> y, int rounds) const {
    if (rounds < 0) throw InputError("refinement rounds must be >= 0");
    if (lex_less(y, x)) std::swap(x, y);
    RhoValue best = lower_argmax(x, y);
    if (rounds == 0 || best.value == 0.0 || dim_ == 1) return best;

    const double K = static_cast<double>(dirs_.size());
    auto eval = [&](const Vec& xi) { return directional(x, y, xi, -body_.support(Vec(-xi))); };

    if (dim_ == 2) {
        double theta = std::atan2(best.direction[1], best.direction[0]);
        double delta = 2.0 * std::numbers::pi / K;
        Vec xi(2);
        for (int r = 0; r < rounds; ++r) {
            double next_theta = theta;
            const double offsets[4] = {-delta, delta, -0.5 * delta, 0.5 * delta};
            for (double off : offsets) {
                xi << std::cos(theta + off), std::sin(theta + off);
                const double v = eval(xi);
                if (v > best.value) {
                    best = {v, xi};
                    next_theta = theta + off;
                }
            }
            theta = next_theta;
            delta *= dirs_.refinement_factor;
        }
        return best;
    }

    // Spherical cap around the incumbent: 2d probes along a tangent frame.
    const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * dim_) / std::tgamma(0.5 * dim_);
    double delta = std::pow(area / K, 1.0 / (dim_ - 1));
    Vec center = best.direction;
    for (int r = 0; r < rounds; ++r) {
        std::vector<Vec> tangents;
        for (int i = 0; i < dim_ && static_cast<int>(tangents.size()) < dim_ - 1; ++i) {
            Vec t = Vec::Unit(dim_, i) - center[i] * center;
            for (const auto& s : tangents) t -= s.dot(t) * s;
            const double n = t.norm();
            if (n > 1e-6) tangents.push_back(t / n);
        }
        std::vector<Vec> probes_dir = tangents;
        if (tangents.size() >= 2) probes_dir.push_back((tangents[0] + tangents[1]).normalized());
        else probes_dir.push_back(tangents[0]);
        Vec next = center;
        for (const auto& t : probes_dir) {
            for (double sgn : {-1.0, 1.0}) {
                Vec xi = std::cos(delta) * center + sgn * std::sin(delta) * t;
                xi.normalize();
                const double v = eval(xi);
                if (v > best.value) {
                    best = {v, xi};
                    next = xi;
                }
            }
        }
        center = next;
        delta *= dirs_.refinement_factor;
    }
    return best;
}

// ---------------------------------------------------------------- checked API

namespace {

void check_point(const MetricContext& ctx, const Vec& z, const char* name) {
    if (z.size() != ctx.dim()) throw InputError(std::string(name) + " has wrong dimension");
    if (!ctx.contains(as_span(z), 1e-9)) throw InputError(std::string(name) + " lies outside the body");
}

}  // namespace

double rho_directional(const MetricContext& ctx, const Vec& x, const Vec& y, const Vec& xi) {
    check_point(ctx, x, "x");
    check_point(ctx, y, "y");
    if (xi.size() != ctx.dim() || std::abs(xi.norm() - 1.0) > 1e-9) throw InputError("xi must be a unit vector");
    const double a = ctx.support_pair(xi).first;
    return std::abs(std::sqrt(std::max(x.dot(xi) - a, 0.0)) - std::sqrt(std::max(y.dot(xi) - a, 0.0)));
}

double rho_lower(const MetricContext& ctx, const Vec& x, const Vec& y) {
    check_point(ctx, x, "x");
    check_point(ctx, y, "y");
    return ctx.lower(as_span(x), as_span(y));
}

RhoValue rho_lower_argmax(const MetricContext& ctx, const Vec& x, const Vec& y) {
    check_point(ctx, x, "x");
    check_point(ctx, y, "y");
    return ctx.lower_argmax(as_span(x), as_span(y));
}

RhoValue rho_refined_argmax(const MetricContext& ctx, const Vec& x, const Vec& y, int rounds) {
    check_point(ctx, x, "x");
    check_point(ctx, y, "y");
    return ctx.refined(as_span(x), as_span(y), rounds);
}

double rho_refined(const MetricContext& ctx, const Vec& x, const Vec& y, int rounds) {
    return rho_refined_argmax(ctx, x, y, rounds).value;
}

double rho_refined(const MetricContext& ctx, const Vec& x, const Vec& y) {
    return rho_refined(ctx, x, y, ctx.directions().refinement_rounds);
}

double ball_volume(int dim, double r) {
    return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0) * std::pow(r, dim);
}

namespace {

// Refined distance from c to z, or +inf once it certainly exceeds `limit`.
double refined_within(const MetricContext& ctx, std::span<const double> c, std::span<const double> z, double limit,
                      int rounds) {
    const double euclid = (ConstVecMap(c.data(), ctx.dim()) - ConstVecMap(z.data(), ctx.dim())).norm();
    if (ctx.include_chord() && euclid / (2.0 * std::sqrt(ctx.width_bound())) > limit)
        return std::numeric_limits<double>::infinity();
    const double lo = ctx.lower(c, z, limit);
    if (lo > limit) return std::numeric_limits<double>::infinity();
    return ctx.refined(c, z, rounds).value;
}

}  // namespace

RhoBallSample rho_ball_membership(const MetricContext& ctx, const Vec& center, double h, const PointCloud& pool,
                                  std::optional<double> reference_volume, std::optional<std::size_t> sample_count) {
    if (!(h > 0.0)) throw InputError("radius h must be positive");
    check_point(ctx, center, "center");
    if (pool.dim() != ctx.dim() && !pool.empty()) throw InputError("pool dimension does not match body");
    RhoBallSample out;
    out.center = center;
    out.radius_h = h;
    out.hits = PointCloud(ctx.dim());
    const int rounds = ctx.directions().refinement_rounds;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (refined_within(ctx, as_span(center), pool[i], h, rounds) <= h) out.hits.push_back(pool[i]);
    }
    const double vol = reference_volume.value_or(ball_volume(ctx.dim(), ctx.outer_radius()));
    const double count = static_cast<double>(sample_count.value_or(pool.size()));
    if (count > 0.0) {
        const double p = static_cast<double>(out.hits.size()) / count;
        out.volume_estimate = p * vol;
        out.stderr_estimate = vol * std::sqrt(p * (1.0 - p) / count);
    }
    return out;
}

DoublingResult doubling_ratio(const MetricContext& ctx, const Vec& center, double h, std::size_t samples,
                              std::uint64_t seed) {
    if (!(h > 0.0)) throw InputError("radius h must be positive");
    if (samples < 10000) throw InputError("doubling_ratio needs at least 10^4 samples");
    check_point(ctx, center, "center");
    const int d = ctx.dim();
    const Vec& origin = ctx.sampling_origin();
    const double radius = ctx.sampling_radius();
    const int rounds = ctx.directions().refinement_rounds;

    Rng rng(seed);
    DoublingResult res;
    res.samples = samples;
    for (std::size_t s = 0; s < samples; ++s) {
        const Vec z = origin + rng.in_ball(d, radius);
        if (!ctx.contains(as_span(z), 0.0)) continue;
        const double r = refined_within(ctx, as_span(center), as_span(z), 2.0 * h, rounds);
        if (r <= 2.0 * h) ++res.hits_2h;
        if (r <= h) ++res.hits_h;
    }
    if (res.hits_h == 0) throw InputError("no samples fell in the radius-h ball; h is too small for this sample size");
    const double S = static_cast<double>(samples);
    const double p1 = static_cast<double>(res.hits_h) / S;
    const double p2 = static_cast<double>(res.hits_2h) / S;
    res.ratio = static_cast<double>(res.hits_2h) / static_cast<double>(res.hits_h);
    const double var = std::max(0.0, (1.0 - p1) / (S * p1) - (1.0 - p2) / (S * p2));
    res.stderr_estimate = res.ratio * std::sqrt(var);
    return res;
}

bool strip_shrink_check(double s, double t, double h) {
    if (!(s >= 0.0) || !(t >= 0.0) || !(h > 0.0)) throw InputError("strip check needs s, t >= 0 and h > 0");
    if (std::abs(std::sqrt(s) - std::sqrt(t)) > 2.0 * h * (1.0 + 1e-15))
        throw InputError("strip check needs |sqrt(s) - sqrt(t)| <= 2h");
    const double shrunk = s + 0.25 * (t - s);
    return std::abs(std::sqrt(s) - std::sqrt(shrunk)) <= h + 1e-12;
}

namespace {

double operator_norm_exact_if_scalar(const AffineMap& map) {
    const Mat gram = map.matrix().transpose() * map.matrix();
    const double g = gram(0, 0);
    bool scalar = true;
    for (Eigen::Index i = 0; i < gram.rows() && scalar; ++i)
        for (Eigen::Index j = 0; j < gram.cols() && scalar; ++j) scalar = gram(i, j) == (i == j ? g : 0.0);
    return scalar ? std::sqrt(g) : map.operator_norm(1e-10);
}

}  // namespace

TransferBound affine_transfer_bound(const MetricContext& ctx, const AffineMap& map, const Vec& x, const Vec& y) {
    if (map.dim() != ctx.dim()) throw InputError("map dimension does not match body");
    check_point(ctx, x, "x");
    check_point(ctx, y, "y");
    const auto& ds = ctx.directions();
    DirectionSet same = DirectionSet::make(ds.generator, ds.dim, ds.count, ds.seed, ds.refinement_rounds,
                                           ds.refinement_factor);
    const MetricContext image(ctx.body().transformed(map), std::move(same), ctx.include_chord());
    const Vec tx = map.apply(x);
    const Vec ty = map.apply(y);
    const int rounds = ds.refinement_rounds;
    TransferBound out;
    out.lhs = image.refined(as_span(tx), as_span(ty), rounds).value;
    out.rhs = std::sqrt(operator_norm_exact_if_scalar(map)) * ctx.refined(as_span(x), as_span(y), rounds).value;
    return out;
}

double estimate_tau_dir(const MetricContext& ctx, std::size_t pairs, std::uint64_t seed) {
    const int d = ctx.dim();
    if (d == 1) return 0.0;
    std::size_t fine_count = d == 2 ? (std::size_t{1} << 20) : (std::size_t{1} << 18);
    if (ctx.body().cached_vertex_count() == 0 && std::holds_alternative<geometry::HPolytope>(ctx.body().shape()))
        fine_count = std::size_t{1} << 14;
    const PointCloud fine = default_directions(d, fine_count, mix_seed(seed, 99));
    std::vector<double> fine_a(fine.size());
    for (std::size_t k = 0; k < fine.size(); ++k) fine_a[k] = -ctx.body().support(Vec(-to_vec(fine[k])));

    const PointCloud pool = geometry::sample_candidates(ctx.body(), ctx.sampling_origin(), ctx.sampling_radius(), 2 * pairs, 0.5,
                                                        mix_seed(seed, 7));
    double tau = 0.0;
    const int rounds = ctx.directions().refinement_rounds;
    for (std::size_t p = 0; p + 1 < pool.size(); p += 2) {
        const auto x = pool[p];
        const auto y = pool[p + 1];
        double brute = 0.0;
        for (std::size_t k = 0; k < fine.size(); ++k) {
            const auto xi = fine[k];
            double sx = -fine_a[k], sy = -fine_a[k];
            for (int i = 0; i < d; ++i) {
                sx += x[static_cast<std::size_t>(i)] * xi[static_cast<std::size_t>(i)];
                sy += y[static_cast<std::size_t>(i)] * xi[static_cast<std::size_t>(i)];
            }
            brute = std::max(brute, std::abs(std::sqrt(std::max(sx, 0.0)) - std::sqrt(std::max(sy, 0.0))));
        }
        const double ref = ctx.refined(x, y, rounds).value;
        const double best = std::max(brute, ref);
        if (best > 0.0) tau = std::max(tau, (best - ref) / best);
    }
    return tau;
}

}  // namespace polymesh::dubiner
