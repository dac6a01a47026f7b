#include "polymesh/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "polymesh/error.hpp"
#include "polymesh/parallel.hpp"
#include "polymesh/random.hpp"

namespace polymesh::verify {

using dubiner::MetricContext;

namespace {

// Seed streams; distinct so that pools, polynomials and witnesses never
// share a generator state.
constexpr std::uint64_t kPoolStream = 0xe7a1;
constexpr std::uint64_t kWitnessStream = 0xfa57;
constexpr std::uint64_t kTrialStream = 0x7e57;
constexpr std::uint64_t kPairStream = 0x9a12;

double ratio_of(double sup, double on_mesh) {
    if (on_mesh > 0.0) return sup / on_mesh;
    return sup > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(k, 1, v.size()) - 1];
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t i) { return mix_seed(mix_seed(seed, kTrialStream), i); }

}  // namespace

double axis_scale(const geometry::ConvexBody& body) {
    double s = 0.0;
    for (int i = 0; i < body.dim(); ++i) {
        Vec e = Vec::Zero(body.dim());
        e[i] = 1.0;
        s = std::max({s, std::abs(body.support(e)), std::abs(body.support(Vec(-e)))});
    }
    return s;
}

std::string mesh_fingerprint(const mesh::Mesh& mesh) { return fnv1a_hex(to_json_points(mesh.points).dump()); }

NormingReport norming_constant(const MetricContext& ctx, const mesh::Mesh& mesh, int n, std::size_t trials,
                               std::uint64_t seed, const NormingOptions& options) {
    if (mesh.body_fingerprint != ctx.fingerprint())
        throw FingerprintMismatch("mesh was built for body " + mesh.body_fingerprint + ", not " + ctx.fingerprint());
    if (mesh.points.empty()) throw InputError("mesh is empty");
    if (mesh.points.dim() != ctx.dim()) throw InputError("mesh dimension does not match body");
    if (n < 0) throw InputError("degree must be >= 0");
    if (trials == 0) throw InputError("need at least one trial");

    NormingReport r;
    r.body_fingerprint = mesh.body_fingerprint;
    r.mesh_fingerprint = mesh_fingerprint(mesh);
    r.mesh_size = mesh.size();
    r.n = n;
    r.trials = trials;
    r.seed = seed;
    r.axis_scale = axis_scale(ctx.body());

    const auto extra = std::max(options.min_pool,
                                static_cast<std::size_t>(options.pool_factor * static_cast<double>(mesh.size())));
    const PointCloud fresh = geometry::sample_candidates(ctx.body(), ctx.sampling_origin(), ctx.sampling_radius(), extra,
                                                         options.boundary_fraction, mix_seed(seed, kPoolStream));
    PointCloud pool = mesh.points;
    pool.append(fresh);
    r.eval_pool_size = pool.size();

    r.trial_ratios.resize(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        const poly::DensePoly q = poly::random_poly(ctx.dim(), n, trial_seed(seed, i), r.axis_scale);
        const double on_mesh = max_abs(q.eval_many(mesh.points));
        r.trial_ratios[i] = ratio_of(poly::sup_norm_estimate(q, ctx.body(), pool), on_mesh);
    }
    r.ensemble_max_ratio = *std::max_element(r.trial_ratios.begin(), r.trial_ratios.end());
    for (double q : {0.5, 0.9, 0.99, 1.0}) r.quantiles.emplace_back(q, quantile(r.trial_ratios, q));

    // Fast-decreasing witnesses at the fresh points farthest from the mesh.
    if (options.adversarial > 0 && n >= 2) {
        const std::vector<double> gap = mesh::nearest_lower(ctx, mesh.points, fresh);
        std::vector<std::size_t> order(gap.size());
        std::iota(order.begin(), order.end(), 0);
        const std::size_t count = std::min(options.adversarial, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                          [&](std::size_t i, std::size_t j) { return gap[i] != gap[j] ? gap[i] > gap[j] : i < j; });
        poly::FastDecreasingOptions fd;
        fd.alpha = options.alpha;
        fd.L = options.L;
        fd.pool_size = options.witness_pool;
        fd.policy = poly::BudgetPolicy::Truncate;
        for (std::size_t k = 0; k < count; ++k) {
            fd.seed = mix_seed(mix_seed(seed, kWitnessStream), k);
            AdversarialWitness w;
            w.center = fresh.point(order[k]);
            const poly::FastDecreasingResult res = poly::fast_decreasing_poly(ctx, w.center, n, fd);
            w.degree = res.degree;
            const double on_mesh = max_abs(res.poly.eval_many(mesh.points));
            w.ratio = ratio_of(poly::sup_norm_estimate(res.poly, ctx.body(), pool), on_mesh);
            r.adversarial_max_ratio = std::max(r.adversarial_max_ratio, w.ratio);
            r.adversarial.push_back(std::move(w));
        }
    }
    return r;
}

std::pair<bool, NormingReport> certify(const MetricContext& ctx, const mesh::Mesh& mesh, double target, int n,
                                       std::size_t trials, std::uint64_t seed, const NormingOptions& options) {
    if (!(target >= 1.0)) throw InputError("certification target must be >= 1");
    NormingReport r = norming_constant(ctx, mesh, n, trials, seed, options);
    const bool ok = r.ensemble_max_ratio <= target && r.adversarial_max_ratio <= target;
    return {ok, std::move(r)};
}

// ---------------------------------------------------------------- Bernstein

namespace {

struct PairSet {
    PointCloud x, y;
    std::vector<double> rho;
};

PairSet make_pairs(const MetricContext& ctx, std::size_t pairs, std::uint64_t seed, double close_fraction) {
    const int d = ctx.dim();
    const auto n_close = static_cast<std::size_t>(close_fraction * static_cast<double>(pairs));
    const std::size_t n_far = pairs - n_close;
    const PointCloud base = geometry::sample_candidates(ctx.body(), ctx.sampling_origin(), ctx.sampling_radius(),
                                                        n_far + n_far + n_close, 0.5, mix_seed(seed, 1));
    PairSet ps{PointCloud(d), PointCloud(d), {}};
    Rng rng(mix_seed(seed, 2));
    // Shuffle so interior and boundary samples mix in the far pairs.
    std::vector<std::size_t> idx(base.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    for (std::size_t k = 0; k < n_far; ++k) {
        ps.x.push_back(base[idx[2 * k]]);
        ps.y.push_back(base[idx[2 * k + 1]]);
    }
    for (std::size_t k = 0; k < n_close; ++k) {
        const Vec x = base.point(idx[2 * n_far + k]);
        const Vec u = rng.unit_vector(d);
        const double delta = std::pow(10.0, rng.uniform(-4.0, 0.0));
        const double t = std::min(delta, ctx.body().chord_extent(x, u) * (1.0 - 1e-12));
        ps.x.push_back(x);
        ps.y.push_back(Vec(x + t * u));
    }
    ps.rho.resize(ps.x.size());
    const int rounds = ctx.directions().refinement_rounds;
    parallel_for(ps.x.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) ps.rho[i] = ctx.refined(ps.x[i], ps.y[i], rounds).value;
    }, 64);
    return ps;
}

PointCloud bernstein_pool(const MetricContext& ctx, std::uint64_t seed, const BernsteinOptions& options) {
    return geometry::sample_candidates(ctx.body(), ctx.sampling_origin(), ctx.sampling_radius(), options.eval_pool, 0.8,
                                       mix_seed(seed, kPoolStream));
}

double bernstein_term(double qx, double qy, int n, double rho, double norm) {
    const double denom = n * rho * norm;
    return denom > 0.0 ? std::abs(qx - qy) / denom : 0.0;
}

}  // namespace

BernsteinReport bernstein_ratio(const MetricContext& ctx, int n, std::size_t trials, std::size_t pairs,
                                std::uint64_t seed, const BernsteinOptions& options) {
    if (n < 0) throw InputError("degree must be >= 0");
    if (trials == 0 || pairs == 0) throw InputError("need at least one trial and one pair");
    BernsteinReport r;
    r.n = n;
    r.trials = trials;
    r.pairs_tested = pairs;
    r.seed = seed;
    r.eval_pool_size = options.eval_pool;
    r.axis_scale = axis_scale(ctx.body());
    const PairSet ps = make_pairs(ctx, pairs, mix_seed(seed, kPairStream), options.close_fraction);
    const PointCloud pool = bernstein_pool(ctx, seed, options);

    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t ts = trial_seed(seed, t);
        const poly::DensePoly q = poly::random_poly(ctx.dim(), n, ts, r.axis_scale);
        const double norm = poly::sup_norm_estimate(q, ctx.body(), pool);
        const std::vector<double> qx = q.eval_many(ps.x), qy = q.eval_many(ps.y);
        for (std::size_t i = 0; i < ps.x.size(); ++i) {
            const double v = bernstein_term(qx[i], qy[i], n, ps.rho[i], norm);
            if (v > r.max_ratio || (t == 0 && i == 0)) {
                r.max_ratio = v;
                r.witness = {ps.x.point(i), ps.y.point(i), t, ts, ps.rho[i], norm, v};
            }
        }
    }
    return r;
}

double replay_bernstein(const MetricContext& ctx, const BernsteinReport& report, const BernsteinOptions& options) {
    const auto& w = report.witness;
    const poly::DensePoly q = poly::random_poly(ctx.dim(), report.n, w.trial_seed, report.axis_scale);
    BernsteinOptions opt = options;
    opt.eval_pool = report.eval_pool_size;
    const double norm = poly::sup_norm_estimate(q, ctx.body(), bernstein_pool(ctx, report.seed, opt));
    const double rho = ctx.refined(as_span(w.x), as_span(w.y), ctx.directions().refinement_rounds).value;
    return bernstein_term(q.eval(w.x), q.eval(w.y), report.n, rho, norm);
}

// ---------------------------------------------------------------- JSON

json norming_to_json(const NormingReport& r) {
    json adv = json::array();
    for (const auto& w : r.adversarial)
        adv.push_back({{"center", to_json_vec(w.center)}, {"degree", w.degree}, {"ratio", w.ratio}});
    json quant = json::array();
    for (const auto& [q, v] : r.quantiles) quant.push_back({{"q", q}, {"ratio", v}});
    return {{"kind", "norming-report"},
            {"body_fingerprint", r.body_fingerprint},
            {"mesh_fingerprint", r.mesh_fingerprint},
            {"mesh_size", r.mesh_size},
            {"n", r.n},
            {"trials", r.trials},
            {"seed", r.seed},
            {"eval_pool_size", r.eval_pool_size},
            {"axis_scale", r.axis_scale},
            {"ensemble_max_ratio", r.ensemble_max_ratio},
            {"adversarial_max_ratio", r.adversarial_max_ratio},
            {"quantiles", quant},
            {"trial_ratios", r.trial_ratios},
            {"adversarial", adv}};
}

NormingReport norming_from_json(const json& j) {
    try {
        if (j.value("kind", "") != "norming-report") throw ParseError("not a norming report");
        NormingReport r;
        r.body_fingerprint = j.at("body_fingerprint").get<std::string>();
        r.mesh_fingerprint = j.at("mesh_fingerprint").get<std::string>();
        r.mesh_size = j.at("mesh_size").get<std::size_t>();
        r.n = j.at("n").get<int>();
        r.trials = j.at("trials").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.eval_pool_size = j.at("eval_pool_size").get<std::size_t>();
        r.axis_scale = j.at("axis_scale").get<double>();
        r.ensemble_max_ratio = j.at("ensemble_max_ratio").get<double>();
        r.adversarial_max_ratio = j.at("adversarial_max_ratio").get<double>();
        r.trial_ratios = j.at("trial_ratios").get<std::vector<double>>();
        for (const auto& q : j.at("quantiles")) r.quantiles.emplace_back(q.at("q").get<double>(), q.at("ratio").get<double>());
        for (const auto& w : j.at("adversarial"))
            r.adversarial.push_back({vec_from_json(w.at("center"), "adversarial.center"), w.at("degree").get<int>(),
                                     w.at("ratio").get<double>()});
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("norming report: ") + e.what());
    }
}

json bernstein_to_json(const BernsteinReport& r) {
    const auto& w = r.witness;
    return {{"kind", "bernstein-report"},
            {"n", r.n},
            {"trials", r.trials},
            {"pairs_tested", r.pairs_tested},
            {"seed", r.seed},
            {"eval_pool_size", r.eval_pool_size},
            {"axis_scale", r.axis_scale},
            {"max_ratio", r.max_ratio},
            {"witness",
             {{"x", to_json_vec(w.x)},
              {"y", to_json_vec(w.y)},
              {"trial", w.trial},
              {"trial_seed", w.trial_seed},
              {"rho", w.rho},
              {"norm", w.norm},
              {"ratio", w.ratio}}}};
}

}  // namespace polymesh::verify
