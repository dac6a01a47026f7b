#include "polymesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "polymesh/body_io.hpp"
#include "polymesh/error.hpp"
#include "polymesh/parallel.hpp"
#include "polymesh/random.hpp"
#include "polymesh/spatial_index.hpp"

namespace polymesh::mesh {

using dubiner::MetricContext;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Guards the Euclidean pruning test against rounding in the chord bound.
constexpr double kPruneSlack = 1.0 + 1e-9;

double euclid(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double chord_scale(const MetricContext& ctx) { return 2.0 * std::sqrt(ctx.width_bound()); }

}  // namespace

const char* mode_name(Mode m) { return m == Mode::MaximalSeparated ? "maximal" : "covering"; }

Mode mode_from_name(const std::string& name) {
    if (name == "maximal" || name == "maximal-separated") return Mode::MaximalSeparated;
    if (name == "covering" || name == "covering-only") return Mode::CoveringOnly;
    throw InputError("unknown mesh mode '" + name + "'");
}

double default_c_mesh(int dim) { return dim <= 2 ? 0.5 : 0.25; }

void MeshSpec::validate() const {
    if (n < 1) throw InputError("mesh degree n must be >= 1");
    if (!(c_mesh > 0.0) || !std::isfinite(c_mesh)) throw InputError("c_mesh must be positive");
    if (!(boundary_fraction >= 0.0 && boundary_fraction <= 1.0)) throw InputError("boundary_fraction must lie in [0,1]");
    if (eta < 0.0) throw InputError("eta must be positive");
    if (mode == Mode::CoveringOnly && effective_eta() > c_mesh) throw InputError("covering-only mode needs eta <= c_mesh");
}

std::size_t default_pool_size(int dim, int n, double c_mesh) {
    const double expected = 0.5 * std::pow(n / c_mesh, dim);
    const double pool = 64.0 * std::pow(2.0, dim) * std::max(1.0, expected);
    return static_cast<std::size_t>(std::clamp(pool, 4000.0, 4.0e6));
}

// ---------------------------------------------------------------- nearest

namespace {

// With skip_self, target t ignores point t (targets and points coincide).
template <bool Refined>
std::vector<double> nearest_impl(const MetricContext& ctx, const PointCloud& points, const PointCloud& targets,
                                 bool skip_self = false) {
    std::vector<double> out(targets.size(), kInf);
    if (points.empty()) return out;
    const double scale = chord_scale(ctx);
    const int rounds = ctx.directions().refinement_rounds;
    const std::size_t N = points.size();
    const int d = ctx.dim();
    const double spread = 2.0 * ctx.sampling_radius();
    const double cell = std::max(spread / std::pow(static_cast<double>(N), 1.0 / d), 1e-6);
    const GridIndex grid(points, cell);

    parallel_for(targets.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<char> seen(N, 0);
        std::vector<std::uint32_t> touched, cand;
        for (std::size_t t = begin; t < end; ++t) {
            const auto z = targets[t];
            double best = kInf;
            auto consider = [&](std::uint32_t j) {
                if (seen[j] || (skip_self && j == t)) return;
                seen[j] = 1;
                touched.push_back(j);
                const auto p = points[j];
                if (ctx.include_chord() && best < kInf && euclid(z, p) > scale * best * kPruneSlack) return;
                const double lo = ctx.lower(z, p, best);
                if (lo >= best) return;
                best = Refined ? std::min(best, ctx.refined(z, p, rounds).value) : lo;
            };
            if (!ctx.include_chord()) {
                for (std::uint32_t j = 0; j < N; ++j) consider(j);
            } else {
                double r = cell;
                while (true) {
                    grid.query_box(z, r, cand);
                    for (auto j : cand) consider(j);
                    if (touched.size() + (skip_self ? 1 : 0) >= N || (best < kInf && best * scale <= r)) break;
                    r *= 2.0;
                }
            }
            out[t] = best;
            for (auto j : touched) seen[j] = 0;
            touched.clear();
        }
    }, 64);
    return out;
}

}  // namespace

std::vector<double> nearest_refined(const MetricContext& ctx, const PointCloud& points, const PointCloud& targets) {
    return nearest_impl<true>(ctx, points, targets);
}

std::vector<double> nearest_lower(const MetricContext& ctx, const PointCloud& points, const PointCloud& targets) {
    return nearest_impl<false>(ctx, points, targets);
}

std::vector<double> nearest_neighbor_refined(const MetricContext& ctx, const PointCloud& points) {
    return nearest_impl<true>(ctx, points, points, true);
}

// ---------------------------------------------------------------- builders

namespace {

std::size_t centroid_nearest(const PointCloud& pool) {
    const int d = pool.dim();
    Vec c = Vec::Zero(d);
    for (std::size_t i = 0; i < pool.size(); ++i) c += pool.point(i);
    c /= static_cast<double>(pool.size());
    std::size_t best = 0;
    double bd = kInf;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double e = (pool.point(i) - c).squaredNorm();
        if (e < bd) {
            bd = e;
            best = i;
        }
    }
    return best;
}

// Farthest-point insertion; D[i] is the current min rho_lower from pool
// point i to the selected set.
void greedy_maximal(const MetricContext& ctx, const PointCloud& pool, double eps, Mesh& mesh) {
    const std::size_t M = pool.size();
    const double scale = chord_scale(ctx);
    const std::size_t K = ctx.kernel_size();
    std::vector<double> D(M, kInf);
    std::vector<double> croots(K);
    const double cell = std::max(scale * eps, 1e-6);
    const GridIndex grid(pool, cell);
    std::vector<std::uint32_t> cand;

    std::size_t next = centroid_nearest(pool);
    double radius = kInf;
    while (true) {
        const auto c = pool[next];
        mesh.points.push_back(c);
        mesh.insertion_radii.push_back(radius);
        D[next] = 0.0;
        ctx.roots(c, croots.data());

        // Only points with |p - c| < scale * D[p] can get closer; D <= radius.
        if (ctx.include_chord() && radius < kInf) {
            grid.query_box(c, scale * radius * kPruneSlack, cand);
        } else {
            cand.resize(M);
            for (std::size_t i = 0; i < M; ++i) cand[i] = static_cast<std::uint32_t>(i);
        }
        parallel_for(cand.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t q = begin; q < end; ++q) {
                const std::uint32_t i = cand[q];
                const double cur = D[i];
                if (cur == 0.0) continue;
                const auto p = pool[i];
                if (ctx.include_chord() && cur < kInf && euclid(p, c) > scale * cur * kPruneSlack) continue;
                if (cur < kInf && ctx.coarse(c, p) >= cur) continue;
                const double v = ctx.lower_from_roots(croots.data(), c, p, cur);
                if (v < cur) D[i] = v;
            }
        }, 256);

        std::size_t arg = 0;
        double far = -1.0;
        for (std::size_t i = 0; i < M; ++i)
            if (D[i] > far) {
                far = D[i];
                arg = i;
            }
        if (far <= eps) break;
        if (far > radius) throw Error("greedy insertion radii increased; metric kernel is inconsistent");
        radius = far;
        next = arg;
    }
}

// Greedy set cover of the pool by epsilon-balls around candidate centers;
// candidates closer than eta to the selected set are dropped for good.
void greedy_covering(const MetricContext& ctx, const PointCloud& pool, double eps, double eta, Mesh& mesh) {
    const std::size_t M = pool.size();
    const double scale = chord_scale(ctx);
    const std::size_t stride = std::max<std::size_t>(1, M / 8192);
    std::vector<std::uint32_t> centers;
    for (std::size_t i = 0; i < M; i += stride) centers.push_back(static_cast<std::uint32_t>(i));

    const double cell = std::max(scale * eps, 1e-6);
    const GridIndex grid(pool, cell);
    std::vector<std::vector<std::uint32_t>> covers(centers.size());
    const double stop = eps * (1.0 + 1e-12);
    parallel_for(centers.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> cand;
        std::vector<double> croots(ctx.kernel_size());
        for (std::size_t k = begin; k < end; ++k) {
            const auto c = pool[centers[k]];
            if (ctx.include_chord()) {
                grid.query_box(c, scale * eps * kPruneSlack, cand);
            } else {
                cand.resize(M);
                for (std::size_t i = 0; i < M; ++i) cand[i] = static_cast<std::uint32_t>(i);
            }
            ctx.roots(c, croots.data());
            for (auto i : cand) {
                const auto p = pool[i];
                if (ctx.include_chord() && euclid(p, c) > scale * eps * kPruneSlack) continue;
                if (ctx.coarse(c, p) > eps) continue;
                if (ctx.lower_from_roots(croots.data(), c, p, stop) <= eps) covers[k].push_back(i);
            }
        }
    }, 16);

    std::vector<char> covered(M, 0);
    std::size_t uncovered = M;
    DynamicGrid selected(ctx.dim(), std::max(scale * eta, 1e-6));
    auto far_enough = [&](std::span<const double> z) {
        std::vector<std::uint32_t> near;
        if (ctx.include_chord()) {
            selected.query_box(z, scale * eta * kPruneSlack, near);
        } else {
            for (std::uint32_t j = 0; j < mesh.points.size(); ++j) near.push_back(j);
        }
        for (auto j : near)
            if (ctx.lower(z, mesh.points[j], eta) < eta) return false;
        return true;
    };
    auto select = [&](std::span<const double> z, double radius) {
        mesh.points.push_back(z);
        mesh.insertion_radii.push_back(radius);
        selected.insert(z);
    };
    auto gain = [&](std::size_t k) {
        std::size_t g = 0;
        for (auto i : covers[k]) g += covered[i] ? 0 : 1;
        return g;
    };

    // Lazy greedy: (gain, -index) max-heap with stale entries re-scored.
    using Item = std::pair<std::size_t, std::int64_t>;
    std::priority_queue<Item> heap;
    for (std::size_t k = 0; k < centers.size(); ++k) heap.push({covers[k].size(), -static_cast<std::int64_t>(k)});
    while (!heap.empty() && uncovered > 0) {
        auto [g, negk] = heap.top();
        heap.pop();
        const auto k = static_cast<std::size_t>(-negk);
        const std::size_t fresh = gain(k);
        if (fresh == 0) continue;
        if (fresh < g) {
            heap.push({fresh, negk});
            continue;
        }
        const auto c = pool[centers[k]];
        if (!far_enough(c)) continue;
        select(c, kInf);
        for (auto i : covers[k])
            if (!covered[i]) {
                covered[i] = 1;
                --uncovered;
            }
    }

    // Anything the candidate balls missed becomes a center itself.
    if (uncovered > 0) {
        const std::vector<double> dist = nearest_lower(ctx, mesh.points, pool);
        std::vector<std::uint32_t> cand;
        for (std::size_t i = 0; i < M; ++i) {
            if (covered[i] || dist[i] <= eps) continue;
            const auto z = pool[i];
            bool hit = false;
            std::vector<std::uint32_t> near;
            if (ctx.include_chord()) {
                selected.query_box(z, scale * eps * kPruneSlack, near);
            } else {
                for (std::uint32_t j = 0; j < mesh.points.size(); ++j) near.push_back(j);
            }
            for (auto j : near)
                if (ctx.lower(z, mesh.points[j], eps * (1.0 + 1e-12)) <= eps) {
                    hit = true;
                    break;
                }
            if (hit) continue;
            select(z, kInf);
        }
    }
}

double min_pairwise_lower(const MetricContext& ctx, const PointCloud& points) {
    if (points.size() < 2) return kInf;
    double best = kInf;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) best = std::min(best, ctx.lower(points[i], points[j], best));
    return best;
}

}  // namespace

Mesh build_mesh(const MetricContext& ctx, const MeshSpec& spec, const PointCloud& pool, const BuildOptions& options) {
    spec.validate();
    if (pool.empty()) throw InputError("candidate pool is empty");
    if (pool.dim() != ctx.dim()) throw InputError("pool dimension does not match body");
    Mesh mesh;
    mesh.spec = spec;
    mesh.spec.pool_size = pool.size();
    mesh.pool_size = pool.size();
    mesh.body_fingerprint = ctx.fingerprint();
    mesh.points = PointCloud(ctx.dim());
    const double eps = spec.epsilon();

    if (spec.mode == Mode::MaximalSeparated) {
        greedy_maximal(ctx, pool, eps, mesh);
        mesh.certificates.separation = mesh.insertion_radii.back();
        if (mesh.points.size() < 2) mesh.certificates.separation = kInf;
    } else {
        greedy_covering(ctx, pool, eps, spec.effective_eta(), mesh);
        mesh.certificates.separation = min_pairwise_lower(ctx, mesh.points);
    }

    const std::vector<double> cover = nearest_refined(ctx, mesh.points, pool);
    mesh.certificates.covering = *std::max_element(cover.begin(), cover.end());
    if (options.measure_tau) mesh.certificates.tau_dir = dubiner::estimate_tau_dir(ctx, options.tau_pairs, mix_seed(spec.seed, 0x7a75));
    if (options.holdout > 0) {
        const PointCloud fresh = geometry::sample_candidates(ctx.body(), ctx.sampling_origin(), ctx.sampling_radius(),
                                                             options.holdout, spec.boundary_fraction,
                                                             mix_seed(spec.seed, 0x401d));
        const std::vector<double> hd = nearest_refined(ctx, mesh.points, fresh);
        mesh.certificates.holdout_covering = *std::max_element(hd.begin(), hd.end());
    }
    if (options.check_holdout && (mesh.certificates.covering > 2.0 * eps || mesh.certificates.holdout_covering > 2.0 * eps)) {
        throw MeshQualityError("candidate pool too sparse: covering radius " +
                               std::to_string(std::max(mesh.certificates.covering, mesh.certificates.holdout_covering)) +
                               " exceeds 2*epsilon = " + std::to_string(2.0 * eps) + "; increase the pool size");
    }
    return mesh;
}

Mesh build_mesh(const MetricContext& ctx, const MeshSpec& spec, const BuildOptions& options) {
    spec.validate();
    const std::size_t pool_size = spec.pool_size > 0 ? spec.pool_size : default_pool_size(ctx.dim(), spec.n, spec.c_mesh);
    const PointCloud pool = geometry::sample_candidates(ctx.body(), ctx.sampling_origin(), ctx.sampling_radius(),
                                                        pool_size, spec.boundary_fraction, spec.seed);
    return build_mesh(ctx, spec, pool, options);
}

std::vector<ScanRow> mesh_cardinality_scan(const MetricContext& ctx, const std::vector<int>& degrees, double c_mesh,
                                           std::uint64_t seed, const BuildOptions& options) {
    if (degrees.empty()) throw InputError("degree list is empty");
    if (!std::is_sorted(degrees.begin(), degrees.end())) throw InputError("degrees must be ascending");
    const int d = ctx.dim();
    const double per_ball = 16.0 * std::pow(2.0, d);
    std::vector<ScanRow> rows;
    std::size_t pool = 0;
    for (int n : degrees) {
        MeshSpec spec;
        spec.n = n;
        spec.c_mesh = c_mesh;
        spec.seed = seed;
        std::size_t want = default_pool_size(d, n, c_mesh);
        if (!rows.empty()) {
            const double grow = std::pow(static_cast<double>(n) / rows.back().n, d);
            want = std::max(want, static_cast<std::size_t>(static_cast<double>(pool) * grow));
        }
        Mesh m;
        for (int attempt = 0;; ++attempt) {
            spec.pool_size = want;
            m = build_mesh(ctx, spec, options);
            const auto needed = static_cast<std::size_t>(per_ball * static_cast<double>(m.size()));
            if (want >= needed || attempt == 3) break;
            want = 2 * needed;
        }
        pool = want;
        rows.push_back({n, m.size(), static_cast<double>(m.size()) / std::pow(static_cast<double>(n), d), want});
    }
    return rows;
}

double separation_audit(const MetricContext& ctx, const Mesh& mesh) {
    if (mesh.points.empty()) throw InputError("mesh is empty");
    return min_pairwise_lower(ctx, mesh.points);
}

// ---------------------------------------------------------------- JSON

json mesh_to_json(const Mesh& mesh, const MetricContext& ctx) {
    const auto& s = mesh.spec;
    const auto& c = mesh.certificates;
    const auto& ds = ctx.directions();
    json j;
    j["body_fingerprint"] = mesh.body_fingerprint;
    j["frame"] = ctx.frame() == dubiner::Frame::Normalized ? "normalized" : "original";
    j["spec"] = {{"n", s.n},
                 {"c_mesh", s.c_mesh},
                 {"epsilon", s.epsilon()},
                 {"pool_size", s.pool_size},
                 {"boundary_fraction", s.boundary_fraction},
                 {"seed", s.seed},
                 {"mode", mode_name(s.mode)},
                 {"eta", s.effective_eta()}};
    j["directions"] = {{"generator", dubiner::generator_name(ds.generator)},
                       {"count", ds.count},
                       {"seed", ds.seed},
                       {"refinement_rounds", ds.refinement_rounds},
                       {"refinement_factor", ds.refinement_factor},
                       {"include_chord", ctx.include_chord()},
                       {"kink_directions", ctx.kink_count()}};
    j["cardinality"] = mesh.size();
    j["points"] = to_json_points(mesh.points);
    if (const auto& nb = ctx.normalization()) {
        j["normalization"] = {{"to_normalized", geometry::affine_to_json(nb->to_normalized)},
                              {"inner_radius", nb->inner_radius},
                              {"outer_radius", nb->outer_radius}};
        j["points_original"] = to_json_points(nb->from_normalized.apply(mesh.points));
    }
    const bool single = !std::isfinite(c.separation);
    j["certificates"] = {{"separation", single ? ctx.diameter_bound() : c.separation},
                         {"separation_is_sentinel", single},
                         {"covering", c.covering},
                         {"tau_dir", c.tau_dir},
                         {"holdout_covering", c.holdout_covering}};
    json radii = json::array();
    for (double r : mesh.insertion_radii) radii.push_back(std::isfinite(r) ? json(r) : json(nullptr));
    j["insertion_radii"] = radii;
    return j;
}

Mesh mesh_from_json(const json& j) {
    try {
        Mesh m;
        m.body_fingerprint = j.at("body_fingerprint").get<std::string>();
        const json& s = j.at("spec");
        m.spec.n = s.at("n").get<int>();
        m.spec.c_mesh = s.at("c_mesh").get<double>();
        m.spec.pool_size = s.at("pool_size").get<std::size_t>();
        m.spec.boundary_fraction = s.at("boundary_fraction").get<double>();
        m.spec.seed = s.at("seed").get<std::uint64_t>();
        m.spec.mode = mode_from_name(s.at("mode").get<std::string>());
        m.spec.eta = s.at("eta").get<double>();
        m.pool_size = m.spec.pool_size;
        m.points = points_from_json(j.at("points"), "mesh.points");
        if (m.points.empty()) throw ParseError("mesh has no points");
        const json& c = j.at("certificates");
        m.certificates.separation =
            c.value("separation_is_sentinel", false) ? kInf : c.at("separation").get<double>();
        m.certificates.covering = c.at("covering").get<double>();
        m.certificates.tau_dir = c.at("tau_dir").get<double>();
        m.certificates.holdout_covering = c.value("holdout_covering", 0.0);
        if (j.contains("insertion_radii"))
            for (const auto& r : j.at("insertion_radii")) m.insertion_radii.push_back(r.is_null() ? kInf : r.get<double>());
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("mesh file: ") + e.what());
    }
}

Mesh load_mesh(const std::string& path) { return mesh_from_json(read_json_file(path)); }

}  // namespace polymesh::mesh
