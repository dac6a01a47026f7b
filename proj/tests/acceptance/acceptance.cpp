// Acceptance run: one PASS/FAIL line per criterion on stdout, measurements
// on stderr. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "poly_oracle.hpp"
#include "polymesh/body_io.hpp"
#include "polymesh/dubiner.hpp"
#include "polymesh/error.hpp"
#include "polymesh/geometry.hpp"
#include "polymesh/mesh.hpp"
#include "polymesh/poly.hpp"
#include "polymesh/random.hpp"
#include "polymesh/verify.hpp"
#include "test_util.hpp"

using namespace polymesh;
using dubiner::DirectionSet;
using dubiner::MetricContext;
using geometry::ConvexBody;
using geometry::NormalizedBody;
using testutil::v2;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void note(const char* fmt, auto... args) {
    std::fprintf(stderr, "  ");
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

struct Outcome {
    bool pass = false;
    std::string summary;
};

NormalizedBody normalized(const ConvexBody& b) { return geometry::john_normalize(b, geometry::default_support_samples(b.dim())); }

MetricContext default_ctx(const NormalizedBody& nb) {
    return MetricContext(nb, DirectionSet::make(nb.dim(), dubiner::default_direction_count(nb.dim())));
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ------------------------------------------------------------ criteria 1, 2

struct MeshRun {
    std::string body;
    int n = 0;
    std::size_t N = 0;
    double ensemble = 0.0, adversarial = 0.0;
};

std::vector<MeshRun> g_mesh_runs;
double g_mesh_seconds = 0.0;

void run_meshes() {
    const auto t0 = Clock::now();
    const std::pair<const char*, ConvexBody> bodies[] = {{"disk", testutil::unit_disk()},
                                                          {"square", testutil::unit_square()}};
    for (const auto& [name, body] : bodies) {
        const NormalizedBody nb = normalized(body);
        const MetricContext ctx = default_ctx(nb);
        for (int n : {4, 8, 16}) {
            mesh::MeshSpec spec;
            spec.n = n;
            spec.c_mesh = mesh::default_c_mesh(2);
            const mesh::Mesh m = mesh::build_mesh(ctx, spec);
            const verify::NormingReport r = verify::norming_constant(ctx, m, n, 200, 1);
            g_mesh_runs.push_back({name, n, m.size(), r.ensemble_max_ratio, r.adversarial_max_ratio});
            note("%s n=%d: N=%zu N/n^2=%.3f ensemble max %.4f adversarial max %.4f (%zu witnesses)", name, n, m.size(),
                 static_cast<double>(m.size()) / (n * n), r.ensemble_max_ratio, r.adversarial_max_ratio,
                 r.adversarial.size());
        }
    }
    g_mesh_seconds = seconds_since(t0);
}

Outcome criterion1() {
    double worst = 0.0;
    for (const auto& r : g_mesh_runs) worst = std::max({worst, r.ensemble, r.adversarial});
    const bool pass = worst <= 2.0 && g_mesh_seconds <= 600.0;
    return {pass, fmt("norming ratio max %.4f (bound 2.0) over disk and square, n in {4,8,16}; %.0f s (budget 600 s)",
                      worst, g_mesh_seconds)};
}

Outcome criterion2() {
    std::map<std::string, std::pair<double, double>> range;
    for (const auto& r : g_mesh_runs) {
        const double v = static_cast<double>(r.N) / (r.n * r.n);
        auto [it, fresh] = range.try_emplace(r.body, v, v);
        if (!fresh) it->second = {std::min(it->second.first, v), std::max(it->second.second, v)};
    }
    double worst = 0.0;
    std::string detail;
    for (const auto& [body, mm] : range) {
        const double spread = mm.second / mm.first;
        worst = std::max(worst, spread);
        detail += fmt(" %s %.3f", body.c_str(), spread);
    }
    return {worst <= 2.0, "N/n^2 max/min:" + detail + " (bound 2.0)"};
}

// ------------------------------------------------------------ criterion 3

Outcome criterion3() {
    const NormalizedBody nb = normalized(testutil::unit_disk());
    const MetricContext ctx = default_ctx(nb);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, replay_err = 0.0;
    for (int n : {4, 8, 16}) {
        const verify::BernsteinReport r = verify::bernstein_ratio(ctx, n, 20, 2000, 5);
        const double replay = verify::replay_bernstein(ctx, r);
        replay_err = std::max(replay_err, std::abs(replay - r.max_ratio) / r.max_ratio);
        lo = std::min(lo, r.max_ratio);
        hi = std::max(hi, r.max_ratio);
        note("disk n=%d: Bernstein max ratio %.4f (rho %.3g, |x-y| %.3g), replay %.17g", n, r.max_ratio, r.witness.rho,
             (r.witness.x - r.witness.y).norm(), replay);
    }
    const double spread = hi / lo;
    return {spread <= 2.0 && replay_err <= 1e-9,
            fmt("Bernstein max ratio spread %.3f across n in {4,8,16} (bound 2.0); replay relative error %.2g (bound 1e-9)",
                spread, replay_err)};
}

// ------------------------------------------------------------ criterion 4

Outcome criterion4() {
    const std::pair<const char*, ConvexBody> bodies[] = {{"disk", testutil::unit_disk()},
                                                          {"square", testutil::unit_square()},
                                                          {"7-gon", testutil::random_ngon(7, 2024)}};
    std::size_t checks = 0, violations = 0, empty = 0;
    double worst_excess = -std::numeric_limits<double>::infinity(), worst_ratio = 0.0;
    for (const auto& [name, body] : bodies) {
        const NormalizedBody nb = normalized(body);
        const MetricContext ctx = default_ctx(nb);
        const PointCloud centers = geometry::sample_candidates(nb, 20, 0.3, 404);
        double body_max = 0.0;
        for (std::size_t i = 0; i < centers.size(); ++i)
            for (double h : {0.1, 0.2, 0.3}) {
                try {
                    const dubiner::DoublingResult d =
                        dubiner::doubling_ratio(ctx, centers.point(i), h, 100000, mix_seed(i, static_cast<std::uint64_t>(h * 100)));
                    ++checks;
                    const double bound = 16.0 + 3.0 * d.stderr_estimate;
                    if (d.ratio > bound) ++violations;
                    worst_excess = std::max(worst_excess, d.ratio - bound);
                    worst_ratio = std::max(worst_ratio, d.ratio);
                    body_max = std::max(body_max, d.ratio);
                } catch (const InputError&) {
                    ++empty;
                }
            }
        note("%s: max doubling ratio %.3f", name, body_max);
    }
    return {violations == 0 && empty == 0 && checks == 180,
            fmt("%zu of 180 ratios measured, %zu above 16 + 3 stderr, %zu without hits; max ratio %.3f", checks, violations,
                empty, worst_ratio)};
}

// ------------------------------------------------------------ criterion 5

Outcome criterion5() {
    std::vector<std::pair<std::string, ConvexBody>> bodies = {{"disk", testutil::unit_disk()},
                                                             {"square", testutil::unit_square()},
                                                             {"7-gon", testutil::random_ngon(7, 99)}};
    Mat A(2, 2);
    A << 4.0, 1.0, 1.0, 0.5;
    bodies.emplace_back("ellipse", ConvexBody::ellipsoid(v2(1, -1), A));
    bodies.emplace_back("triangle", ConvexBody::polygon({v2(0, 0), v2(1, 0), v2(0, 1)}));
    std::vector<MetricContext> ctxs;
    std::vector<PointCloud> samples;
    for (std::size_t b = 0; b < bodies.size(); ++b) {
        const NormalizedBody nb = normalized(bodies[b].second);
        ctxs.push_back(default_ctx(nb));
        samples.push_back(geometry::sample_candidates(nb, 10000, 0.5, 31 + b));
    }
    Rng rng(555);
    std::size_t failures = 0, cases = 0;
    double worst_end = 0.0, worst_range = 0.0;
    int max_n = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t b = static_cast<std::size_t>(t) % bodies.size();
        const MetricContext& ctx = ctxs[b];
        const PointCloud& S = samples[b];
        const Vec x = S.point(rng.below(S.size())), y = S.point(rng.below(S.size()));
        if ((x - y).norm() == 0.0) continue;
        const double rho = dubiner::rho_refined(ctx, x, y);
        const int n = poly::min_resolving_degree(2, rho) + static_cast<int>(rng.below(24));
        max_n = std::max(max_n, n);
        ++cases;
        try {
            const poly::PolyExpr p = poly::resolving_poly(ctx, x, y, n);
            const double ey = std::abs(p.eval(y) - 1.0), ex = std::abs(p.eval(x));
            double below = 0.0, above = 0.0;
            for (double v : p.eval_many(S)) {
                below = std::max(below, -v);
                above = std::max(above, v - 1.0);
            }
            worst_end = std::max({worst_end, ey, ex});
            worst_range = std::max({worst_range, below, above});
            if (ey > 1e-9 || ex > 1e-9 || below > 1e-9 || above > 1e-9 || p.degree() > n) ++failures;
        } catch (const std::exception& e) {
            ++failures;
            note("case %d on %s failed: %s", t, bodies[b].first.c_str(), e.what());
        }
    }
    note("resolving: %zu cases, degrees up to %d, endpoint error %.2g, range overshoot %.2g", cases, max_n, worst_end,
         worst_range);
    return {failures == 0 && cases == 200,
            fmt("%zu resolving cases on 5 bodies, %zu failures; endpoint error %.2g, range overshoot %.2g (tol 1e-9)", cases,
                failures, worst_end, worst_range)};
}

// ------------------------------------------------------------ criterion 6

Outcome criterion6() {
    const std::pair<const char*, ConvexBody> bodies[] = {{"disk", testutil::unit_disk()},
                                                          {"square", testutil::unit_square()},
                                                          {"7-gon", testutil::random_ngon(7, 7)},
                                                          {"triangle", ConvexBody::polygon({v2(0, 0), v2(1, 0), v2(0, 1)})}};
    std::size_t built = 0, failures = 0;
    double min_c = std::numeric_limits<double>::infinity(), worst_top = 0.0, worst_center = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
        const NormalizedBody nb = normalized(bodies[b].second);
        const MetricContext ctx = default_ctx(nb);
        const PointCloud centers = geometry::sample_candidates(nb, 5, 0.4, 600 + b);
        const PointCloud probe = geometry::sample_candidates(nb, 4000, 0.5, 700 + b);
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const int n = 32 + 16 * static_cast<int>(i % 3);
            const Vec x = centers.point(i);
            poly::FastDecreasingOptions o;
            o.policy = poly::BudgetPolicy::Report;
            o.seed = mix_seed(b, i);
            ++built;
            try {
                const poly::FastDecreasingResult r = poly::fast_decreasing_poly(ctx, x, n, o);
                const double c = poly::fit_decay_constant(ctx, r.poly, x, n, probe);
                double top = 0.0;
                for (double v : r.poly.eval_many(probe)) top = std::max(top, v);
                const double center = std::abs(r.poly.eval(x) - 1.0);
                min_c = std::min(min_c, c);
                worst_top = std::max(worst_top, top);
                worst_center = std::max(worst_center, center);
                if (!(c > 0.0) || top > 1.0 || center > 1e-6) ++failures;
            } catch (const std::exception& e) {
                ++failures;
                note("%s center %zu: %s", bodies[b].first, i, e.what());
            }
        }
    }
    note("fast-decreasing: min fitted c %.4g, max sampled P %.17g, max |P(x) - 1| %.2g", min_c, worst_top, worst_center);
    return {failures == 0 && built == 20,
            fmt("%zu polynomials, %zu failures; min fitted c %.3g (> 0), max sampled P %.6f (<= 1), |P(x)-1| %.2g (<= 1e-6)",
                built, failures, min_c, worst_top, worst_center)};
}

// ------------------------------------------------------------ criterion 7

Outcome criterion7() {
    const std::pair<const char*, ConvexBody> bodies[] = {{"disk", testutil::unit_disk()},
                                                          {"square", testutil::unit_square()},
                                                          {"7-gon", testutil::random_ngon(7, 31)}};
    std::size_t fail_sym = 0, fail_tri = 0, fail_sqrt = 0, fail_chord = 0, fail_incl = 0, fail_transfer = 0, fail_strip = 0;
    for (std::size_t b = 0; b < 3; ++b) {
        const NormalizedBody nb = normalized(bodies[b].second);
        const MetricContext ctx = default_ctx(nb);
        const MetricContext fixed(nb, DirectionSet::make(2, dubiner::default_direction_count(2)), false);
        const PointCloud pts = geometry::sample_candidates(nb, 30000, 0.5, 77 + b);
        for (std::size_t t = 0; t < 10000; ++t) {
            const Vec x = pts.point(3 * t), y = pts.point(3 * t + 1), z = pts.point(3 * t + 2);
            const double r = dubiner::rho_refined(ctx, x, y);
            if (r != dubiner::rho_refined(ctx, y, x)) ++fail_sym;
            if (dubiner::rho_lower(fixed, x, z) > dubiner::rho_lower(fixed, x, y) + dubiner::rho_lower(fixed, y, z) + 1e-12)
                ++fail_tri;
            if (r > std::sqrt((x - y).norm()) + 1e-12) ++fail_sqrt;
            if (r < (x - y).norm() / (2.0 * std::sqrt(2.0 * nb.outer_radius)) - 1e-12) ++fail_chord;
        }
        const double tau = dubiner::estimate_tau_dir(ctx, 512, 5 + b);
        double transfer_gap = -1.0;
        // Inclusion: the body scaled by 1.25 about the origin contains it.
        const MetricContext inner(nb.normalized, DirectionSet::make(2, dubiner::default_direction_count(2)));
        const MetricContext outer(nb.normalized.transformed(geometry::AffineMap(1.25 * Mat::Identity(2, 2), v2(0, 0))),
                                  DirectionSet::make(2, dubiner::default_direction_count(2)));
        for (std::size_t t = 0; t < 1000; ++t) {
            const Vec x = pts.point(t), y = pts.point(t + 5000);
            if (dubiner::rho_refined(outer, x, y) > dubiner::rho_refined(inner, x, y) * (1.0 + tau) + 1e-12) ++fail_incl;
        }
        for (std::size_t t = 0; t < 200; ++t) {
            const Vec x = pts.point(t), y = pts.point(t + 1000);
            const double a = 0.1 * static_cast<double>(t);
            Mat R(2, 2);
            R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
            const double s = 0.25 + 0.05 * static_cast<double>(t % 60);
            for (const Mat& M : {Mat(R), Mat(s * Mat::Identity(2, 2)), Mat(s * R)}) {
                const dubiner::TransferBound tb = dubiner::affine_transfer_bound(ctx, geometry::AffineMap(M, v2(0.3, -0.2)), x, y);
                if (tb.lhs > tb.rhs * (1.0 + tau) + 1e-12) ++fail_transfer;
                transfer_gap = std::max(transfer_gap, (tb.lhs - tb.rhs) / tb.rhs);
            }
        }
        note("%s: tau_dir %.3g, worst transfer excess lhs/rhs - 1 = %.3g", bodies[b].first, tau, transfer_gap);
    }
    Rng rng(12);
    for (int t = 0; t < 100000; ++t) {
        const double h = 1e-3 + rng.uniform();
        const double s = 4.0 * rng.uniform();
        const double rt = std::max(0.0, std::sqrt(s) + (2.0 * rng.uniform() - 1.0) * 2.0 * h);
        if (!dubiner::strip_shrink_check(s, rt * rt, h)) ++fail_strip;
    }
    const std::size_t total = fail_sym + fail_tri + fail_sqrt + fail_chord + fail_incl + fail_transfer + fail_strip;
    return {total == 0, fmt("violations: symmetry %zu, triangle %zu, sqrt bound %zu, chord bound %zu, inclusion %zu, "
                            "transfer %zu, strip %zu (3 bodies x 10^4 triples; 10^5 strip triples)",
                            fail_sym, fail_tri, fail_sqrt, fail_chord, fail_incl, fail_transfer, fail_strip)};
}

// ------------------------------------------------------------ criterion 8

Outcome criterion8() {
    const auto hept = testutil::random_ngon_vertices(7, 8888);
    const std::vector<Vec> square = {v2(-1, -1), v2(1, -1), v2(1, 1), v2(-1, 1)};
    const std::tuple<const char*, ConvexBody, testutil::PlanarOracle> bodies[] = {
        {"disk", testutil::unit_disk(), testutil::PlanarOracle::disk(0, 0, 1)},
        {"square", testutil::unit_square(), testutil::PlanarOracle::hull(square)},
        {"7-gon", ConvexBody::polygon(hept), testutil::PlanarOracle::hull(hept)}};
    double worst_metric = 0.0;
    for (const auto& [name, body, oracle] : bodies) {
        const MetricContext ctx(body, DirectionSet::make(dubiner::Generator::AngularGrid, 2, 64, 0, 8, 0.5));
        const PointCloud pts = geometry::sample_candidates(body, body.interior_point(), body.bounding_radius(body.interior_point()),
                                                           200, 0.5, 1234);
        double worst = 0.0;
        for (std::size_t t = 0; t < 100; ++t) {
            const Vec x = pts.point(2 * t), y = pts.point(2 * t + 1);
            const double fine = testutil::brute_rho(oracle, x, y);
            const double ours = dubiner::rho_refined(ctx, x, y, 8);
            worst = std::max(worst, std::abs(ours - fine) / fine);
        }
        note("%s: rho_refined (64 directions, 8 rounds) vs 2^20 grid, max relative error %.3g", name, worst);
        worst_metric = std::max(worst_metric, worst);
    }

    double worst_eval = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int n = 2 + static_cast<int>(seed % 11);
        const poly::DensePoly d = poly::random_poly(2, n, seed, 2.0);
        const poly::PolyExpr e = d.to_expr();
        Rng rng(seed);
        for (int t = 0; t < 500; ++t) {
            const Vec z = rng.in_ball(2, 2.0);
            const double a = d.eval(z), b = e.eval(z);
            worst_eval = std::max(worst_eval, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
    }
    note("dense vs expression evaluation: max relative difference %.3g", worst_eval);

    std::mt19937_64 rng(808);
    std::size_t degree_mismatch = 0, trees = 0;
    for (int n = 1; n <= 12; ++n)
        for (int t = 0; t < 20; ++t) {
            const poly::PolyExpr p = testutil::random_tree(rng, n);
            if (p.degree() > 12) continue;
            ++trees;
            if (poly::structural_degree(p) != testutil::mono_degree(testutil::mono_expand(p))) ++degree_mismatch;
        }
    return {worst_metric <= 1e-4 && worst_eval <= 1e-10 && degree_mismatch == 0,
            fmt("metric vs 2^20 grid max rel error %.3g (tol 1e-4); dense vs expression %.3g (tol 1e-10); "
                "structural degree mismatches %zu of %zu trees (n <= 12)",
                worst_metric, worst_eval, degree_mismatch, trees)};
}

// ------------------------------------------------------------ criterion 9

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion9() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("polymesh-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_json_atomic((dir / "disk.json").string(), geometry::body_to_json(testutil::unit_disk()));
    const std::vector<std::string> args = {"--log-level", "error", "pipeline", "--body", (dir / "disk.json").string(),
                                           "--n", "8", "--seed", "7", "--verify-seed", "1", "--out-dir", (dir / "out").string()};
    const char* files[] = {"normalized.json", "mesh.json", "report.json", "manifest.json"};
    std::vector<std::string> first;
    const int rc1 = cli::run(args);
    for (const char* f : files) first.push_back(slurp(dir / "out" / f));
    const int rc2 = cli::run(args);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < 4; ++i)
        if (first[i].empty() || first[i] != slurp(dir / "out" / files[i])) ++differ;
    fs::remove_all(dir);
    return {rc1 == 0 && rc2 == 0 && differ == 0,
            fmt("two pipeline runs (disk, n = 8, fixed seeds): exit codes %d/%d, %zu of 4 artifacts differ", rc1, rc2, differ)};
}

}  // namespace

// Arguments, if any, select criteria by number; the default runs all nine.
int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    const std::pair<int, std::function<Outcome()>> criteria[] = {
        {1, [] { run_meshes(); return criterion1(); }},
        {2, criterion2},
        {3, criterion3},
        {4, criterion4},
        {5, criterion5},
        {6, criterion6},
        {7, criterion7},
        {8, criterion8},
        {9, criterion9},
    };
    int failed = 0;
    for (const auto& [id, fn] : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
        std::fprintf(stderr, "criterion %d\n", id);
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        note("%.1f s", seconds_since(t0));
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.summary.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
