#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "polymesh/body_io.hpp"
#include "polymesh/dubiner.hpp"
#include "polymesh/error.hpp"
#include "polymesh/geometry.hpp"
#include "polymesh/json_util.hpp"
#include "polymesh/mesh.hpp"
#include "polymesh/parallel.hpp"
#include "polymesh/poly.hpp"
#include "polymesh/verify.hpp"

namespace polymesh::cli {

namespace fs = std::filesystem;
using dubiner::DirectionSet;
using dubiner::MetricContext;
using geometry::ConvexBody;
using geometry::NormalizedBody;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const CLI::Error*>(&e)) return kParse;
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const MalformedBody*>(&e) ||
        dynamic_cast<const InputError*>(&e) || dynamic_cast<const FingerprintMismatch*>(&e))
        return kParse;
    if (dynamic_cast<const FlatnessError*>(&e) || dynamic_cast<const NormalizationFailed*>(&e)) return kNormalize;
    if (dynamic_cast<const MeshQualityError*>(&e) || dynamic_cast<const SeparationError*>(&e) ||
        dynamic_cast<const BudgetExceeded*>(&e))
        return kMesh;
    return kInternal;
}

namespace {

// ---------------------------------------------------------------- logging

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };
Level g_level = Level::Info;

void log(Level level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= g_level) std::cerr << "[polymesh " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

Level level_from_name(const std::string& s) {
    if (s == "error") return Level::Error;
    if (s == "warn") return Level::Warn;
    if (s == "info") return Level::Info;
    if (s == "debug") return Level::Debug;
    throw InputError("unknown log level '" + s + "'");
}

// ---------------------------------------------------------------- shared flags

struct MetricFlags {
    std::size_t directions = 0;  // 0: dimension default
    int rounds = 6;
    double factor = 0.5;
    std::uint64_t dir_seed = 0x5eed;
    bool no_chord = false;
};

struct NormFlags {
    int samples = 0;  // 0: dimension default
    double tol = 1e-7;
    double tau = geometry::kDefaultTauNorm;
};

void add_metric_flags(CLI::App* app, MetricFlags& m) {
    app->add_option("--directions", m.directions, "Base direction count (0: default for the dimension)");
    app->add_option("--rounds", m.rounds, "Local refinement rounds")->check(CLI::NonNegativeNumber);
    app->add_option("--refine-factor", m.factor, "Step shrink factor per refinement round");
    app->add_option("--direction-seed", m.dir_seed, "Seed of random direction sets (d >= 4)");
    app->add_flag("--no-chord", m.no_chord, "Omit the chord directions from the max");
}

void add_norm_flags(CLI::App* app, NormFlags& n) {
    app->add_option("--support-samples", n.samples, "Support points for the enclosing ellipsoid (0: default)");
    app->add_option("--norm-tol", n.tol, "Ellipsoid solver tolerance");
    app->add_option("--tau-norm", n.tau, "Allowed slack on the normalization radii");
}

DirectionSet make_dirs(int d, const MetricFlags& m) {
    const std::size_t count = m.directions > 0 ? m.directions : dubiner::default_direction_count(d);
    return DirectionSet::make(d, count, m.dir_seed, m.rounds, m.factor);
}

DirectionSet dirs_from_json(int d, const json& j) {
    const std::string g = j.at("generator").get<std::string>();
    dubiner::Generator gen = dubiner::Generator::RandomUniform;
    if (g == "axis") gen = dubiner::Generator::Axis;
    else if (g == "angular-grid") gen = dubiner::Generator::AngularGrid;
    else if (g == "fibonacci-sphere") gen = dubiner::Generator::FibonacciSphere;
    else if (g != "random-uniform") throw ParseError("unknown direction generator '" + g + "'");
    return DirectionSet::make(gen, d, j.at("count").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                              j.at("refinement_rounds").get<int>(), j.at("refinement_factor").get<double>());
}

json metric_config(const DirectionSet& ds, bool chord) {
    return {{"generator", dubiner::generator_name(ds.generator)},
            {"count", ds.count},
            {"seed", ds.seed},
            {"refinement_rounds", ds.refinement_rounds},
            {"refinement_factor", ds.refinement_factor},
            {"include_chord", chord}};
}

json norm_config(const NormFlags& n, int d) {
    return {{"support_samples", n.samples > 0 ? n.samples : geometry::default_support_samples(d)},
            {"tol", n.tol},
            {"tau_norm", n.tau}};
}

NormalizedBody normalize(const ConvexBody& body, const NormFlags& n) {
    const int samples = n.samples > 0 ? n.samples : geometry::default_support_samples(body.dim());
    return geometry::john_normalize(body, samples, n.tol, n.tau);
}

// ---------------------------------------------------------------- io helpers

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("POLYMESH_SEED");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(s, &used, 0);
        if (used != std::string(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(std::string("POLYMESH_SEED is not an unsigned integer: '") + s + "'");
    }
}

void apply_env_seed(std::uint64_t& seed) {
    if (const auto s = env_seed()) seed = *s;
}

std::vector<double> parse_csv_row(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used != cell.size()) throw std::invalid_argument(cell);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InputError(what + ": '" + cell + "' is not a number");
        }
    }
    return out;
}

Vec parse_point(const std::string& text, int d, const std::string& what) {
    const std::vector<double> v = parse_csv_row(text, what);
    if (static_cast<int>(v.size()) != d)
        throw InputError(what + " has " + std::to_string(v.size()) + " coordinates, expected " + std::to_string(d));
    return Eigen::Map<const Vec>(v.data(), d);
}

PointCloud read_points_file(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open points file '" + path + "'");
    PointCloud out(d);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back(parse_point(line, d, path + ":" + std::to_string(row)));
    }
    return out;
}

// Shortest decimal that round-trips.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return json(v).dump();
}

void write_manifest(const std::string& out, const std::string& command, const json& config, const json& inputs) {
    const json m = {{"tool", kVersion}, {"command", command}, {"config", config}, {"inputs", inputs}, {"output", out}};
    write_json_atomic(out + ".manifest.json", m);
}

void emit(const std::string& out, const json& j) {
    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json_atomic(out, j);
    }
}

json normalized_body_json(const NormalizedBody& nb) {
    return {{"kind", "normalized-body"},
            {"body_fingerprint", geometry::body_fingerprint(nb.body)},
            {"body", geometry::body_to_json(nb.body)},
            {"to_normalized", geometry::affine_to_json(nb.to_normalized)},
            {"from_normalized", geometry::affine_to_json(nb.from_normalized)},
            {"inner_radius", nb.inner_radius},
            {"outer_radius", nb.outer_radius},
            {"tau_norm", nb.tau_norm}};
}

json mesh_spec_config(const mesh::MeshSpec& s) {
    return {{"n", s.n},
            {"c_mesh", s.c_mesh},
            {"pool_size", s.pool_size},
            {"boundary_fraction", s.boundary_fraction},
            {"seed", s.seed},
            {"mode", mesh::mode_name(s.mode)},
            {"eta", s.eta}};
}

// Context for a stored mesh: same body normalization and direction set.
MetricContext context_for_mesh(const NormalizedBody& nb, const json& mesh_json) {
    const json& dj = mesh_json.at("directions");
    const DirectionSet ds = dirs_from_json(nb.dim(), dj);
    const bool chord = dj.value("include_chord", true);
    if (mesh_json.value("frame", "normalized") == "original") return MetricContext(nb.body, ds, chord);
    return MetricContext(nb, ds, chord);
}

// ---------------------------------------------------------------- commands

struct NormalizeCmd {
    std::string body, out;
    NormFlags norm;

    int run() const {
        const ConvexBody b = geometry::load_body(body);
        const NormalizedBody nb = normalize(b, norm);
        log(Level::Info, "normalized: inner radius " + num(nb.inner_radius) + ", outer radius " + num(nb.outer_radius));
        emit(out, normalized_body_json(nb));
        if (!out.empty()) write_manifest(out, "normalize", {{"normalization", norm_config(norm, b.dim())}}, {{"body", body}});
        return kOk;
    }
};

struct MetricCmd {
    std::string body, x, y, out;
    bool normalized = false;
    MetricFlags metric;

    int run() const {
        const ConvexBody b = geometry::load_body(body);
        const int d = b.dim();
        Vec px = parse_point(x, d, "--x"), py = parse_point(y, d, "--y");
        const DirectionSet ds = make_dirs(d, metric);
        std::optional<MetricContext> ctx;
        if (normalized) {
            const NormalizedBody nb = normalize(b, NormFlags{});
            px = nb.to_normalized.apply(px);
            py = nb.to_normalized.apply(py);
            ctx.emplace(nb, ds, !metric.no_chord);
        } else {
            ctx.emplace(b, ds, !metric.no_chord);
        }
        const dubiner::RhoValue lo = dubiner::rho_lower_argmax(*ctx, px, py);
        const dubiner::RhoValue re = dubiner::rho_refined_argmax(*ctx, px, py, ds.refinement_rounds);
        const json j = {{"kind", "metric"},
                        {"frame", normalized ? "normalized" : "original"},
                        {"x", to_json_vec(px)},
                        {"y", to_json_vec(py)},
                        {"rho_lower", lo.value},
                        {"rho_refined", re.value},
                        {"direction", to_json_vec(re.direction)},
                        {"euclidean", (px - py).norm()},
                        {"directions", metric_config(ds, !metric.no_chord)}};
        emit(out, j);
        if (!out.empty())
            write_manifest(out, "metric", {{"x", x}, {"y", y}, {"normalized", normalized}, {"directions", metric_config(ds, !metric.no_chord)}},
                           {{"body", body}});
        return kOk;
    }
};

struct MeshCmd {
    std::string body, out, mode = "maximal";
    mesh::MeshSpec spec;
    double c_mesh = 0.0;  // 0: dimension default
    NormFlags norm;
    MetricFlags metric;

    int run() {
        apply_env_seed(spec.seed);
        const ConvexBody b = geometry::load_body(body);
        const NormalizedBody nb = normalize(b, norm);
        const DirectionSet ds = make_dirs(b.dim(), metric);
        const MetricContext ctx(nb, ds, !metric.no_chord);
        spec.mode = mesh::mode_from_name(mode);
        spec.c_mesh = c_mesh > 0.0 ? c_mesh : mesh::default_c_mesh(b.dim());
        const mesh::Mesh m = mesh::build_mesh(ctx, spec);
        log(Level::Info, "mesh: N = " + std::to_string(m.size()) + ", separation " + num(m.certificates.separation) +
                             ", covering " + num(m.certificates.covering) + ", epsilon " + num(spec.epsilon()));
        write_json_atomic(out, mesh::mesh_to_json(m, ctx));
        write_manifest(out, "mesh",
                       {{"spec", mesh_spec_config(spec)},
                        {"normalization", norm_config(norm, b.dim())},
                        {"directions", metric_config(ds, !metric.no_chord)}},
                       {{"body", body}, {"body_fingerprint", ctx.fingerprint()}});
        return kOk;
    }
};

struct FastPolyCmd {
    std::string body, x, out, policy = "strict";
    int n = 0;
    poly::FastDecreasingOptions options;
    NormFlags norm;
    MetricFlags metric;

    int run() {
        apply_env_seed(options.seed);
        const ConvexBody b = geometry::load_body(body);
        const NormalizedBody nb = normalize(b, norm);
        const DirectionSet ds = make_dirs(b.dim(), metric);
        const MetricContext ctx(nb, ds, !metric.no_chord);
        if (policy == "strict") options.policy = poly::BudgetPolicy::Strict;
        else if (policy == "truncate") options.policy = poly::BudgetPolicy::Truncate;
        else if (policy == "report") options.policy = poly::BudgetPolicy::Report;
        else throw InputError("unknown budget policy '" + policy + "'");
        const Vec center = parse_point(x, b.dim(), "--x");
        const poly::FastDecreasingResult r = poly::fast_decreasing_poly(ctx, nb.to_normalized.apply(center), n, options);
        // Stored in the body's own coordinates: P(T z) with T the normalization.
        const poly::PolyExpr p = r.poly.compose_affine(nb.to_normalized.matrix(), nb.to_normalized.shift());
        log(Level::Info, "fast-decreasing polynomial: degree " + std::to_string(r.degree) + " (full " +
                             std::to_string(r.full_degree) + "), " + std::to_string(r.factors_kept) + " of " +
                             std::to_string(r.factors_total) + " factors");
        json j = poly::poly_to_json(p);
        json sizes = r.annulus_sizes;
        j["construction"] = {{"center", to_json_vec(center)}, {"n", n},          {"alpha", options.alpha},
                             {"L", options.L},               {"annuli", r.annuli}, {"annulus_sizes", sizes},
                             {"full_degree", r.full_degree}, {"factors_kept", r.factors_kept},
                             {"factors_total", r.factors_total}, {"policy", policy}};
        write_json_atomic(out, j);
        write_manifest(out, "fastpoly",
                       {{"x", x},
                        {"n", n},
                        {"alpha", options.alpha},
                        {"L", options.L},
                        {"policy", policy},
                        {"pool_size", options.pool_size},
                        {"seed", options.seed},
                        {"normalization", norm_config(norm, b.dim())},
                        {"directions", metric_config(ds, !metric.no_chord)}},
                       {{"body", body}, {"body_fingerprint", ctx.fingerprint()}});
        return kOk;
    }
};

struct PolyEvalCmd {
    std::string poly_path, points;

    int run() const {
        const poly::PolyExpr p = poly::load_poly(poly_path);
        const PointCloud pts = read_points_file(points, p.dim());
        const std::vector<double> v = p.eval_many(pts);
        for (double x : v) std::cout << num(x) << '\n';
        return kOk;
    }
};

struct VerifyCmd {
    std::string body, mesh_path, out;
    int n = -1;
    std::size_t trials = 200;
    double target = 2.0;
    std::uint64_t seed = 1;
    NormFlags norm;

    int run() {
        apply_env_seed(seed);
        const ConvexBody b = geometry::load_body(body);
        const NormalizedBody nb = normalize(b, norm);
        const json mj = read_json_file(mesh_path);
        const mesh::Mesh m = mesh::mesh_from_json(mj);
        const MetricContext ctx = context_for_mesh(nb, mj);
        if (n < 0) n = m.spec.n;
        auto [ok, report] = verify::certify(ctx, m, target, n, trials, seed);
        json j = verify::norming_to_json(report);
        j["target"] = target;
        j["passed"] = ok;
        write_json_atomic(out, j);
        write_manifest(out, "verify", {{"n", n}, {"trials", trials}, {"target", target}, {"seed", seed},
                                       {"normalization", norm_config(norm, b.dim())}},
                       {{"body", body}, {"mesh", mesh_path}, {"body_fingerprint", ctx.fingerprint()}});
        log(ok ? Level::Info : Level::Warn,
            std::string("certification ") + (ok ? "passed" : "failed") + ": ensemble max " +
                num(report.ensemble_max_ratio) + ", adversarial max " + num(report.adversarial_max_ratio) +
                ", target " + num(target));
        return ok ? kOk : kVerifyFail;
    }
};

struct DoublingCmd {
    std::string body, center, out;
    double h = 0.0;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    bool normalized = false;
    MetricFlags metric;

    int run() {
        apply_env_seed(seed);
        const ConvexBody b = geometry::load_body(body);
        const DirectionSet ds = make_dirs(b.dim(), metric);
        Vec c = parse_point(center, b.dim(), "--center");
        std::optional<MetricContext> ctx;
        if (normalized) {
            const NormalizedBody nb = normalize(b, NormFlags{});
            c = nb.to_normalized.apply(c);
            ctx.emplace(nb, ds, !metric.no_chord);
        } else {
            ctx.emplace(b, ds, !metric.no_chord);
        }
        const dubiner::DoublingResult r = dubiner::doubling_ratio(*ctx, c, h, samples, seed);
        const double bound = std::pow(4.0, b.dim());
        const json j = {{"kind", "doubling"},
                        {"frame", normalized ? "normalized" : "original"},
                        {"center", to_json_vec(c)},
                        {"h", h},
                        {"ratio", r.ratio},
                        {"stderr", r.stderr_estimate},
                        {"hits_h", r.hits_h},
                        {"hits_2h", r.hits_2h},
                        {"samples", r.samples},
                        {"bound", bound},
                        {"within_bound", r.ratio <= bound + 3.0 * r.stderr_estimate}};
        emit(out, j);
        if (!out.empty())
            write_manifest(out, "doubling",
                           {{"center", center}, {"h", h}, {"samples", samples}, {"seed", seed}, {"normalized", normalized},
                            {"directions", metric_config(ds, !metric.no_chord)}},
                           {{"body", body}});
        return kOk;
    }
};

struct ScanCmd {
    std::string body, degrees = "4,8,16", out;
    double c_mesh = 0.0;
    std::uint64_t seed = 7;
    NormFlags norm;
    MetricFlags metric;

    int run() {
        apply_env_seed(seed);
        const ConvexBody b = geometry::load_body(body);
        const NormalizedBody nb = normalize(b, norm);
        const DirectionSet ds = make_dirs(b.dim(), metric);
        const MetricContext ctx(nb, ds, !metric.no_chord);
        std::vector<int> ns;
        for (double v : parse_csv_row(degrees, "--degrees")) {
            if (v != std::floor(v)) throw InputError("--degrees must be integers");
            ns.push_back(static_cast<int>(v));
        }
        const double c = c_mesh > 0.0 ? c_mesh : mesh::default_c_mesh(b.dim());
        const auto rows = mesh::mesh_cardinality_scan(ctx, ns, c, seed);
        json jr = json::array();
        double lo = 1e300, hi = 0.0;
        for (const auto& r : rows) {
            jr.push_back({{"n", r.n}, {"N", r.N}, {"N_over_n_d", r.normalized}, {"pool_size", r.pool_size}});
            lo = std::min(lo, r.normalized);
            hi = std::max(hi, r.normalized);
            log(Level::Info, "n = " + std::to_string(r.n) + ": N = " + std::to_string(r.N) + ", N/n^d = " + num(r.normalized));
        }
        const json j = {{"kind", "cardinality-scan"},
                        {"body_fingerprint", ctx.fingerprint()},
                        {"c_mesh", c},
                        {"seed", seed},
                        {"rows", jr},
                        {"spread", hi / lo}};
        emit(out, j);
        if (!out.empty())
            write_manifest(out, "scan",
                           {{"degrees", degrees}, {"c_mesh", c}, {"seed", seed},
                            {"normalization", norm_config(norm, b.dim())}, {"directions", metric_config(ds, !metric.no_chord)}},
                           {{"body", body}});
        return kOk;
    }
};

struct ExportCmd {
    std::string in, out, body;
    NormFlags norm;

    int run() const {
        const json j = read_json_file(in);
        std::ostringstream csv;
        if (j.value("kind", "") == "norming-report") {
            const verify::NormingReport r = verify::norming_from_json(j);
            csv << "# columns: trial (random_poly seed index), ratio (pool sup / mesh max)\n";
            csv << "trial,ratio\n";
            for (std::size_t i = 0; i < r.trial_ratios.size(); ++i) csv << i << ',' << num(r.trial_ratios[i]) << '\n';
        } else if (j.contains("points") && j.contains("certificates")) {
            if (body.empty()) throw InputError("exporting a mesh needs --body to evaluate the metric");
            const mesh::Mesh m = mesh::mesh_from_json(j);
            const NormalizedBody nb = normalize(geometry::load_body(body), norm);
            const MetricContext ctx = context_for_mesh(nb, j);
            if (ctx.fingerprint() != m.body_fingerprint) throw FingerprintMismatch("mesh was built on another body");
            const std::vector<double> nn = mesh::nearest_neighbor_refined(ctx, m.points);
            const int d = m.points.dim();
            csv << "# columns: x1..x" << d
                << " (mesh frame), nn_rho (min rho_refined to another mesh point), nn_euclid (min Euclidean distance "
                   "to another mesh point), radius (Euclidean norm)\n";
            for (int i = 0; i < d; ++i) csv << 'x' << (i + 1) << ',';
            csv << "nn_rho,nn_euclid,radius\n";
            for (std::size_t i = 0; i < m.size(); ++i) {
                double ne = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < m.size(); ++k)
                    if (k != i) ne = std::min(ne, (m.points.point(i) - m.points.point(k)).norm());
                for (int c = 0; c < d; ++c) csv << num(m.points[i][static_cast<std::size_t>(c)]) << ',';
                csv << num(nn[i]) << ',' << num(ne) << ',' << num(m.points.point(i).norm()) << '\n';
            }
        } else {
            throw ParseError("unknown artifact type in '" + in + "'");
        }
        write_text_atomic(out, csv.str());
        return kOk;
    }
};

// Full run: normalize -> mesh -> verify.
struct PipelineCmd {
    std::string config, body, out_dir = "polymesh-out", mode = "maximal";
    mesh::MeshSpec spec;
    double c_mesh = 0.0;
    std::size_t trials = 200;
    double target = 2.0;
    std::uint64_t verify_seed = 1;
    NormFlags norm;
    MetricFlags metric;

    void load_config(const CLI::App& app) {
        const json j = read_json_file(config);
        if (!j.is_object()) throw ParseError("pipeline config must be a JSON object");
        auto take = [&](const char* key, const char* flag, auto& field) {
            if (j.contains(key) && app.count(flag) == 0) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        try {
            take("body", "--body", body);
            take("out_dir", "--out-dir", out_dir);
            take("n", "--n", spec.n);
            take("c_mesh", "--c", c_mesh);
            take("mode", "--mode", mode);
            take("eta", "--eta", spec.eta);
            take("pool", "--pool", spec.pool_size);
            take("boundary_fraction", "--boundary-fraction", spec.boundary_fraction);
            take("seed", "--seed", spec.seed);
            take("trials", "--trials", trials);
            take("target", "--target", target);
            take("verify_seed", "--verify-seed", verify_seed);
            take("directions", "--directions", metric.directions);
            take("rounds", "--rounds", metric.rounds);
            take("support_samples", "--support-samples", norm.samples);
        } catch (const json::exception& e) {
            throw ParseError(std::string("pipeline config: ") + e.what());
        }
    }

    int run(const CLI::App& app) {
        if (!config.empty()) load_config(app);
        if (body.empty()) throw InputError("pipeline needs a body (--body or \"body\" in the config)");
        apply_env_seed(spec.seed);
        apply_env_seed(verify_seed);
        const ConvexBody b = geometry::load_body(body);
        const int d = b.dim();
        spec.mode = mesh::mode_from_name(mode);
        spec.c_mesh = c_mesh > 0.0 ? c_mesh : mesh::default_c_mesh(d);
        spec.validate();

        const NormalizedBody nb = normalize(b, norm);
        fs::create_directories(out_dir);
        const std::string norm_path = (fs::path(out_dir) / "normalized.json").string();
        const std::string mesh_path = (fs::path(out_dir) / "mesh.json").string();
        const std::string report_path = (fs::path(out_dir) / "report.json").string();
        write_json_atomic(norm_path, normalized_body_json(nb));
        log(Level::Info, "normalized body written to " + norm_path);

        const DirectionSet ds = make_dirs(d, metric);
        const MetricContext ctx(nb, ds, !metric.no_chord);
        const mesh::Mesh m = mesh::build_mesh(ctx, spec);
        write_json_atomic(mesh_path, mesh::mesh_to_json(m, ctx));
        log(Level::Info, "mesh with " + std::to_string(m.size()) + " points written to " + mesh_path);

        auto [ok, report] = verify::certify(ctx, m, target, spec.n, trials, verify_seed);
        json rj = verify::norming_to_json(report);
        rj["target"] = target;
        rj["passed"] = ok;
        write_json_atomic(report_path, rj);
        log(ok ? Level::Info : Level::Warn, std::string("certification ") + (ok ? "passed" : "failed") +
                                                ": ensemble max " + num(report.ensemble_max_ratio) +
                                                ", adversarial max " + num(report.adversarial_max_ratio));

        const json manifest = {{"tool", kVersion},
                               {"command", "pipeline"},
                               {"config",
                                {{"body", body},
                                 {"out_dir", out_dir},
                                 {"spec", mesh_spec_config(spec)},
                                 {"trials", trials},
                                 {"target", target},
                                 {"verify_seed", verify_seed},
                                 {"normalization", norm_config(norm, d)},
                                 {"directions", metric_config(ds, !metric.no_chord)}}},
                               {"inputs", {{"body", body}, {"body_fingerprint", ctx.fingerprint()}}},
                               {"artifacts", {norm_path, mesh_path, report_path}},
                               {"passed", ok}};
        write_json_atomic((fs::path(out_dir) / "manifest.json").string(), manifest);
        return ok ? kOk : kVerifyFail;
    }
};

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Polynomial meshes on convex bodies via the Dubiner metric"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    unsigned jobs = 0;
    std::string level = "info";
    app.add_option("--jobs,-j", jobs, "Worker threads (0: all cores)");
    app.add_option("--log-level", level, "error | warn | info | debug");

    NormalizeCmd normalize_cmd;
    auto* c_norm = app.add_subcommand("normalize", "Affine normalization of a body");
    c_norm->add_option("--body", normalize_cmd.body, "Body file")->required();
    c_norm->add_option("--out", normalize_cmd.out, "Output file (stdout if omitted)");
    add_norm_flags(c_norm, normalize_cmd.norm);

    MetricCmd metric_cmd;
    auto* c_metric = app.add_subcommand("metric", "Evaluate rho between two points");
    c_metric->add_option("--body", metric_cmd.body, "Body file")->required();
    c_metric->add_option("--x", metric_cmd.x, "First point, comma separated")->required();
    c_metric->add_option("--y", metric_cmd.y, "Second point, comma separated")->required();
    c_metric->add_flag("--normalized", metric_cmd.normalized, "Evaluate on the normalized body (points are mapped)");
    c_metric->add_option("--out", metric_cmd.out, "Output file (stdout if omitted)");
    add_metric_flags(c_metric, metric_cmd.metric);

    MeshCmd mesh_cmd;
    auto* c_mesh = app.add_subcommand("mesh", "Build a polynomial mesh");
    c_mesh->add_option("--body", mesh_cmd.body, "Body file")->required();
    c_mesh->add_option("--n", mesh_cmd.spec.n, "Polynomial degree")->required()->check(CLI::PositiveNumber);
    c_mesh->add_option("--c", mesh_cmd.c_mesh, "Mesh constant; epsilon = c / n (0: dimension default)");
    c_mesh->add_option("--mode", mesh_cmd.mode, "maximal | covering");
    c_mesh->add_option("--eta", mesh_cmd.spec.eta, "Separation floor in covering mode (0: epsilon / 4)");
    c_mesh->add_option("--pool", mesh_cmd.spec.pool_size, "Candidate pool size (0: automatic)");
    c_mesh->add_option("--boundary-fraction", mesh_cmd.spec.boundary_fraction, "Boundary-clustered share of the pool");
    c_mesh->add_option("--seed", mesh_cmd.spec.seed, "Pool seed");
    c_mesh->add_option("--out", mesh_cmd.out, "Mesh file")->required();
    add_norm_flags(c_mesh, mesh_cmd.norm);
    add_metric_flags(c_mesh, mesh_cmd.metric);

    FastPolyCmd fast_cmd;
    auto* c_fast = app.add_subcommand("fastpoly", "Build a fast-decreasing polynomial");
    c_fast->add_option("--body", fast_cmd.body, "Body file")->required();
    c_fast->add_option("--x", fast_cmd.x, "Center point, comma separated")->required();
    c_fast->add_option("--n", fast_cmd.n, "Degree")->required();
    c_fast->add_option("--alpha", fast_cmd.options.alpha, "Annulus separation factor in (0, 1)");
    c_fast->add_option("--L", fast_cmd.options.L, "Degree divisor, n1 = n / L");
    c_fast->add_option("--policy", fast_cmd.policy, "strict | truncate | report");
    c_fast->add_option("--pool", fast_cmd.options.pool_size, "Annulus candidate pool size");
    c_fast->add_option("--seed", fast_cmd.options.seed, "Pool seed");
    c_fast->add_option("--out", fast_cmd.out, "Polynomial file")->required();
    add_norm_flags(c_fast, fast_cmd.norm);
    add_metric_flags(c_fast, fast_cmd.metric);

    PolyEvalCmd eval_cmd;
    auto* c_eval = app.add_subcommand("polyeval", "Evaluate a stored polynomial at points");
    c_eval->add_option("--poly", eval_cmd.poly_path, "Polynomial file")->required();
    c_eval->add_option("--points", eval_cmd.points, "CSV file, one point per line")->required();

    VerifyCmd verify_cmd;
    auto* c_verify = app.add_subcommand("verify", "Estimate the norming constant of a mesh");
    c_verify->add_option("--body", verify_cmd.body, "Body file")->required();
    c_verify->add_option("--mesh", verify_cmd.mesh_path, "Mesh file")->required();
    c_verify->add_option("--n", verify_cmd.n, "Degree (default: the mesh's)");
    c_verify->add_option("--trials", verify_cmd.trials, "Random polynomials");
    c_verify->add_option("--target", verify_cmd.target, "Norming constant to certify");
    c_verify->add_option("--seed", verify_cmd.seed, "Trial seed");
    c_verify->add_option("--out", verify_cmd.out, "Report file")->required();
    add_norm_flags(c_verify, verify_cmd.norm);

    DoublingCmd doubling_cmd;
    auto* c_doub = app.add_subcommand("doubling", "Monte Carlo doubling ratio of rho-balls");
    c_doub->add_option("--body", doubling_cmd.body, "Body file")->required();
    c_doub->add_option("--center", doubling_cmd.center, "Ball center, comma separated")->required();
    c_doub->add_option("--radius", doubling_cmd.h, "Ball radius h")->required();
    c_doub->add_option("--samples", doubling_cmd.samples, "Uniform samples");
    c_doub->add_option("--seed", doubling_cmd.seed, "Sample seed");
    c_doub->add_flag("--normalized", doubling_cmd.normalized, "Work on the normalized body (center is mapped)");
    c_doub->add_option("--out", doubling_cmd.out, "Output file (stdout if omitted)");
    add_metric_flags(c_doub, doubling_cmd.metric);

    ScanCmd scan_cmd;
    auto* c_scan = app.add_subcommand("scan", "Mesh cardinality against degree");
    c_scan->add_option("--body", scan_cmd.body, "Body file")->required();
    c_scan->add_option("--degrees", scan_cmd.degrees, "Ascending degrees, comma separated");
    c_scan->add_option("--c", scan_cmd.c_mesh, "Mesh constant (0: dimension default)");
    c_scan->add_option("--seed", scan_cmd.seed, "Pool seed");
    c_scan->add_option("--out", scan_cmd.out, "Output file (stdout if omitted)");
    add_norm_flags(c_scan, scan_cmd.norm);
    add_metric_flags(c_scan, scan_cmd.metric);

    ExportCmd export_cmd;
    auto* c_export = app.add_subcommand("export", "Plot data (CSV) from a mesh or report");
    c_export->add_option("--in", export_cmd.in, "Mesh or report file")->required();
    c_export->add_option("--out", export_cmd.out, "CSV file")->required();
    c_export->add_option("--body", export_cmd.body, "Body file (needed for meshes)");
    add_norm_flags(c_export, export_cmd.norm);

    PipelineCmd pipe_cmd;
    auto* c_pipe = app.add_subcommand("pipeline", "normalize, mesh and verify in one run");
    c_pipe->add_option("--config", pipe_cmd.config, "JSON run configuration; flags override it");
    c_pipe->add_option("--body", pipe_cmd.body, "Body file");
    c_pipe->add_option("--out-dir", pipe_cmd.out_dir, "Artifact directory");
    c_pipe->add_option("--n", pipe_cmd.spec.n, "Polynomial degree");
    c_pipe->add_option("--c", pipe_cmd.c_mesh, "Mesh constant (0: dimension default)");
    c_pipe->add_option("--mode", pipe_cmd.mode, "maximal | covering");
    c_pipe->add_option("--eta", pipe_cmd.spec.eta, "Separation floor in covering mode");
    c_pipe->add_option("--pool", pipe_cmd.spec.pool_size, "Candidate pool size (0: automatic)");
    c_pipe->add_option("--boundary-fraction", pipe_cmd.spec.boundary_fraction, "Boundary-clustered share of the pool");
    c_pipe->add_option("--seed", pipe_cmd.spec.seed, "Pool seed");
    c_pipe->add_option("--trials", pipe_cmd.trials, "Random polynomials");
    c_pipe->add_option("--target", pipe_cmd.target, "Norming constant to certify");
    c_pipe->add_option("--verify-seed", pipe_cmd.verify_seed, "Trial seed");
    add_norm_flags(c_pipe, pipe_cmd.norm);
    add_metric_flags(c_pipe, pipe_cmd.metric);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParse;
    }

    g_level = level_from_name(level);
    set_worker_count(jobs);

    if (c_norm->parsed()) return normalize_cmd.run();
    if (c_metric->parsed()) return metric_cmd.run();
    if (c_mesh->parsed()) return mesh_cmd.run();
    if (c_fast->parsed()) return fast_cmd.run();
    if (c_eval->parsed()) return eval_cmd.run();
    if (c_verify->parsed()) return verify_cmd.run();
    if (c_doub->parsed()) return doubling_cmd.run();
    if (c_scan->parsed()) return scan_cmd.run();
    if (c_export->parsed()) return export_cmd.run();
    if (c_pipe->parsed()) return pipe_cmd.run(*c_pipe);
    return kParse;
}

}  // namespace

int run(int argc, const char* const* argv) {
    try {
        return dispatch(argc, argv);
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        log(Level::Error, e.what());
        return code;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"polymesh"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace polymesh::cli
