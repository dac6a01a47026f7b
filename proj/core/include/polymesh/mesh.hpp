#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polymesh/dubiner.hpp"
#include "polymesh/json_util.hpp"
#include "polymesh/types.hpp"

namespace polymesh::mesh {

enum class Mode { MaximalSeparated, CoveringOnly };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

// 0.5 in the plane, 0.25 in higher dimensions.
double default_c_mesh(int dim);

struct MeshSpec {
    int n = 8;
    double c_mesh = 0.5;
    std::size_t pool_size = 0;  // 0: choose from n, d and c_mesh
    double boundary_fraction = 0.7;
    std::uint64_t seed = 7;
    Mode mode = Mode::MaximalSeparated;
    double eta = 0.0;  // covering-only separation floor; 0 means epsilon / 4

    double epsilon() const { return c_mesh / n; }
    double effective_eta() const { return eta > 0.0 ? eta : 0.25 * epsilon(); }
    void validate() const;
};

// Pool size giving roughly 64 * 2^d candidates per epsilon-ball.
std::size_t default_pool_size(int dim, int n, double c_mesh);

struct Certificates {
    double separation = 0.0;        // min pairwise rho_lower (+inf for one point)
    double covering = 0.0;          // max over the pool of min rho_refined to the mesh
    double tau_dir = 0.0;           // measured direction-discretization slack
    double holdout_covering = 0.0;  // same as covering on a fresh sample
};

struct Mesh {
    PointCloud points;  // insertion order, in the context's coordinates
    MeshSpec spec;
    Certificates certificates;
    std::vector<double> insertion_radii;
    std::string body_fingerprint;
    std::size_t pool_size = 0;

    std::size_t size() const { return points.size(); }
};

struct BuildOptions {
    std::size_t holdout = 2000;
    std::size_t tau_pairs = 256;
    bool measure_tau = true;
    bool check_holdout = true;
};

// Greedy construction over the default candidate pool of the spec.
Mesh build_mesh(const dubiner::MetricContext& ctx, const MeshSpec& spec, const BuildOptions& options = {});
// Same over a caller-supplied pool (points inside the context's body).
Mesh build_mesh(const dubiner::MetricContext& ctx, const MeshSpec& spec, const PointCloud& pool,
                const BuildOptions& options = {});

struct ScanRow {
    int n = 0;
    std::size_t N = 0;
    double normalized = 0.0;  // N / n^d
    std::size_t pool_size = 0;
};

std::vector<ScanRow> mesh_cardinality_scan(const dubiner::MetricContext& ctx, const std::vector<int>& degrees,
                                           double c_mesh, std::uint64_t seed, const BuildOptions& options = {});

// Brute-force min over all pairs of rho_lower; +inf for fewer than 2 points.
double separation_audit(const dubiner::MetricContext& ctx, const Mesh& mesh);

// For every point of `targets`, the min rho_refined to `points` (exact
// nearest search with chord-bound pruning).
std::vector<double> nearest_refined(const dubiner::MetricContext& ctx, const PointCloud& points,
                                    const PointCloud& targets);
// Same with rho_lower.
std::vector<double> nearest_lower(const dubiner::MetricContext& ctx, const PointCloud& points,
                                  const PointCloud& targets);

// For every point, the min rho_refined to the other points (+inf if alone).
std::vector<double> nearest_neighbor_refined(const dubiner::MetricContext& ctx, const PointCloud& points);

json mesh_to_json(const Mesh& mesh, const dubiner::MetricContext& ctx);
Mesh mesh_from_json(const json& j);
Mesh load_mesh(const std::string& path);

}  // namespace polymesh::mesh
