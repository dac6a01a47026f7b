#include <benchmark/benchmark.h>

#include "polymesh/dubiner.hpp"
#include "polymesh/geometry.hpp"
#include "polymesh/mesh.hpp"
#include "polymesh/poly.hpp"

using namespace polymesh;

namespace {

const geometry::NormalizedBody& disk() {
    static const geometry::NormalizedBody nb =
        geometry::john_normalize(geometry::ConvexBody::ball(Vec::Zero(2), 1.0), geometry::default_support_samples(2));
    return nb;
}

const dubiner::MetricContext& disk_ctx() {
    static const dubiner::MetricContext ctx(disk(), dubiner::DirectionSet::make(2, dubiner::default_direction_count(2)));
    return ctx;
}

const PointCloud& pairs() {
    static const PointCloud pts = geometry::sample_candidates(disk(), 2048, 0.5, 3);
    return pts;
}

void BM_RhoLower(benchmark::State& state) {
    const auto& ctx = disk_ctx();
    const auto& pts = pairs();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dubiner::rho_lower(ctx, pts.point(i % 1024), pts.point(1024 + i % 1024)));
        ++i;
    }
}
BENCHMARK(BM_RhoLower);

void BM_RhoRefined(benchmark::State& state) {
    const auto& ctx = disk_ctx();
    const auto& pts = pairs();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dubiner::rho_refined(ctx, pts.point(i % 1024), pts.point(1024 + i % 1024)));
        ++i;
    }
}
BENCHMARK(BM_RhoRefined);

void BM_BuildMesh(benchmark::State& state) {
    mesh::MeshSpec spec;
    spec.n = static_cast<int>(state.range(0));
    spec.c_mesh = 0.5;
    std::size_t N = 0;
    for (auto _ : state) N = mesh::build_mesh(disk_ctx(), spec).size();
    state.counters["N"] = static_cast<double>(N);
}
BENCHMARK(BM_BuildMesh)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PolyEval(benchmark::State& state) {
    const poly::DensePoly d = poly::random_poly(2, static_cast<int>(state.range(0)), 1, 2.0);
    const poly::PolyExpr e = d.to_expr();
    const auto& pts = pairs();
    for (auto _ : state) benchmark::DoNotOptimize(e.eval_many(pts));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
}
BENCHMARK(BM_PolyEval)->Arg(8)->Arg(16);

void BM_DenseEval(benchmark::State& state) {
    const poly::DensePoly d = poly::random_poly(2, static_cast<int>(state.range(0)), 1, 2.0);
    const auto& pts = pairs();
    for (auto _ : state) benchmark::DoNotOptimize(d.eval_many(pts));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
}
BENCHMARK(BM_DenseEval)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
