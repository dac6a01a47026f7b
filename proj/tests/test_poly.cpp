#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "polymesh/error.hpp"
#include "polymesh/geometry.hpp"
#include "polymesh/poly.hpp"
#include "polymesh/random.hpp"
#include "poly_oracle.hpp"
#include "test_util.hpp"

using namespace polymesh;
using namespace polymesh::poly;
using dubiner::DirectionSet;
using dubiner::MetricContext;
using namespace testutil;

TEST_SUITE("poly") {

TEST_CASE("expression evaluation examples") {
    const PolyExpr x1 = PolyExpr::affine(v2(1, 0), 0.0), x2 = PolyExpr::affine(v2(0, 1), 0.0);
    CHECK(x1.eval(v2(0.3, -1)) == 0.3);
    CHECK(PolyExpr::product({x1, x2}).eval(v2(2, 3)) == 6.0);
    CHECK(PolyExpr::cheb(2, x1).eval(v2(0.5, 0)) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(PolyExpr::cheb(5, x1).eval(v2(std::cos(0.3), 0)) == doctest::Approx(std::cos(1.5)).epsilon(1e-14));
    CHECK(PolyExpr::power(x1, 3).degree() == 3);
    CHECK_THROWS_AS(PolyExpr::cheb(3, x1).eval(v2(1.5, 0)), RangeViolation);
}

TEST_CASE("Chebyshev values against a long-double recurrence") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int m : {0, 1, 2, 3, 7, 16, 17, 40, 128, 512}) {
        for (int t = 0; t < 200; ++t) {
            const double x = t < 2 ? (t == 0 ? 1.0 : -1.0) : u(rng);
            long double p = 1.0L, c = x;
            if (m == 0) c = 1.0L;
            for (int k = 1; k < m; ++k) {
                const long double n = 2.0L * x * c - p;
                p = c;
                c = n;
            }
            CHECK(std::abs(cheb_eval(m, x) - static_cast<double>(c)) <= 1e-12);
        }
    }
    CHECK(cheb_eval(4, 1.0 + 1e-13) == 1.0);
}

TEST_CASE("structural degree equals the degree of the monomial expansion") {
    std::mt19937_64 rng(23);
    int checked = 0;
    for (int n = 1; n <= 12; ++n)
        for (int t = 0; t < 12; ++t) {
            const PolyExpr p = random_tree(rng, n);
            const Mono m = mono_expand(p);
            CHECK(structural_degree(p) == p.degree());
            CHECK(p.degree() == mono_degree(m));
            CHECK(expand(p).effective_degree(1e-13) == p.degree());
            const double x = 0.4 * std::sin(t + n), y = 0.3 * std::cos(t * n);
            CHECK(p.eval(v2(x, y)) == doctest::Approx(mono_eval(m, x, y)).epsilon(1e-9));
            ++checked;
        }
    CHECK(checked == 144);
}

TEST_CASE("dense and expression evaluation agree") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DensePoly d = random_poly(2, 9, seed, 1.7);
        const PolyExpr e = d.to_expr();
        CHECK(e.degree() == 9);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.7, 1.7);
        for (int t = 0; t < 100; ++t) {
            const Vec z = v2(u(rng), u(rng));
            CHECK(std::abs(d.eval(z) - e.eval(z)) <= 1e-10 * std::max(1.0, std::abs(d.eval(z))));
        }
    }
}

TEST_CASE("random polynomials") {
    const DensePoly c = random_poly(2, 0, 5);
    CHECK(c.coeffs.size() == 1);
    CHECK(c.eval(v2(0.3, 0.9)) == c.coeffs[0]);
    CHECK(c.eval(v2(-0.7, 0.1)) == c.coeffs[0]);
    CHECK(random_poly(2, 3, 5).coeffs.size() == 10);
    CHECK(multi_indices(3, 4).size() == 35);
    CHECK(random_poly(2, 6, 9).coeffs == random_poly(2, 6, 9).coeffs);
    CHECK(random_poly(2, 6, 9).coeffs != random_poly(2, 6, 10).coeffs);
}

TEST_CASE("sup norm estimates") {
    const auto disk = geometry::john_normalize(testutil::unit_disk(), geometry::default_support_samples(2));
    const auto square = geometry::john_normalize(testutil::unit_square(), geometry::default_support_samples(2));
    CHECK(sup_norm_estimate(PolyExpr::constant(2, -3.25), disk, 1000, 1) == 3.25);
    CHECK(sup_norm_estimate(PolyExpr::affine(v2(1, 0), 0.0), disk, 4000, 1) == doctest::Approx(1.0).epsilon(1e-3));
    const double s8 = sup_norm_estimate(PolyExpr::cheb(8, PolyExpr::affine(v2(1, 0), 0.0)), square, 4000, 1);
    CHECK(s8 <= 1.0 + 1e-12);
    CHECK(s8 >= 1.0 - 1e-3);
}

TEST_CASE("composition with an affine map") {
    const PolyExpr p = PolyExpr::product({PolyExpr::affine(v2(1, 2), 0.5), PolyExpr::cheb(3, PolyExpr::affine(v2(0.2, -0.1), 0.1))});
    Mat A(2, 2);
    A << 0.5, 0.1, -0.2, 0.3;
    const Vec b = v2(0.1, -0.2);
    const PolyExpr q = p.compose_affine(A, b);
    for (double t = -1; t <= 1; t += 0.25) {
        const Vec z = v2(t, 0.5 * t * t);
        CHECK(q.eval(z) == doctest::Approx(p.eval(Vec(A * z + b))).epsilon(1e-14));
    }
    CHECK(q.degree() == p.degree());
}

TEST_CASE("JSON round trip") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
        const PolyExpr p = random_tree(rng, 8);
        const PolyExpr q = poly_from_json(json::parse(poly_to_json(p).dump()));
        CHECK(q.degree() == p.degree());
        CHECK(q.eval(v2(0.1, 0.2)) == p.eval(v2(0.1, 0.2)));
    }
    json bad = poly_to_json(PolyExpr::cheb(3, PolyExpr::affine(v2(1, 0), 0)));
    bad["degree"] = 4;
    CHECK_THROWS_AS(poly_from_json(bad), ParseError);
    CHECK_THROWS_AS(poly_from_json(json::parse(R"({"format": "polymesh-poly", "dim": 2, "degree": 1, "root": {"type": "x"}})")),
                    ParseError);
}

TEST_CASE("resolving polynomials") {
    const MetricContext ctx(testutil::unit_disk(), DirectionSet::make(2, 4096));
    Rng rng(3);
    PointCloud samples(2);
    for (int i = 0; i < 10000; ++i) samples.push_back(rng.in_ball(2, 1.0));

    SUBCASE("diametric pair") {
        ResolvingInfo info;
        const PolyExpr p = resolving_poly(ctx, v2(-1, 0), v2(1, 0), 20, &info);
        CHECK(p.eval(v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(p.eval(v2(-1, 0))) <= 1e-12);
        CHECK(p.degree() <= 20);
        for (double v : p.eval_many(samples)) {
            CHECK(v >= -1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
    SUBCASE("antipodal points on the normalized ball take the m = 3 branch") {
        const auto nb = geometry::john_normalize(testutil::unit_disk(), geometry::default_support_samples(2));
        const MetricContext nctx(nb, DirectionSet::make(2, 4096));
        ResolvingInfo info;
        const PolyExpr p = resolving_poly(nctx, v2(-2, 0), v2(2, 0), 20, &info);
        CHECK(info.m == 3);
        CHECK(info.ell == 1);
        CHECK(info.theta1 == doctest::Approx(std::numbers::pi));
        CHECK(info.theta2 == doctest::Approx(0.0));
        CHECK(p.eval(v2(2, 0)) == 1.0);
    }
    SUBCASE("close points need a larger degree") {
        const Vec x = v2(0.0, 0.0), y = v2(0.01, 0.0);
        const double r = dubiner::rho_refined(ctx, x, y);
        const int need = min_resolving_degree(2, r);
        CHECK(need == static_cast<int>(std::floor(2 * std::numbers::pi * 2.0 / r)) + 2);
        CHECK_THROWS_AS(resolving_poly(ctx, x, y, need - 1, nullptr), SeparationError);
        const PolyExpr p = resolving_poly(ctx, x, y, need);
        CHECK(p.eval(y) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(p.eval(x)) <= 1e-9);
    }
}

TEST_CASE("fast-decreasing polynomials") {
    const auto nb = geometry::john_normalize(testutil::unit_disk(), geometry::default_support_samples(2));
    const MetricContext ctx(nb, DirectionSet::make(2, 4096));
    SUBCASE("n <= L gives the constant 1") {
        const FastDecreasingResult r = fast_decreasing_poly(ctx, v2(0.3, 0.2), 4);
        CHECK(r.degree == 0);
        CHECK(r.poly.eval(v2(-1, 1)) == 1.0);
    }
    SUBCASE("disk, n = 64: sampled envelope") {
        FastDecreasingOptions o;
        o.policy = BudgetPolicy::Report;
        const int n = 64;
        const FastDecreasingResult r = fast_decreasing_poly(ctx, v2(0, 0), n, o);
        CHECK(r.poly.eval(v2(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
        const PointCloud pool = geometry::sample_candidates(nb, 3000, 0.5, 77);
        const double far = 16.0 / n * (1.0 + o.alpha / 4.0);
        const auto vals = r.poly.eval_many(pool);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            CHECK(vals[i] <= 1.0 + 1e-9);
            CHECK(vals[i] >= -1e-9);
            if (dubiner::rho_refined(ctx, v2(0, 0), pool.point(i)) >= far) CHECK(vals[i] <= 0.5);
        }
        CHECK(fit_decay_constant(ctx, r.poly, v2(0, 0), n, pool) > 0.0);
        CHECK_THROWS_AS(fast_decreasing_poly(ctx, v2(0, 0), n), BudgetExceeded);
        FastDecreasingOptions t = o;
        t.policy = BudgetPolicy::Truncate;
        const FastDecreasingResult tr = fast_decreasing_poly(ctx, v2(0, 0), n, t);
        CHECK(tr.degree <= n);
        CHECK(tr.poly.eval(v2(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("identical inputs give identical trees") {
        FastDecreasingOptions o;
        o.policy = BudgetPolicy::Truncate;
        const auto a = fast_decreasing_poly(ctx, v2(0.5, -0.5), 48, o);
        const auto b = fast_decreasing_poly(ctx, v2(0.5, -0.5), 48, o);
        CHECK(poly_to_json(a.poly).dump() == poly_to_json(b.poly).dump());
    }
}

TEST_CASE("Bernstein segment bound") {
    const auto sq = testutil::unit_square();
    const Vec a = v2(-1, 0), b = v2(1, 0);
    CHECK(bernstein_segment_bound(PolyExpr::constant(2, 4.0), sq, a, b, 65) == 0.0);
    // p(t) = x along the segment: derivative in t at the midpoint is 2 =
    // |b - a|, and the bound is 2 * 1 * max|p| = 2.
    CHECK(bernstein_segment_bound(PolyExpr::affine(v2(1, 0), 0.0), sq, a, b, 65) == doctest::Approx(2.0));
    // For odd n the Chebyshev polynomial attains the bound at the midpoint:
    // d/dt T_n(2t - 1) = 2 n sin(n pi / 2) there.
    for (int n : {3, 5, 9}) {
        const PolyExpr p = PolyExpr::cheb(n, PolyExpr::affine(v2(1, 0), 0.0));
        const double bound = bernstein_segment_bound(p, sq, a, b, 1001);
        const double exact = 2.0 * n * std::abs(std::sin(n * std::numbers::pi / 2));
        CHECK(bound == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bernstein_segment_bound(PolyExpr::constant(2, 1.0), sq, a, v2(2, 0), 10), InputError);
}

}  // TEST_SUITE
