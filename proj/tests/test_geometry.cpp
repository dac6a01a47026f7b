#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "polymesh/body_io.hpp"
#include "polymesh/error.hpp"
#include "polymesh/geometry.hpp"
#include "test_util.hpp"

using namespace polymesh;
using namespace polymesh::geometry;
using testutil::v2;

namespace {

Vec unit(Vec v) { return v / v.norm(); }

ConvexBody vsquare() { return ConvexBody::polygon({v2(-1, -1), v2(1, -1), v2(1, 1), v2(-1, 1)}); }

// Tangent planes to the unit sphere at Fibonacci points: an H-polytope with
// m facets whose vertices the test enumerates itself.
HPolytope tangent_polytope(int m) {
    HPolytope h;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / m;
        const double r = std::sqrt(1.0 - z * z);
        Vec n(3);
        n << r * std::cos(golden * i), r * std::sin(golden * i), z;
        h.halfspaces.push_back({n, 1.0});
    }
    return h;
}

// Brute-force vertex enumeration: every feasible triple intersection.
std::vector<Vec> enumerate_vertices(const HPolytope& h) {
    std::vector<Vec> out;
    const std::size_t m = h.halfspaces.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k) {
                Eigen::Matrix3d A;
                A.row(0) = h.halfspaces[i].normal.transpose();
                A.row(1) = h.halfspaces[j].normal.transpose();
                A.row(2) = h.halfspaces[k].normal.transpose();
                if (std::abs(A.determinant()) < 1e-10) continue;
                const Eigen::Vector3d z = A.partialPivLu().solve(Eigen::Vector3d::Ones());
                bool ok = true;
                for (const auto& hs : h.halfspaces)
                    if (hs.normal.dot(Vec(z)) > hs.offset + 1e-9) {
                        ok = false;
                        break;
                    }
                if (ok) out.emplace_back(z);
            }
    return out;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("support values of the basic shapes") {
    CHECK(support_value(testutil::unit_disk(), v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(support_value(vsquare(), unit(v2(1, 1))) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = 4;
    A(1, 1) = 1;
    CHECK(support_value(ConvexBody::ellipsoid(Vec::Zero(2), A), v2(1, 0)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("support is positively homogeneous and subadditive") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const ConvexBody bodies[] = {testutil::unit_disk(), testutil::unit_square(), testutil::random_ngon(7, 5)};
    for (const auto& b : bodies)
        for (int t = 0; t < 200; ++t) {
            const Vec u = v2(g(rng), g(rng)), w = v2(g(rng), g(rng));
            CHECK(b.support(Vec(3.5 * u)) == doctest::Approx(3.5 * b.support(u)).epsilon(1e-12));
            CHECK(b.support(Vec(u + w)) <= b.support(u) + b.support(w) + 1e-12);
        }
}

TEST_CASE("support points") {
    const Vec p = support_point(testutil::unit_disk(), v2(0, 1));
    CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(1.0));
    const Vec q = support_point(testutil::unit_square(), v2(1, 0));
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(std::abs(q[1]) <= 1.0 + 1e-12);
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = 4;
    A(1, 1) = 1;
    const Vec r = support_point(ConvexBody::ellipsoid(Vec::Zero(2), A), v2(1, 0));
    CHECK(r[0] == doctest::Approx(2.0));
    CHECK(std::abs(r[1]) < 1e-12);
}

TEST_CASE("containment with tolerance") {
    CHECK(contains(testutil::unit_disk(), v2(0, 0), 0.0));
    CHECK_FALSE(contains(testutil::unit_disk(), v2(1.001, 0), 0.0));
    CHECK(contains(testutil::unit_disk(), v2(1.001, 0), 0.01));
    CHECK(contains(testutil::unit_square(), v2(1, 1), 0.0));
    CHECK(contains(vsquare(), v2(1, 1), 0.0));
    CHECK_THROWS_AS(contains(testutil::unit_disk(), v2(0, 0), -1.0), InputError);
}

TEST_CASE("ray extent") {
    CHECK(ray_extent(testutil::unit_disk(), v2(0, 0), v2(1, 0)) == doctest::Approx(1.0));
    CHECK(ray_extent(testutil::unit_square(), v2(0, 0), unit(v2(1, 1))) == doctest::Approx(std::sqrt(2.0)));
    CHECK(ray_extent(vsquare(), v2(0, 0), unit(v2(1, 1))) == doctest::Approx(std::sqrt(2.0)));
    CHECK(ray_extent(testutil::unit_disk(), v2(0.5, 0), v2(1, 0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ray_extent(testutil::unit_disk(), v2(2, 0), v2(1, 0)), InputError);
}

TEST_CASE("direction must be a unit vector") {
    CHECK_THROWS_AS(support_value(testutil::unit_disk(), v2(2, 0)), InputError);
}

TEST_CASE("malformed and flat bodies") {
    HPolytope triangle;
    triangle.halfspaces.push_back({v2(1, 0), 1});
    triangle.halfspaces.push_back({v2(0, 1), 1});
    triangle.halfspaces.push_back({v2(-1, -1), 1});
    triangle.halfspaces.push_back({v2(1, 1), 5});
    // x <= 1, y <= 1 and x + y <= 3 leave the third quadrant open.
    HPolytope unbounded;
    unbounded.halfspaces.push_back({v2(1, 0), 1});
    unbounded.halfspaces.push_back({v2(0, 1), 1});
    unbounded.halfspaces.push_back({v2(1, 1), 3});
    CHECK_NOTHROW(ConvexBody{triangle});
    CHECK_THROWS_AS(ConvexBody{unbounded}, MalformedBody);
    CHECK_THROWS_AS(ConvexBody::polygon({v2(0, 0), v2(1, 1), v2(2, 2)}), FlatnessError);
    HPolytope slab;
    slab.halfspaces.push_back({v2(1, 0), 0});
    slab.halfspaces.push_back({v2(-1, 0), 0});
    slab.halfspaces.push_back({v2(0, 1), 1});
    slab.halfspaces.push_back({v2(0, -1), 1});
    CHECK_THROWS_AS(ConvexBody{slab}, FlatnessError);
    CHECK_THROWS_AS(ConvexBody::ball(Vec::Zero(2), -1.0), MalformedBody);
}

TEST_CASE("LP-backed H-polytope support agrees with enumerated vertices") {
    // 70 facets in R^3: C(70, 3) exceeds the vertex-cache limit, so the body
    // answers support queries by LP.
    const HPolytope big = tangent_polytope(70);
    const HPolytope small = tangent_polytope(20);
    const ConvexBody lp_body(big), cached(small);
    CHECK(lp_body.cached_vertex_count() == 0);
    CHECK(cached.cached_vertex_count() > 0);
    const auto big_v = enumerate_vertices(big), small_v = enumerate_vertices(small);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        Vec xi(3);
        xi << g(rng), g(rng), g(rng);
        xi.normalize();
        double hb = -1e300, hs = -1e300;
        for (const auto& v : big_v) hb = std::max(hb, v.dot(xi));
        for (const auto& v : small_v) hs = std::max(hs, v.dot(xi));
        CHECK(lp_body.support(xi) == doctest::Approx(hb).epsilon(1e-8));
        CHECK(cached.support(xi) == doctest::Approx(hs).epsilon(1e-12));
    }
}

TEST_CASE("V-polytope in R^3 uses the LP for rays and containment") {
    std::vector<Vec> cube;
    for (int i = 0; i < 8; ++i) {
        Vec v(3);
        v << (i & 1 ? 1 : -1), (i & 2 ? 1 : -1), (i & 4 ? 1 : -1);
        cube.push_back(v);
    }
    const ConvexBody vc = ConvexBody::polygon(cube);
    Vec u(3);
    u << 1, 1, 1;
    CHECK(ray_extent(vc, Vec::Zero(3), unit(u)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-8));
    Vec in(3), out(3);
    in << 0.99, -0.99, 0.5;
    out << 1.01, 0, 0;
    CHECK(contains(vc, in, 0.0));
    CHECK_FALSE(contains(vc, out, 0.0));
}

TEST_CASE("affine transform of a body") {
    Mat M = Mat::Identity(2, 2) * 2.0;
    const ConvexBody b = testutil::unit_square().transformed(AffineMap(M, v2(1, 0)));
    CHECK(b.support(v2(1, 0)) == doctest::Approx(3.0));
    CHECK(b.support(v2(-1, 0)) == doctest::Approx(1.0));
    CHECK(b.contains(v2(2.9, 1.9), 0.0));
    CHECK_THROWS_AS(AffineMap(Mat::Zero(2, 2), v2(0, 0)), InputError);
}

TEST_CASE("minimum volume ellipsoid of square corners is the circumscribed disk") {
    PointCloud pts(2);
    for (const auto& v : {v2(-1, -1), v2(1, -1), v2(1, 1), v2(-1, 1)}) pts.push_back(v);
    const EnclosingEllipsoid e = minimum_volume_ellipsoid(pts, 1e-10);
    CHECK(e.center.norm() < 1e-8);
    CHECK(e.shape(0, 0) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(e.shape(1, 1) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(std::abs(e.shape(0, 1)) < 1e-8);
}

TEST_CASE("normalization examples") {
    SUBCASE("shifted ball becomes B(0, 2)") {
        const NormalizedBody nb = john_normalize(ConvexBody::ball(v2(3, 0), 2.0), default_support_samples(2));
        CHECK(nb.to_normalized.apply(v2(3, 0)).norm() < 1e-6);
        CHECK(nb.inner_radius >= 1.0 - 1e-6);
        CHECK(nb.outer_radius <= 2.0 + 1e-6);
        CHECK(nb.normalized.support(v2(1, 0)) == doctest::Approx(2.0).epsilon(1e-5));
    }
    SUBCASE("square scales by sqrt 2") {
        const NormalizedBody nb = john_normalize(testutil::unit_square(), default_support_samples(2));
        CHECK(nb.outer_radius == doctest::Approx(2.0).epsilon(1e-5));
        CHECK(nb.inner_radius == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
        const double s = nb.to_normalized.operator_norm();
        CHECK(s == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
    }
    SUBCASE("ellipse diag(9, 1) becomes B(0, 2)") {
        Mat A = Mat::Zero(2, 2);
        A(0, 0) = 9;
        A(1, 1) = 1;
        const NormalizedBody nb = john_normalize(ConvexBody::ellipsoid(Vec::Zero(2), A), default_support_samples(2));
        const Mat M = nb.to_normalized.matrix();
        Eigen::JacobiSVD<Mat> svd(M);
        CHECK(svd.singularValues()[0] == doctest::Approx(2.0).epsilon(1e-5));
        CHECK(svd.singularValues()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
        for (int k = 0; k < 16; ++k) {
            const double t = 2 * std::numbers::pi * k / 16;
            CHECK(nb.normalized.support(v2(std::cos(t), std::sin(t))) == doctest::Approx(2.0).epsilon(1e-5));
        }
    }
    SUBCASE("inclusions hold on random polygons") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const NormalizedBody nb = john_normalize(testutil::random_ngon(7, seed), default_support_samples(2));
            for (int k = 0; k < 64; ++k) {
                const double t = 2 * std::numbers::pi * k / 64;
                const double h = nb.normalized.support(v2(std::cos(t), std::sin(t)));
                CHECK(h >= 1.0 - nb.tau_norm);
                CHECK(h <= 2.0 * (1.0 + nb.tau_norm));
            }
        }
    }
}

TEST_CASE("candidate pools") {
    const NormalizedBody nb = john_normalize(testutil::unit_disk(), default_support_samples(2));
    const PointCloud pool = sample_candidates(nb, 1000, 0.7, 42);
    CHECK(pool.size() == 1000);
    for (std::size_t i = 0; i < pool.size(); ++i) CHECK(nb.normalized.contains(pool[i], 1e-9));
    CHECK(sample_candidates(nb, 1, 0.7, 42).size() == 1);
    CHECK(sample_candidates(nb, 500, 0.7, 42) == sample_candidates(nb, 500, 0.7, 42));
    CHECK_FALSE(sample_candidates(nb, 500, 0.7, 42) == sample_candidates(nb, 500, 0.7, 43));
}

TEST_CASE("boundary clustering follows r = cos(theta / 2)") {
    // Share of points beyond 0.99 of the radius: boundary draws land there
    // when theta < 2 acos(0.99), uniform draws with probability 1 - 0.99^2.
    const NormalizedBody nb = john_normalize(testutil::unit_disk(), default_support_samples(2));
    const std::size_t N = 100000;
    const PointCloud pool = sample_candidates(nb, N, 0.7, 42);
    std::size_t outer = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (pool.point(i).norm() > 0.99 * 2.0) ++outer;
    const double expected = 0.7 * (2.0 * std::acos(0.99) / std::numbers::pi) + 0.3 * (1.0 - 0.99 * 0.99);
    const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(N));
    CHECK(std::abs(static_cast<double>(outer) / static_cast<double>(N) - expected) <= 5.0 * sigma);
}

TEST_CASE("body JSON round trip and errors") {
    const ConvexBody b = testutil::random_ngon(7, 2);
    const json j = body_to_json(b);
    const ConvexBody c = body_from_json(j);
    CHECK(body_fingerprint(b) == body_fingerprint(c));
    for (int k = 0; k < 16; ++k) {
        const Vec xi = v2(std::cos(k * 0.4), std::sin(k * 0.4));
        CHECK(b.support(xi) == c.support(xi));
    }
    CHECK_THROWS_AS(body_from_json(json::parse(R"({"dim": 2})")), ParseError);
    CHECK_THROWS_AS(body_from_json(json::parse(R"({"dim": 2, "shape": {"type": "blob"}})")), ParseError);
    CHECK_THROWS_AS(body_from_json(json::parse(R"({"dim": 2, "shape": {"type": "ball", "center": [0], "radius": 1}})")),
                    ParseError);
    CHECK(body_fingerprint(b) != body_fingerprint(testutil::random_ngon(7, 3)));
}

}  // TEST_SUITE
