#include "polymesh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>

#include "polymesh/directions.hpp"
#include "polymesh/error.hpp"
#include "polymesh/lp.hpp"
#include "polymesh/random.hpp"

namespace polymesh::geometry {

// ---------------------------------------------------------------- AffineMap

AffineMap::AffineMap(Mat matrix, Vec shift) : matrix_(std::move(matrix)), shift_(std::move(shift)) {
    const auto d = shift_.size();
    if (d < 1 || matrix_.rows() != d || matrix_.cols() != d)
        throw InputError("affine map: matrix must be d x d with a length-d shift");
    if (!matrix_.allFinite() || !shift_.allFinite()) throw InputError("affine map: non-finite entries");
    Eigen::JacobiSVD<Mat> svd(matrix_);
    const Vec& sv = svd.singularValues();
    if (sv[0] == 0.0 || sv[sv.size() - 1] <= 1e-13 * sv[0]) throw InputError("affine map: matrix is singular");
    inverse_ = matrix_.fullPivLu().inverse();
}

AffineMap AffineMap::identity(int dim) { return AffineMap(Mat::Identity(dim, dim), Vec::Zero(dim)); }

PointCloud AffineMap::apply(const PointCloud& points) const {
    PointCloud out(points.dim());
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out.push_back(Vec(matrix_ * points.point(i) + shift_));
    return out;
}

AffineMap AffineMap::inverse() const { return AffineMap(inverse_, -(inverse_ * shift_)); }

AffineMap AffineMap::then(const AffineMap& next) const {
    if (next.dim() != dim()) throw InputError("affine map composition: dimension mismatch");
    return AffineMap(next.matrix_ * matrix_, next.matrix_ * shift_ + next.shift_);
}

double AffineMap::operator_norm(double tol) const {
    const Mat gram = matrix_.transpose() * matrix_;
    const int d = dim();
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * i;
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Vec w = gram * v;
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        if (std::abs(next - lambda) <= tol * std::abs(next)) {
            lambda = std::max(next, v.dot(gram * v));
            break;
        }
        lambda = next;
    }
    return std::sqrt(lambda);
}

// ---------------------------------------------------------------- world model

namespace {

enum class Kind { H, V, Quadric };

std::size_t combinations_capped(std::size_t m, std::size_t k, std::size_t cap) {
    if (k > m) return 0;
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        c = c * static_cast<double>(m - i) / static_cast<double>(i + 1);
        if (c > static_cast<double>(cap)) return cap + 1;
    }
    return static_cast<std::size_t>(std::llround(c));
}

constexpr std::size_t kVertexEnumerationCap = 50000;

void check_vec(const Vec& v, int dim, const char* what) {
    if (v.size() != dim) throw MalformedBody(std::string(what) + ": dimension mismatch");
    if (!v.allFinite()) throw MalformedBody(std::string(what) + ": non-finite entry");
}

// 2-D convex hull (counterclockwise, collinear points dropped).
std::vector<Vec> hull_2d(std::vector<Vec> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return a == b; }), pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

}  // namespace

struct ConvexBody::World {
    Shape shape;
    std::optional<AffineMap> transform;
    int dim = 0;
    Kind kind = Kind::H;

    // Halfspace description (H-polytopes, and 2-D V-polytopes via their hull).
    Mat normals;  // rows are unit normals
    Vec offsets;
    bool has_facets = false;

    // Vertex description (V-polytopes, small H-polytopes); columns.
    Mat vertices;

    // Quadric: {z : (z-c)^T inv (z-c) <= 1}.
    Vec center;
    Mat axes;
    Mat axes_inv;
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    Vec interior;
    Vec box_lo, box_hi;
    double width = 0.0;

    double support(const double* v) const {
        const ConstVecMap vm(v, dim);
        switch (kind) {
            case Kind::Quadric: return center.dot(vm) + std::sqrt(std::max(0.0, vm.dot(axes * vm)));
            case Kind::V: return (vm.transpose() * vertices).maxCoeff();
            case Kind::H:
                if (vertices.cols() > 0) return (vm.transpose() * vertices).maxCoeff();
                return lp_support(Vec(vm)).first;
        }
        return 0.0;
    }

    std::pair<double, Vec> lp_support(const Vec& v) const {
        const auto r = lp::maximize_free(normals, offsets, v);
        if (r.status == lp::Status::Unbounded) throw MalformedBody("polytope is unbounded");
        if (r.status == lp::Status::Infeasible) throw MalformedBody("polytope is empty");
        return {r.objective, r.x};
    }

    Vec support_point(const Vec& v) const {
        switch (kind) {
            case Kind::Quadric: {
                const Vec av = axes * v;
                const double q = std::sqrt(std::max(0.0, v.dot(av)));
                return q > 0.0 ? Vec(center + av / q) : center;
            }
            case Kind::V:
            case Kind::H:
                if (vertices.cols() > 0) {
                    Eigen::Index j = 0;
                    (v.transpose() * vertices).maxCoeff(&j);
                    return vertices.col(j);
                }
                return lp_support(v).second;
        }
        return center;
    }

    bool contains(const double* z, double tol) const {
        const ConstVecMap zm(z, dim);
        switch (kind) {
            case Kind::Quadric: {
                const Vec w = zm - center;
                const double q = w.dot(axes_inv * w);
                return std::sqrt(std::max(0.0, q)) <= 1.0 + tol / std::sqrt(lambda_min);
            }
            case Kind::H: return ((normals * zm) - offsets).maxCoeff() <= tol;
            case Kind::V:
                if (has_facets) return ((normals * zm) - offsets).maxCoeff() <= tol;
                return lp_contains(Vec(zm), tol);
        }
        return false;
    }

    // z = P lambda within tol (infinity norm), lambda >= 0, sum lambda = 1.
    bool lp_contains(const Vec& z, double tol) const {
        for (int i = 0; i < dim; ++i)
            if (z[i] < box_lo[i] - tol || z[i] > box_hi[i] + tol) return false;
        const auto nv = vertices.cols();
        Mat A(2 * dim + 2, nv);
        Vec b(2 * dim + 2);
        A.topRows(dim) = vertices;
        A.middleRows(dim, dim) = -vertices;
        A.row(2 * dim).setOnes();
        A.row(2 * dim + 1).setConstant(-1.0);
        b.head(dim) = z.array() + tol;
        b.segment(dim, dim) = -z.array() + tol;
        b[2 * dim] = 1.0;
        b[2 * dim + 1] = -1.0;
        return lp::maximize(A, b, Vec::Zero(nv)).status == lp::Status::Optimal;
    }

    double chord_extent(const Vec& o, const Vec& u) const {
        switch (kind) {
            case Kind::Quadric: {
                const Vec w = o - center;
                const Vec iu = axes_inv * u;
                const double a = u.dot(iu);
                const double b = w.dot(iu);
                const double c = w.dot(axes_inv * w) - 1.0;
                const double disc = b * b - a * c;
                if (disc < 0.0) return 0.0;
                const double s = std::sqrt(disc);
                const double t = b <= 0.0 ? (-b + s) / a : (b + s > 0.0 ? -c / (b + s) : 0.0);
                return std::max(0.0, t);
            }
            case Kind::H: return facet_chord(o, u);
            case Kind::V:
                if (has_facets) return facet_chord(o, u);
                return lp_chord(o, u);
        }
        return 0.0;
    }

    double facet_chord(const Vec& o, const Vec& u) const {
        const Vec au = normals * u;
        const Vec slack = offsets - normals * o;
        double t = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < au.size(); ++i) {
            if (au[i] > 1e-15) t = std::min(t, slack[i] / au[i]);
        }
        if (!std::isfinite(t)) throw MalformedBody("polytope is unbounded along a ray");
        return std::max(0.0, t);
    }

    // max t s.t. o + t u = P lambda, lambda >= 0, sum lambda = 1.
    double lp_chord(const Vec& o, const Vec& u) const {
        const auto nv = vertices.cols();
        Mat A(2 * dim + 2, nv + 1);
        Vec b(2 * dim + 2);
        A.setZero();
        A.topLeftCorner(dim, nv) = vertices;
        A.block(0, nv, dim, 1) = -u;
        A.block(dim, 0, dim, nv) = -vertices;
        A.block(dim, nv, dim, 1) = u;
        A.row(2 * dim).head(nv).setOnes();
        A.row(2 * dim + 1).head(nv).setConstant(-1.0);
        b.head(dim) = o;
        b.segment(dim, dim) = -o;
        b[2 * dim] = 1.0;
        b[2 * dim + 1] = -1.0;
        Vec c = Vec::Zero(nv + 1);
        c[nv] = 1.0;
        const auto r = lp::maximize(A, b, c);
        if (r.status != lp::Status::Optimal) return 0.0;
        return std::max(0.0, r.objective);
    }
};

namespace {

using World = ConvexBody::World;

void set_quadric(World& w, const Vec& center, const Mat& axes) {
    w.kind = Kind::Quadric;
    w.center = center;
    w.axes = 0.5 * (axes + axes.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(w.axes);
    w.lambda_min = es.eigenvalues().minCoeff();
    w.lambda_max = es.eigenvalues().maxCoeff();
    if (!(w.lambda_max > 0.0) || w.lambda_min <= 1e-12 * w.lambda_max)
        throw MalformedBody("ellipsoid axes matrix is not positive definite");
    w.axes_inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    w.interior = center;
    const Vec half = w.axes.diagonal().cwiseSqrt();
    w.box_lo = center - half;
    w.box_hi = center + half;
    w.width = 2.0 * std::sqrt(w.lambda_max);
}

void finish_vertices(World& w) {
    const auto nv = w.vertices.cols();
    w.box_lo = w.vertices.rowwise().minCoeff();
    w.box_hi = w.vertices.rowwise().maxCoeff();
    double diam2 = 0.0;
    for (Eigen::Index i = 0; i < nv; ++i)
        for (Eigen::Index j = i + 1; j < nv; ++j) diam2 = std::max(diam2, (w.vertices.col(i) - w.vertices.col(j)).squaredNorm());
    w.width = std::sqrt(diam2);
}

void set_vpolytope(World& w, const std::vector<Vec>& verts) {
    w.kind = Kind::V;
    const int d = w.dim;
    if (verts.size() < static_cast<std::size_t>(d + 1)) throw FlatnessError("V-polytope needs at least d+1 vertices");
    Mat P(d, static_cast<Eigen::Index>(verts.size()));
    for (std::size_t j = 0; j < verts.size(); ++j) P.col(static_cast<Eigen::Index>(j)) = verts[j];
    const Vec centroid = P.rowwise().mean();
    const Mat centered = P.colwise() - centroid;
    Eigen::JacobiSVD<Mat> svd(centered);
    const Vec& sv = svd.singularValues();
    if (sv[0] == 0.0 || sv[d - 1] <= 1e-10 * sv[0]) throw FlatnessError("V-polytope vertices are affinely dependent");
    w.interior = centroid;

    if (d == 2) {
        // Cheap exact facets in the plane: keep hull vertices only.
        const auto hull = hull_2d(verts);
        const auto nh = static_cast<Eigen::Index>(hull.size());
        w.vertices.resize(2, nh);
        w.normals.resize(nh, 2);
        w.offsets.resize(nh);
        for (Eigen::Index k = 0; k < nh; ++k) {
            const Vec& a = hull[static_cast<std::size_t>(k)];
            const Vec& b = hull[static_cast<std::size_t>((k + 1) % nh)];
            w.vertices.col(k) = a;
            Vec nrm(2);
            nrm << b[1] - a[1], a[0] - b[0];
            nrm.normalize();
            w.normals.row(k) = nrm.transpose();
            w.offsets[k] = std::max(nrm.dot(a), nrm.dot(b));
        }
        w.has_facets = true;
    } else {
        w.vertices = P;
    }
    finish_vertices(w);
}

void enumerate_vertices(World& w) {
    const int d = w.dim;
    const auto m = static_cast<std::size_t>(w.normals.rows());
    if (combinations_capped(m, static_cast<std::size_t>(d), kVertexEnumerationCap) > kVertexEnumerationCap) return;
    const double scale = 1.0 + w.offsets.cwiseAbs().maxCoeff();
    std::vector<Vec> found;
    std::vector<std::size_t> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), 0);
    Mat A(d, d);
    Vec b(d);
    while (true) {
        for (int r = 0; r < d; ++r) {
            A.row(r) = w.normals.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]));
            b[r] = w.offsets[static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)])];
        }
        Eigen::FullPivLU<Mat> lu(A);
        lu.setThreshold(1e-12);
        if (lu.isInvertible()) {
            Vec x = lu.solve(b);
            if (((w.normals * x) - w.offsets).maxCoeff() <= 1e-9 * scale) {
                bool dup = false;
                for (const auto& f : found)
                    if ((f - x).lpNorm<Eigen::Infinity>() <= 1e-9 * scale) {
                        dup = true;
                        break;
                    }
                if (!dup) found.push_back(std::move(x));
            }
        }
        int k = d - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - static_cast<std::size_t>(d - k)) --k;
        if (k < 0) break;
        ++idx[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < d; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    if (found.size() < static_cast<std::size_t>(d + 1)) return;
    w.vertices.resize(d, static_cast<Eigen::Index>(found.size()));
    for (std::size_t j = 0; j < found.size(); ++j) w.vertices.col(static_cast<Eigen::Index>(j)) = found[j];
}

void set_hpolytope(World& w, const Mat& normals, const Vec& offsets) {
    w.kind = Kind::H;
    const int d = w.dim;
    const auto m = normals.rows();
    if (m < d + 1) throw MalformedBody("H-polytope needs at least d+1 halfspaces");
    w.normals = normals;
    w.offsets = offsets;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double n = w.normals.row(i).norm();
        if (!(n > 1e-14)) throw MalformedBody("H-polytope has a zero normal");
        w.normals.row(i) /= n;
        w.offsets[i] /= n;
    }
    // Boundedness and bounding box from +-e_i.
    w.box_lo.resize(d);
    w.box_hi.resize(d);
    for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e[i] = 1.0;
        w.box_hi[i] = w.lp_support(e).first;
        w.box_lo[i] = -w.lp_support(-e).first;
    }
    // Chebyshev center: max r s.t. a_i.x + r <= b_i.
    Mat A(m, d + 1);
    A.leftCols(d) = w.normals;
    A.col(d).setOnes();
    Vec c = Vec::Zero(d + 1);
    c[d] = 1.0;
    const auto r = lp::maximize_free(A, w.offsets, c);
    if (r.status == lp::Status::Infeasible) throw MalformedBody("H-polytope is empty");
    const double extent = (w.box_hi - w.box_lo).maxCoeff();
    if (r.status != lp::Status::Optimal || r.objective <= 1e-10 * std::max(extent, 1e-300))
        throw FlatnessError("H-polytope has empty interior");
    w.interior = r.x.head(d);
    enumerate_vertices(w);
    if (w.vertices.cols() > 0) {
        finish_vertices(w);
    } else {
        w.width = (w.box_hi - w.box_lo).norm();
    }
}

std::shared_ptr<const World> build_world(Shape shape, std::optional<AffineMap> transform) {
    auto w = std::make_shared<World>();
    const int d = std::visit(
        [](const auto& s) -> int {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HPolytope>) {
                return s.halfspaces.empty() ? 0 : static_cast<int>(s.halfspaces.front().normal.size());
            } else if constexpr (std::is_same_v<S, VPolytope>) {
                return s.vertices.empty() ? 0 : static_cast<int>(s.vertices.front().size());
            } else {
                return static_cast<int>(s.center.size());
            }
        },
        shape);
    if (d < 1) throw MalformedBody("body dimension must be >= 1");
    if (transform && transform->dim() != d) throw MalformedBody("transform dimension does not match body");
    w->dim = d;

    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HPolytope>) {
                const auto m = static_cast<Eigen::Index>(s.halfspaces.size());
                Mat N(m, d);
                Vec b(m);
                for (Eigen::Index i = 0; i < m; ++i) {
                    const auto& h = s.halfspaces[static_cast<std::size_t>(i)];
                    check_vec(h.normal, d, "halfspace normal");
                    if (!std::isfinite(h.offset)) throw MalformedBody("halfspace offset is not finite");
                    N.row(i) = h.normal.transpose();
                    b[i] = h.offset;
                }
                if (transform) {
                    // a.z <= b with z = M^{-1}(x - t)  <=>  (M^{-T} a).x <= b + a.M^{-1} t.
                    const Mat& Minv = transform->inverse_matrix();
                    const Vec shifted = Minv * transform->shift();
                    b += N * shifted;
                    N = N * Minv;
                }
                set_hpolytope(*w, N, b);
            } else if constexpr (std::is_same_v<S, VPolytope>) {
                std::vector<Vec> verts;
                verts.reserve(s.vertices.size());
                for (const auto& v : s.vertices) {
                    check_vec(v, d, "vertex");
                    verts.push_back(transform ? transform->apply(v) : v);
                }
                set_vpolytope(*w, verts);
            } else if constexpr (std::is_same_v<S, Ball>) {
                check_vec(s.center, d, "ball center");
                if (!(s.radius > 0.0) || !std::isfinite(s.radius)) throw MalformedBody("ball radius must be positive");
                Mat axes = Mat::Identity(d, d) * (s.radius * s.radius);
                Vec c = s.center;
                if (transform) {
                    axes = transform->matrix() * axes * transform->matrix().transpose();
                    c = transform->apply(c);
                }
                set_quadric(*w, c, axes);
            } else {
                check_vec(s.center, d, "ellipsoid center");
                if (s.axes.rows() != d || s.axes.cols() != d) throw MalformedBody("ellipsoid axes must be d x d");
                if (!s.axes.allFinite()) throw MalformedBody("ellipsoid axes: non-finite entry");
                const double asym = (s.axes - s.axes.transpose()).cwiseAbs().maxCoeff();
                if (asym > 1e-12 * std::max(1.0, s.axes.cwiseAbs().maxCoeff()))
                    throw MalformedBody("ellipsoid axes matrix is not symmetric");
                Mat axes = s.axes;
                Vec c = s.center;
                if (transform) {
                    axes = transform->matrix() * axes * transform->matrix().transpose();
                    c = transform->apply(c);
                }
                set_quadric(*w, c, axes);
            }
        },
        shape);

    if (auto* hp = std::get_if<HPolytope>(&shape)) {
        for (auto& h : hp->halfspaces) {
            const double n = h.normal.norm();
            h.normal /= n;
            h.offset /= n;
        }
    }
    w->shape = std::move(shape);
    w->transform = std::move(transform);
    return w;
}

}  // namespace

// ---------------------------------------------------------------- ConvexBody

ConvexBody::ConvexBody(Shape shape, std::optional<AffineMap> transform)
    : world_(build_world(std::move(shape), std::move(transform))) {}

ConvexBody ConvexBody::ball(const Vec& center, double radius) { return ConvexBody(Ball{center, radius}); }

ConvexBody ConvexBody::box(const Vec& lo, const Vec& hi) {
    if (lo.size() != hi.size()) throw MalformedBody("box corners have different dimensions");
    const auto d = lo.size();
    HPolytope h;
    for (Eigen::Index i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e[i] = 1.0;
        h.halfspaces.push_back({e, hi[i]});
        h.halfspaces.push_back({-e, -lo[i]});
    }
    return ConvexBody(std::move(h));
}

ConvexBody ConvexBody::polygon(std::vector<Vec> vertices) { return ConvexBody(VPolytope{std::move(vertices)}); }

ConvexBody ConvexBody::ellipsoid(const Vec& center, const Mat& axes) { return ConvexBody(Ellipsoid{center, axes}); }

int ConvexBody::dim() const { return world_->dim; }
const Shape& ConvexBody::shape() const { return world_->shape; }
const std::optional<AffineMap>& ConvexBody::transform() const { return world_->transform; }

ConvexBody ConvexBody::transformed(const AffineMap& map) const {
    if (map.dim() != dim()) throw InputError("transform dimension does not match body");
    const AffineMap composed = world_->transform ? world_->transform->then(map) : map;
    return ConvexBody(world_->shape, composed);
}

double ConvexBody::support(const Vec& v) const { return world_->support(v.data()); }
double ConvexBody::support(std::span<const double> v) const { return world_->support(v.data()); }
Vec ConvexBody::support_point(const Vec& v) const { return world_->support_point(v); }
bool ConvexBody::contains(const Vec& z, double tol) const { return world_->contains(z.data(), tol); }
bool ConvexBody::contains(std::span<const double> z, double tol) const { return world_->contains(z.data(), tol); }
double ConvexBody::chord_extent(const Vec& origin, const Vec& u) const { return world_->chord_extent(origin, u); }
const Vec& ConvexBody::interior_point() const { return world_->interior; }
double ConvexBody::width_bound() const { return world_->width; }
std::size_t ConvexBody::cached_vertex_count() const { return static_cast<std::size_t>(world_->vertices.cols()); }

PointCloud ConvexBody::facet_normals() const {
    const auto& w = *world_;
    PointCloud out(w.dim);
    if (w.kind != Kind::H && !w.has_facets) return out;
    for (Eigen::Index r = 0; r < w.normals.rows(); ++r) out.push_back(Vec(w.normals.row(r).transpose()));
    return out;
}

PointCloud ConvexBody::extreme_points() const {
    PointCloud out(dim());
    for (Eigen::Index j = 0; j < world_->vertices.cols(); ++j) out.push_back(Vec(world_->vertices.col(j)));
    return out;
}

double ConvexBody::bounding_radius(const Vec& c) const {
    const World& w = *world_;
    if (w.kind == Kind::Quadric) return (w.center - c).norm() + std::sqrt(w.lambda_max);
    if (w.vertices.cols() > 0) return (w.vertices.colwise() - c).colwise().norm().maxCoeff();
    const Vec far = (w.box_hi - c).cwiseAbs().cwiseMax((w.box_lo - c).cwiseAbs());
    return far.norm();
}

std::optional<double> ConvexBody::exact_inradius_about_origin() const {
    const World& w = *world_;
    if (w.kind == Kind::H || (w.kind == Kind::V && w.has_facets)) return std::max(0.0, w.offsets.minCoeff());
    if (w.kind == Kind::Quadric && w.center.norm() <= 1e-14 * std::sqrt(w.lambda_max)) return std::sqrt(w.lambda_min);
    return std::nullopt;
}

// ---------------------------------------------------------------- front ends

namespace {

void require_unit(const Vec& xi, int dim) {
    if (xi.size() != dim) throw InputError("direction has wrong dimension");
    if (std::abs(xi.norm() - 1.0) > 1e-9) throw InputError("direction must be a unit vector");
}

}  // namespace

double support_value(const ConvexBody& body, const Vec& xi) {
    require_unit(xi, body.dim());
    return body.support(xi);
}

Vec support_point(const ConvexBody& body, const Vec& xi) {
    require_unit(xi, body.dim());
    return body.support_point(xi);
}

bool contains(const ConvexBody& body, const Vec& z, double tol) {
    if (z.size() != body.dim()) throw InputError("point has wrong dimension");
    if (tol < 0.0) throw InputError("tolerance must be non-negative");
    return body.contains(z, tol);
}

double ray_extent(const ConvexBody& body, const Vec& origin, const Vec& u) {
    require_unit(u, body.dim());
    if (origin.size() != body.dim()) throw InputError("origin has wrong dimension");
    if (!body.contains(origin, 0.0)) throw InputError("ray origin lies outside the body");
    return body.chord_extent(origin, u);
}

// ---------------------------------------------------------------- normalization

int default_support_samples(int dim) {
    const int floor = 2 * dim * (dim + 1);
    if (dim == 1) return 2;
    if (dim == 2) return std::max(floor, 256);
    if (dim == 3) return std::max(floor, 512);
    return std::max(floor, 64 * dim * dim);
}

namespace {

Mat symmetric_sqrt(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

NormalizedBody john_normalize(const ConvexBody& body, int num_support_samples, double tol, double tau_norm) {
    const int d = body.dim();
    if (num_support_samples < 2 * d * (d + 1))
        throw InputError("john_normalize: need at least 2d(d+1) support samples");
    if (!(tol > 0.0)) throw InputError("john_normalize: tolerance must be positive");

    const PointCloud dirs = default_directions(d, static_cast<std::size_t>(num_support_samples), mix_seed(0x4a6f686eULL, d));
    PointCloud sample(d);
    sample.reserve(dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) sample.push_back(body.support_point(to_vec(dirs[i])));
    // Polytope vertices are the exact extreme points; make sure none is missed.
    sample.append(body.extreme_points());
    EnclosingEllipsoid e = minimum_volume_ellipsoid(sample, tol);

    Mat linear = static_cast<double>(d) * symmetric_sqrt(e.shape);
    const Vec shift = -(linear * e.center);
    AffineMap to(linear, shift);
    AffineMap from = to.inverse();
    ConvexBody normalized = body.transformed(to);

    // A posteriori check on fresh directions.
    const std::size_t fresh = d == 1 ? 2 : 10000;
    const PointCloud check = d == 2 ? angular_grid(fresh, 3.14159e-4) : default_directions(d, fresh, mix_seed(0x6368656bULL, d));
    double inner = std::numeric_limits<double>::infinity();
    double outer = 0.0;
    for (std::size_t i = 0; i < check.size(); ++i) {
        const double h = normalized.support(check[i]);
        inner = std::min(inner, h);
        outer = std::max(outer, h);
    }
    if (auto exact = normalized.exact_inradius_about_origin()) inner = std::min(inner, *exact);
    if (normalized.cached_vertex_count() > 0) outer = std::max(outer, normalized.bounding_radius(Vec::Zero(d)));

    if (inner < 1.0 - tau_norm || outer > d * (1.0 + tau_norm)) {
        throw NormalizationFailed("normalization could not certify B(0,1) <= T(body) <= B(0,d) within tolerance", inner,
                                  outer);
    }
    return NormalizedBody{body, std::move(normalized), std::move(to), std::move(from), inner, outer, tau_norm};
}

// ---------------------------------------------------------------- sampling

PointCloud sample_candidates(const ConvexBody& body, const Vec& origin, double radius, std::size_t pool_size,
                             double boundary_fraction, std::uint64_t seed) {
    if (!(boundary_fraction >= 0.0 && boundary_fraction <= 1.0)) throw InputError("boundary_fraction must lie in [0,1]");
    if (!(radius > 0.0)) throw InputError("sampling radius must be positive");
    const int d = body.dim();
    const auto n_boundary = static_cast<std::size_t>(std::floor(boundary_fraction * static_cast<double>(pool_size)));
    const std::size_t n_interior = pool_size - n_boundary;
    PointCloud out(d);
    out.reserve(pool_size);

    Rng interior_rng(mix_seed(seed, 1));
    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 * (n_interior + 10) * static_cast<std::size_t>(1 << std::min(d, 20));
    while (out.size() < n_interior) {
        Vec z = origin + interior_rng.in_ball(d, radius);
        if (body.contains(z, 0.0)) out.push_back(z);
        if (++attempts > max_attempts) throw InputError("rejection sampling failed: sampling ball misses the body");
    }

    Rng boundary_rng(mix_seed(seed, 2));
    for (std::size_t k = 0; k < n_boundary; ++k) {
        const Vec u = boundary_rng.unit_vector(d);
        const double theta = boundary_rng.uniform(0.0, std::numbers::pi);
        const double t = body.chord_extent(origin, u);
        out.push_back(Vec(origin + std::cos(0.5 * theta) * t * u));
    }
    return out;
}

PointCloud sample_candidates(const NormalizedBody& body, std::size_t pool_size, double boundary_fraction,
                             std::uint64_t seed) {
    const int d = body.dim();
    return sample_candidates(body.normalized, Vec::Zero(d), body.outer_radius, pool_size, boundary_fraction, seed);
}

}  // namespace polymesh::geometry
