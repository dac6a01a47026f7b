#include "polymesh/body_io.hpp"

#include "polymesh/error.hpp"

namespace polymesh::geometry {
namespace {

const json& field(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(ctx + ": missing field '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ParseError(what + ": expected a number");
    return j.get<double>();
}

void expect_dim(Eigen::Index got, int dim, const std::string& what) {
    if (got != dim) throw ParseError(what + ": dimension does not match 'dim'");
}

}  // namespace

AffineMap affine_from_json(const json& j) {
    const Mat m = mat_from_json(field(j, "matrix", "transform"), "transform.matrix");
    const Vec t = j.contains("shift") ? vec_from_json(j.at("shift"), "transform.shift") : Vec::Zero(m.rows());
    if (m.rows() != m.cols() || t.size() != m.rows()) throw ParseError("transform: matrix must be d x d, shift length d");
    try {
        return AffineMap(m, t);
    } catch (const InputError& e) {
        throw MalformedBody(std::string("transform: ") + e.what());
    }
}

json affine_to_json(const AffineMap& map) {
    return json{{"matrix", to_json_mat(map.matrix())}, {"shift", to_json_vec(map.shift())}};
}

ConvexBody body_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("body: expected a JSON object");
    const json& dj = field(j, "dim", "body");
    if (!dj.is_number_integer() || dj.get<long long>() < 1) throw ParseError("body: 'dim' must be a positive integer");
    const int dim = dj.get<int>();
    const json& sj = field(j, "shape", "body");
    const json& tj = field(sj, "type", "shape");
    if (!tj.is_string()) throw ParseError("shape: 'type' must be a string");
    const std::string type = tj.get<std::string>();

    Shape shape;
    if (type == "hpolytope") {
        const json& hs = field(sj, "halfspaces", "hpolytope");
        if (!hs.is_array()) throw ParseError("hpolytope: 'halfspaces' must be an array");
        HPolytope h;
        for (const auto& e : hs) {
            Vec a = vec_from_json(field(e, "normal", "halfspace"), "halfspace.normal");
            expect_dim(a.size(), dim, "halfspace.normal");
            h.halfspaces.push_back({std::move(a), number(field(e, "offset", "halfspace"), "halfspace.offset")});
        }
        if (h.halfspaces.empty()) throw MalformedBody("hpolytope: no halfspaces");
        shape = std::move(h);
    } else if (type == "vpolytope") {
        const PointCloud pts = points_from_json(field(sj, "vertices", "vpolytope"), "vpolytope.vertices");
        if (pts.empty()) throw MalformedBody("vpolytope: no vertices");
        expect_dim(pts.dim(), dim, "vpolytope.vertices");
        VPolytope v;
        for (std::size_t i = 0; i < pts.size(); ++i) v.vertices.push_back(pts.point(i));
        shape = std::move(v);
    } else if (type == "ball") {
        Vec c = vec_from_json(field(sj, "center", "ball"), "ball.center");
        expect_dim(c.size(), dim, "ball.center");
        shape = Ball{std::move(c), number(field(sj, "radius", "ball"), "ball.radius")};
    } else if (type == "ellipsoid") {
        Vec c = vec_from_json(field(sj, "center", "ellipsoid"), "ellipsoid.center");
        expect_dim(c.size(), dim, "ellipsoid.center");
        Mat a = mat_from_json(field(sj, "axes", "ellipsoid"), "ellipsoid.axes");
        shape = Ellipsoid{std::move(c), std::move(a)};
    } else {
        throw ParseError("shape: unknown type '" + type + "'");
    }

    std::optional<AffineMap> transform;
    if (j.contains("transform") && !j.at("transform").is_null()) {
        transform = affine_from_json(j.at("transform"));
        expect_dim(transform->dim(), dim, "transform");
    }
    try {
        return ConvexBody(std::move(shape), std::move(transform));
    } catch (const InputError& e) {
        throw MalformedBody(e.what());
    }
}

json body_to_json(const ConvexBody& body) {
    json shape = std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HPolytope>) {
                json hs = json::array();
                for (const auto& h : s.halfspaces) hs.push_back({{"normal", to_json_vec(h.normal)}, {"offset", h.offset}});
                return {{"type", "hpolytope"}, {"halfspaces", hs}};
            } else if constexpr (std::is_same_v<S, VPolytope>) {
                json vs = json::array();
                for (const auto& v : s.vertices) vs.push_back(to_json_vec(v));
                return {{"type", "vpolytope"}, {"vertices", vs}};
            } else if constexpr (std::is_same_v<S, Ball>) {
                return {{"type", "ball"}, {"center", to_json_vec(s.center)}, {"radius", s.radius}};
            } else {
                return {{"type", "ellipsoid"}, {"center", to_json_vec(s.center)}, {"axes", to_json_mat(s.axes)}};
            }
        },
        body.shape());
    json out{{"dim", body.dim()}, {"shape", shape}};
    if (body.transform()) out["transform"] = affine_to_json(*body.transform());
    return out;
}

ConvexBody load_body(const std::string& path) { return body_from_json(read_json_file(path)); }

std::string body_fingerprint(const ConvexBody& body) { return fnv1a_hex(body_to_json(body).dump()); }

}  // namespace polymesh::geometry
