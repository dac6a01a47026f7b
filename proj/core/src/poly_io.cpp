#include <string>

#include "polymesh/error.hpp"
#include "polymesh/poly.hpp"

namespace polymesh::poly {

namespace {

json node_to_json(const PolyExpr& p) {
    return std::visit(
        [&](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return {{"type", "affine"}, {"coeffs", to_json_vec(n.coeffs)}, {"constant", n.constant}};
            } else if constexpr (std::is_same_v<T, Cheb>) {
                return {{"type", "cheb"}, {"m", n.m}, {"child", node_to_json(*n.child)}};
            } else if constexpr (std::is_same_v<T, Sum>) {
                json kids = json::array();
                for (const auto& c : n.children) kids.push_back(node_to_json(c));
                return {{"type", "sum"}, {"weights", n.weights}, {"children", kids}};
            } else if constexpr (std::is_same_v<T, Product>) {
                json kids = json::array();
                for (const auto& c : n.children) kids.push_back(node_to_json(c));
                return {{"type", "product"}, {"children", kids}};
            } else if constexpr (std::is_same_v<T, Power>) {
                return {{"type", "power"}, {"k", n.k}, {"child", node_to_json(*n.child)}};
            } else if constexpr (std::is_same_v<T, Scale>) {
                return {{"type", "scale"}, {"factor", n.factor}, {"child", node_to_json(*n.child)}};
            } else {
                return {{"type", "shift"}, {"constant", n.constant}, {"child", node_to_json(*n.child)}};
            }
        },
        p.node());
}

PolyExpr node_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "affine") return PolyExpr::affine(vec_from_json(j.at("coeffs"), "affine.coeffs"), j.at("constant").get<double>());
    if (type == "cheb") return PolyExpr::cheb(j.at("m").get<int>(), node_from_json(j.at("child")));
    if (type == "sum" || type == "product") {
        std::vector<PolyExpr> kids;
        for (const auto& c : j.at("children")) kids.push_back(node_from_json(c));
        if (type == "product") return PolyExpr::product(std::move(kids));
        return PolyExpr::sum(std::move(kids), j.at("weights").get<std::vector<double>>());
    }
    if (type == "power") return PolyExpr::power(node_from_json(j.at("child")), j.at("k").get<int>());
    if (type == "scale") return PolyExpr::scale(node_from_json(j.at("child")), j.at("factor").get<double>());
    if (type == "shift") return PolyExpr::shift(node_from_json(j.at("child")), j.at("constant").get<double>());
    throw ParseError("unknown polynomial node type '" + type + "'");
}

}  // namespace

json poly_to_json(const PolyExpr& p) {
    return {{"format", "polymesh-poly"}, {"dim", p.dim()}, {"degree", p.degree()}, {"root", node_to_json(p)}};
}

PolyExpr poly_from_json(const json& j) {
    try {
        PolyExpr p = node_from_json(j.contains("root") ? j.at("root") : j);
        if (j.contains("degree") && j.at("degree").get<int>() != p.degree())
            throw ParseError("recorded degree does not match the expression tree");
        return p;
    } catch (const json::exception& e) {
        throw ParseError(std::string("polynomial file: ") + e.what());
    } catch (const InputError& e) {
        throw ParseError(std::string("polynomial file: ") + e.what());
    }
}

PolyExpr load_poly(const std::string& path) { return poly_from_json(read_json_file(path)); }

}  // namespace polymesh::poly
