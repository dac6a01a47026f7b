#pragma once

// Independent polynomial oracles for the test suites.

#include <cmath>
#include <map>
#include <random>
#include <type_traits>

#include "polymesh/poly.hpp"

namespace testutil {

using polymesh::Vec;
using polymesh::poly::Affine;
using polymesh::poly::Cheb;
using polymesh::poly::PolyExpr;
using polymesh::poly::Power;
using polymesh::poly::Product;
using polymesh::poly::Scale;
using polymesh::poly::Sum;

// Monomial-basis expansion in two variables, written independently of the
// library's Chebyshev-basis expansion.
using Mono = std::map<std::pair<int, int>, double>;

inline Mono mono_add(const Mono& a, const Mono& b, double wa = 1.0, double wb = 1.0) {
    Mono r;
    for (const auto& [k, v] : a) r[k] += wa * v;
    for (const auto& [k, v] : b) r[k] += wb * v;
    return r;
}

inline Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    for (const auto& [ka, va] : a)
        for (const auto& [kb, vb] : b) r[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
    return r;
}

inline Mono mono_const(double c) { return Mono{{{0, 0}, c}}; }

inline Mono mono_expand(const PolyExpr& p) {
    return std::visit(
        [](const auto& n) -> Mono {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return Mono{{{0, 0}, n.constant}, {{1, 0}, n.coeffs[0]}, {{0, 1}, n.coeffs[1]}};
            } else if constexpr (std::is_same_v<T, Cheb>) {
                const Mono u = mono_expand(*n.child);
                Mono prev = mono_const(1.0), cur = u;
                if (n.m == 0) return prev;
                for (int k = 1; k < n.m; ++k) {
                    Mono next = mono_add(mono_mul(u, cur), prev, 2.0, -1.0);
                    prev = std::move(cur);
                    cur = std::move(next);
                }
                return cur;
            } else if constexpr (std::is_same_v<T, Sum>) {
                Mono r;
                for (std::size_t i = 0; i < n.children.size(); ++i)
                    r = mono_add(r, mono_expand(n.children[i]), 1.0, n.weights[i]);
                return r;
            } else if constexpr (std::is_same_v<T, Product>) {
                Mono r = mono_const(1.0);
                for (const auto& c : n.children) r = mono_mul(r, mono_expand(c));
                return r;
            } else if constexpr (std::is_same_v<T, Power>) {
                const Mono b = mono_expand(*n.child);
                Mono r = mono_const(1.0);
                for (int i = 0; i < n.k; ++i) r = mono_mul(r, b);
                return r;
            } else if constexpr (std::is_same_v<T, Scale>) {
                return mono_add(mono_expand(*n.child), {}, n.factor, 0.0);
            } else {
                return mono_add(mono_expand(*n.child), mono_const(n.constant));
            }
        },
        p.node());
}

inline int mono_degree(const Mono& m) {
    double big = 0.0;
    for (const auto& [k, v] : m) big = std::max(big, std::abs(v));
    int deg = 0;
    for (const auto& [k, v] : m)
        if (std::abs(v) > 1e-9 * big) deg = std::max(deg, k.first + k.second);
    return deg;
}

inline double mono_eval(const Mono& m, double x, double y) {
    double s = 0.0;
    for (const auto& [k, v] : m) s += v * std::pow(x, k.first) * std::pow(y, k.second);
    return s;
}

// Random expression of structural degree about `budget`. Coefficients are
// random, so top-degree cancellation has probability zero.
inline PolyExpr random_tree(std::mt19937_64& rng, int budget, int depth = 0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 4);
    auto leaf = [&] {
        Vec c(2);
        c << u(rng), u(rng);
        return PolyExpr::affine(0.5 * c, 0.3 * u(rng));
    };
    if (budget <= 1 || depth >= 3) return leaf();
    switch (pick(rng)) {
        case 0: {
            const int m = 2 + static_cast<int>(rng() % static_cast<unsigned>(std::min(budget, 6) - 1));
            return PolyExpr::cheb(std::min(m, budget), leaf());
        }
        case 1: {
            const int a = 1 + static_cast<int>(rng() % static_cast<unsigned>(budget));
            return PolyExpr::product({random_tree(rng, a, depth + 1), random_tree(rng, std::max(1, budget - a), depth + 1)});
        }
        case 2: {
            const int k = budget >= 2 ? 2 : 1;
            return PolyExpr::power(random_tree(rng, budget / k, depth + 1), k);
        }
        case 3:
            return PolyExpr::shift(PolyExpr::scale(random_tree(rng, budget, depth + 1), 0.5 + u(rng) * 0.25), u(rng));
        default:
            return PolyExpr::sum({random_tree(rng, budget, depth + 1), leaf()}, {1.0, 0.7});
    }
}

}  // namespace testutil
