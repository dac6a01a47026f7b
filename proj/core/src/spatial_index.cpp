#include "polymesh/spatial_index.hpp"

#include <algorithm>
#include <cmath>

#include "polymesh/error.hpp"

namespace polymesh {

GridIndex::GridIndex(const PointCloud& points, double cell, std::size_t max_cells)
    : dim_(points.dim()), cell_(cell), points_(&points) {
    if (!(cell > 0.0)) throw InputError("grid cell width must be positive");
    const std::size_t n = points.size();
    lo_.assign(static_cast<std::size_t>(dim_), 0.0);
    std::vector<double> hi(static_cast<std::size_t>(dim_), 0.0);
    if (n > 0) {
        for (int i = 0; i < dim_; ++i) lo_[static_cast<std::size_t>(i)] = hi[static_cast<std::size_t>(i)] = points[0][static_cast<std::size_t>(i)];
        for (std::size_t k = 1; k < n; ++k)
            for (int i = 0; i < dim_; ++i) {
                const double v = points[k][static_cast<std::size_t>(i)];
                lo_[static_cast<std::size_t>(i)] = std::min(lo_[static_cast<std::size_t>(i)], v);
                hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], v);
            }
    }
    // Coarsen until the cell count fits.
    while (true) {
        res_.assign(static_cast<std::size_t>(dim_), 1);
        double total = 1.0;
        for (int i = 0; i < dim_; ++i) {
            const double extent = hi[static_cast<std::size_t>(i)] - lo_[static_cast<std::size_t>(i)];
            res_[static_cast<std::size_t>(i)] = std::max(1, static_cast<int>(std::floor(extent / cell_)) + 1);
            total *= res_[static_cast<std::size_t>(i)];
        }
        if (total <= static_cast<double>(max_cells)) break;
        cell_ *= 1.5;
    }
    std::size_t cells = 1;
    for (int r : res_) cells *= static_cast<std::size_t>(r);
    std::vector<std::size_t> owner(n);
    start_.assign(cells + 1, 0);
    for (std::size_t k = 0; k < n; ++k) {
        owner[k] = cell_of(points[k]);
        ++start_[owner[k] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) start_[c + 1] += start_[c];
    order_.resize(n);
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < n; ++k) order_[fill[owner[k]]++] = static_cast<std::uint32_t>(k);
}

std::size_t GridIndex::cell_of(std::span<const double> p) const {
    std::size_t idx = 0;
    for (int i = dim_ - 1; i >= 0; --i) {
        const auto ui = static_cast<std::size_t>(i);
        int c = static_cast<int>(std::floor((p[ui] - lo_[ui]) / cell_));
        c = std::clamp(c, 0, res_[ui] - 1);
        idx = idx * static_cast<std::size_t>(res_[ui]) + static_cast<std::size_t>(c);
    }
    return idx;
}

void GridIndex::query_box(std::span<const double> center, double r, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (order_.empty()) return;
    std::vector<int> lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_)), cur;
    for (int i = 0; i < dim_; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double a = std::floor((center[ui] - r - lo_[ui]) / cell_);
        const double b = std::floor((center[ui] + r - lo_[ui]) / cell_);
        lo[ui] = static_cast<int>(std::clamp(a, 0.0, static_cast<double>(res_[ui] - 1)));
        hi[ui] = static_cast<int>(std::clamp(b, 0.0, static_cast<double>(res_[ui] - 1)));
        if (b < 0.0 || a > res_[ui] - 1) return;
    }
    cur = lo;
    const PointCloud& pts = *points_;
    while (true) {
        std::size_t idx = 0;
        for (int i = dim_ - 1; i >= 0; --i)
            idx = idx * static_cast<std::size_t>(res_[static_cast<std::size_t>(i)]) + static_cast<std::size_t>(cur[static_cast<std::size_t>(i)]);
        for (std::uint32_t s = start_[idx]; s < start_[idx + 1]; ++s) {
            const std::uint32_t k = order_[s];
            const auto p = pts[k];
            bool in = true;
            for (int i = 0; i < dim_ && in; ++i)
                in = std::abs(p[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)]) <= r;
            if (in) out.push_back(k);
        }
        int i = 0;
        while (i < dim_) {
            const auto ui = static_cast<std::size_t>(i);
            if (++cur[ui] <= hi[ui]) break;
            cur[ui] = lo[ui];
            ++i;
        }
        if (i == dim_) break;
    }
    std::sort(out.begin(), out.end());
}

std::vector<std::int64_t> DynamicGrid::key_of(std::span<const double> p) const {
    std::vector<std::int64_t> key(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i)
        key[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(p[static_cast<std::size_t>(i)] / cell_));
    return key;
}

std::size_t DynamicGrid::hash_key(const std::vector<std::int64_t>& key) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto v : key) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 0x100000001b3ULL;
        h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
}

std::uint32_t DynamicGrid::insert(std::span<const double> p) {
    const auto id = static_cast<std::uint32_t>(count_);
    auto key = key_of(p);
    auto& bucket = buckets_[hash_key(key) % buckets_.size()];
    for (auto& e : bucket)
        if (e.key == key) {
            e.ids.push_back(id);
            ++count_;
            coords_.insert(coords_.end(), p.begin(), p.end());
            return id;
        }
    bucket.push_back({std::move(key), {id}});
    ++count_;
    coords_.insert(coords_.end(), p.begin(), p.end());
    return id;
}

void DynamicGrid::query_box(std::span<const double> center, double r, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (count_ == 0) return;
    std::vector<std::int64_t> lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_));
    double cells = 1.0;
    for (int i = 0; i < dim_; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        lo[ui] = static_cast<std::int64_t>(std::floor((center[ui] - r) / cell_));
        hi[ui] = static_cast<std::int64_t>(std::floor((center[ui] + r) / cell_));
        cells *= static_cast<double>(hi[ui] - lo[ui] + 1);
    }
    auto inside = [&](std::uint32_t id) {
        const double* q = coords_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim_);
        for (int i = 0; i < dim_; ++i)
            if (std::abs(q[i] - center[static_cast<std::size_t>(i)]) > r) return false;
        return true;
    };
    if (cells > static_cast<double>(count_)) {
        // Sparse case: scanning every point is cheaper than visiting cells.
        for (std::uint32_t id = 0; id < count_; ++id)
            if (inside(id)) out.push_back(id);
        return;
    }
    std::vector<std::int64_t> cur = lo;
    while (true) {
        const auto& bucket = buckets_[hash_key(cur) % buckets_.size()];
        for (const auto& e : bucket)
            if (e.key == cur)
                for (auto id : e.ids)
                    if (inside(id)) out.push_back(id);
        int i = 0;
        while (i < dim_) {
            const auto ui = static_cast<std::size_t>(i);
            if (++cur[ui] <= hi[ui]) break;
            cur[ui] = lo[ui];
            ++i;
        }
        if (i == dim_) break;
    }
    std::sort(out.begin(), out.end());
}

}  // namespace polymesh
