#pragma once

#include <cstdint>
#include <vector>

#include "polymesh/types.hpp"

namespace polymesh {

// Uniform bucket grid over a fixed point set. Supports axis-aligned box
// queries; callers layer metric-specific pruning on top.
class GridIndex {
  public:
    GridIndex() = default;
    // `cell` is the target cell width; the grid is coarsened if the total
    // cell count would exceed `max_cells`.
    GridIndex(const PointCloud& points, double cell, std::size_t max_cells = std::size_t{1} << 22);

    // Indices of all points with |p_i - c_i| <= r for every axis, ascending.
    void query_box(std::span<const double> center, double r, std::vector<std::uint32_t>& out) const;

    std::size_t size() const { return order_.size(); }
    double cell_width() const { return cell_; }

  private:
    int dim_ = 0;
    double cell_ = 1.0;
    std::vector<double> lo_;
    std::vector<int> res_;
    std::vector<std::uint32_t> start_;  // CSR offsets, one per cell plus one
    std::vector<std::uint32_t> order_;  // point indices grouped by cell
    const PointCloud* points_ = nullptr;

    std::size_t cell_of(std::span<const double> p) const;
};

// Growable variant for incremental point sets (mesh under construction).
// Cells are hashed so memory is proportional to the number of points.
class DynamicGrid {
  public:
    DynamicGrid(int dim, double cell) : dim_(dim), cell_(cell) {}

    // Ids are assigned in insertion order starting at 0.
    std::uint32_t insert(std::span<const double> p);
    void query_box(std::span<const double> center, double r, std::vector<std::uint32_t>& out) const;
    std::size_t size() const { return count_; }

  private:
    int dim_;
    double cell_;
    std::size_t count_ = 0;
    struct Entry {
        std::vector<std::int64_t> key;
        std::vector<std::uint32_t> ids;
    };
    std::vector<std::vector<Entry>> buckets_ = std::vector<std::vector<Entry>>(4096);
    std::vector<double> coords_;

    std::vector<std::int64_t> key_of(std::span<const double> p) const;
    static std::size_t hash_key(const std::vector<std::int64_t>& key);
};

}  // namespace polymesh
