#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace polymesh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ConstVecMap = Eigen::Map<const Vec>;

// Flat row-major storage for a set of points in R^d. Pools, meshes and
// sample sets are all PointClouds; point(i) is a zero-copy view.
class PointCloud {
  public:
    PointCloud() = default;
    explicit PointCloud(int dim) : dim_(dim) {}
    PointCloud(int dim, std::size_t count) : dim_(dim), coords_(count * static_cast<std::size_t>(dim), 0.0) {}

    int dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_); }
    bool empty() const { return coords_.empty(); }

    std::span<const double> operator[](std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<double> operator[](std::size_t i) {
        return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    ConstVecMap point(std::size_t i) const { return ConstVecMap(coords_.data() + i * static_cast<std::size_t>(dim_), dim_); }

    void push_back(std::span<const double> p) { coords_.insert(coords_.end(), p.begin(), p.end()); }
    void push_back(const Vec& p) { coords_.insert(coords_.end(), p.data(), p.data() + p.size()); }
    void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(dim_)); }
    void append(const PointCloud& other) { coords_.insert(coords_.end(), other.coords_.begin(), other.coords_.end()); }

    const std::vector<double>& raw() const { return coords_; }

    friend bool operator==(const PointCloud&, const PointCloud&) = default;

  private:
    int dim_ = 0;
    std::vector<double> coords_;
};

inline Vec to_vec(std::span<const double> p) { return ConstVecMap(p.data(), static_cast<Eigen::Index>(p.size())); }

inline std::span<const double> as_span(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace polymesh
