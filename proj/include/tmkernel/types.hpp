#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace tmkernel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-per-point storage: row i is one state or one embedded point.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Axis-aligned box [lo_k, hi_k] in R^n.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const noexcept { return lo.size(); }
    double width(std::size_t axis) const { return hi[axis] - lo[axis]; }
    double volume() const;
    bool contains(std::span<const double> x) const;
    /// Throws ValidationError unless lo < hi on every axis.
    void validate() const;
};

/// Sum with pairwise (cascade) reduction; error grows as O(log n) instead of O(n).
double pairwise_sum(std::span<const double> values);

}  // namespace tmkernel
