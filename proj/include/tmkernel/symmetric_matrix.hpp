#pragma once

#include "tmkernel/types.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace tmkernel {

enum class MatrixKind { gram, distance };

std::string_view to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(std::string_view text);

/// Dense N x N symmetric matrix stored as its lower triangle, row by row
/// (entry (i, j) with j <= i at offset i*(i+1)/2 + j).
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    SymmetricMatrix(std::size_t n, MatrixKind kind);
    SymmetricMatrix(std::size_t n, MatrixKind kind, std::vector<double> lower);

    /// Rejects non-square or asymmetric input (tolerance relative to max |entry|).
    static SymmetricMatrix from_dense(const Matrix& dense, MatrixKind kind,
                                      double rel_tol = 1e-12);

    std::size_t size() const noexcept { return n_; }
    MatrixKind kind() const noexcept { return kind_; }

    double operator()(std::size_t i, std::size_t j) const noexcept {
        return i >= j ? lower_[offset(i, j)] : lower_[offset(j, i)];
    }
    double& at_lower(std::size_t i, std::size_t j) noexcept { return lower_[offset(i, j)]; }
    void set(std::size_t i, std::size_t j, double value) noexcept {
        if (i >= j)
            lower_[offset(i, j)] = value;
        else
            lower_[offset(j, i)] = value;
    }

    const std::vector<double>& lower() const noexcept { return lower_; }
    Matrix to_dense() const;

    /// Same entries with rows/columns reordered: result(a, b) = (*this)(perm[a], perm[b]).
    SymmetricMatrix permuted(std::span<const std::size_t> perm) const;

    friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

private:
    static std::size_t offset(std::size_t i, std::size_t j) noexcept { return i * (i + 1) / 2 + j; }

    std::size_t n_ = 0;
    MatrixKind kind_ = MatrixKind::distance;
    std::vector<double> lower_;
};

}  // namespace tmkernel
