#include "tmkernel/error.hpp"
#include "tmkernel/symmetric_matrix.hpp"
#include "tmkernel/types.hpp"

#include <fmt/format.h>

#include <cmath>
#include <iostream>
#include <mutex>

namespace tmkernel {

namespace {

std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& warning_handler() {
    static WarningHandler handler = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return handler;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(warning_mutex());
    warning_handler() = std::move(handler);
}

void warn(const std::string& message) {
    std::lock_guard lock(warning_mutex());
    if (warning_handler()) warning_handler()(message);
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t k = 0; k < dim(); ++k) v *= width(k);
    return v;
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t k = 0; k < dim(); ++k)
        if (!(x[k] >= lo[k] && x[k] <= hi[k])) return false;
    return true;
}

void Box::validate() const {
    if (lo.empty() || lo.size() != hi.size())
        throw ValidationError("box: lower and upper corners must have the same nonzero dimension");
    for (std::size_t k = 0; k < dim(); ++k)
        if (!(lo[k] < hi[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
            throw ValidationError(fmt::format("box: empty or non-finite extent on axis {} ([{}, {}])", k, lo[k], hi[k]));
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t block = 64;
    if (values.size() <= block) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::string_view to_string(MatrixKind kind) {
    return kind == MatrixKind::gram ? "gram" : "distance";
}

MatrixKind matrix_kind_from_string(std::string_view text) {
    if (text == "gram") return MatrixKind::gram;
    if (text == "distance") return MatrixKind::distance;
    throw ValidationError(fmt::format("unknown matrix kind '{}' (expected gram or distance)", text));
}

SymmetricMatrix::SymmetricMatrix(std::size_t n, MatrixKind kind)
    : n_(n), kind_(kind), lower_(n * (n + 1) / 2, 0.0) {}

SymmetricMatrix::SymmetricMatrix(std::size_t n, MatrixKind kind, std::vector<double> lower)
    : n_(n), kind_(kind), lower_(std::move(lower)) {
    if (lower_.size() != n * (n + 1) / 2)
        throw ValidationError(fmt::format("symmetric matrix: expected {} lower-triangle entries for N={}, got {}",
                                          n * (n + 1) / 2, n, lower_.size()));
}

SymmetricMatrix SymmetricMatrix::from_dense(const Matrix& dense, MatrixKind kind, double rel_tol) {
    if (dense.rows() != dense.cols())
        throw ValidationError(fmt::format("matrix is {}x{}, expected square", dense.rows(), dense.cols()));
    const auto n = static_cast<std::size_t>(dense.rows());
    const double scale = n == 0 ? 0.0 : dense.cwiseAbs().maxCoeff();
    SymmetricMatrix out(n, kind);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double a = dense(i, j);
            const double b = dense(j, i);
            if (std::abs(a - b) > rel_tol * scale)
                throw ValidationError(fmt::format("matrix is not symmetric at ({}, {}): {} vs {}", i, j, a, b));
            out.at_lower(i, j) = a;
        }
    }
    return out;
}

Matrix SymmetricMatrix::to_dense() const {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = lower_[offset(i, j)];
    return m;
}

SymmetricMatrix SymmetricMatrix::permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != n_) throw ValidationError("permutation length does not match matrix size");
    SymmetricMatrix out(n_, kind_);
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = 0; b <= a; ++b) out.at_lower(a, b) = (*this)(perm[a], perm[b]);
    return out;
}

}  // namespace tmkernel
