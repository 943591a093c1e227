#include "tmkernel/eigensolver.hpp"

#include "tmkernel/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace tmkernel {

void canonical_sign(Eigen::Ref<Vector> v) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // Ties within round-off go to the first index so the choice is stable.
        if (std::abs(v[i]) > best_abs * (1.0 + 1e-12)) {
            best_abs = std::abs(v[i]);
            best = i;
        }
    }
    if (v.size() > 0 && v[best] < 0.0) v = -v;
}

EigenPairs symmetric_eigs(const Matrix& a, std::size_t count) {
    if (a.rows() != a.cols()) throw ValidationError("symmetric_eigs: matrix must be square");
    const auto n = static_cast<std::size_t>(a.rows());
    if (count > n) throw ValidationError(fmt::format("symmetric_eigs: requested {} eigenpairs of a {}x{} matrix", count, n, n));

    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("symmetric_eigs: dense eigensolver did not converge",
                               std::numeric_limits<double>::infinity());

    // Eigen returns ascending order.
    EigenPairs out{Vector(count), Matrix(n, count)};
    for (std::size_t j = 0; j < count; ++j) {
        const auto src = static_cast<Eigen::Index>(n - 1 - j);
        out.values[j] = solver.eigenvalues()[src];
        out.vectors.col(j) = solver.eigenvectors().col(src);
        canonical_sign(out.vectors.col(j));
    }

    const double norm = n == 0 ? 0.0 : solver.eigenvalues().cwiseAbs().maxCoeff();
    for (std::size_t j = 0; j < count; ++j) {
        const double residual = (a * out.vectors.col(j) - out.values[j] * out.vectors.col(j)).norm();
        if (residual > 1e-8 * std::max(norm, 1e-300))
            throw ConvergenceError(fmt::format("symmetric_eigs: eigenpair {} has residual {:.3e} (|A| = {:.3e})", j,
                                               residual, norm),
                                   residual);
    }
    return out;
}

}  // namespace tmkernel
