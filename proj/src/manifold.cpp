#include "tmkernel/manifold.hpp"

#include "tmkernel/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace tmkernel {

std::string EmbeddingResult::method_label() const {
    return method == Method::mds ? "mds" : fmt::format("dmap(bandwidth={})", bandwidth);
}

namespace {

struct DiffusionOperator {
    Matrix symmetric;  // d^{-1/2} W~ d^{-1/2}
    Vector degree;     // row sums of W~
};

DiffusionOperator build_diffusion_operator(const SymmetricMatrix& distances, double bandwidth) {
    if (distances.kind() != MatrixKind::distance) throw ValidationError("diffusion maps expects a distance matrix");
    if (!(bandwidth > 0.0)) throw ValidationError(fmt::format("diffusion maps bandwidth must be positive, got {}", bandwidth));
    const auto N = static_cast<Eigen::Index>(distances.size());
    if (N < 2) throw ValidationError("diffusion maps needs at least two points");

    Matrix w(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        double off_diagonal = 0.0;
        for (Eigen::Index j = 0; j < N; ++j) {
            const double d = distances(i, j);
            w(i, j) = std::exp(-d * d / bandwidth);
            if (j != i) off_diagonal += w(i, j);
        }
        if (off_diagonal < 1e-12)
            throw NumericalError(fmt::format("diffusion maps graph is disconnected: point {} has no neighbour at "
                                             "bandwidth {} (increase the bandwidth)",
                                             i, bandwidth));
    }
    // alpha = 1: remove the sampling density.
    const Vector q = w.rowwise().sum();
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) w(i, j) /= q[i] * q[j];

    DiffusionOperator op;
    op.degree = w.rowwise().sum();
    const Vector inv_sqrt = op.degree.cwiseSqrt().cwiseInverse();
    op.symmetric = inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();
    op.symmetric = 0.5 * (op.symmetric + op.symmetric.transpose());
    return op;
}

}  // namespace

Matrix diffusion_markov_matrix(const SymmetricMatrix& distances, double bandwidth) {
    const auto op = build_diffusion_operator(distances, bandwidth);
    const Vector sqrt_d = op.degree.cwiseSqrt();
    return sqrt_d.cwiseInverse().asDiagonal() * op.symmetric * sqrt_d.asDiagonal();
}

EmbeddingResult diffusion_maps(const SymmetricMatrix& distances, double bandwidth, std::size_t components) {
    if (components < 1 || components >= distances.size())
        throw ValidationError(fmt::format("diffusion maps needs 1 <= components < N (got {} for N = {})", components,
                                          distances.size()));
    const auto op = build_diffusion_operator(distances, bandwidth);
    const auto pairs = symmetric_eigs(op.symmetric, components + 1);

    // Right eigenvectors of P = D^{-1} W~ are d^{-1/2} u; normalize so sum_i pi_i v_i^2 = 1,
    // pi = d / sum(d). Then v_0 is identically 1.
    const double total = op.degree.sum();
    const Vector inv_sqrt = op.degree.cwiseSqrt().cwiseInverse();

    EmbeddingResult out;
    out.method = EmbeddingResult::Method::diffusion_maps;
    out.bandwidth = bandwidth;
    out.eigenvalues = pairs.values;
    out.coords.resize(static_cast<Eigen::Index>(distances.size()), static_cast<Eigen::Index>(components));
    for (std::size_t j = 1; j <= components; ++j) {
        Vector v = inv_sqrt.cwiseProduct(pairs.vectors.col(j)) * std::sqrt(total);
        canonical_sign(v);
        out.coords.col(j - 1) = pairs.values[j] * v;
    }
    return out;
}

EmbeddingResult classical_mds(const SymmetricMatrix& distances, std::size_t k) {
    if (distances.kind() != MatrixKind::distance) throw ValidationError("classical MDS expects a distance matrix");
    const std::size_t N = distances.size();
    if (k < 1 || k > N - 1) throw ValidationError(fmt::format("classical MDS needs 1 <= k <= N-1 (got k = {}, N = {})", k, N));

    Matrix d2 = distances.to_dense().array().square().matrix();
    // B = -1/2 J D^2 J via row/column means.
    const Vector row_mean = d2.rowwise().mean();
    const double grand_mean = row_mean.mean();
    Matrix b(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) b(i, j) = -0.5 * (d2(i, j) - row_mean[i] - row_mean[j] + grand_mean);

    const auto pairs = symmetric_eigs(b, N);
    std::size_t usable = 0;
    const double tol = 1e-12 * std::max(std::abs(pairs.values[0]), 1e-300);
    while (usable < k && pairs.values[usable] > tol) ++usable;
    if (pairs.values[N - 1] < -tol)
        warn(fmt::format("classical MDS: B has negative eigenvalues (smallest {:.3g}); the distances are not exactly "
                         "Euclidean and those directions are dropped",
                         pairs.values[N - 1]));
    if (usable < k)
        warn(fmt::format("classical MDS: only {} positive eigenvalues, returning {} of the {} requested coordinates",
                         usable, usable, k));

    EmbeddingResult out;
    out.method = EmbeddingResult::Method::mds;
    out.eigenvalues = pairs.values;
    out.coords.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(usable));
    for (std::size_t j = 0; j < usable; ++j) out.coords.col(j) = pairs.vectors.col(j) * std::sqrt(pairs.values[j]);
    return out;
}

std::size_t spectral_gap_dimension(const Vector& eigenvalues, double ratio) {
    for (Eigen::Index r = 0; r + 1 < eigenvalues.size(); ++r) {
        const double next = eigenvalues[r + 1];
        if (eigenvalues[r] > 0.0 && (next <= 0.0 || eigenvalues[r] / next >= ratio)) return static_cast<std::size_t>(r + 1);
    }
    return 0;
}

}  // namespace tmkernel
