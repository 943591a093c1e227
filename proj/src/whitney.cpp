#include "tmkernel/whitney.hpp"

#include "tmkernel/error.hpp"
#include "tmkernel/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace tmkernel {

std::string to_string(FeatureDistribution d) { return d == FeatureDistribution::uniform ? "uniform" : "gaussian"; }

FeatureDistribution feature_distribution_from_string(const std::string& text) {
    if (text == "uniform") return FeatureDistribution::uniform;
    if (text == "gaussian") return FeatureDistribution::gaussian;
    throw ValidationError(fmt::format("unknown feature distribution '{}' (expected uniform or gaussian)", text));
}

void FeatureMatrix::validate() const {
    if (r < 1) throw ValidationError(fmt::format("manifold dimension r must be >= 1, got {}", r));
    if (a.rows() != 2 * r + 1)
        throw ValidationError(fmt::format("feature matrix has {} rows, expected 2r+1 = {}", a.rows(), 2 * r + 1));
    if (a.cols() < 1) throw ValidationError("feature matrix has no columns");
}

FeatureMatrix draw_feature_matrix(int r, std::size_t n, FeatureDistribution distribution, std::uint64_t seed) {
    if (r < 1 || n < 1) throw ValidationError("draw_feature_matrix needs r >= 1 and n >= 1");
    Engine rng = make_stream(stream_key(seed, stream_tag::features), 0);
    FeatureMatrix f;
    f.r = r;
    f.a.resize(2 * r + 1, static_cast<Eigen::Index>(n));
    f.provenance = {true, distribution, seed, fmt::format("seeded-{}", to_string(distribution))};
    if (distribution == FeatureDistribution::uniform) {
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (Eigen::Index i = 0; i < f.a.rows(); ++i)
            for (Eigen::Index j = 0; j < f.a.cols(); ++j) {
                double v = u(rng);
                while (v == -0.5) v = u(rng);  // open interval
                f.a(i, j) = v;
            }
    } else {
        std::normal_distribution<double> g(0.0, 1.0);
        for (Eigen::Index i = 0; i < f.a.rows(); ++i)
            for (Eigen::Index j = 0; j < f.a.cols(); ++j) f.a(i, j) = g(rng);
    }
    return f;
}

FeatureMatrix explicit_feature_matrix(RowMatrix a, std::string label) {
    if (a.rows() % 2 == 0) throw ValidationError(fmt::format("feature matrix must have 2r+1 rows, got {}", a.rows()));
    FeatureMatrix f;
    f.r = static_cast<int>((a.rows() - 1) / 2);
    f.a = std::move(a);
    f.provenance.label = std::move(label);
    f.validate();
    return f;
}

FeatureMatrix horseshoe_good_features() {
    RowMatrix a(3, 2);
    a << -0.08, -0.20,
          0.22, -0.35,
         -0.49, -0.41;
    return explicit_feature_matrix(std::move(a), "A_g");
}

FeatureMatrix horseshoe_bad_features(double eps) {
    RowMatrix a(3, 2);
    a << 0.0, 1.0,
         eps, 1.0 + eps,
        -eps, 1.0 - eps;
    return explicit_feature_matrix(std::move(a), "A_b");
}

RowMatrix whitney_embed(const BurstEnsemble& ens, const FeatureMatrix& features) {
    features.validate();
    if (static_cast<std::size_t>(features.a.cols()) != ens.dim)
        throw ValidationError(fmt::format("feature matrix has {} columns, bursts have dimension {}", features.a.cols(), ens.dim));
    const RowMatrix means = ens.burst_means();
    return means * features.a.transpose();
}

SymmetricMatrix euclidean_distance_matrix(const RowMatrix& coords) {
    const auto N = static_cast<std::size_t>(coords.rows());
    SymmetricMatrix D(N, MatrixKind::distance);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < i; ++j) D.at_lower(i, j) = (coords.row(i) - coords.row(j)).norm();
    return D;
}

}  // namespace tmkernel
