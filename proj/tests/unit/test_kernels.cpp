#include "tmkernel/diagnostics.hpp"
#include "tmkernel/error.hpp"
#include "tmkernel/kernels.hpp"
#include "tmkernel/mercer.hpp"
#include "tmkernel/oracle.hpp"
#include "tmkernel/symmetric_matrix.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tmkernel;

namespace {

// Inner-product matrix of burst-averaged explicit features.
Matrix feature_gram(const BurstEnsemble& ens, int degree) {
    std::vector<std::vector<double>> mean(ens.num_points);
    for (std::size_t i = 0; i < ens.num_points; ++i) {
        for (std::size_t l = 0; l < ens.samples_per_point; ++l) {
            const auto f = degree == 0 ? linear_features(ens.sample(i, l)) : poly_features(ens.sample(i, l), degree);
            if (mean[i].empty()) mean[i].assign(f.size(), 0.0);
            for (std::size_t p = 0; p < f.size(); ++p) mean[i][p] += f[p] / static_cast<double>(ens.samples_per_point);
        }
    }
    Matrix g(ens.num_points, ens.num_points);
    for (std::size_t i = 0; i < ens.num_points; ++i)
        for (std::size_t j = 0; j < ens.num_points; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < mean[i].size(); ++p) s += mean[i][p] * mean[j][p];
            g(i, j) = s;
        }
    return g;
}

std::vector<double> v(std::initializer_list<double> x) { return x; }

}  // namespace

TEST(KernelEval, Examples) {
    EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::gaussian(1.0), v({0, 0}), v({1, 0})), std::exp(-1.0));
    EXPECT_NEAR(kernel_eval(KernelSpec::gaussian(1.0), v({0, 0}), v({1, 0})), 0.3678794, 1e-7);
    EXPECT_EQ(kernel_eval(KernelSpec::gaussian(0.01), v({0.4, -3}), v({0.4, -3})), 1.0);
    EXPECT_EQ(kernel_eval(KernelSpec::linear(), v({1, 2}), v({3, 4})), 11.0);
    EXPECT_EQ(kernel_eval(KernelSpec::polynomial(2), v({1, 2}), v({3, 4})), 144.0);
}

TEST(KernelSpec, ParseAndValidate) {
    EXPECT_EQ(KernelSpec::parse("linear").kind, KernelSpec::Kind::linear);
    EXPECT_EQ(KernelSpec::parse("polynomial:3").degree, 3);
    EXPECT_EQ(KernelSpec::parse("gaussian:0.001").bandwidth, 0.001);
    EXPECT_EQ(KernelSpec::parse(KernelSpec::gaussian(0.1).to_string()).bandwidth, 0.1);
    EXPECT_THROW(KernelSpec::parse("gaussian:0"), ValidationError);
    EXPECT_THROW(KernelSpec::parse("gaussian:-1"), ValidationError);
    EXPECT_THROW(KernelSpec::parse("polynomial:0"), ValidationError);
    EXPECT_THROW(KernelSpec::parse("polynomial:1.5"), ValidationError);
    EXPECT_THROW(KernelSpec::parse("laplace:1"), ValidationError);
}

TEST(EmpiricalGram, SingleSampleIsThePlainKernelMatrix) {
    const auto ens = tmtest::random_ensemble(6, 1, 2, 11);
    const auto k = KernelSpec::gaussian(0.5);
    const auto g = empirical_gram(ens, k);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(g(i, j), kernel_eval(k, ens.sample(i, 0), ens.sample(j, 0)));
}

TEST(EmpiricalGram, LinearKernelIsInnerProductOfMeans) {
    const auto ens = tmtest::random_ensemble(10, 25, 3, 12);
    const auto g = empirical_gram(ens, KernelSpec::linear());
    const RowMatrix means = ens.burst_means();
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) {
            const double ref = means.row(i).dot(means.row(j));
            EXPECT_NEAR(g(i, j), ref, 1e-13 * std::max(1.0, std::abs(ref)));
        }
}

TEST(EmpiricalGram, PolynomialKernelMatchesExplicitFeatures) {
    const auto ens = tmtest::random_ensemble(8, 15, 3, 13);
    for (int p : {1, 2, 3}) {
        const Matrix g = empirical_gram(ens, KernelSpec::polynomial(p)).to_dense();
        const Matrix ref = feature_gram(ens, p);
        EXPECT_LE((g - ref).norm() / ref.norm(), 1e-12) << "degree " << p;
    }
}

TEST(EmpiricalGram, IsPositiveSemidefinite) {
    const auto ens = tmtest::random_ensemble(30, 10, 2, 14);
    for (const auto& k : {KernelSpec::gaussian(0.05), KernelSpec::gaussian(1.0), KernelSpec::polynomial(3)}) {
        const Matrix g = empirical_gram(ens, k).to_dense();
        Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff()) << k.to_string();
    }
}

TEST(EmpiricalGram, CrossGramMatchesSymmetricCase) {
    const auto ens = tmtest::random_ensemble(7, 9, 2, 15);
    const auto k = KernelSpec::gaussian(0.3);
    const Matrix cross = empirical_gram(ens, ens, k);
    const Matrix sym = empirical_gram(ens, k).to_dense();
    EXPECT_LE((cross - sym).cwiseAbs().maxCoeff(), 1e-14);
    const auto other = tmtest::random_ensemble(4, 9, 3, 16);
    EXPECT_THROW(empirical_gram(ens, other, k), ValidationError);
}

TEST(KernelDistance, Examples) {
    SymmetricMatrix id(2, MatrixKind::gram);
    id.set(0, 0, 1.0);
    id.set(1, 1, 1.0);
    const auto d = kernel_distance(id);
    EXPECT_EQ(d.kind(), MatrixKind::distance);
    EXPECT_EQ(d(0, 1), 2.0);
    EXPECT_EQ(d(0, 0), 0.0);

    SymmetricMatrix c(3, MatrixKind::gram, std::vector<double>(6, 0.7));
    const auto dc = kernel_distance(c);
    for (double x : dc.lower()) EXPECT_EQ(x, 0.0);
}

TEST(KernelDistance, ClampsNegativeRoundoffAndWarnsOnLargeNegatives) {
    std::vector<std::string> warnings;
    set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
    // K_ii + K_jj - 2 K_ij = -1e-14 (roundoff scale): clamped silently.
    SymmetricMatrix g(2, MatrixKind::gram, {1.0, 1.0 + 5e-15, 1.0});
    EXPECT_EQ(kernel_distance(g)(0, 1), 0.0);
    EXPECT_TRUE(warnings.empty());
    SymmetricMatrix bad(2, MatrixKind::gram, {1.0, 1.1, 1.0});
    EXPECT_EQ(kernel_distance(bad)(0, 1), 0.0);
    EXPECT_EQ(warnings.size(), 1u);
    set_warning_handler(nullptr);
}

TEST(KernelDistance, PlainDistanceIsAMetric) {
    const auto ens = tmtest::random_ensemble(14, 6, 2, 17);
    for (const auto& k : {KernelSpec::gaussian(0.2), KernelSpec::linear(), KernelSpec::polynomial(2)}) {
        const auto d = kernel_distance_plain(empirical_gram(ens, k));
        for (std::size_t a = 0; a < 14; ++a)
            for (std::size_t b = 0; b < 14; ++b)
                for (std::size_t c = 0; c < 14; ++c) EXPECT_LE(d(a, c), d(a, b) + d(b, c) + 1e-9);
    }
}

TEST(KernelDistance, SmallBandwidthTracksL2DistanceRanks) {
    // 1D bursts with many samples: as sigma shrinks the RKHS distance approaches the L2
    // distance between the sampled densities (up to scale), which we estimate by histograms.
    std::mt19937_64 rng(18);
    const std::size_t n_points = 25, m = 800;
    BurstEnsemble ens;
    ens.num_points = n_points;
    ens.samples_per_point = m;
    ens.dim = 1;
    ens.points.resize(n_points, 1);
    ens.samples.resize(n_points * m);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double mu = -1.0 + 2.0 * static_cast<double>(i) / (n_points - 1);
        const double sd = 0.15 + 0.1 * static_cast<double>(i % 3);
        ens.points(i, 0) = mu;
        std::normal_distribution<double> z(mu, sd);
        for (std::size_t l = 0; l < m; ++l) ens.samples[i * m + l] = z(rng);
    }
    const Grid grid(Box{{-3.0}, {3.0}}, {600});
    const auto ref = density_distance_matrix(ens, grid, DensityMetric::l2);
    std::vector<double> r;
    for (std::size_t i = 0; i < n_points; ++i)
        for (std::size_t j = 0; j < i; ++j) r.push_back(ref(i, j));
    std::vector<double> corr;
    for (double sigma : {1.0, 1e-1, 1e-2}) {
        const auto d = kernel_distance_plain(empirical_gram(ens, KernelSpec::gaussian(sigma)));
        std::vector<double> e;
        for (std::size_t i = 0; i < n_points; ++i)
            for (std::size_t j = 0; j < i; ++j) e.push_back(d(i, j));
        corr.push_back(spearman(r, e));
    }
    EXPECT_LT(corr[0], corr[2]);
    EXPECT_GE(corr.back(), 0.99);
}

TEST(SymmetricMatrix, StorageAndValidation) {
    Matrix a(3, 3);
    a << 1, 2, 3, 2, 4, 5, 3, 5, 6;
    const auto s = SymmetricMatrix::from_dense(a, MatrixKind::gram);
    EXPECT_EQ(s.lower(), (std::vector<double>{1, 2, 4, 3, 5, 6}));
    EXPECT_EQ(s.to_dense(), a);
    a(0, 2) = 3.1;
    EXPECT_THROW(SymmetricMatrix::from_dense(a, MatrixKind::gram), ValidationError);
    EXPECT_THROW(SymmetricMatrix::from_dense(Matrix::Zero(2, 3), MatrixKind::gram), ValidationError);
    const std::size_t perm[3] = {2, 0, 1};
    const auto p = s.permuted(perm);
    EXPECT_EQ(p(0, 0), 6.0);
    EXPECT_EQ(p(0, 1), 3.0);
    EXPECT_EQ(p(1, 2), 2.0);
}

TEST(MercerFeatures, GradedOrder) {
    const auto idx = graded_multi_indices(2, 2);
    const std::vector<MultiIndex> expected = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    EXPECT_EQ(idx, expected);
    EXPECT_EQ(count_multi_indices(2, 2), 6u);
    EXPECT_EQ(count_multi_indices(3, 20), 1771u);
    EXPECT_EQ(graded_multi_indices(3, 4).size(), count_multi_indices(3, 4));
}

TEST(MercerFeatures, OriginHasOnlyTheConstantFeature) {
    const auto f = gaussian_mercer_features(v({0.0}), 10, 0.7);
    EXPECT_EQ(f[0], 1.0);
    for (std::size_t p = 1; p < f.size(); ++p) EXPECT_EQ(f[p], 0.0);
}

TEST(MercerFeatures, TruncatedSumConvergesToTheKernel) {
    const double x = 0.3;
    const auto f = gaussian_mercer_features(v({x}), 20, 1.0);
    double sum = 0.0;
    for (double e : f) sum += e * e;
    EXPECT_NEAR(sum, kernel_eval(KernelSpec::gaussian(1.0), v({x}), v({x})), 1e-8);

    double prev = 1e300;
    for (int deg = 0; deg <= 20; ++deg) {
        const auto g = gaussian_mercer_features(v({0.8, -0.5}), deg, 0.5);
        double s = 0.0;
        for (double e : g) s += e * e;
        const double resid = std::abs(1.0 - s);
        EXPECT_LE(resid, prev + 1e-15);
        prev = resid;
    }
}

TEST(MercerFeatures, MultivariateReconstruction) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const auto x = v({u(rng), u(rng)}), y = v({u(rng), u(rng)});
        const auto fx = gaussian_mercer_features(x, 30, 2.0), fy = gaussian_mercer_features(y, 30, 2.0);
        double s = 0.0;
        for (std::size_t p = 0; p < fx.size(); ++p) s += fx[p] * fy[p];
        EXPECT_NEAR(s, kernel_eval(KernelSpec::gaussian(2.0), x, y), 1e-9);
    }
}

TEST(PolyFeatures, Examples) {
    const auto f = poly_features(v({2.0}), 2);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_DOUBLE_EQ(f[0], 1.0);
    EXPECT_DOUBLE_EQ(f[1], 2.0 * std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(f[2], 4.0);
    EXPECT_DOUBLE_EQ(f[0] * f[0] + f[1] * f[1] + f[2] * f[2], 25.0);
    EXPECT_EQ(poly_features(v({0.7, -1.2}), 1), (std::vector<double>{1.0, 0.7, -1.2}));
}

TEST(PolyFeatures, InnerProductIsThePolynomialKernel) {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        const auto x = v({u(rng), u(rng), u(rng)}), y = v({u(rng), u(rng), u(rng)});
        for (int p : {1, 2, 3, 5}) {
            const auto fx = poly_features(x, p), fy = poly_features(y, p);
            double s = 0.0;
            for (std::size_t i = 0; i < fx.size(); ++i) s += fx[i] * fy[i];
            const double k = kernel_eval(KernelSpec::polynomial(p), x, y);
            EXPECT_LE(std::abs(s - k), 1e-12 * std::max(1.0, std::abs(k)));
        }
    }
}

TEST(RegularityFactor, Examples) {
    EXPECT_EQ(regularity_factor(v({1.0, 2.0, 0.0, 0.0}), 1), 1.0);
    EXPECT_EQ(regularity_factor(v({1.0, 1.0}), 0), 2.0);
    EXPECT_THROW(regularity_factor(v({0.0, 1.0}), 0), NumericalError);
}

TEST(RegularityFactor, DoubleWellDensityDifferenceIsRegular) {
    // Histogram densities of two bursts on the 1D double well, projected on Gaussian
    // Mercer features; the energy above degree 6 stays small relative to the head.
    const auto dw = double_well_1d();
    RowMatrix pts(2, 1);
    pts << -1.0, 0.2;
    const auto ens = sample_bursts(dw, SdeConfig{3.0, 1e-3, 0.5, 3, false}, pts, 2000);
    const Grid grid(dw.domain(), {200});
    const auto p0 = empirical_density(ens, 0, grid), p1 = empirical_density(ens, 1, grid);
    std::vector<double> h(grid.cells());
    for (std::size_t c = 0; c < h.size(); ++c) h[c] = p0.values[c] - p1.values[c];
    const std::vector<double> w(grid.cells(), grid.cell_volume());
    const auto coeffs = gaussian_mercer_coefficients(grid.centers(), w, h, 40, 1.0);
    EXPECT_LT(regularity_factor(coeffs, count_multi_indices(1, 6) - 1), 10.0);
}

TEST(MercerSpectrum, NystromEigenpairsAreOrthonormalAndDecay) {
    const auto s = gaussian_mercer_spectrum(-1.0, 1.0, 1.0, 200);
    for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) EXPECT_LE(s.eigenvalues[i], s.eigenvalues[i - 1]);
    const Matrix gram = s.weight * s.eigenfunctions.leftCols(6).transpose() * s.eigenfunctions.leftCols(6);
    EXPECT_LE((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
    // Trace of the operator: int k(x, x) dx = 2.
    EXPECT_NEAR(s.eigenvalues.sum(), 2.0, 1e-9);
}
