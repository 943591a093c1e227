#include "tmkernel/diagnostics.hpp"
#include "tmkernel/eigensolver.hpp"
#include "tmkernel/error.hpp"
#include "tmkernel/manifold.hpp"
#include "tmkernel/whitney.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <random>

using namespace tmkernel;

namespace {

SymmetricMatrix circle_distances(std::size_t n, std::vector<double>* angles) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    RowMatrix pts(n, 2);
    angles->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        (*angles)[i] = u(rng);
        pts(i, 0) = std::cos((*angles)[i]);
        pts(i, 1) = std::sin((*angles)[i]);
    }
    return euclidean_distance_matrix(pts);
}

// Procrustes residual: min over orthogonal R and translation of |X R + t - Y|_F / |Y|_F.
double procrustes_error(const RowMatrix& x, const RowMatrix& y) {
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    Eigen::JacobiSVD<Matrix> svd(xc.transpose() * yc, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix r = svd.matrixU() * svd.matrixV().transpose();
    return (xc * r - yc).norm() / yc.norm();
}

}  // namespace

TEST(SymmetricEigs, Examples) {
    const auto id = symmetric_eigs(Matrix::Identity(4, 4), 4);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(id.values[i], 1.0, 1e-15);

    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 1, 3, 2;
    const auto e = symmetric_eigs(d, 2);
    EXPECT_DOUBLE_EQ(e.values[0], 3.0);
    EXPECT_DOUBLE_EQ(e.values[1], 2.0);
    EXPECT_EQ(Vector(e.vectors.col(0)), Vector::Unit(3, 1));
    EXPECT_EQ(Vector(e.vectors.col(1)), Vector::Unit(3, 2));
}

TEST(SymmetricEigs, RandomMatrixAgainstFullDecomposition) {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> z;
    Matrix a(50, 50);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = z(rng);
    const auto e = symmetric_eigs(a, 10);
    Eigen::EigenSolver<Matrix> general(a);
    std::vector<double> ref;
    for (int i = 0; i < 50; ++i) ref.push_back(general.eigenvalues()[i].real());
    std::sort(ref.rbegin(), ref.rend());
    for (int i = 0; i < 10; ++i) {
        EXPECT_NEAR(e.values[i], ref[i], 1e-10);
        EXPECT_LE((a * e.vectors.col(i) - e.values[i] * e.vectors.col(i)).norm(), 1e-8 * a.norm());
        Eigen::Index arg;
        e.vectors.col(i).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(e.vectors(arg, i), 0.0);
    }
}

TEST(DiffusionMaps, LeadingPairIsTrivial) {
    std::vector<double> angles;
    const auto d = circle_distances(60, &angles);
    const Matrix p = diffusion_markov_matrix(d, 0.5);
    EXPECT_LE((p.rowwise().sum() - Vector::Ones(60)).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::EigenSolver<Matrix> es(p);
    double top = -1.0;
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < 60; ++i)
        if (es.eigenvalues()[i].real() > top) {
            top = es.eigenvalues()[i].real();
            arg = i;
        }
    EXPECT_NEAR(top, 1.0, 1e-12);
    Vector v = es.eigenvectors().col(arg).real();
    v /= v[0];
    EXPECT_LE((v - Vector::Ones(60)).cwiseAbs().maxCoeff(), 1e-10);

    const auto e = diffusion_maps(d, 0.5, 2);
    EXPECT_NEAR(e.eigenvalues[0], 1.0, 1e-12);
    for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) {
        EXPECT_LE(e.eigenvalues[i], 1.0 + 1e-12);
        EXPECT_GE(e.eigenvalues[i], -1.0 - 1e-12);
        if (i > 0) EXPECT_LE(e.eigenvalues[i], e.eigenvalues[i - 1]);
    }
}

TEST(DiffusionMaps, RecoversTheCircleAngle) {
    std::vector<double> angles;
    const auto d = circle_distances(120, &angles);
    const auto e = diffusion_maps(d, 0.2, 2);
    ASSERT_EQ(e.coords.cols(), 2);
    // Angle of the first nontrivial coordinate pair vs the truth, compared after the best rotation/reflection.
    std::vector<double> rec(120);
    for (int i = 0; i < 120; ++i) rec[i] = std::atan2(e.coords(i, 1), e.coords(i, 0));
    double best = 0.0;
    for (int reflect : {1, -1})
        for (int shift = 0; shift < 360; ++shift) {
            std::vector<double> a(120), b(120);
            for (int i = 0; i < 120; ++i) {
                a[i] = std::fmod(reflect * rec[i] + shift * std::numbers::pi / 180 + 8 * std::numbers::pi, 2 * std::numbers::pi);
                b[i] = angles[i];
            }
            best = std::max(best, spearman(a, b));
        }
    EXPECT_GE(best, 0.95);
}

TEST(DiffusionMaps, DuplicatedPointKeepsOrdering) {
    RowMatrix pts(10, 1);
    for (int i = 0; i < 10; ++i) pts(i, 0) = i * 0.1;
    RowMatrix dup(11, 1);
    dup.topRows(10) = pts;
    dup(10, 0) = pts(4, 0);
    const auto a = diffusion_maps(euclidean_distance_matrix(pts), 0.05, 1);
    const auto b = diffusion_maps(euclidean_distance_matrix(dup), 0.05, 1);
    std::vector<double> ca(10), cb(10);
    for (int i = 0; i < 10; ++i) {
        ca[i] = a.coords(i, 0);
        cb[i] = b.coords(i, 0);
    }
    EXPECT_NEAR(std::abs(spearman(ca, cb)), 1.0, 1e-12);
    EXPECT_NEAR(b.coords(10, 0), b.coords(4, 0), 1e-12);
}

TEST(DiffusionMaps, DisconnectedGraphIsReported) {
    RowMatrix pts(4, 1);
    pts << 0.0, 0.01, 10.0, 30.0;
    EXPECT_THROW(diffusion_maps(euclidean_distance_matrix(pts), 0.01, 1), NumericalError);
    EXPECT_THROW(diffusion_maps(euclidean_distance_matrix(pts), -1.0, 1), ValidationError);
    EXPECT_THROW(diffusion_maps(euclidean_distance_matrix(pts), 1.0, 4), ValidationError);
}

TEST(DiffusionMaps, PermutationEquivariance) {
    std::vector<double> angles;
    const auto d = circle_distances(40, &angles);
    std::vector<std::size_t> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(33));
    const auto a = diffusion_maps(d, 0.3, 3);
    const auto b = diffusion_maps(d.permuted(perm), 0.3, 3);
    EXPECT_LE((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-12);
    // The two nontrivial circle modes are degenerate; compare only the nondegenerate structure
    // through the per-point norm of the coordinate pair.
    for (std::size_t i = 0; i < 40; ++i)
        EXPECT_NEAR(b.coords.row(i).head(2).norm(), a.coords.row(perm[i]).head(2).norm(), 1e-8);
}

TEST(ClassicalMds, CollinearPoints) {
    RowMatrix pts(3, 1);
    pts << 0, 1, 2;
    const auto e = classical_mds(euclidean_distance_matrix(pts), 1);
    ASSERT_EQ(e.coords.cols(), 1);
    EXPECT_NEAR(std::abs(e.coords(1, 0) - e.coords(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(e.coords(2, 0) - e.coords(1, 0)), 1.0, 1e-12);
}

TEST(ClassicalMds, ProcrustesRecoveryOfARandomConfiguration) {
    std::mt19937_64 rng(34);
    std::normal_distribution<double> z;
    RowMatrix pts(40, 2);
    for (int i = 0; i < 40; ++i) pts.row(i) << z(rng), z(rng);
    const auto e = classical_mds(euclidean_distance_matrix(pts), 2);
    EXPECT_LE(procrustes_error(e.coords, pts), 1e-8);
    for (Eigen::Index i = 1; i < e.eigenvalues.size(); ++i) EXPECT_LE(e.eigenvalues[i], e.eigenvalues[i - 1]);
}

TEST(ClassicalMds, EquilateralTriangle) {
    SymmetricMatrix d(3, MatrixKind::distance, {0, 1, 0, 1, 1, 0});
    const auto e = classical_mds(d, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < i; ++j) EXPECT_NEAR((e.coords.row(i) - e.coords.row(j)).norm(), 1.0, 1e-12);
}

TEST(ClassicalMds, TruncatesNonEuclideanDirectionsWithAWarning) {
    std::vector<std::string> warnings;
    set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
    // Collinear points embed in one dimension; asking for three gives fewer columns.
    RowMatrix pts(5, 1);
    pts << 0, 1, 2, 3, 5;
    const auto e = classical_mds(euclidean_distance_matrix(pts), 3);
    EXPECT_EQ(e.coords.cols(), 1);
    EXPECT_FALSE(warnings.empty());
    set_warning_handler(nullptr);
}

TEST(SpectralGap, DetectsAKnownGap) {
    Vector eig(6);
    eig << 0.9, 0.85, 0.8, 0.1, 0.08, 0.05;
    EXPECT_EQ(spectral_gap_dimension(eig), 3u);
    Vector flat(4);
    flat << 0.5, 0.4, 0.3, 0.2;
    EXPECT_EQ(spectral_gap_dimension(flat), 0u);
}
