#include "tmkernel/diagnostics.hpp"
#include "tmkernel/error.hpp"
#include "tmkernel/whitney.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace tmkernel;

namespace {

SymmetricMatrix random_distances(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    RowMatrix pts(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) pts.row(i) << z(rng), z(rng), z(rng);
    return euclidean_distance_matrix(pts);
}

SymmetricMatrix scaled(const SymmetricMatrix& m, double c) {
    auto lower = m.lower();
    for (double& v : lower) v *= c;
    return SymmetricMatrix(m.size(), m.kind(), lower);
}

}  // namespace

TEST(Distortion, IdentityAndScaling) {
    const auto d = random_distances(20, 41);
    const auto id = distortion(d, d, 0.0);
    EXPECT_DOUBLE_EQ(id.contraction, 1.0);
    EXPECT_DOUBLE_EQ(id.expansion, 1.0);
    EXPECT_DOUBLE_EQ(id.distortion, 1.0);
    EXPECT_EQ(id.pairs_used, 190u);

    const auto s = distortion(d, scaled(d, 4.0), 0.0);
    EXPECT_NEAR(s.contraction, 0.25, 1e-15);
    EXPECT_NEAR(s.expansion, 4.0, 1e-15);
    EXPECT_NEAR(s.distortion, 1.0, 1e-15);
    // Ties go to the smallest (i, j) in row-major order over i < j.
    EXPECT_EQ(s.contraction_pair, (std::pair<std::size_t, std::size_t>{0, 1}));
}

TEST(Distortion, InvariantUnderRescalingEitherMatrix) {
    const auto a = random_distances(25, 42), b = random_distances(25, 43);
    const double base = distortion(a, b, 0.0).distortion;
    EXPECT_NEAR(distortion(scaled(a, 7.0), b, 0.0).distortion, base, 1e-12 * base);
    EXPECT_NEAR(distortion(a, scaled(b, 0.01), 0.0).distortion, base, 1e-12 * base);
    EXPECT_GE(base, 1.0);
}

TEST(Distortion, RaisingTheFloorNeverIncreasesTheMaxima) {
    const auto a = random_distances(30, 44), b = random_distances(30, 45);
    double prev_c = 1e300, prev_e = 1e300;
    for (double floor : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
        const auto r = distortion(a, b, floor);
        EXPECT_LE(r.contraction, prev_c);
        EXPECT_LE(r.expansion, prev_e);
        EXPECT_EQ(r.pairs_used + r.pairs_skipped, 435u);
        prev_c = r.contraction;
        prev_e = r.expansion;
    }
    EXPECT_THROW(distortion(a, b, 1e9), ValidationError);
    EXPECT_THROW(distortion(a, random_distances(5, 1), 0.0), ValidationError);
}

TEST(Distortion, DefaultFloorIsAFractionOfTheMedian) {
    SymmetricMatrix d(3, MatrixKind::distance, {0, 1, 0, 3, 2, 0});
    EXPECT_DOUBLE_EQ(default_distance_floor(d, 0.05), 0.1);
    SymmetricMatrix e(4, MatrixKind::distance, {0, 1, 0, 2, 3, 0, 4, 5, 6, 0});
    EXPECT_DOUBLE_EQ(default_distance_floor(e, 1.0), 3.5);
}

TEST(RcQuality, ConstantAndPerfectParametrizations) {
    std::mt19937_64 rng(46);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 2000;
    RowMatrix xi(n, 1);
    std::vector<double> constant(n, 3.0), same(n), other(n);
    for (std::size_t i = 0; i < n; ++i) {
        xi(i, 0) = u(rng);
        same[i] = xi(i, 0);
        other[i] = u(rng);
    }
    const auto r = rc_quality(xi, {constant, same, other}, 50);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_LE(r[1], 1.0 / 50 + 1e-12);
    EXPECT_GT(r[2], 0.4);
    EXPECT_LT(rc_quality(xi, {same}, 200)[0], r[1]);
}

TEST(RcQuality, RejectsDegenerateInput) {
    RowMatrix xi = RowMatrix::Constant(10, 1, 2.0);
    EXPECT_THROW(rc_quality(xi, {std::vector<double>(10, 1.0)}, 5), ValidationError);
    RowMatrix ok(10, 1);
    for (int i = 0; i < 10; ++i) ok(i, 0) = i;
    EXPECT_THROW(rc_quality(ok, {std::vector<double>(9, 1.0)}, 5), ValidationError);
    EXPECT_THROW(rc_quality(ok, {std::vector<double>(10, 1.0)}, 1), ValidationError);
}

TEST(SigmaSweep, ConsistentWithSingleCallsAndRelabeling) {
    const auto ens = tmtest::random_ensemble(15, 8, 2, 47);
    const auto ref_a = kernel_distance_plain(empirical_gram(ens, KernelSpec::linear()));
    const auto ref_b = kernel_distance_plain(empirical_gram(ens, KernelSpec::polynomial(2)));
    const double sigmas[] = {0.1, 1.0};
    const auto rows = sigma_sweep(ens, sigmas, ref_a, ref_b);
    ASSERT_EQ(rows.size(), 2u);
    const auto d = kernel_distance_plain(empirical_gram(ens, KernelSpec::gaussian(1.0)));
    EXPECT_EQ(rows[1].weighted.distortion, distortion(ref_a, d, default_distance_floor(ref_a)).distortion);
    EXPECT_EQ(rows[1].plain.distortion, distortion(ref_b, d, default_distance_floor(ref_b)).distortion);

    // Relabeling the test points leaves the curves unchanged.
    std::vector<std::size_t> perm(15);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(48));
    BurstEnsemble shuffled = ens;
    for (std::size_t i = 0; i < 15; ++i) {
        shuffled.points.row(i) = ens.points.row(perm[i]);
        const auto b = ens.burst(perm[i]);
        std::copy(b.begin(), b.end(), shuffled.samples.begin() + static_cast<std::ptrdiff_t>(i * 8 * 2));
    }
    const auto rows_p = sigma_sweep(shuffled, sigmas, ref_a.permuted(perm), ref_b.permuted(perm));
    for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(rows_p[k].weighted.distortion, rows[k].weighted.distortion, 1e-9 * rows[k].weighted.distortion);
        EXPECT_NEAR(rows_p[k].plain.distortion, rows[k].plain.distortion, 1e-9 * rows[k].plain.distortion);
    }
}

TEST(Spearman, RanksWithTies) {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{10, 20, 30, 40, 50}, c{5, 4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(spearman(a, b), 1.0);
    EXPECT_DOUBLE_EQ(spearman(a, c), -1.0);
    const std::vector<double> t{1, 1, 2, 2, 3}, u{1, 2, 3, 4, 5};
    // Average ranks (1.5, 1.5, 3.5, 3.5, 5) against (1..5): Pearson of the ranks.
    EXPECT_NEAR(spearman(t, u), 0.9486832980505138, 1e-15);
}
