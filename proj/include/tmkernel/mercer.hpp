#pragma once

#include "tmkernel/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tmkernel {

using MultiIndex = std::vector<int>;

/// All multi-indices p in N^n with |p| <= max_total_degree, graded
/// lexicographic: by total degree, then lexicographically descending
/// ((1,0) before (0,1)). This order fixes what "coefficient i" means.
std::vector<MultiIndex> graded_multi_indices(std::size_t n, int max_total_degree);

/// Truncated Mercer features of k(x, y) = exp(-|x - y|^2 / sigma):
///   eta_p(x) = prod_k sqrt((2/sigma)^{p_k} / p_k!) x_k^{p_k} exp(-x_k^2 / sigma),
/// so sum_p eta_p(x) eta_p(y) -> k(x, y) as the degree grows.
std::vector<double> gaussian_mercer_features(std::span<const double> x, int max_total_degree, double sigma);

/// Explicit features of (x^T y + 1)^p: multinomial-weighted monomials of degree <= p,
/// phi_a(x) = sqrt(p! / ((p - |a|)! a_1! ... a_n!)) x^a, in graded order.
std::vector<double> poly_features(std::span<const double> x, int degree);

inline std::vector<double> linear_features(std::span<const double> x) { return {x.begin(), x.end()}; }

/// c(h, i_max) = 1 + sum_{i > i_max} h_i^2 / sum_{i <= i_max} h_i^2.
/// Throws NumericalError if every coefficient up to i_max is zero.
double regularity_factor(std::span<const double> coeffs, std::size_t i_max);

/// Quadrature-based projections  int f(x) eta_p(x) dx  of a function sampled at
/// `nodes` (rows) with quadrature `weights`, onto the Gaussian Mercer features.
std::vector<double> gaussian_mercer_coefficients(const RowMatrix& nodes, std::span<const double> weights,
                                                 std::span<const double> values, int max_total_degree,
                                                 double sigma);

/// Number of multi-indices of total degree <= d in n variables: C(n + d, n).
std::size_t count_multi_indices(std::size_t n, int max_total_degree);

/// Spectrum of the Gaussian kernel integral operator (Tf)(x) = int_a^b k(x, y) f(y) dy on
/// an interval, discretized with `nodes` midpoint-rule points (Nystrom).
struct MercerSpectrum {
    Vector nodes;         // quadrature points
    double weight = 0.0;  // midpoint weight (cell width)
    Vector eigenvalues;   // nonincreasing
    Matrix eigenfunctions;  // column i: phi_i at the nodes, L2-orthonormal under the quadrature
};

MercerSpectrum gaussian_mercer_spectrum(double a, double b, double sigma, std::size_t nodes);

/// || mu(h) ||_H computed through truncated features: sqrt(sum_p (int h eta_p)^2).
double rkhs_norm_via_features(const MercerSpectrum& grid, std::span<const double> h, int max_total_degree,
                              double sigma);

/// || h ||_{L2} by the same quadrature.
double l2_norm(const MercerSpectrum& grid, std::span<const double> h);

}  // namespace tmkernel
