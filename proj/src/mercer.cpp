#include "tmkernel/mercer.hpp"

#include "tmkernel/eigensolver.hpp"
#include "tmkernel/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace tmkernel {

namespace {

void compositions(std::size_t n, int remaining, MultiIndex& prefix, std::vector<MultiIndex>& out) {
    if (prefix.size() + 1 == n) {
        prefix.push_back(remaining);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int first = remaining; first >= 0; --first) {
        prefix.push_back(first);
        compositions(n, remaining - first, prefix, out);
        prefix.pop_back();
    }
}

// Per-axis factors sqrt((2/sigma)^p / p!) x^p exp(-x^2/sigma) for p = 0..degree,
// built by recurrence to avoid overflowing factorials.
std::vector<double> gaussian_axis_factors(double x, int degree, double sigma) {
    std::vector<double> e(static_cast<std::size_t>(degree) + 1);
    e[0] = std::exp(-x * x / sigma);
    const double c = std::sqrt(2.0 / sigma) * x;
    for (int p = 1; p <= degree; ++p) e[p] = e[p - 1] * c / std::sqrt(static_cast<double>(p));
    return e;
}

double factorial(int p) {
    double f = 1.0;
    for (int k = 2; k <= p; ++k) f *= k;
    return f;
}

}  // namespace

std::vector<MultiIndex> graded_multi_indices(std::size_t n, int max_total_degree) {
    if (n == 0) throw ValidationError("multi-indices need at least one variable");
    if (max_total_degree < 0) throw ValidationError("maximum total degree must be nonnegative");
    std::vector<MultiIndex> out;
    MultiIndex prefix;
    for (int d = 0; d <= max_total_degree; ++d) compositions(n, d, prefix, out);
    return out;
}

std::size_t count_multi_indices(std::size_t n, int max_total_degree) {
    // C(n + d, n) computed incrementally; exact for the sizes used here.
    double c = 1.0;
    for (std::size_t k = 1; k <= n; ++k) c = c * static_cast<double>(max_total_degree + static_cast<int>(k)) / static_cast<double>(k);
    return static_cast<std::size_t>(std::llround(c));
}

std::vector<double> gaussian_mercer_features(std::span<const double> x, int max_total_degree, double sigma) {
    if (!(sigma > 0.0)) throw ValidationError("gaussian bandwidth must be positive");
    const auto indices = graded_multi_indices(x.size(), max_total_degree);
    std::vector<std::vector<double>> axis;
    axis.reserve(x.size());
    for (double xk : x) axis.push_back(gaussian_axis_factors(xk, max_total_degree, sigma));

    std::vector<double> out;
    out.reserve(indices.size());
    for (const auto& p : indices) {
        double v = 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) v *= axis[k][p[k]];
        out.push_back(v);
    }
    return out;
}

std::vector<double> poly_features(std::span<const double> x, int degree) {
    if (degree < 1) throw ValidationError("polynomial degree must be >= 1");
    const auto indices = graded_multi_indices(x.size(), degree);
    std::vector<double> out;
    out.reserve(indices.size());
    for (const auto& a : indices) {
        int total = 0;
        double weight = factorial(degree);
        double monomial = 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            total += a[k];
            weight /= factorial(a[k]);
            monomial *= std::pow(x[k], a[k]);
        }
        weight /= factorial(degree - total);
        out.push_back(std::sqrt(weight) * monomial);
    }
    return out;
}

double regularity_factor(std::span<const double> coeffs, std::size_t i_max) {
    double head = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) (i <= i_max ? head : tail) += coeffs[i] * coeffs[i];
    if (head == 0.0)
        throw NumericalError(fmt::format("regularity factor undefined: all coefficients with index <= {} are zero", i_max));
    return 1.0 + tail / head;
}

std::vector<double> gaussian_mercer_coefficients(const RowMatrix& nodes, std::span<const double> weights,
                                                 std::span<const double> values, int max_total_degree,
                                                 double sigma) {
    const auto count = static_cast<std::size_t>(nodes.rows());
    if (weights.size() != count || values.size() != count)
        throw ValidationError("mercer coefficients: nodes, weights and values must have the same length");
    std::vector<double> coeffs(count_multi_indices(static_cast<std::size_t>(nodes.cols()), max_total_degree), 0.0);
    for (std::size_t q = 0; q < count; ++q) {
        if (values[q] == 0.0) continue;
        const auto eta = gaussian_mercer_features({nodes.row(q).data(), static_cast<std::size_t>(nodes.cols())},
                                                  max_total_degree, sigma);
        for (std::size_t p = 0; p < eta.size(); ++p) coeffs[p] += weights[q] * values[q] * eta[p];
    }
    return coeffs;
}

MercerSpectrum gaussian_mercer_spectrum(double a, double b, double sigma, std::size_t nodes) {
    if (!(b > a) || nodes < 2) throw ValidationError("mercer spectrum needs a < b and at least two nodes");
    if (!(sigma > 0.0)) throw ValidationError("gaussian bandwidth must be positive");
    MercerSpectrum out;
    out.weight = (b - a) / static_cast<double>(nodes);
    out.nodes.resize(static_cast<Eigen::Index>(nodes));
    for (std::size_t q = 0; q < nodes; ++q) out.nodes[q] = a + (static_cast<double>(q) + 0.5) * out.weight;

    // W^{1/2} K W^{1/2} with W = weight * I is symmetric with the operator's spectrum.
    Matrix k(nodes, nodes);
    for (std::size_t p = 0; p < nodes; ++p)
        for (std::size_t q = 0; q < nodes; ++q) {
            const double d = out.nodes[p] - out.nodes[q];
            k(p, q) = out.weight * std::exp(-d * d / sigma);
        }
    auto pairs = symmetric_eigs(k, nodes);
    out.eigenvalues = pairs.values;
    out.eigenfunctions = pairs.vectors / std::sqrt(out.weight);
    return out;
}

double rkhs_norm_via_features(const MercerSpectrum& grid, std::span<const double> h, int max_total_degree,
                              double sigma) {
    RowMatrix nodes(grid.nodes.size(), 1);
    nodes.col(0) = grid.nodes;
    std::vector<double> weights(static_cast<std::size_t>(grid.nodes.size()), grid.weight);
    const auto coeffs = gaussian_mercer_coefficients(nodes, weights, h, max_total_degree, sigma);
    double s = 0.0;
    for (double c : coeffs) s += c * c;
    return std::sqrt(s);
}

double l2_norm(const MercerSpectrum& grid, std::span<const double> h) {
    double s = 0.0;
    for (double v : h) s += v * v;
    return std::sqrt(s * grid.weight);
}

}  // namespace tmkernel
