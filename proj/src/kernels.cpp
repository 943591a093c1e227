#include "tmkernel/kernels.hpp"

#include "tmkernel/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <vector>

namespace tmkernel {

KernelSpec KernelSpec::polynomial(int degree) {
    KernelSpec k{Kind::polynomial, degree, 1.0};
    k.validate();
    return k;
}

KernelSpec KernelSpec::gaussian(double bandwidth) {
    KernelSpec k{Kind::gaussian, 1, bandwidth};
    k.validate();
    return k;
}

KernelSpec KernelSpec::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (head == "linear" && arg.empty()) return linear();
    if (head == "polynomial") {
        int p = 0;
        auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), p);
        if (ec != std::errc{} || ptr != arg.data() + arg.size())
            throw ValidationError(fmt::format("kernel '{}': expected polynomial:<degree>", text));
        return polynomial(p);
    }
    if (head == "gaussian") {
        double s = 0.0;
        auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), s);
        if (ec != std::errc{} || ptr != arg.data() + arg.size())
            throw ValidationError(fmt::format("kernel '{}': expected gaussian:<bandwidth>", text));
        return gaussian(s);
    }
    throw ValidationError(fmt::format("unknown kernel '{}' (expected linear, polynomial:<p> or gaussian:<sigma>)", text));
}

std::string KernelSpec::to_string() const {
    switch (kind) {
        case Kind::linear: return "linear";
        case Kind::polynomial: return fmt::format("polynomial:{}", degree);
        case Kind::gaussian: return fmt::format("gaussian:{}", bandwidth);
    }
    return "?";
}

void KernelSpec::validate() const {
    if (kind == Kind::polynomial && degree < 1)
        throw ValidationError(fmt::format("polynomial kernel degree must be >= 1, got {}", degree));
    if (kind == Kind::gaussian && !(bandwidth > 0.0 && std::isfinite(bandwidth)))
        throw ValidationError(fmt::format("gaussian kernel bandwidth must be positive, got {}", bandwidth));
}

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
    return s;
}

double squared_distance(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

// (1/M_a M_b) sum over both bursts, reduced pairwise: inner row sums first, then
// the vector of row sums. `row` is caller-provided scratch of length M_b.
double burst_pair_mean(const KernelSpec& k, std::span<const double> a, std::span<const double> b,
                       std::size_t n, std::vector<double>& row, std::vector<double>& rows) {
    const std::size_t ma = a.size() / n;
    const std::size_t mb = b.size() / n;
    row.resize(mb);
    rows.resize(ma);
    for (std::size_t l1 = 0; l1 < ma; ++l1) {
        const double* ya = a.data() + l1 * n;
        switch (k.kind) {
            case KernelSpec::Kind::gaussian: {
                const double inv = 1.0 / k.bandwidth;
                for (std::size_t l2 = 0; l2 < mb; ++l2)
                    row[l2] = std::exp(-squared_distance(ya, b.data() + l2 * n, n) * inv);
                break;
            }
            case KernelSpec::Kind::linear:
                for (std::size_t l2 = 0; l2 < mb; ++l2) row[l2] = dot({ya, n}, {b.data() + l2 * n, n});
                break;
            case KernelSpec::Kind::polynomial:
                for (std::size_t l2 = 0; l2 < mb; ++l2)
                    row[l2] = std::pow(dot({ya, n}, {b.data() + l2 * n, n}) + 1.0, k.degree);
                break;
        }
        rows[l1] = pairwise_sum(row);
    }
    return pairwise_sum(rows) / (static_cast<double>(ma) * static_cast<double>(mb));
}

}  // namespace

double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ValidationError(fmt::format("kernel arguments have dimensions {} and {}", x.size(), y.size()));
    switch (k.kind) {
        case KernelSpec::Kind::linear: return dot(x, y);
        case KernelSpec::Kind::polynomial: return std::pow(dot(x, y) + 1.0, k.degree);
        case KernelSpec::Kind::gaussian: return std::exp(-squared_distance(x.data(), y.data(), x.size()) / k.bandwidth);
    }
    return 0.0;
}

SymmetricMatrix empirical_gram(const BurstEnsemble& ens, const KernelSpec& k) {
    k.validate();
    const std::size_t N = ens.num_points;
    const std::size_t n = ens.dim;
    SymmetricMatrix K(N, MatrixKind::gram);
    const auto total = static_cast<long long>(N * (N + 1) / 2);

#pragma omp parallel
    {
        std::vector<double> row;
        std::vector<double> rows;
#pragma omp for schedule(dynamic, 64)
        for (long long t = 0; t < total; ++t) {
            // Invert t = i(i+1)/2 + j.
            auto i = static_cast<std::size_t>((std::sqrt(8.0 * static_cast<double>(t) + 1.0) - 1.0) / 2.0);
            while (i * (i + 1) / 2 > static_cast<std::size_t>(t)) --i;
            while ((i + 1) * (i + 2) / 2 <= static_cast<std::size_t>(t)) ++i;
            const std::size_t j = static_cast<std::size_t>(t) - i * (i + 1) / 2;
            K.at_lower(i, j) = burst_pair_mean(k, ens.burst(i), ens.burst(j), n, row, rows);
        }
    }
    return K;
}

Matrix empirical_gram(const BurstEnsemble& a, const BurstEnsemble& b, const KernelSpec& k) {
    k.validate();
    if (a.dim != b.dim)
        throw ValidationError(fmt::format("cross-Gram between ensembles of dimension {} and {}", a.dim, b.dim));
    Matrix K(a.num_points, b.num_points);
    const auto total = static_cast<long long>(a.num_points * b.num_points);
#pragma omp parallel
    {
        std::vector<double> row;
        std::vector<double> rows;
#pragma omp for schedule(dynamic, 64)
        for (long long t = 0; t < total; ++t) {
            const auto i = static_cast<std::size_t>(t) / b.num_points;
            const auto j = static_cast<std::size_t>(t) % b.num_points;
            K(i, j) = burst_pair_mean(k, a.burst(i), b.burst(j), a.dim, row, rows);
        }
    }
    return K;
}

SymmetricMatrix kernel_distance(const SymmetricMatrix& gram) {
    if (gram.kind() != MatrixKind::gram) throw ValidationError("kernel_distance expects a gram matrix");
    const std::size_t N = gram.size();
    SymmetricMatrix D(N, MatrixKind::distance);
    std::size_t flagged = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double scale = std::abs(gram(i, i)) + std::abs(gram(j, j));
            const double d = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
            if (d < -1e-9 * scale) {
                ++flagged;
                worst = std::min(worst, d / (scale > 0 ? scale : 1.0));
            }
            D.at_lower(i, j) = d > 0.0 ? d : 0.0;
        }
    }
    if (flagged > 0)
        warn(fmt::format("kernel_distance: {} squared distances were negative beyond round-off "
                         "(worst relative value {:.3g}); clamped to 0",
                         flagged, worst));
    return D;
}

SymmetricMatrix plain_distance(const SymmetricMatrix& squared) {
    std::vector<double> lower = squared.lower();
    for (double& v : lower) v = std::sqrt(v > 0.0 ? v : 0.0);
    return SymmetricMatrix(squared.size(), MatrixKind::distance, std::move(lower));
}

}  // namespace tmkernel
