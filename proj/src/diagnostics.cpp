#include "tmkernel/diagnostics.hpp"

#include "tmkernel/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace tmkernel {

DistortionReport distortion(const SymmetricMatrix& reference, const SymmetricMatrix& embedded, double floor) {
    if (reference.size() != embedded.size())
        throw ValidationError(fmt::format("distortion: reference has N = {}, embedding has N = {}", reference.size(),
                                          embedded.size()));
    if (!(floor >= 0.0)) throw ValidationError("distortion: floor must be nonnegative");

    DistortionReport r;
    r.floor = floor;
    const std::size_t N = reference.size();
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            const double dr = reference(i, j);
            const double de = embedded(i, j);
            if (!(dr >= floor) || !(dr > 0.0)) {
                ++r.pairs_skipped;
                continue;
            }
            const double contraction = de > 0.0 ? dr / de : std::numeric_limits<double>::infinity();
            const double expansion = de / dr;
            if (r.pairs_used == 0 || contraction > r.contraction) {
                r.contraction = contraction;
                r.contraction_pair = {i, j};
            }
            if (r.pairs_used == 0 || expansion > r.expansion) {
                r.expansion = expansion;
                r.expansion_pair = {i, j};
            }
            ++r.pairs_used;
        }
    }
    if (r.pairs_used == 0)
        throw ValidationError(fmt::format("distortion: no pair has reference distance above the floor {}", floor));
    r.distortion = r.contraction * r.expansion;
    return r;
}

double default_distance_floor(const SymmetricMatrix& reference, double fraction) {
    std::vector<double> off;
    const std::size_t N = reference.size();
    off.reserve(N * (N - 1) / 2);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < i; ++j) off.push_back(reference(i, j));
    if (off.empty()) return 0.0;
    const auto mid = off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2);
    std::nth_element(off.begin(), mid, off.end());
    double median = *mid;
    if (off.size() % 2 == 0) {
        const double lower = *std::max_element(off.begin(), mid);
        median = 0.5 * (median + lower);
    }
    return fraction * median;
}

std::vector<double> rc_quality(const RowMatrix& xi, const std::vector<std::vector<double>>& psi, std::size_t bins) {
    if (bins < 2) throw ValidationError("rc_quality: need at least 2 bins per axis");
    const auto N = static_cast<std::size_t>(xi.rows());
    const auto r = static_cast<std::size_t>(xi.cols());
    if (r == 0) throw ValidationError("rc_quality: reaction coordinate has no components");
    for (const auto& f : psi)
        if (f.size() != N)
            throw ValidationError(fmt::format("rc_quality: eigenfunction has {} values for {} test points", f.size(), N));

    // Flat bin index of every point.
    std::vector<std::size_t> bin_of(N, 0);
    for (std::size_t k = 0; k < r; ++k) {
        const double lo = xi.col(k).minCoeff();
        const double hi = xi.col(k).maxCoeff();
        for (std::size_t i = 0; i < N; ++i) {
            std::size_t b = 0;
            if (hi > lo) b = std::min(bins - 1, static_cast<std::size_t>(std::floor((xi(i, k) - lo) / (hi - lo) * bins)));
            bin_of[i] = bin_of[i] * bins + b;
        }
    }
    std::map<std::size_t, std::size_t> occupied;
    for (auto b : bin_of) occupied.emplace(b, occupied.size());
    if (occupied.size() < 2)
        throw ValidationError("rc_quality: fewer than 2 nonempty bins; the coordinate is (numerically) constant");

    std::vector<double> out;
    out.reserve(psi.size());
    for (const auto& f : psi) {
        std::vector<double> sum(occupied.size(), 0.0);
        std::vector<std::size_t> count(occupied.size(), 0);
        for (std::size_t i = 0; i < N; ++i) {
            const auto slot = occupied.at(bin_of[i]);
            sum[slot] += f[i];
            ++count[slot];
        }
        const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
        const double range = *hi - *lo;
        double worst = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const auto slot = occupied.at(bin_of[i]);
            worst = std::max(worst, std::abs(f[i] - sum[slot] / static_cast<double>(count[slot])));
        }
        out.push_back(range > 0.0 ? worst / range : 0.0);
    }
    return out;
}

std::vector<SweepRow> sigma_sweep(const BurstEnsemble& ens, std::span<const double> sigmas,
                                  const SymmetricMatrix& reference_weighted, const SymmetricMatrix& reference_plain,
                                  double floor_fraction) {
    const double floor_w = default_distance_floor(reference_weighted, floor_fraction);
    const double floor_p = default_distance_floor(reference_plain, floor_fraction);
    std::vector<SweepRow> rows;
    rows.reserve(sigmas.size());
    for (double sigma : sigmas) {
        const auto d = kernel_distance_plain(empirical_gram(ens, KernelSpec::gaussian(sigma)));
        rows.push_back({sigma, distortion(reference_weighted, d, floor_w), distortion(reference_plain, d, floor_p)});
    }
    return rows;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t m = k;
        while (m < order.size() && v[order[m]] == v[order[k]]) ++m;
        const double avg = 0.5 * static_cast<double>(k + m - 1);
        for (std::size_t t = k; t < m; ++t) rank[order[t]] = avg;
        k = m;
    }
    return rank;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ValidationError("spearman: need two samples of equal length >= 2");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace tmkernel
