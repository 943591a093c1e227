#pragma once

#include "tmkernel/kernels.hpp"
#include "tmkernel/manifold.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace tmkernel {

/// Empirical contraction / expansion of an embedding relative to reference distances.
struct DistortionReport {
    double contraction = 0.0;  // max D_ref / D_emb
    double expansion = 0.0;    // max D_emb / D_ref
    double distortion = 0.0;   // contraction * expansion
    std::pair<std::size_t, std::size_t> contraction_pair{0, 0};
    std::pair<std::size_t, std::size_t> expansion_pair{0, 0};
    std::size_t pairs_used = 0;
    std::size_t pairs_skipped = 0;  // reference distance below the floor (or zero)
    double floor = 0.0;
};

/// Maximum ratios over pairs i < j with D_ref(i, j) >= floor and D_ref(i, j) > 0.
/// Ties go to the smallest (i, j). A zero embedded distance gives an infinite contraction.
/// Throws ValidationError when no pair clears the floor.
DistortionReport distortion(const SymmetricMatrix& reference, const SymmetricMatrix& embedded, double floor);

/// `fraction` times the median off-diagonal reference distance.
double default_distance_floor(const SymmetricMatrix& reference, double fraction = 0.05);

/// Normalized sup-residual of each eigenfunction against its best bin-wise function of xi:
/// psi~ is the mean of psi over a regular binning of xi-space (bins per axis), and the
/// result is max_points |psi - psi~(xi)| / range(psi).
std::vector<double> rc_quality(const RowMatrix& xi, const std::vector<std::vector<double>>& psi, std::size_t bins);

struct SweepRow {
    double sigma = 0.0;
    DistortionReport weighted;  // against the L2_{1/rho} reference
    DistortionReport plain;     // against the L2 reference
};

/// Gaussian-kernel distortion for each bandwidth against both reference matrices. Each
/// reference uses its own floor = floor_fraction * median distance.
std::vector<SweepRow> sigma_sweep(const BurstEnsemble& ens, std::span<const double> sigmas,
                                  const SymmetricMatrix& reference_weighted, const SymmetricMatrix& reference_plain,
                                  double floor_fraction = 0.05);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace tmkernel
