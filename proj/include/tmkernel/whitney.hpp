#pragma once

#include "tmkernel/dynamics.hpp"
#include "tmkernel/symmetric_matrix.hpp"

#include <cstdint>
#include <string>

namespace tmkernel {

enum class FeatureDistribution { uniform, gaussian };

std::string to_string(FeatureDistribution d);
FeatureDistribution feature_distribution_from_string(const std::string& text);

/// Linear observable eta(x) = A x with A of shape (2r+1) x n.
struct FeatureMatrix {
    struct Provenance {
        bool random = false;
        FeatureDistribution distribution = FeatureDistribution::uniform;
        std::uint64_t seed = 0;
        std::string label = "explicit";
    };

    RowMatrix a;
    int r = 1;
    Provenance provenance;

    /// Throws ValidationError unless rows == 2r+1.
    void validate() const;
};

/// Entries i.i.d. uniform(-0.5, 0.5) or standard normal, from the seed's feature stream.
FeatureMatrix draw_feature_matrix(int r, std::size_t n, FeatureDistribution distribution, std::uint64_t seed);

/// Wraps an explicit (2r+1) x n matrix.
FeatureMatrix explicit_feature_matrix(RowMatrix a, std::string label = "explicit");

/// A_g: the "good" random observable of the horseshoe study, entries rounded to two decimals.
FeatureMatrix horseshoe_good_features();
/// A_b = [[0, 1], [eps, 1 + eps], [-eps, 1 - eps]]: nearly dependent rows that ignore x_1.
FeatureMatrix horseshoe_bad_features(double eps = 0.05);

/// z_i = A * mean_l(y_i^(l)), an N x (2r+1) array.
RowMatrix whitney_embed(const BurstEnsemble& ens, const FeatureMatrix& features);

/// Plain pairwise Euclidean distances between rows.
SymmetricMatrix euclidean_distance_matrix(const RowMatrix& coords);

}  // namespace tmkernel
