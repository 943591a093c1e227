#pragma once

#include "tmkernel/dynamics.hpp"
#include "tmkernel/symmetric_matrix.hpp"

#include <span>
#include <string>

namespace tmkernel {

struct KernelSpec {
    enum class Kind { linear, polynomial, gaussian };

    Kind kind = Kind::gaussian;
    int degree = 1;          // polynomial only
    double bandwidth = 1.0;  // gaussian only: k(x, y) = exp(-|x - y|^2 / bandwidth)

    static KernelSpec linear() { return {Kind::linear, 1, 1.0}; }
    static KernelSpec polynomial(int degree);
    static KernelSpec gaussian(double bandwidth);
    /// "linear", "polynomial:<p>", "gaussian:<sigma>".
    static KernelSpec parse(const std::string& text);

    std::string to_string() const;
    void validate() const;
};

double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> y);

/// K_ij = (1/M^2) sum_{l1,l2} k(y_i^(l1), y_j^(l2)) over all pairs of bursts.
/// Only the lower triangle is evaluated; each entry is reduced in a fixed order.
SymmetricMatrix empirical_gram(const BurstEnsemble& ens, const KernelSpec& k);

/// Rectangular cross-Gram between two ensembles (rows index a, columns index b).
Matrix empirical_gram(const BurstEnsemble& a, const BurstEnsemble& b, const KernelSpec& k);

/// Squared RKHS distances D_ij = max(K_ii + K_jj - 2 K_ij, 0) between the embedded
/// empirical densities. Values more negative than -1e-9 relative to K_ii + K_jj are
/// reported through warn() before clamping.
SymmetricMatrix kernel_distance(const SymmetricMatrix& gram);

/// Element-wise square root of a squared-distance matrix.
SymmetricMatrix plain_distance(const SymmetricMatrix& squared);

/// Gram -> plain (non-squared) RKHS distance.
inline SymmetricMatrix kernel_distance_plain(const SymmetricMatrix& gram) {
    return plain_distance(kernel_distance(gram));
}

}  // namespace tmkernel
