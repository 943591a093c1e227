#pragma once

#include "tmkernel/eigensolver.hpp"
#include "tmkernel/symmetric_matrix.hpp"

#include <cstddef>
#include <string>

namespace tmkernel {

/// Coordinates assigned to each test point by a manifold learner: row i is xi(x_i).
struct EmbeddingResult {
    enum class Method { diffusion_maps, mds };

    RowMatrix coords;
    /// Nonincreasing. Diffusion maps: Markov-matrix eigenvalues including the trivial
    /// lambda_0 = 1 (so coords column j pairs with eigenvalues[j + 1]). MDS: the whole
    /// spectrum of the double-centered matrix B.
    Vector eigenvalues;
    Method method = Method::diffusion_maps;
    double bandwidth = 0.0;  // diffusion maps only

    std::string method_label() const;
};

/// Coifman-Lafon diffusion maps with alpha = 1 on a plain distance matrix:
/// W = exp(-D^2 / bandwidth), density-normalized by its degree outer product, then
/// made row-stochastic. Column j of coords is lambda_{j+1} * v_{j+1}, with v
/// normalized to unit norm under the stationary distribution (so v_0 == 1).
/// Throws NumericalError when a row of W has no numerically nonzero off-diagonal entry.
EmbeddingResult diffusion_maps(const SymmetricMatrix& distances, double bandwidth, std::size_t components);

/// Full Markov matrix of the diffusion-maps construction (row-stochastic), for inspection.
Matrix diffusion_markov_matrix(const SymmetricMatrix& distances, double bandwidth);

/// Classical (Torgerson) MDS: B = -1/2 J D^2 J, coords = top-k eigenvectors scaled by
/// sqrt(eigenvalue). Negative eigenvalues among the top k are truncated with a warning
/// and fewer than k columns are returned.
EmbeddingResult classical_mds(const SymmetricMatrix& distances, std::size_t k);

/// Smallest r such that lambda_r / lambda_{r+1} >= ratio among the given (nontrivial,
/// positive) eigenvalues; 0 if there is no such gap.
std::size_t spectral_gap_dimension(const Vector& eigenvalues, double ratio = 3.0);

}  // namespace tmkernel
