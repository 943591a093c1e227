#pragma once

#include "tmkernel/types.hpp"

#include <cstddef>

namespace tmkernel {

struct EigenPairs {
    Vector values;   // nonincreasing
    Matrix vectors;  // column j pairs with values[j]
};

/// `count` algebraically largest eigenpairs of a dense symmetric matrix.
/// Each eigenvector is unit length with its largest-magnitude entry positive
/// (first such entry on ties). Throws ConvergenceError if a pair's residual
/// |A v - lambda v| exceeds 1e-8 |A|.
EigenPairs symmetric_eigs(const Matrix& a, std::size_t count);

/// Flips the sign of v so its largest-magnitude entry is positive.
void canonical_sign(Eigen::Ref<Vector> v);

}  // namespace tmkernel
