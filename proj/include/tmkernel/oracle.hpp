#pragma once

#include "tmkernel/dynamics.hpp"
#include "tmkernel/symmetric_matrix.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tmkernel {

/// Regular cell-centered grid over a box; flat cell index is lexicographic with
/// the last axis fastest (the same order as test_points_grid).
struct Grid {
    Box box;
    std::vector<std::size_t> shape;

    Grid() = default;
    Grid(Box b, std::vector<std::size_t> s);

    std::size_t dim() const noexcept { return shape.size(); }
    std::size_t cells() const noexcept;
    double spacing(std::size_t axis) const { return box.width(axis) / static_cast<double>(shape[axis]); }
    double cell_volume() const;
    std::vector<std::size_t> unflatten(std::size_t flat) const;
    std::size_t flatten(std::span<const std::size_t> index) const;
    std::vector<double> center(std::size_t flat) const;
    /// Cell containing x, or -1 if x is outside the box. The upper faces belong to the last cell.
    long locate(std::span<const double> x) const;
    RowMatrix centers() const;
};

enum class FieldKind { density, committor, eigenfunction, scalar };

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& text);

struct GridField {
    Grid grid;
    std::vector<double> values;  // one per cell
    FieldKind kind = FieldKind::scalar;

    /// Multilinear interpolation between cell centers; constant beyond the outermost centers.
    double interpolate(std::span<const double> x) const;
    std::vector<double> interpolate(const RowMatrix& points) const;
    /// sum(values) * cell volume.
    double integral() const;
    /// Checks the invariants of `kind` (density: nonnegative, unit mass to 1e-8;
    /// committor: values in [0, 1]).
    void validate() const;
};

/// Set of states, selected cell-wise by cell center.
struct Region {
    enum class Shape { ball, box };

    Shape shape = Shape::ball;
    std::vector<double> center;
    double radius = 0.0;
    Box bounds;

    static Region ball(std::vector<double> center, double radius);
    static Region box(Box bounds);
    bool contains(std::span<const double> x) const;
};

/// rho = exp(-beta V) / Z at cell centers, Z by midpoint quadrature.
GridField invariant_density(const PotentialModel& potential, double beta, const Grid& grid);

/// Discretized generator L = beta^{-1} Laplacian - grad V . grad in flux form: the rate from
/// cell i to a face neighbour j is beta^{-1} h^{-2} exp(-beta (V(face) - V(x_i))). Reflecting
/// (no-flux) boundary; rows sum to zero.
Eigen::SparseMatrix<double> generator_matrix(const PotentialModel& potential, double beta, const Grid& grid);

/// R^{1/2} L R^{-1/2} with R = diag(rho); exactly symmetric, same spectrum as L.
Eigen::SparseMatrix<double> symmetrized_generator(const PotentialModel& potential, double beta, const Grid& grid);

/// Solves L q = 0 off A and B with q = 1 on A, q = 0 on B.
GridField committor(const PotentialModel& potential, double beta, const Grid& grid, const Region& a, const Region& b);

struct GeneratorEigenpair {
    double rate = 0.0;          // eigenvalue of L (<= 0); transfer operator eigenvalue is exp(rate * t)
    GridField density_mode;     // psi_i: Perron-Frobenius mode, psi_0 = rho, orthonormal in L2_{1/rho}
    GridField function_mode;    // phi_i = psi_i / rho: Koopman mode, phi_0 = 1, orthonormal in L2_rho
};

/// The `count` dominant eigenpairs (rates closest to zero) of the discretized generator,
/// by shift-invert subspace iteration on the symmetrized operator.
std::vector<GeneratorEigenpair> generator_eigs(const PotentialModel& potential, double beta, const Grid& grid,
                                               std::size_t count);

/// Normalized histogram of the M endpoints of test point i (mass 1 when every sample is
/// inside the grid). Warns when more than 10% of the samples fall outside.
GridField empirical_density(const BurstEnsemble& ens, std::size_t i, const Grid& grid,
                            std::size_t* outside = nullptr);

enum class DensityMetric { l2, l2_inv_rho };

/// D_ij = ( sum_cells (p_i - p_j)^2 w vol )^{1/2} between the histogram densities, with
/// w = 1 (l2) or w = 1 / rho (l2_inv_rho; `rho` required, strictly positive).
SymmetricMatrix density_distance_matrix(const BurstEnsemble& ens, const Grid& grid, DensityMetric metric,
                                        const GridField* rho = nullptr);

}  // namespace tmkernel
