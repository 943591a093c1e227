#include "tmkernel/oracle.hpp"

#include "tmkernel/eigensolver.hpp"
#include "tmkernel/error.hpp"
#include "tmkernel/rng.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace tmkernel {

Grid::Grid(Box b, std::vector<std::size_t> s) : box(std::move(b)), shape(std::move(s)) {
    box.validate();
    if (shape.size() != box.dim()) throw ValidationError("grid shape must have one entry per box axis");
    if (shape.empty() || shape.size() > 2) throw ValidationError("grids are limited to one or two dimensions");
    for (auto m : shape)
        if (m < 1) throw ValidationError("grid shape entries must be positive");
}

std::size_t Grid::cells() const noexcept {
    std::size_t c = 1;
    for (auto m : shape) c *= m;
    return c;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (std::size_t k = 0; k < dim(); ++k) v *= spacing(k);
    return v;
}

std::vector<std::size_t> Grid::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(dim());
    for (std::size_t k = dim(); k-- > 0;) {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    return idx;
}

std::size_t Grid::flatten(std::span<const std::size_t> index) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dim(); ++k) flat = flat * shape[k] + index[k];
    return flat;
}

std::vector<double> Grid::center(std::size_t flat) const {
    const auto idx = unflatten(flat);
    std::vector<double> x(dim());
    for (std::size_t k = 0; k < dim(); ++k) x[k] = box.lo[k] + (static_cast<double>(idx[k]) + 0.5) * spacing(k);
    return x;
}

long Grid::locate(std::span<const double> x) const {
    if (!box.contains(x)) return -1;
    std::vector<std::size_t> idx(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
        const auto c = static_cast<std::size_t>(std::floor((x[k] - box.lo[k]) / spacing(k)));
        idx[k] = std::min(c, shape[k] - 1);
    }
    return static_cast<long>(flatten(idx));
}

RowMatrix Grid::centers() const {
    RowMatrix out(static_cast<Eigen::Index>(cells()), static_cast<Eigen::Index>(dim()));
    for (std::size_t c = 0; c < cells(); ++c) {
        const auto x = center(c);
        for (std::size_t k = 0; k < dim(); ++k) out(c, k) = x[k];
    }
    return out;
}

std::string to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::density: return "density";
        case FieldKind::committor: return "committor";
        case FieldKind::eigenfunction: return "eigenfunction";
        case FieldKind::scalar: return "scalar";
    }
    return "scalar";
}

FieldKind field_kind_from_string(const std::string& text) {
    if (text == "density") return FieldKind::density;
    if (text == "committor") return FieldKind::committor;
    if (text == "eigenfunction") return FieldKind::eigenfunction;
    if (text == "scalar") return FieldKind::scalar;
    throw ValidationError(fmt::format("unknown grid field kind '{}'", text));
}

double GridField::interpolate(std::span<const double> x) const {
    const std::size_t n = grid.dim();
    if (x.size() != n) throw ValidationError("interpolation point has the wrong dimension");
    // Per axis: lower neighbour index and weight of the upper neighbour.
    std::vector<std::size_t> base(n);
    std::vector<double> frac(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double u = (x[k] - grid.box.lo[k]) / grid.spacing(k) - 0.5;
        const double clamped = std::clamp(u, 0.0, static_cast<double>(grid.shape[k] - 1));
        auto lower = static_cast<std::size_t>(std::floor(clamped));
        if (lower + 1 >= grid.shape[k]) lower = grid.shape[k] >= 2 ? grid.shape[k] - 2 : 0;
        base[k] = lower;
        frac[k] = grid.shape[k] >= 2 ? clamped - static_cast<double>(lower) : 0.0;
    }
    double result = 0.0;
    std::vector<std::size_t> idx(n);
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
        double w = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const bool upper = (corner >> k) & 1U;
            if (upper && grid.shape[k] < 2) {
                w = 0.0;
                break;
            }
            idx[k] = base[k] + (upper ? 1 : 0);
            w *= upper ? frac[k] : 1.0 - frac[k];
        }
        if (w != 0.0) result += w * values[grid.flatten(idx)];
    }
    return result;
}

std::vector<double> GridField::interpolate(const RowMatrix& points) const {
    std::vector<double> out(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out[i] = interpolate(std::span<const double>(points.row(i).data(), static_cast<std::size_t>(points.cols())));
    return out;
}

double GridField::integral() const { return pairwise_sum(values) * grid.cell_volume(); }

void GridField::validate() const {
    if (values.size() != grid.cells())
        throw ValidationError(fmt::format("grid field has {} values for {} cells", values.size(), grid.cells()));
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("grid field contains non-finite values");
    if (kind == FieldKind::density) {
        if (*std::min_element(values.begin(), values.end()) < 0.0) throw ValidationError("density field has negative values");
        if (std::abs(integral() - 1.0) > 1e-8)
            throw ValidationError(fmt::format("density field integrates to {}, expected 1", integral()));
    }
    if (kind == FieldKind::committor) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (*lo < 0.0 || *hi > 1.0) throw ValidationError("committor field leaves [0, 1]");
    }
}

Region Region::ball(std::vector<double> center, double radius) {
    if (!(radius > 0.0)) throw ValidationError("region radius must be positive");
    Region r;
    r.shape = Shape::ball;
    r.center = std::move(center);
    r.radius = radius;
    return r;
}

Region Region::box(Box bounds) {
    Region r;
    r.shape = Shape::box;
    r.bounds = std::move(bounds);
    return r;
}

bool Region::contains(std::span<const double> x) const {
    if (shape == Shape::box) return bounds.contains(x);
    if (x.size() != center.size()) return false;
    double d2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - center[k]) * (x[k] - center[k]);
    return d2 <= radius * radius;
}

namespace {

void check_potential_grid(const PotentialModel& potential, double beta, const Grid& grid) {
    if (potential.dim() != grid.dim())
        throw ValidationError(fmt::format("grid dimension {} does not match potential dimension {}", grid.dim(), potential.dim()));
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
}

std::vector<double> cell_energies(const PotentialModel& potential, const Grid& grid) {
    std::vector<double> v(grid.cells());
    for (std::size_t c = 0; c < grid.cells(); ++c) v[c] = potential.energy(grid.center(c));
    return v;
}

// Visits each face between neighbouring cells once: f(i, j, axis, V at face midpoint).
template <class F>
void for_each_face(const PotentialModel& potential, const Grid& grid, F&& f) {
    for (std::size_t c = 0; c < grid.cells(); ++c) {
        const auto idx = grid.unflatten(c);
        for (std::size_t k = 0; k < grid.dim(); ++k) {
            if (idx[k] + 1 >= grid.shape[k]) continue;
            auto nb = idx;
            ++nb[k];
            auto x = grid.center(c);
            x[k] += 0.5 * grid.spacing(k);
            f(c, grid.flatten(nb), k, potential.energy(x));
        }
    }
}

}  // namespace

GridField invariant_density(const PotentialModel& potential, double beta, const Grid& grid) {
    check_potential_grid(potential, beta, grid);
    const auto v = cell_energies(potential, grid);
    const double vmin = *std::min_element(v.begin(), v.end());
    GridField rho{grid, std::vector<double>(grid.cells()), FieldKind::density};
    for (std::size_t c = 0; c < grid.cells(); ++c) rho.values[c] = std::exp(-beta * (v[c] - vmin));
    const double z = pairwise_sum(rho.values) * grid.cell_volume();
    for (double& r : rho.values) r /= z;
    return rho;
}

Eigen::SparseMatrix<double> generator_matrix(const PotentialModel& potential, double beta, const Grid& grid) {
    check_potential_grid(potential, beta, grid);
    const auto v = cell_energies(potential, grid);
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> diag(grid.cells(), 0.0);
    for_each_face(potential, grid, [&](std::size_t i, std::size_t j, std::size_t axis, double v_face) {
        const double h = grid.spacing(axis);
        const double scale = 1.0 / (beta * h * h);
        const double rij = scale * std::exp(-beta * (v_face - v[i]));
        const double rji = scale * std::exp(-beta * (v_face - v[j]));
        triplets.emplace_back(i, j, rij);
        triplets.emplace_back(j, i, rji);
        diag[i] -= rij;
        diag[j] -= rji;
    });
    for (std::size_t c = 0; c < grid.cells(); ++c) triplets.emplace_back(c, c, diag[c]);
    Eigen::SparseMatrix<double> l(grid.cells(), grid.cells());
    l.setFromTriplets(triplets.begin(), triplets.end());
    return l;
}

Eigen::SparseMatrix<double> symmetrized_generator(const PotentialModel& potential, double beta, const Grid& grid) {
    check_potential_grid(potential, beta, grid);
    const auto v = cell_energies(potential, grid);
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> diag(grid.cells(), 0.0);
    for_each_face(potential, grid, [&](std::size_t i, std::size_t j, std::size_t axis, double v_face) {
        const double h = grid.spacing(axis);
        const double scale = 1.0 / (beta * h * h);
        const double sij = scale * std::exp(-beta * (v_face - 0.5 * (v[i] + v[j])));
        triplets.emplace_back(i, j, sij);
        triplets.emplace_back(j, i, sij);
        diag[i] -= scale * std::exp(-beta * (v_face - v[i]));
        diag[j] -= scale * std::exp(-beta * (v_face - v[j]));
    });
    for (std::size_t c = 0; c < grid.cells(); ++c) triplets.emplace_back(c, c, diag[c]);
    Eigen::SparseMatrix<double> s(grid.cells(), grid.cells());
    s.setFromTriplets(triplets.begin(), triplets.end());
    return s;
}

GridField committor(const PotentialModel& potential, double beta, const Grid& grid, const Region& a, const Region& b) {
    check_potential_grid(potential, beta, grid);
    const std::size_t cells = grid.cells();
    // 1 = in A, 0 = in B, -1 = free.
    std::vector<int> label(cells, -1);
    std::size_t count_a = 0;
    std::size_t count_b = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        const auto x = grid.center(c);
        const bool in_a = a.contains(x);
        const bool in_b = b.contains(x);
        if (in_a && in_b) throw ValidationError(fmt::format("committor: regions A and B overlap at cell {}", c));
        if (in_a) {
            label[c] = 1;
            ++count_a;
        } else if (in_b) {
            label[c] = 0;
            ++count_b;
        }
    }

    GridField q{grid, std::vector<double>(cells, 0.0), FieldKind::committor};
    std::vector<long> free_index(cells, -1);
    long free_count = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        if (label[c] >= 0)
            q.values[c] = label[c];
        else
            free_index[c] = free_count++;
    }
    if (free_count == 0) return q;
    if (count_a == 0 || count_b == 0)
        throw ValidationError(fmt::format("committor: region {} contains no grid cell, the system is singular",
                                          count_a == 0 ? "A" : "B"));

    const auto l = generator_matrix(potential, beta, grid);
    std::vector<Eigen::Triplet<double>> triplets;
    Vector rhs = Vector::Zero(free_count);
    for (int col = 0; col < l.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(l, col); it; ++it) {
            const auto row = static_cast<std::size_t>(it.row());
            if (free_index[row] < 0) continue;
            const auto c = static_cast<std::size_t>(it.col());
            if (free_index[c] >= 0)
                triplets.emplace_back(free_index[row], free_index[c], it.value());
            else
                rhs[free_index[row]] -= it.value() * q.values[c];
        }
    }
    Eigen::SparseMatrix<double> lff(free_count, free_count);
    lff.setFromTriplets(triplets.begin(), triplets.end());
    lff.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(lff);
    if (solver.info() != Eigen::Success)
        throw NumericalError(fmt::format("committor: sparse factorization failed ({})", solver.lastErrorMessage()));
    const Vector sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !sol.allFinite()) throw NumericalError("committor: sparse solve failed");
    for (std::size_t c = 0; c < cells; ++c)
        if (free_index[c] >= 0) q.values[c] = std::clamp(sol[free_index[c]], 0.0, 1.0);
    return q;
}

std::vector<GeneratorEigenpair> generator_eigs(const PotentialModel& potential, double beta, const Grid& grid,
                                               std::size_t count) {
    if (count < 1) throw ValidationError("generator_eigs: need at least one eigenpair");
    const auto cells = static_cast<Eigen::Index>(grid.cells());
    if (static_cast<Eigen::Index>(count) > cells) throw ValidationError("generator_eigs: more eigenpairs than cells");

    const auto s = symmetrized_generator(potential, beta, grid);
    double norm = 0.0;
    for (int col = 0; col < s.outerSize(); ++col) {
        double colsum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(s, col); it; ++it) colsum += std::abs(it.value());
        norm = std::max(norm, colsum);
    }

    const auto block = std::min<Eigen::Index>(cells, static_cast<Eigen::Index>(std::max<std::size_t>(2 * count, count + 8)));
    Matrix x(cells, block);
    {
        Engine rng = make_stream(0x6f7261636c65ULL, static_cast<std::uint64_t>(cells), count);
        std::normal_distribution<double> g(0.0, 1.0);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    }

    Vector values;
    Matrix vectors;
    if (cells <= 400) {
        // Small grids: dense solve is exact and cheap.
        const auto pairs = symmetric_eigs(Matrix(s), static_cast<std::size_t>(count));
        values = pairs.values;
        vectors = pairs.vectors;
    } else {
        // Shift-invert subspace iteration: the dominant modes of L are the smallest eigenvalues of
        // shift*I - S, which is symmetric positive definite.
        const double shift = 1e-6 * norm;
        Eigen::SparseMatrix<double> a = -s;
        for (Eigen::Index i = 0; i < cells; ++i) a.coeffRef(i, i) += shift;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
        if (ldlt.info() != Eigen::Success) throw NumericalError("generator_eigs: factorization of the shifted generator failed");

        const double tol = 1e-10 * norm;
        double worst = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (int iter = 0; iter < 2000 && !converged; ++iter) {
            Matrix y = ldlt.solve(x);
            Eigen::HouseholderQR<Matrix> qr(y);
            Matrix q = qr.householderQ() * Matrix::Identity(cells, block);
            Matrix sq = s * q;
            Matrix t = q.transpose() * sq;
            t = 0.5 * (t + t.transpose());
            Eigen::SelfAdjointEigenSolver<Matrix> small(t);
            // Ascending: the largest (closest to 0) are last.
            x.resize(cells, block);
            for (Eigen::Index j = 0; j < block; ++j) x.col(j) = q * small.eigenvectors().col(block - 1 - j);
            values.resize(static_cast<Eigen::Index>(count));
            worst = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
                values[j] = small.eigenvalues()[block - 1 - static_cast<Eigen::Index>(j)];
                const double res = (s * x.col(j) - values[j] * x.col(j)).norm();
                worst = std::max(worst, res);
            }
            converged = worst <= tol;
        }
        if (!converged)
            throw ConvergenceError(fmt::format("generator_eigs: subspace iteration stalled at residual {:.3e} (target {:.3e})",
                                               worst, tol),
                                   worst);
        vectors = x.leftCols(static_cast<Eigen::Index>(count));
    }

    const GridField rho = invariant_density(potential, beta, grid);
    const double vol = grid.cell_volume();
    std::vector<GeneratorEigenpair> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        if (j == 0) {
            // The stationary pair is known in closed form. Recovering it from u / sqrt(rho) would
            // amplify rounding noise in cells where rho is tiny.
            GeneratorEigenpair pair;
            pair.rate = 0.0;
            pair.function_mode = {grid, std::vector<double>(static_cast<std::size_t>(cells), 1.0), FieldKind::eigenfunction};
            pair.density_mode = {grid, rho.values, FieldKind::eigenfunction};
            out.push_back(std::move(pair));
            continue;
        }
        Vector u = vectors.col(static_cast<Eigen::Index>(j)).normalized();
        Vector phi(cells);
        for (Eigen::Index c = 0; c < cells; ++c) phi[c] = u[c] / std::sqrt(rho.values[c] * vol);
        canonical_sign(phi);
        GeneratorEigenpair pair;
        pair.rate = std::min(values[static_cast<Eigen::Index>(j)], 0.0);
        pair.function_mode = {grid, std::vector<double>(phi.data(), phi.data() + cells), FieldKind::eigenfunction};
        pair.density_mode = {grid, std::vector<double>(cells), FieldKind::eigenfunction};
        for (Eigen::Index c = 0; c < cells; ++c) pair.density_mode.values[c] = rho.values[c] * phi[c];
        out.push_back(std::move(pair));
    }
    return out;
}

GridField empirical_density(const BurstEnsemble& ens, std::size_t i, const Grid& grid, std::size_t* outside) {
    if (ens.dim != grid.dim()) throw ValidationError("empirical_density: grid and burst dimensions differ");
    if (i >= ens.num_points) throw ValidationError(fmt::format("empirical_density: point index {} out of range", i));
    GridField p{grid, std::vector<double>(grid.cells(), 0.0), FieldKind::density};
    const double mass = 1.0 / (static_cast<double>(ens.samples_per_point) * grid.cell_volume());
    std::size_t out_count = 0;
    for (std::size_t l = 0; l < ens.samples_per_point; ++l) {
        const long c = grid.locate(ens.sample(i, l));
        if (c < 0)
            ++out_count;
        else
            p.values[static_cast<std::size_t>(c)] += mass;
    }
    if (outside) *outside = out_count;
    if (out_count * 10 > ens.samples_per_point)
        warn(fmt::format("empirical_density: {} of {} samples of point {} lie outside the grid", out_count,
                         ens.samples_per_point, i));
    return p;
}

namespace {

using SparseHistogram = std::vector<std::pair<std::size_t, double>>;

SparseHistogram sparse_histogram(const BurstEnsemble& ens, std::size_t i, const Grid& grid, std::size_t& outside) {
    std::vector<std::size_t> cells;
    cells.reserve(ens.samples_per_point);
    for (std::size_t l = 0; l < ens.samples_per_point; ++l) {
        const long c = grid.locate(ens.sample(i, l));
        if (c < 0)
            ++outside;
        else
            cells.push_back(static_cast<std::size_t>(c));
    }
    std::sort(cells.begin(), cells.end());
    const double mass = 1.0 / (static_cast<double>(ens.samples_per_point) * grid.cell_volume());
    SparseHistogram h;
    for (std::size_t k = 0; k < cells.size();) {
        std::size_t m = k;
        while (m < cells.size() && cells[m] == cells[k]) ++m;
        h.emplace_back(cells[k], static_cast<double>(m - k) * mass);
        k = m;
    }
    return h;
}

}  // namespace

SymmetricMatrix density_distance_matrix(const BurstEnsemble& ens, const Grid& grid, DensityMetric metric,
                                        const GridField* rho) {
    if (ens.dim != grid.dim()) throw ValidationError("density_distance_matrix: grid and burst dimensions differ");
    std::vector<double> weight(grid.cells(), 1.0);
    if (metric == DensityMetric::l2_inv_rho) {
        if (!rho) throw ValidationError("density_distance_matrix: the 1/rho metric needs an invariant density");
        if (rho->values.size() != grid.cells()) throw ValidationError("density_distance_matrix: rho lives on a different grid");
        for (std::size_t c = 0; c < grid.cells(); ++c) {
            if (!(rho->values[c] > 0.0))
                throw NumericalError(fmt::format("invariant density is zero in cell {}; use a smaller beta or restrict the "
                                                 "grid to the sampled region",
                                                 c));
            weight[c] = 1.0 / rho->values[c];
        }
    }
    const double vol = grid.cell_volume();
    std::vector<SparseHistogram> hist(ens.num_points);
    std::size_t outside = 0;
    for (std::size_t i = 0; i < ens.num_points; ++i) hist[i] = sparse_histogram(ens, i, grid, outside);
    if (outside * 10 > ens.num_points * ens.samples_per_point)
        warn(fmt::format("density_distance_matrix: {} of {} samples lie outside the grid", outside,
                         ens.num_points * ens.samples_per_point));

    SymmetricMatrix D(ens.num_points, MatrixKind::distance);
    const auto N = static_cast<long long>(ens.num_points);
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < N; ++i) {
        const auto& a = hist[static_cast<std::size_t>(i)];
        for (long long j = 0; j < i; ++j) {
            const auto& b = hist[static_cast<std::size_t>(j)];
            double s = 0.0;
            std::size_t p = 0;
            std::size_t q = 0;
            while (p < a.size() || q < b.size()) {
                double diff;
                std::size_t cell;
                if (q == b.size() || (p < a.size() && a[p].first < b[q].first)) {
                    cell = a[p].first;
                    diff = a[p++].second;
                } else if (p == a.size() || b[q].first < a[p].first) {
                    cell = b[q].first;
                    diff = -b[q++].second;
                } else {
                    cell = a[p].first;
                    diff = a[p++].second - b[q++].second;
                }
                s += diff * diff * weight[cell];
            }
            D.at_lower(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = std::sqrt(s * vol);
        }
    }
    return D;
}

}  // namespace tmkernel
