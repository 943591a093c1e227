#pragma once

#include "tmkernel/rng.hpp"
#include "tmkernel/types.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tmkernel {

/// Analytic potential energy V: R^n -> R with gradient, plus the box it lives on.
class Potential {
public:
    virtual ~Potential() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Box domain() const = 0;
    virtual double energy(std::span<const double> x) const = 0;
    virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
};

/// Shared immutable handle to a potential; cheap to copy and safe to share across threads.
class PotentialModel {
public:
    PotentialModel() = default;
    explicit PotentialModel(std::shared_ptr<const Potential> impl) : impl_(std::move(impl)) {}

    std::string name() const { return impl_->name(); }
    std::size_t dim() const { return impl_->dim(); }
    Box domain() const { return impl_->domain(); }
    double energy(std::span<const double> x) const { return impl_->energy(x); }
    void gradient(std::span<const double> x, std::span<double> out) const { impl_->gradient(x, out); }
    std::vector<double> gradient(std::span<const double> x) const;

    explicit operator bool() const noexcept { return static_cast<bool>(impl_); }

private:
    std::shared_ptr<const Potential> impl_;
};

/// Four-term Mueller-Brown surface on [-1.5, 1.5] x [-0.5, 2.5].
PotentialModel muller_brown();
/// V(x, y) = (x^2 - 1)^2 + 5 (x^2 + y - 1)^2 on [-2, 2]^2: wells at (+-1, 0), saddle at (0, 1).
PotentialModel horseshoe();
/// V(x) = (x^2 - 1)^2 on [-2.5, 2.5].
PotentialModel double_well_1d();
/// V(x, y) = (x^2 - 1)^2 + stiffness * y^2 on [-2, 2] x [-1.5, 1.5]. The slow
/// process is the x hopping; y relaxes fast and carries no slow information.
PotentialModel lifted_double_well(double stiffness = 1.0);
/// V == 0 on the given box.
PotentialModel flat(Box box);

/// Looks up "muller-brown", "horseshoe", "double-well", "lifted-double-well".
PotentialModel potential_by_name(const std::string& name);

// Mueller-Brown minima, used for committor regions.
inline constexpr double muller_brown_min_top_left[2] = {-0.558224, 1.441726};
inline constexpr double muller_brown_min_bottom_right[2] = {0.623499, 0.028038};

struct SdeConfig {
    double beta = 1.0;
    double dt = 1e-3;
    double tau = 1.0;
    std::uint64_t seed = 1;
    /// Drops the noise term. Only for deterministic tests.
    bool zero_noise = false;

    /// tau / dt as an integer; throws ValidationError if it is not integral to within 1 ulp.
    long steps_per_lag() const;
    void validate() const;
};

/// Integrates X <- X - grad V(X) dt + sqrt(2 dt / beta) Z for `steps` steps.
/// Throws DivergenceError naming the step at which a coordinate became non-finite.
std::vector<double> euler_maruyama(const PotentialModel& potential, const SdeConfig& cfg,
                                   std::span<const double> x0, long steps, Engine& rng);

/// Records every `stride`-th state (after stride, 2*stride, ... steps) of one long
/// trajectory, `frames` states in total. Uses the trajectory stream of cfg.seed.
RowMatrix simulate_trajectory(const PotentialModel& potential, const SdeConfig& cfg,
                              std::span<const double> x0, long frames, long stride);

/// N test points with M endpoint samples of the lag-tau transition density each.
struct BurstEnsemble {
    struct Meta {
        std::uint64_t seed = 1;
        double dt = 0.0;
        double beta = 0.0;
        std::string source = "external";
    };

    RowMatrix points;               // N x n
    std::vector<double> samples;    // N*M*n, index ((i*M + l)*n + k)
    std::size_t num_points = 0;
    std::size_t samples_per_point = 0;
    std::size_t dim = 0;
    double tau = 0.0;
    Meta meta;

    std::span<const double> sample(std::size_t i, std::size_t l) const {
        return {samples.data() + (i * samples_per_point + l) * dim, dim};
    }
    /// All M samples of point i, contiguous.
    std::span<const double> burst(std::size_t i) const {
        return {samples.data() + i * samples_per_point * dim, samples_per_point * dim};
    }
    /// Per-point sample means, N x n.
    RowMatrix burst_means() const;
    /// Throws ValidationError on N < 2, M < 1, size mismatch, or non-finite values.
    void validate() const;
};

/// Bursts of M trajectories of length tau from every test point. Sample (i, l) uses
/// its own stream derived from (seed, i, l), so the result does not depend on
/// thread count or scheduling.
BurstEnsemble sample_bursts(const PotentialModel& potential, const SdeConfig& cfg,
                            const RowMatrix& points, std::size_t samples_per_point);

/// Cell centers of a regular grid over the box, lexicographic (last axis fastest).
RowMatrix test_points_grid(const Box& box, std::span<const std::size_t> shape);
RowMatrix test_points_uniform(const Box& box, std::size_t count, std::uint64_t seed);
/// Rows 0, stride, 2*stride, ... of a trajectory, first `count` of them.
RowMatrix test_points_subsample(const RowMatrix& trajectory, std::size_t count, std::size_t stride);

}  // namespace tmkernel
