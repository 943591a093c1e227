#include "tmkernel/dynamics.hpp"

#include "tmkernel/error.hpp"
#include "tmkernel/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tmkernel {

void set_num_threads(int threads) {
#ifdef _OPENMP
    static const int default_threads = omp_get_max_threads();
    omp_set_num_threads(threads > 0 ? threads : default_threads);
#else
    (void)threads;
#endif
}

int num_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

class MullerBrown final : public Potential {
public:
    std::string name() const override { return "muller-brown"; }
    std::size_t dim() const override { return 2; }
    Box domain() const override { return {{-1.5, -0.5}, {1.5, 2.5}}; }

    double energy(std::span<const double> x) const override {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += term(k, x[0], x[1]);
        return v;
    }

    void gradient(std::span<const double> x, std::span<double> out) const override {
        out[0] = out[1] = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double dx = x[0] - x0_[k];
            const double dy = x[1] - y0_[k];
            const double e = term(k, x[0], x[1]);
            out[0] += e * (2.0 * a_[k] * dx + b_[k] * dy);
            out[1] += e * (b_[k] * dx + 2.0 * c_[k] * dy);
        }
    }

private:
    double term(int k, double x, double y) const {
        const double dx = x - x0_[k];
        const double dy = y - y0_[k];
        return amp_[k] * std::exp(a_[k] * dx * dx + b_[k] * dx * dy + c_[k] * dy * dy);
    }

    static constexpr std::array<double, 4> amp_{-200.0, -100.0, -170.0, 15.0};
    static constexpr std::array<double, 4> a_{-1.0, -1.0, -6.5, 0.7};
    static constexpr std::array<double, 4> b_{0.0, 0.0, 11.0, 0.6};
    static constexpr std::array<double, 4> c_{-10.0, -10.0, -6.5, 0.7};
    static constexpr std::array<double, 4> x0_{1.0, 0.0, -0.5, -1.0};
    static constexpr std::array<double, 4> y0_{0.0, 0.5, 1.5, 1.0};
};

class Horseshoe final : public Potential {
public:
    std::string name() const override { return "horseshoe"; }
    std::size_t dim() const override { return 2; }
    Box domain() const override { return {{-2.0, -2.0}, {2.0, 2.0}}; }

    double energy(std::span<const double> x) const override {
        const double u = x[0] * x[0] - 1.0;
        const double w = x[0] * x[0] + x[1] - 1.0;
        return u * u + 5.0 * w * w;
    }

    void gradient(std::span<const double> x, std::span<double> out) const override {
        const double u = x[0] * x[0] - 1.0;
        const double w = x[0] * x[0] + x[1] - 1.0;
        out[0] = 4.0 * x[0] * u + 20.0 * x[0] * w;
        out[1] = 10.0 * w;
    }
};

class DoubleWell1D final : public Potential {
public:
    std::string name() const override { return "double-well"; }
    std::size_t dim() const override { return 1; }
    Box domain() const override { return {{-2.5}, {2.5}}; }

    double energy(std::span<const double> x) const override {
        const double u = x[0] * x[0] - 1.0;
        return u * u;
    }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        out[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
    }
};

class LiftedDoubleWell final : public Potential {
public:
    explicit LiftedDoubleWell(double stiffness) : stiffness_(stiffness) {}
    std::string name() const override { return "lifted-double-well"; }
    std::size_t dim() const override { return 2; }
    Box domain() const override { return {{-2.0, -1.5}, {2.0, 1.5}}; }

    double energy(std::span<const double> x) const override {
        const double u = x[0] * x[0] - 1.0;
        return u * u + stiffness_ * x[1] * x[1];
    }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        out[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
        out[1] = 2.0 * stiffness_ * x[1];
    }

private:
    double stiffness_;
};

class Flat final : public Potential {
public:
    explicit Flat(Box box) : box_(std::move(box)) {}
    std::string name() const override { return "flat"; }
    std::size_t dim() const override { return box_.dim(); }
    Box domain() const override { return box_; }
    double energy(std::span<const double>) const override { return 0.0; }
    void gradient(std::span<const double>, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }

private:
    Box box_;
};

}  // namespace

std::vector<double> PotentialModel::gradient(std::span<const double> x) const {
    std::vector<double> g(dim());
    impl_->gradient(x, g);
    return g;
}

PotentialModel muller_brown() { return PotentialModel(std::make_shared<MullerBrown>()); }
PotentialModel horseshoe() { return PotentialModel(std::make_shared<Horseshoe>()); }
PotentialModel double_well_1d() { return PotentialModel(std::make_shared<DoubleWell1D>()); }

PotentialModel lifted_double_well(double stiffness) {
    if (!(stiffness > 0.0)) throw ValidationError("lifted double well: stiffness must be positive");
    return PotentialModel(std::make_shared<LiftedDoubleWell>(stiffness));
}

PotentialModel flat(Box box) {
    box.validate();
    return PotentialModel(std::make_shared<Flat>(std::move(box)));
}

PotentialModel potential_by_name(const std::string& name) {
    if (name == "muller-brown") return muller_brown();
    if (name == "horseshoe") return horseshoe();
    if (name == "double-well") return double_well_1d();
    if (name == "lifted-double-well") return lifted_double_well();
    throw ValidationError(fmt::format(
        "unknown potential '{}' (expected muller-brown, horseshoe, double-well or lifted-double-well)", name));
}

long SdeConfig::steps_per_lag() const {
    const double ratio = tau / dt;
    const double nearest = std::round(ratio);
    const double ulp = std::nextafter(std::abs(ratio), std::numeric_limits<double>::infinity()) - std::abs(ratio);
    if (std::abs(ratio - nearest) > ulp)
        throw ValidationError(fmt::format("tau = {} is not an integer multiple of dt = {} (ratio {})", tau, dt, ratio));
    return static_cast<long>(nearest);
}

void SdeConfig::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError(fmt::format("beta must be positive, got {}", beta));
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError(fmt::format("dt must be positive, got {}", dt));
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError(fmt::format("tau must be nonnegative, got {}", tau));
    (void)steps_per_lag();
}

std::vector<double> euler_maruyama(const PotentialModel& potential, const SdeConfig& cfg,
                                   std::span<const double> x0, long steps, Engine& rng) {
    const std::size_t n = potential.dim();
    if (x0.size() != n)
        throw ValidationError(fmt::format("initial state has dimension {}, potential has {}", x0.size(), n));
    if (steps < 0) throw ValidationError("number of steps must be nonnegative");

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> grad(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double noise = cfg.zero_noise ? 0.0 : std::sqrt(2.0 * cfg.dt / cfg.beta);

    for (long step = 0; step < steps; ++step) {
        potential.gradient(x, grad);
        bool finite = true;
        for (std::size_t k = 0; k < n; ++k) {
            const double z = cfg.zero_noise ? 0.0 : normal(rng);
            x[k] += -grad[k] * cfg.dt + noise * z;
            finite = finite && std::isfinite(x[k]);
        }
        if (!finite)
            throw DivergenceError(fmt::format("Euler-Maruyama diverged at step {} (dt = {} is probably too large)", step, cfg.dt),
                                  step);
    }
    return x;
}

RowMatrix simulate_trajectory(const PotentialModel& potential, const SdeConfig& cfg,
                              std::span<const double> x0, long frames, long stride) {
    if (frames < 1 || stride < 1) throw ValidationError("trajectory needs frames >= 1 and stride >= 1");
    Engine rng = make_stream(stream_key(cfg.seed, stream_tag::trajectory), 0);
    RowMatrix out(frames, potential.dim());
    std::vector<double> x(x0.begin(), x0.end());
    for (long f = 0; f < frames; ++f) {
        x = euler_maruyama(potential, cfg, x, stride, rng);
        for (std::size_t k = 0; k < x.size(); ++k) out(f, k) = x[k];
    }
    return out;
}

RowMatrix BurstEnsemble::burst_means() const {
    RowMatrix means = RowMatrix::Zero(num_points, dim);
    std::vector<double> column(samples_per_point);
    for (std::size_t i = 0; i < num_points; ++i) {
        for (std::size_t k = 0; k < dim; ++k) {
            for (std::size_t l = 0; l < samples_per_point; ++l) column[l] = sample(i, l)[k];
            means(i, k) = pairwise_sum(column) / static_cast<double>(samples_per_point);
        }
    }
    return means;
}

void BurstEnsemble::validate() const {
    if (num_points < 2) throw ValidationError(fmt::format("burst ensemble needs N >= 2 test points, got {}", num_points));
    if (samples_per_point < 1) throw ValidationError("burst ensemble needs M >= 1 samples per point");
    if (dim < 1) throw ValidationError("burst ensemble has zero state dimension");
    if (samples.size() != num_points * samples_per_point * dim)
        throw ValidationError(fmt::format("burst ensemble holds {} values, expected N*M*n = {}", samples.size(),
                                          num_points * samples_per_point * dim));
    if (static_cast<std::size_t>(points.rows()) != num_points || static_cast<std::size_t>(points.cols()) != dim)
        throw ValidationError("burst ensemble test-point array does not match N x n");
    for (std::size_t idx = 0; idx < samples.size(); ++idx)
        if (!std::isfinite(samples[idx]))
            throw ValidationError(fmt::format("non-finite sample value for point {}, sample {}",
                                              idx / (samples_per_point * dim), (idx / dim) % samples_per_point));
    if (!points.allFinite()) throw ValidationError("non-finite test point");
}

BurstEnsemble sample_bursts(const PotentialModel& potential, const SdeConfig& cfg,
                            const RowMatrix& points, std::size_t samples_per_point) {
    cfg.validate();
    const std::size_t n = potential.dim();
    if (static_cast<std::size_t>(points.cols()) != n)
        throw ValidationError(fmt::format("test points have dimension {}, potential has {}", points.cols(), n));
    if (samples_per_point < 1) throw ValidationError("M must be at least 1");

    BurstEnsemble ens;
    ens.points = points;
    ens.num_points = static_cast<std::size_t>(points.rows());
    ens.samples_per_point = samples_per_point;
    ens.dim = n;
    ens.tau = cfg.tau;
    ens.meta = {cfg.seed, cfg.dt, cfg.beta, potential.name()};
    ens.samples.assign(ens.num_points * samples_per_point * n, 0.0);

    const long steps = cfg.steps_per_lag();
    const std::uint64_t family = stream_key(cfg.seed, stream_tag::bursts);
    const auto total = static_cast<long long>(ens.num_points * samples_per_point);

    std::mutex failure_mutex;
    long long first_failure = -1;
    std::string failure_message;
    long failure_step = 0;

#pragma omp parallel for schedule(static)
    for (long long flat_index = 0; flat_index < total; ++flat_index) {
        const auto i = static_cast<std::size_t>(flat_index) / samples_per_point;
        const auto l = static_cast<std::size_t>(flat_index) % samples_per_point;
        try {
            Engine rng = make_stream(family, i, l);
            std::vector<double> x0(points.row(i).data(), points.row(i).data() + n);
            const auto y = euler_maruyama(potential, cfg, x0, steps, rng);
            std::copy(y.begin(), y.end(), ens.samples.begin() + static_cast<std::ptrdiff_t>(flat_index * n));
        } catch (const DivergenceError& e) {
            std::lock_guard lock(failure_mutex);
            if (first_failure < 0 || flat_index < first_failure) {
                first_failure = flat_index;
                failure_message = fmt::format("burst (i={}, l={}): {}", i, l, e.what());
                failure_step = e.step();
            }
        }
    }
    if (first_failure >= 0) throw DivergenceError(failure_message, failure_step);
    return ens;
}

RowMatrix test_points_grid(const Box& box, std::span<const std::size_t> shape) {
    box.validate();
    if (shape.size() != box.dim()) throw ValidationError("grid shape must have one entry per box axis");
    std::size_t total = 1;
    for (auto m : shape) {
        if (m == 0) throw ValidationError("grid shape entries must be positive");
        total *= m;
    }
    const std::size_t n = box.dim();
    RowMatrix out(total, n);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t row = 0; row < total; ++row) {
        for (std::size_t k = 0; k < n; ++k)
            out(row, k) = box.lo[k] + (static_cast<double>(idx[k]) + 0.5) * box.width(k) / static_cast<double>(shape[k]);
        for (std::size_t k = n; k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return out;
}

RowMatrix test_points_uniform(const Box& box, std::size_t count, std::uint64_t seed) {
    box.validate();
    if (count < 1) throw ValidationError("need at least one test point");
    Engine rng = make_stream(stream_key(seed, stream_tag::test_points), 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RowMatrix out(count, box.dim());
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t k = 0; k < box.dim(); ++k) out(i, k) = box.lo[k] + unit(rng) * box.width(k);
    return out;
}

RowMatrix test_points_subsample(const RowMatrix& trajectory, std::size_t count, std::size_t stride) {
    if (count < 1 || stride < 1) throw ValidationError("subsampling needs count >= 1 and stride >= 1");
    const std::size_t needed = (count - 1) * stride + 1;
    if (static_cast<std::size_t>(trajectory.rows()) < needed)
        throw ValidationError(fmt::format("trajectory has {} frames, subsampling {} points with stride {} needs {}",
                                          trajectory.rows(), count, stride, needed));
    RowMatrix out(count, trajectory.cols());
    for (std::size_t i = 0; i < count; ++i) out.row(i) = trajectory.row(i * stride);
    return out;
}

}  // namespace tmkernel
