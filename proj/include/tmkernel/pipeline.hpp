#pragma once

#include "tmkernel/diagnostics.hpp"
#include "tmkernel/dynamics.hpp"
#include "tmkernel/kernels.hpp"
#include "tmkernel/manifold.hpp"
#include "tmkernel/oracle.hpp"
#include "tmkernel/whitney.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tmkernel {

/// One run of the burst -> embedding -> manifold-learning pipeline, read from an INI file:
///
///   [system]    potential = horseshoe | external = bursts.csv, beta, dt, tau, seed
///   [points]    strategy = grid | uniform | trajectory, shape = 32x32, count, stride
///   [bursts]    samples = 100
///   [embedding] kernel = gaussian:0.1   (kernel pipeline)
///               features = good | bad | uniform | gaussian | <file>, r = 1   (Whitney pipeline)
///   [manifold]  method = dmap | mds, bandwidth, components
///   [output]    dir = out
struct PipelineConfig {
    std::string potential;  // empty when bursts come from `external`
    std::filesystem::path external;
    SdeConfig sde;

    std::string point_strategy = "grid";
    std::vector<std::size_t> grid_shape;
    std::size_t point_count = 0;
    std::size_t point_stride = 1;

    std::size_t samples = 100;

    std::optional<KernelSpec> kernel;
    std::optional<std::string> features;
    std::optional<int> r;

    std::string manifold_method = "dmap";
    double bandwidth = 0.1;
    std::size_t components = 2;

    std::filesystem::path output_dir = "out";

    bool whitney() const { return features.has_value(); }
    /// Exactly one of kernel / features; r present for features; tau a multiple of dt; etc.
    void validate() const;
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Test points for a potential-driven config.
RowMatrix make_test_points(const PipelineConfig& cfg, const PotentialModel& potential);
/// Simulated (or ingested external) bursts.
BurstEnsemble pipeline_bursts(const PipelineConfig& cfg);
/// Feature matrix named by the config ("good", "bad", a random distribution, or a CSV file).
FeatureMatrix pipeline_features(const PipelineConfig& cfg, std::size_t n);
/// Plain distance matrix of the embedded densities (kernel or Whitney route).
SymmetricMatrix pipeline_distances(const PipelineConfig& cfg, const BurstEnsemble& ens);
EmbeddingResult pipeline_embedding(const PipelineConfig& cfg, const SymmetricMatrix& distances);

/// Runs every stage and writes bursts.tmb, distances.tmm, rc.csv, spectrum.csv into the output dir.
EmbeddingResult run_pipeline(const PipelineConfig& cfg);

// Reproduction recipes. Both write a complete, deterministic artifact tree under `out`
// (only a function of the seed) and return the headline numbers.

struct MullerBrownRecipe {
    std::size_t grid = 32;
    std::size_t samples = 100;
    double beta = 0.05;
    double dt = 1e-5;
    double tau = 0.03;
    double sigma = 0.1;
    double bandwidth = 0.1;
    std::size_t components = 2;
    std::size_t oracle_grid = 128;
    double region_radius = 0.1;
};

struct MullerBrownSummary {
    std::size_t num_points = 0;
    Vector eigenvalues;
    RowMatrix rc;
    std::vector<double> committor_at_points;
    double spearman_rc_committor = 0.0;
};

MullerBrownSummary repro_muller_brown(const std::filesystem::path& out, std::uint64_t seed,
                                      const MullerBrownRecipe& recipe = {});

struct HorseshoeRecipe {
    std::size_t points = 200;
    std::size_t samples = 100;
    double beta = 1.0;
    double dt = 1e-2;
    double tau = 2.0;
    std::size_t histogram = 64;
    double kernel_sigma = 1e-3;
    std::vector<double> sweep = {1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0, 3.0, 10.0};
    double floor_fraction = 0.05;
};

struct HorseshoeSummary {
    DistortionReport kernel;  // Gaussian sigma = kernel_sigma against L2_{1/rho}
    DistortionReport good;    // Whitney A_g against L2_{1/rho}
    DistortionReport bad;     // Whitney A_b against L2_{1/rho}
    std::vector<SweepRow> sweep;
};

HorseshoeSummary repro_horseshoe(const std::filesystem::path& out, std::uint64_t seed,
                                 const HorseshoeRecipe& recipe = {});

/// Parses "32x32" / "64" into per-axis counts.
std::vector<std::size_t> parse_shape(const std::string& text);

}  // namespace tmkernel
