#include "tmkernel/error.hpp"
#include "tmkernel/io.hpp"
#include "tmkernel/pipeline.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace tmkernel;
namespace fs = std::filesystem;

namespace {

const char* kKernelConfig = R"(
[system]
potential = horseshoe
beta = 1
dt = 0.01
tau = 0.5
seed = 3

[points]
strategy = grid
shape = 5x5

[bursts]
samples = 20

[embedding]
kernel = gaussian:0.5

[manifold]
method = dmap
bandwidth = 0.5
components = 2
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return text.replace(pos, from.size(), to);
}

fs::path temp_dir() {
    const auto p = fs::temp_directory_path() / ("tmkernel_pipe_" + std::to_string(std::random_device{}()));
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Config, ParsesAValidKernelConfig) {
    const auto cfg = parse_config(kKernelConfig);
    EXPECT_EQ(cfg.potential, "horseshoe");
    EXPECT_EQ(cfg.grid_shape, (std::vector<std::size_t>{5, 5}));
    EXPECT_EQ(cfg.samples, 20u);
    ASSERT_TRUE(cfg.kernel.has_value());
    EXPECT_FALSE(cfg.whitney());
    EXPECT_EQ(cfg.sde.seed, 3u);
}

TEST(Config, RejectsInvalidCombinations) {
    EXPECT_THROW(parse_config(replace(kKernelConfig, "tau = 0.5", "tau = 0.505001")), ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "kernel = gaussian:0.5", "")), ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "kernel = gaussian:0.5", "features = good")), ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "kernel = gaussian:0.5", "kernel = gaussian:0.5\nfeatures = good\nr = 1")),
                 ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "samples = 20", "samples = 20\ncolour = blue")), ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "[bursts]", "[extras]")), ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "method = dmap", "method = isomap")), ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "potential = horseshoe", "potential = horseshoe\nexternal = x.csv")),
                 ValidationError);
    EXPECT_THROW(parse_config(replace(kKernelConfig, "beta = 1", "beta = -1")), ValidationError);
    EXPECT_NO_THROW(parse_config(replace(kKernelConfig, "kernel = gaussian:0.5", "features = good\nr = 1")));
}

TEST(Config, ParseShape) {
    EXPECT_EQ(parse_shape("32x16"), (std::vector<std::size_t>{32, 16}));
    EXPECT_EQ(parse_shape("64"), (std::vector<std::size_t>{64}));
    EXPECT_THROW(parse_shape("3xx"), ValidationError);
    EXPECT_THROW(parse_shape("0x4"), ValidationError);
}

TEST(Pipeline, StageWiseEqualsRunPipeline) {
    const auto dir = temp_dir();
    auto cfg = parse_config(kKernelConfig);
    cfg.output_dir = dir;
    const auto e = run_pipeline(cfg);

    const auto ens = pipeline_bursts(cfg);
    const auto d = pipeline_distances(cfg, ens);
    const auto staged = pipeline_embedding(cfg, d);
    EXPECT_EQ(staged.coords, e.coords);
    EXPECT_EQ(staged.eigenvalues, e.eigenvalues);
    EXPECT_EQ(io::read_matrix(dir / "distances.tmm").lower(), d.lower());
    EXPECT_EQ(io::read_bursts(dir / "bursts.tmb").samples, ens.samples);
    EXPECT_EQ(io::read_coords_csv(dir / "rc.csv"), e.coords);
    fs::remove_all(dir);
}

TEST(Pipeline, WhitneyRouteAndExternalBursts) {
    const auto dir = temp_dir();
    auto cfg = parse_config(replace(replace(kKernelConfig, "kernel = gaussian:0.5", "features = good\nr = 1"),
                                    "method = dmap", "method = mds"));
    cfg.output_dir = dir / "a";
    const auto e = run_pipeline(cfg);
    EXPECT_EQ(e.coords.rows(), 25);

    // Feeding the written bursts back in as external data reproduces the embedding.
    io::write_bursts_csv(dir / "bursts.csv", io::read_bursts(dir / "a" / "bursts.tmb"));
    auto ext = cfg;
    ext.potential.clear();
    ext.external = dir / "bursts.csv";
    ext.output_dir = dir / "b";
    const auto e2 = run_pipeline(ext);
    EXPECT_EQ(e2.coords, e.coords);
    fs::remove_all(dir);
}

TEST(Pipeline, FeatureDimensionMismatchIsReported) {
    auto cfg = parse_config(replace(replace(kKernelConfig, "kernel = gaussian:0.5", "features = good\nr = 1"),
                                    "shape = 5x5", "shape = 5x5"));
    cfg.r = 2;
    EXPECT_THROW(pipeline_features(cfg, 2), ValidationError);
    cfg.r = 1;
    EXPECT_THROW(pipeline_features(cfg, 3), ValidationError);
    EXPECT_NO_THROW(pipeline_features(cfg, 2));
}
