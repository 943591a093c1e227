#include "tmkernel/error.hpp"
#include "tmkernel/io.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace tmkernel;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("tmkernel_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

BurstEnsemble sample_ensemble() {
    auto ens = tmtest::random_ensemble(4, 3, 2, 51);
    ens.tau = 0.25;
    ens.meta.seed = 9;
    ens.meta.dt = 0.01;
    ens.meta.beta = 2.0;
    ens.meta.source = "horseshoe";
    ens.samples[5] = 1.0 / 3.0;
    return ens;
}

void expect_same(const BurstEnsemble& a, const BurstEnsemble& b) {
    EXPECT_EQ(a.num_points, b.num_points);
    EXPECT_EQ(a.samples_per_point, b.samples_per_point);
    EXPECT_EQ(a.dim, b.dim);
    EXPECT_EQ(a.tau, b.tau);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.points, b.points);
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(io::parse_double(io::format_double(v)), v);
    }
    EXPECT_EQ(io::format_double(0.5), "0.5");
    EXPECT_THROW(io::parse_double("1.5x"), ValidationError);
    EXPECT_THROW(io::parse_double(""), ValidationError);
}

TEST(Bursts, BinaryRoundTripIsByteIdentical) {
    TempDir dir;
    const auto ens = sample_ensemble();
    io::write_bursts_binary(dir / "b.tmb", ens);
    const auto back = io::read_bursts(dir / "b.tmb");
    expect_same(ens, back);
    EXPECT_EQ(back.meta.seed, 9u);
    EXPECT_EQ(back.meta.source, "horseshoe");
    EXPECT_EQ(back.meta.beta, 2.0);
    io::write_bursts_binary(dir / "c.tmb", back);
    EXPECT_EQ(io::read_file(dir / "b.tmb"), io::read_file(dir / "c.tmb"));
    EXPECT_EQ(io::read_file(dir / "b.tmb.meta"), io::read_file(dir / "c.tmb.meta"));
}

TEST(Bursts, CsvRoundTripIsByteIdentical) {
    TempDir dir;
    const auto ens = sample_ensemble();
    io::write_bursts_csv(dir / "b.csv", ens);
    const auto back = io::read_bursts(dir / "b.csv");
    expect_same(ens, back);
    io::write_bursts_csv(dir / "c.csv", back);
    EXPECT_EQ(io::read_file(dir / "b.csv"), io::read_file(dir / "c.csv"));
}

TEST(Bursts, CsvWithoutPointRowsUsesBurstMeans) {
    const std::string text =
        "# tmburst n=1 N=2 M=2 tau=0.5\n"
        "i,l,y_1\n"
        "1,1,4\n"
        "0,0,1\n"
        "1,0,2\n"
        "0,1,3\n";
    const auto ens = io::decode_bursts_csv(text);
    EXPECT_EQ(ens.points(0, 0), 2.0);
    EXPECT_EQ(ens.points(1, 0), 3.0);
    EXPECT_EQ(ens.sample(1, 1)[0], 4.0);
    EXPECT_EQ(ens.meta.source, "external");
}

TEST(Bursts, MalformedInputIsRejected) {
    EXPECT_THROW(io::decode_bursts_csv("i,l,y_1\n0,0,1\n"), ValidationError);
    EXPECT_THROW(io::decode_bursts_csv("# tmburst n=1 N=2 M=1 tau=1\ni,l,y_1\n0,0,1\n"), ValidationError);
    EXPECT_THROW(io::decode_bursts_csv("# tmburst n=1 N=2 M=1 tau=1\ni,l,y_1\n0,0,1\n1,0,nan\n"), ValidationError);
    EXPECT_THROW(io::decode_bursts_csv("# tmburst n=1 N=2 M=1 tau=1\ni,l,y_1\n0,0,1\n5,0,1\n"), ValidationError);
    const std::string bytes = io::encode_bursts_binary(sample_ensemble());
    EXPECT_THROW(io::decode_bursts_binary(bytes.substr(0, bytes.size() - 3)), ValidationError);
    EXPECT_THROW(io::decode_bursts_binary("XXXX" + bytes.substr(4)), ValidationError);
}

TEST(Matrices, RoundTripBothEncodings) {
    TempDir dir;
    const SymmetricMatrix m(3, MatrixKind::gram, {1.0, 0.1, 2.0, 1e-300, -0.3, 3.0});
    for (const std::string name : {"m.csv", "m.tmm"}) {
        io::write_matrix(dir / name, m);
        const auto back = io::read_matrix(dir / name);
        EXPECT_EQ(back.kind(), MatrixKind::gram);
        EXPECT_EQ(back.lower(), m.lower());
        io::write_matrix(dir / ("again_" + name), back);
        EXPECT_EQ(io::read_file(dir / name), io::read_file(dir / ("again_" + name)));
    }
}

TEST(Matrices, AsymmetricCsvIsRejected) {
    EXPECT_THROW(io::decode_matrix_csv("# tmkernel-matrix kind=gram n=2\n1,2\n3,4\n"), ValidationError);
    EXPECT_THROW(io::decode_matrix_csv("# tmkernel-matrix kind=what n=1\n1\n"), ValidationError);
    EXPECT_THROW(io::decode_matrix_csv("# tmkernel-matrix kind=gram n=2\n1,2\n"), ValidationError);
}

TEST(Coordinates, RoundTrip) {
    TempDir dir;
    RowMatrix c(3, 2);
    c << 0.1, -2, 3e-9, 4, 5, 1.0 / 7.0;
    io::write_coords_csv(dir / "c.csv", c, "xi");
    EXPECT_EQ(io::read_coords_csv(dir / "c.csv"), c);
    EXPECT_EQ(io::read_file(dir / "c.csv").substr(0, 12), "i,xi_1,xi_2\n");
}

TEST(Features, RoundTripKeepsProvenance) {
    TempDir dir;
    const auto f = draw_feature_matrix(2, 3, FeatureDistribution::gaussian, 77);
    io::write_feature_matrix_csv(dir / "f.csv", f);
    const auto back = io::read_feature_matrix_csv(dir / "f.csv");
    EXPECT_EQ(back.a, f.a);
    EXPECT_EQ(back.r, 2);
    EXPECT_TRUE(back.provenance.random);
    EXPECT_EQ(back.provenance.seed, 77u);
    EXPECT_EQ(back.provenance.distribution, FeatureDistribution::gaussian);
    EXPECT_THROW(io::decode_feature_matrix_csv("# tmfeatures r=1 n=2 provenance=explicit\n1,2\n3,4\n"), ValidationError);
}

TEST(GridFields, RoundTrip) {
    TempDir dir;
    const auto hs = horseshoe();
    const auto rho = invariant_density(hs, 1.0, Grid(hs.domain(), {6, 5}));
    io::write_grid_csv(dir / "g.csv", rho);
    const auto back = io::read_grid_csv(dir / "g.csv");
    EXPECT_EQ(back.values, rho.values);
    EXPECT_EQ(back.grid.shape, rho.grid.shape);
    EXPECT_EQ(back.kind, rho.kind);
    io::write_grid_csv(dir / "h.csv", back);
    EXPECT_EQ(io::read_file(dir / "g.csv"), io::read_file(dir / "h.csv"));
}

TEST(Metadata, SortedAndParsed) {
    const io::Metadata m{{"b", "2"}, {"a", "x y"}};
    const auto text = io::format_metadata(m);
    EXPECT_EQ(text, "a = x y\nb = 2\n");
    EXPECT_EQ(io::parse_metadata(text), m);
}

TEST(Files, MissingFileIsAValidationError) {
    EXPECT_THROW(io::read_file("/nonexistent/tmkernel/file"), std::exception);
}
