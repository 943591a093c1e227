// tmkernel: command-line front end for sampling, embedding, manifold learning,
// the grid oracle and the distortion diagnostics.

#include "tmkernel/diagnostics.hpp"
#include "tmkernel/error.hpp"
#include "tmkernel/io.hpp"
#include "tmkernel/oracle.hpp"
#include "tmkernel/parallel.hpp"
#include "tmkernel/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>

namespace fs = std::filesystem;
using namespace tmkernel;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
};

PipelineConfig config_from(const GlobalOptions& g) {
    if (g.config.empty()) throw ValidationError("this command needs --config <file.ini>");
    PipelineConfig cfg = load_config(g.config);
    if (g.seed) cfg.sde.seed = *g.seed;
    if (!g.out.empty()) cfg.output_dir = g.out;
    return cfg;
}

fs::path require_out(const GlobalOptions& g, const char* what) {
    if (g.out.empty()) throw ValidationError(fmt::format("--out is required ({})", what));
    return g.out;
}

Region parse_region(const std::string& text) {
    // "x,y,...,radius" (ball)
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(',', start);
        values.push_back(io::parse_double(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (values.size() < 2) throw ValidationError(fmt::format("region '{}' must be 'c_1,...,c_n,radius'", text));
    const double radius = values.back();
    values.pop_back();
    return Region::ball(values, radius);
}

SymmetricMatrix as_distances(const SymmetricMatrix& m) {
    return m.kind() == MatrixKind::gram ? kernel_distance_plain(m) : m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reaction coordinates from transition-manifold embeddings"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--config", g.config, "Pipeline configuration (INI)");
    app.add_option("--seed", g.seed, "Master seed (overrides the config)");
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--threads", g.threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

    auto* run = app.add_subcommand("run", "Run the configured pipeline end to end");

    auto* sample = app.add_subcommand("sample", "Simulate bursts for the configured system");
    std::string sample_format = "binary";
    sample->add_option("--format", sample_format, "binary (TMB1) or csv")->check(CLI::IsMember({"binary", "csv"}));

    auto* gram = app.add_subcommand("gram", "Empirical kernel Gram matrix of a burst file");
    std::string gram_bursts, gram_kernel;
    bool gram_distances = false;
    gram->add_option("bursts", gram_bursts, "Burst file (TMB1 or CSV)")->required()->check(CLI::ExistingFile);
    gram->add_option("--kernel", gram_kernel, "linear | polynomial:<p> | gaussian:<sigma>")->required();
    gram->add_flag("--distances", gram_distances, "Write plain RKHS distances instead of the Gram matrix");

    auto* whit = app.add_subcommand("embed-whitney", "Random linear-feature embedding of burst means");
    std::string whit_bursts, whit_features, whit_distances;
    int whit_r = 0;
    whit->add_option("bursts", whit_bursts, "Burst file")->required()->check(CLI::ExistingFile);
    whit->add_option("--features", whit_features, "good | bad | uniform | gaussian | <feature CSV>")->required();
    whit->add_option("--r", whit_r, "Reduced dimension (2r+1 features)")->required()->check(CLI::PositiveNumber);
    whit->add_option("--distances", whit_distances, "Also write the Euclidean distance matrix here");

    auto* dmap = app.add_subcommand("dmap", "Diffusion maps on a distance (or Gram) matrix");
    std::string dmap_matrix;
    double dmap_bandwidth = 0.1;
    std::size_t dmap_components = 2;
    dmap->add_option("matrix", dmap_matrix, "Matrix file")->required()->check(CLI::ExistingFile);
    dmap->add_option("--bandwidth", dmap_bandwidth, "Kernel bandwidth epsilon in exp(-D^2/epsilon)")->required();
    dmap->add_option("--components", dmap_components, "Number of nontrivial coordinates");

    auto* mds = app.add_subcommand("mds", "Classical MDS on a distance (or Gram) matrix");
    std::string mds_matrix;
    std::size_t mds_components = 2;
    mds->add_option("matrix", mds_matrix, "Matrix file")->required()->check(CLI::ExistingFile);
    mds->add_option("--components", mds_components, "Embedding dimension");

    auto* oracle = app.add_subcommand("oracle", "Grid reference quantities for a potential");
    std::string oracle_potential, oracle_task, oracle_shape, oracle_a, oracle_b;
    double oracle_beta = 1.0;
    std::size_t oracle_count = 3;
    oracle->add_option("--potential", oracle_potential, "muller-brown | horseshoe | double-well | lifted-double-well")
        ->required();
    oracle->add_option("--beta", oracle_beta, "Inverse temperature")->required();
    oracle->add_option("--shape", oracle_shape, "Grid shape, e.g. 128x128")->required();
    oracle->add_option("--task", oracle_task, "density | committor | eigs")
        ->required()
        ->check(CLI::IsMember({"density", "committor", "eigs"}));
    oracle->add_option("--a", oracle_a, "Committor region A as 'c_1,...,c_n,radius'");
    oracle->add_option("--b", oracle_b, "Committor region B as 'c_1,...,c_n,radius'");
    oracle->add_option("--count", oracle_count, "Number of eigenpairs");

    auto* dist = app.add_subcommand("distortion", "Contraction, expansion and distortion against a reference");
    std::string dist_reference;
    std::vector<std::string> dist_embedded;
    std::optional<double> dist_floor;
    double dist_floor_fraction = 0.05;
    dist->add_option("--reference", dist_reference, "Reference distance matrix")->required()->check(CLI::ExistingFile);
    dist->add_option("embedded", dist_embedded, "Embedded distance matrices or coordinate CSVs")
        ->required()
        ->check(CLI::ExistingFile);
    dist->add_option("--floor", dist_floor, "Absolute floor on reference distances");
    dist->add_option("--floor-fraction", dist_floor_fraction, "Floor as a fraction of the median reference distance");

    auto* rcq = app.add_subcommand("rc-quality", "Sup-residual of grid eigenfunctions against a reaction coordinate");
    std::string rcq_rc, rcq_points;
    std::vector<std::string> rcq_fields;
    std::size_t rcq_bins = 20;
    rcq->add_option("--rc", rcq_rc, "Reaction coordinate CSV (one row per test point)")->required()->check(CLI::ExistingFile);
    rcq->add_option("--points", rcq_points, "Test points: burst file or coordinate CSV")->required()->check(CLI::ExistingFile);
    rcq->add_option("fields", rcq_fields, "Grid field CSVs")->required()->check(CLI::ExistingFile);
    rcq->add_option("--bins", rcq_bins, "Bins per reaction-coordinate axis");

    auto* repro = app.add_subcommand("repro", "Reproduce a reference experiment");
    std::string repro_name;
    repro->add_option("experiment", repro_name, "muller-brown | horseshoe")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_num_threads(g.threads);

        if (*run) {
            const auto e = run_pipeline(config_from(g));
            fmt::print("wrote {} coordinates for {} test points\n", e.coords.cols(), e.coords.rows());
        } else if (*sample) {
            const PipelineConfig cfg = config_from(g);
            const BurstEnsemble ens = pipeline_bursts(cfg);
            fs::path out = g.out.empty() ? cfg.output_dir / (sample_format == "csv" ? "bursts.csv" : "bursts.tmb") : fs::path(g.out);
            if (sample_format == "csv")
                io::write_bursts_csv(out, ens);
            else
                io::write_bursts_binary(out, ens);
            fmt::print("wrote {} ({} points x {} samples x {} dims)\n", out.string(), ens.num_points,
                       ens.samples_per_point, ens.dim);
        } else if (*gram) {
            const fs::path out = require_out(g, "matrix file");
            const BurstEnsemble ens = io::read_bursts(gram_bursts);
            SymmetricMatrix k = empirical_gram(ens, KernelSpec::parse(gram_kernel));
            io::write_matrix(out, gram_distances ? kernel_distance_plain(k) : k);
        } else if (*whit) {
            const fs::path out = require_out(g, "coordinate CSV");
            const BurstEnsemble ens = io::read_bursts(whit_bursts);
            PipelineConfig cfg;
            cfg.features = whit_features;
            cfg.r = whit_r;
            if (g.seed) cfg.sde.seed = *g.seed;
            const FeatureMatrix f = pipeline_features(cfg, ens.dim);
            const RowMatrix z = whitney_embed(ens, f);
            io::write_coords_csv(out, z, "z");
            if (!whit_distances.empty()) io::write_matrix(whit_distances, euclidean_distance_matrix(z));
        } else if (*dmap || *mds) {
            const fs::path out = require_out(g, "output directory");
            const SymmetricMatrix d = as_distances(io::read_matrix(*dmap ? dmap_matrix : mds_matrix));
            const EmbeddingResult e =
                *dmap ? diffusion_maps(d, dmap_bandwidth, dmap_components) : classical_mds(d, mds_components);
            io::write_embedding(out / "rc.csv", out / "spectrum.csv", e);
        } else if (*oracle) {
            const fs::path out = require_out(g, "output directory");
            const PotentialModel pot = potential_by_name(oracle_potential);
            const Grid grid(pot.domain(), parse_shape(oracle_shape));
            if (oracle_task == "density") {
                io::write_grid_csv(out / "density.csv", invariant_density(pot, oracle_beta, grid));
            } else if (oracle_task == "committor") {
                if (oracle_a.empty() || oracle_b.empty()) throw ValidationError("committor needs --a and --b regions");
                io::write_grid_csv(out / "committor.csv",
                                   committor(pot, oracle_beta, grid, parse_region(oracle_a), parse_region(oracle_b)));
            } else {
                const auto pairs = generator_eigs(pot, oracle_beta, grid, oracle_count);
                std::vector<double> rates;
                for (std::size_t i = 0; i < pairs.size(); ++i) {
                    rates.push_back(pairs[i].rate);
                    io::write_grid_csv(out / fmt::format("psi_{}.csv", i), pairs[i].density_mode);
                    io::write_grid_csv(out / fmt::format("phi_{}.csv", i), pairs[i].function_mode);
                }
                io::write_file_atomic(out / "rates.csv", io::encode_values_csv("i,rate", {rates}));
            }
        } else if (*dist) {
            const SymmetricMatrix ref = as_distances(io::read_matrix(dist_reference));
            const double floor = dist_floor ? *dist_floor : default_distance_floor(ref, dist_floor_fraction);
            std::vector<std::pair<std::string, DistortionReport>> rows;
            for (const auto& path : dist_embedded) {
                const std::string bytes = io::read_file(path);
                SymmetricMatrix emb = (bytes.rfind("TMM1", 0) == 0 || bytes.rfind("# tmkernel-matrix", 0) == 0)
                                          ? as_distances(io::read_matrix(path))
                                          : euclidean_distance_matrix(io::decode_coords_csv(bytes));
                rows.emplace_back(fs::path(path).filename().string(), distortion(ref, emb, floor));
            }
            const std::string report = io::encode_distortion_csv(rows);
            if (g.out.empty())
                fmt::print("{}", report);
            else
                io::write_file_atomic(g.out, report);
        } else if (*rcq) {
            const RowMatrix xi = io::read_coords_csv(rcq_rc);
            const std::string bytes = io::read_file(rcq_points);
            const RowMatrix points = (bytes.rfind("TMB1", 0) == 0 || bytes.rfind("# tmburst", 0) == 0)
                                         ? io::read_bursts(rcq_points).points
                                         : io::decode_coords_csv(bytes);
            if (points.rows() != xi.rows())
                throw ValidationError(fmt::format("rc-quality: {} reaction-coordinate rows but {} test points", xi.rows(),
                                                  points.rows()));
            std::vector<std::vector<double>> psi;
            for (const auto& f : rcq_fields) psi.push_back(io::read_grid_csv(f).interpolate(points));
            const auto residuals = rc_quality(xi, psi, rcq_bins);
            std::string report = "field,residual\n";
            for (std::size_t i = 0; i < residuals.size(); ++i)
                report += fmt::format("{},{}\n", fs::path(rcq_fields[i]).filename().string(), io::format_double(residuals[i]));
            if (g.out.empty())
                fmt::print("{}", report);
            else
                io::write_file_atomic(g.out, report);
        } else if (*repro) {
            const fs::path out = require_out(g, "output directory");
            const std::uint64_t seed = g.seed.value_or(1);
            if (repro_name == "muller-brown") {
                const auto s = repro_muller_brown(out, seed);
                fmt::print("muller-brown: {} test points, spearman(rc_1, committor) = {:.4f}\n", s.num_points,
                           s.spearman_rc_committor);
            } else if (repro_name == "horseshoe") {
                const auto s = repro_horseshoe(out, seed);
                fmt::print("horseshoe: distortion kernel = {:.4g}, A_g = {:.4g}, A_b = {:.4g}\n", s.kernel.distortion,
                           s.good.distortion, s.bad.distortion);
            } else {
                throw ValidationError(
                    fmt::format("unknown experiment '{}' (expected muller-brown or horseshoe)", repro_name));
            }
        }
    } catch (const ValidationError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
