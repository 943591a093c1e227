#include "tmkernel/pipeline.hpp"

#include "tmkernel/error.hpp"
#include "tmkernel/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace tmkernel {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"system", {"potential", "external", "beta", "dt", "tau", "seed"}},
        {"points", {"strategy", "shape", "count", "stride"}},
        {"bursts", {"samples"}},
        {"embedding", {"kernel", "features", "r"}},
        {"manifold", {"method", "bandwidth", "components"}},
        {"output", {"dir"}},
    };
    return keys;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size() || v < 0) throw std::invalid_argument(text);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ValidationError(fmt::format("config: '{}' must be a nonnegative integer, got '{}'", key, text));
    }
}

double parse_number(const std::string& key, const std::string& text) {
    try {
        return io::parse_double(text);
    } catch (const ValidationError&) {
        throw ValidationError(fmt::format("config: '{}' must be a number, got '{}'", key, text));
    }
}

void write_text(const fs::path& path, const std::string& text) { io::write_file_atomic(path, text); }

std::string manifest(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string out;
    for (const auto& [k, v] : entries) out += fmt::format("{} = {}\n", k, v);
    return out;
}

}  // namespace

std::vector<std::size_t> parse_shape(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find('x', start);
        const std::string part = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        const std::size_t v = parse_size("shape", part);
        if (v == 0) throw ValidationError(fmt::format("shape '{}' has a zero extent", text));
        out.push_back(v);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

void PipelineConfig::validate() const {
    if (potential.empty() == external.empty())
        throw ValidationError("config: [system] needs exactly one of 'potential' or 'external'");
    if (kernel.has_value() == features.has_value())
        throw ValidationError(
            "config: [embedding] needs exactly one of 'kernel' (kernel pipeline) or 'features' (Whitney pipeline)");
    if (features && !r) throw ValidationError("config: the Whitney pipeline needs the reduced dimension 'r' in [embedding]");
    if (r && *r < 1) throw ValidationError("config: 'r' must be at least 1");
    if (kernel) kernel->validate();
    if (!potential.empty()) {
        sde.validate();
        if (samples < 1) throw ValidationError("config: [bursts] samples must be at least 1");
        if (point_strategy == "grid") {
            if (grid_shape.empty()) throw ValidationError("config: grid test points need [points] shape, e.g. 32x32");
        } else if (point_strategy == "uniform" || point_strategy == "trajectory") {
            if (point_count < 2) throw ValidationError("config: [points] count must be at least 2");
            if (point_stride < 1) throw ValidationError("config: [points] stride must be at least 1");
        } else {
            throw ValidationError(
                fmt::format("config: unknown point strategy '{}' (expected grid, uniform, trajectory)", point_strategy));
        }
    }
    if (manifold_method != "dmap" && manifold_method != "mds")
        throw ValidationError(fmt::format("config: unknown manifold method '{}' (expected dmap or mds)", manifold_method));
    if (manifold_method == "dmap" && !(bandwidth > 0.0)) throw ValidationError("config: bandwidth must be positive");
    if (components < 1) throw ValidationError("config: components must be at least 1");
}

PipelineConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(fmt::format("config: {} (line {})", e.message(), e.line()));
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ValidationError(fmt::format("config: unknown section [{}]", section));
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ValidationError(fmt::format("config: unknown key '{}' in [{}]", key, section));
    }
    auto get = [&](const char* path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(path)) return *v;
        return std::nullopt;
    };

    PipelineConfig cfg;
    if (auto v = get("system.potential")) cfg.potential = *v;
    if (auto v = get("system.external")) cfg.external = *v;
    if (auto v = get("system.beta")) cfg.sde.beta = parse_number("beta", *v);
    if (auto v = get("system.dt")) cfg.sde.dt = parse_number("dt", *v);
    if (auto v = get("system.tau")) cfg.sde.tau = parse_number("tau", *v);
    if (auto v = get("system.seed")) cfg.sde.seed = parse_size("seed", *v);
    if (auto v = get("points.strategy")) cfg.point_strategy = *v;
    if (auto v = get("points.shape")) cfg.grid_shape = parse_shape(*v);
    if (auto v = get("points.count")) cfg.point_count = parse_size("count", *v);
    if (auto v = get("points.stride")) cfg.point_stride = parse_size("stride", *v);
    if (auto v = get("bursts.samples")) cfg.samples = parse_size("samples", *v);
    if (auto v = get("embedding.kernel")) cfg.kernel = KernelSpec::parse(*v);
    if (auto v = get("embedding.features")) cfg.features = *v;
    if (auto v = get("embedding.r")) cfg.r = static_cast<int>(parse_size("r", *v));
    if (auto v = get("manifold.method")) cfg.manifold_method = *v;
    if (auto v = get("manifold.bandwidth")) cfg.bandwidth = parse_number("bandwidth", *v);
    if (auto v = get("manifold.components")) cfg.components = parse_size("components", *v);
    if (auto v = get("output.dir")) cfg.output_dir = *v;
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const fs::path& path) { return parse_config(io::read_file(path)); }

RowMatrix make_test_points(const PipelineConfig& cfg, const PotentialModel& potential) {
    const Box box = potential.domain();
    if (cfg.point_strategy == "grid") {
        if (cfg.grid_shape.size() != potential.dim())
            throw ValidationError(fmt::format("config: shape has {} axes but the potential is {}-dimensional",
                                              cfg.grid_shape.size(), potential.dim()));
        return test_points_grid(box, cfg.grid_shape);
    }
    if (cfg.point_strategy == "uniform") return test_points_uniform(box, cfg.point_count, cfg.sde.seed);
    std::vector<double> x0(potential.dim());
    for (std::size_t k = 0; k < x0.size(); ++k) x0[k] = 0.5 * (box.lo[k] + box.hi[k]);
    return simulate_trajectory(potential, cfg.sde, x0, static_cast<long>(cfg.point_count),
                               static_cast<long>(cfg.point_stride));
}

BurstEnsemble pipeline_bursts(const PipelineConfig& cfg) {
    if (!cfg.external.empty()) return io::read_bursts(cfg.external);
    const PotentialModel potential = potential_by_name(cfg.potential);
    return sample_bursts(potential, cfg.sde, make_test_points(cfg, potential), cfg.samples);
}

FeatureMatrix pipeline_features(const PipelineConfig& cfg, std::size_t n) {
    const std::string& name = *cfg.features;
    FeatureMatrix f;
    if (name == "good") {
        f = horseshoe_good_features();
    } else if (name == "bad") {
        f = horseshoe_bad_features();
    } else if (name == "uniform" || name == "gaussian") {
        f = draw_feature_matrix(*cfg.r, n, feature_distribution_from_string(name), cfg.sde.seed);
    } else {
        f = io::read_feature_matrix_csv(name);
    }
    if (f.r != *cfg.r)
        throw ValidationError(fmt::format("config: feature matrix '{}' has r = {} but the config asks for r = {}", name, f.r,
                                          *cfg.r));
    if (static_cast<std::size_t>(f.a.cols()) != n)
        throw ValidationError(fmt::format("feature matrix '{}' has {} columns but the samples are {}-dimensional", name,
                                          f.a.cols(), n));
    return f;
}

SymmetricMatrix pipeline_distances(const PipelineConfig& cfg, const BurstEnsemble& ens) {
    if (cfg.kernel) return kernel_distance_plain(empirical_gram(ens, *cfg.kernel));
    return euclidean_distance_matrix(whitney_embed(ens, pipeline_features(cfg, ens.dim)));
}

EmbeddingResult pipeline_embedding(const PipelineConfig& cfg, const SymmetricMatrix& distances) {
    if (cfg.manifold_method == "mds") return classical_mds(distances, cfg.components);
    return diffusion_maps(distances, cfg.bandwidth, cfg.components);
}

EmbeddingResult run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const BurstEnsemble ens = pipeline_bursts(cfg);
    io::write_bursts_binary(cfg.output_dir / "bursts.tmb", ens);
    const SymmetricMatrix d = pipeline_distances(cfg, ens);
    io::write_matrix(cfg.output_dir / "distances.tmm", d);
    EmbeddingResult e = pipeline_embedding(cfg, d);
    io::write_embedding(cfg.output_dir / "rc.csv", cfg.output_dir / "spectrum.csv", e);
    return e;
}

MullerBrownSummary repro_muller_brown(const fs::path& out, std::uint64_t seed, const MullerBrownRecipe& recipe) {
    const PotentialModel mb = muller_brown();
    SdeConfig sde{recipe.beta, recipe.dt, recipe.tau, seed, false};
    sde.validate();

    const std::size_t shape[2] = {recipe.grid, recipe.grid};
    const RowMatrix points = test_points_grid(mb.domain(), shape);
    const BurstEnsemble ens = sample_bursts(mb, sde, points, recipe.samples);
    io::write_coords_csv(out / "test_points.csv", points, "x");
    io::write_bursts_binary(out / "bursts.tmb", ens);

    const SymmetricMatrix d = kernel_distance_plain(empirical_gram(ens, KernelSpec::gaussian(recipe.sigma)));
    io::write_matrix(out / "distances.tmm", d);
    const EmbeddingResult e = diffusion_maps(d, recipe.bandwidth, recipe.components);
    io::write_embedding(out / "rc.csv", out / "spectrum.csv", e);

    const Grid grid(mb.domain(), {recipe.oracle_grid, recipe.oracle_grid});
    const Region a = Region::ball({muller_brown_min_top_left[0], muller_brown_min_top_left[1]}, recipe.region_radius);
    const Region b =
        Region::ball({muller_brown_min_bottom_right[0], muller_brown_min_bottom_right[1]}, recipe.region_radius);
    const GridField q = committor(mb, recipe.beta, grid, a, b);
    io::write_grid_csv(out / "committor.csv", q);

    MullerBrownSummary s;
    s.num_points = ens.num_points;
    s.eigenvalues = e.eigenvalues;
    s.rc = e.coords;
    s.committor_at_points = q.interpolate(points);
    std::vector<double> xi1(static_cast<std::size_t>(e.coords.rows()));
    for (Eigen::Index i = 0; i < e.coords.rows(); ++i) xi1[static_cast<std::size_t>(i)] = e.coords(i, 0);
    s.spearman_rc_committor = spearman(xi1, s.committor_at_points);

    write_text(out / "committor_at_points.csv", io::encode_values_csv("i,committor", {s.committor_at_points}));
    write_text(out / "summary.txt",
               manifest({{"experiment", "muller-brown"},
                         {"seed", std::to_string(seed)},
                         {"test_points", std::to_string(s.num_points)},
                         {"samples_per_point", std::to_string(recipe.samples)},
                         {"beta", io::format_double(recipe.beta)},
                         {"dt", io::format_double(recipe.dt)},
                         {"tau", io::format_double(recipe.tau)},
                         {"kernel", KernelSpec::gaussian(recipe.sigma).to_string()},
                         {"dmap_bandwidth", io::format_double(recipe.bandwidth)},
                         {"spearman_rc1_committor", io::format_double(s.spearman_rc_committor)}}));
    return s;
}

HorseshoeSummary repro_horseshoe(const fs::path& out, std::uint64_t seed, const HorseshoeRecipe& recipe) {
    const PotentialModel hs = horseshoe();
    SdeConfig sde{recipe.beta, recipe.dt, recipe.tau, seed, false};
    sde.validate();

    const RowMatrix points = test_points_uniform(hs.domain(), recipe.points, seed);
    const BurstEnsemble ens = sample_bursts(hs, sde, points, recipe.samples);
    io::write_coords_csv(out / "test_points.csv", points, "x");
    io::write_bursts_binary(out / "bursts.tmb", ens);

    const Grid grid(hs.domain(), {recipe.histogram, recipe.histogram});
    const GridField rho = invariant_density(hs, recipe.beta, grid);
    io::write_grid_csv(out / "density.csv", rho);
    const SymmetricMatrix ref_w = density_distance_matrix(ens, grid, DensityMetric::l2_inv_rho, &rho);
    const SymmetricMatrix ref_p = density_distance_matrix(ens, grid, DensityMetric::l2);
    io::write_matrix(out / "reference_l2_inv_rho.tmm", ref_w);
    io::write_matrix(out / "reference_l2.tmm", ref_p);
    const double floor_w = default_distance_floor(ref_w, recipe.floor_fraction);

    HorseshoeSummary s;
    const SymmetricMatrix dk = kernel_distance_plain(empirical_gram(ens, KernelSpec::gaussian(recipe.kernel_sigma)));
    io::write_matrix(out / "kernel_distances.tmm", dk);
    s.kernel = distortion(ref_w, dk, floor_w);

    const FeatureMatrix good = horseshoe_good_features();
    const FeatureMatrix bad = horseshoe_bad_features();
    const RowMatrix zg = whitney_embed(ens, good);
    const RowMatrix zb = whitney_embed(ens, bad);
    io::write_feature_matrix_csv(out / "features_good.csv", good);
    io::write_feature_matrix_csv(out / "features_bad.csv", bad);
    io::write_coords_csv(out / "whitney_good.csv", zg, "z");
    io::write_coords_csv(out / "whitney_bad.csv", zb, "z");
    s.good = distortion(ref_w, euclidean_distance_matrix(zg), floor_w);
    s.bad = distortion(ref_w, euclidean_distance_matrix(zb), floor_w);

    const EmbeddingResult mds = classical_mds(dk, 2);
    io::write_embedding(out / "kernel_mds.csv", out / "kernel_mds_spectrum.csv", mds);

    s.sweep = sigma_sweep(ens, recipe.sweep, ref_w, ref_p, recipe.floor_fraction);
    write_text(out / "sweep.csv", io::encode_sweep_csv(s.sweep));
    write_text(out / "distortion.csv",
               io::encode_distortion_csv({{fmt::format("kernel_gaussian_{}", io::format_double(recipe.kernel_sigma)), s.kernel},
                                          {"whitney_A_g", s.good},
                                          {"whitney_A_b", s.bad}}));
    write_text(out / "summary.txt",
               manifest({{"experiment", "horseshoe"},
                         {"seed", std::to_string(seed)},
                         {"test_points", std::to_string(recipe.points)},
                         {"samples_per_point", std::to_string(recipe.samples)},
                         {"beta", io::format_double(recipe.beta)},
                         {"dt", io::format_double(recipe.dt)},
                         {"tau", io::format_double(recipe.tau)},
                         {"histogram", fmt::format("{}x{}", recipe.histogram, recipe.histogram)},
                         {"distortion_kernel", io::format_double(s.kernel.distortion)},
                         {"distortion_A_g", io::format_double(s.good.distortion)},
                         {"distortion_A_b", io::format_double(s.bad.distortion)}}));
    return s;
}

}  // namespace tmkernel
