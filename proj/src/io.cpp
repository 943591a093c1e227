#include "tmkernel/io.hpp"

#include "tmkernel/error.hpp"

#include <fmt/format.h>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace tmkernel::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char burst_magic[4] = {'T', 'M', 'B', '1'};
constexpr char matrix_magic[4] = {'T', 'M', 'M', '1'};

template <class T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    Reader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    template <class T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size())
            throw ValidationError(fmt::format("{}: truncated file (needed {} more bytes at offset {})", what_, sizeof(T), pos_));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    void expect_magic(const char (&magic)[4]) {
        if (bytes_.size() < 4 || std::memcmp(bytes_.data(), magic, 4) != 0)
            throw ValidationError(fmt::format("{}: bad magic, expected '{}'", what_, std::string_view(magic, 4)));
        pos_ = 4;
    }
    void expect_end() const {
        if (pos_ != bytes_.size())
            throw ValidationError(fmt::format("{}: {} trailing bytes", what_, bytes_.size() - pos_));
    }

private:
    const std::string& bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n'))
        if (!line.empty()) out.push_back(line);
    return out;
}

// "# <tag> k1=v1 k2=v2" -> {k: v}
std::map<std::string, std::string> parse_header(std::string_view line, std::string_view tag) {
    const std::string prefix = fmt::format("# {}", tag);
    if (line.substr(0, prefix.size()) != prefix)
        throw ValidationError(fmt::format("expected a '{}' header line, got '{}'", prefix, line));
    std::map<std::string, std::string> out;
    for (auto token : split(line.substr(prefix.size()), ' ')) {
        if (token.empty()) continue;
        const auto eq = token.find('=');
        if (eq == std::string_view::npos) throw ValidationError(fmt::format("malformed header token '{}'", token));
        out.emplace(std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)));
    }
    return out;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key, std::string_view what) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(fmt::format("{}: header is missing '{}'", what, key));
    return it->second;
}

long parse_long(std::string_view text) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ValidationError(fmt::format("expected an integer, got '{}'", text));
    return v;
}

std::size_t parse_count(std::string_view text) {
    const long v = parse_long(text);
    if (v < 0) throw ValidationError(fmt::format("expected a nonnegative integer, got '{}'", text));
    return static_cast<std::size_t>(v);
}

void append_row(std::string& out, std::span<const double> values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out += ',';
        out += format_double(values[k]);
    }
}

Metadata burst_metadata(const BurstEnsemble& ens) {
    return {{"format", "TMB1"},
            {"N", std::to_string(ens.num_points)},
            {"M", std::to_string(ens.samples_per_point)},
            {"n", std::to_string(ens.dim)},
            {"tau", format_double(ens.tau)},
            {"seed", std::to_string(ens.meta.seed)},
            {"dt", format_double(ens.meta.dt)},
            {"beta", format_double(ens.meta.beta)},
            {"source", ens.meta.source}};
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("failed to format a double");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ValidationError(fmt::format("expected a number, got '{}'", text));
    return v;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError(fmt::format("cannot open '{}' for writing", tmp.string()));
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw ValidationError(fmt::format("failed writing '{}'", tmp.string()));
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_metadata(const Metadata& meta) {
    std::string out;
    for (const auto& [k, v] : meta) out += fmt::format("{} = {}\n", k, v);
    return out;
}

Metadata parse_metadata(const std::string& text) {
    Metadata meta;
    for (auto line : lines_of(text)) {
        if (line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ValidationError(fmt::format("malformed metadata line '{}'", line));
        meta[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    return meta;
}

fs::path sidecar_path(const fs::path& path) {
    fs::path p = path;
    p += ".meta";
    return p;
}

// ---------------------------------------------------------------------------
// Bursts

std::string encode_bursts_binary(const BurstEnsemble& ens) {
    std::string out(burst_magic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ens.num_points));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ens.samples_per_point));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ens.dim));
    put<double>(out, ens.tau);
    for (double v : ens.samples) put<double>(out, v);
    for (Eigen::Index i = 0; i < ens.points.rows(); ++i)
        for (Eigen::Index k = 0; k < ens.points.cols(); ++k) put<double>(out, ens.points(i, k));
    return out;
}

BurstEnsemble decode_bursts_binary(const std::string& bytes, const Metadata& meta) {
    Reader r(bytes, "TMB1 burst file");
    r.expect_magic(burst_magic);
    BurstEnsemble ens;
    ens.num_points = r.get<std::uint32_t>();
    ens.samples_per_point = r.get<std::uint32_t>();
    ens.dim = r.get<std::uint32_t>();
    ens.tau = r.get<double>();
    const std::size_t expected = 4 + 12 + 8 + (ens.num_points * ens.samples_per_point * ens.dim + ens.num_points * ens.dim) * 8;
    if (bytes.size() != expected)
        throw ValidationError(fmt::format("TMB1 burst file: {} bytes, header (N={}, M={}, n={}) implies {}", bytes.size(),
                                          ens.num_points, ens.samples_per_point, ens.dim, expected));
    ens.samples.resize(ens.num_points * ens.samples_per_point * ens.dim);
    for (double& v : ens.samples) v = r.get<double>();
    ens.points.resize(static_cast<Eigen::Index>(ens.num_points), static_cast<Eigen::Index>(ens.dim));
    for (Eigen::Index i = 0; i < ens.points.rows(); ++i)
        for (Eigen::Index k = 0; k < ens.points.cols(); ++k) ens.points(i, k) = r.get<double>();
    r.expect_end();

    if (auto it = meta.find("seed"); it != meta.end()) ens.meta.seed = std::stoull(it->second);
    if (auto it = meta.find("dt"); it != meta.end()) ens.meta.dt = parse_double(it->second);
    if (auto it = meta.find("beta"); it != meta.end()) ens.meta.beta = parse_double(it->second);
    if (auto it = meta.find("source"); it != meta.end()) ens.meta.source = it->second;
    ens.validate();
    return ens;
}

void write_bursts_binary(const fs::path& path, const BurstEnsemble& ens) {
    write_file_atomic(path, encode_bursts_binary(ens));
    write_file_atomic(sidecar_path(path), format_metadata(burst_metadata(ens)));
}

BurstEnsemble read_bursts_binary(const fs::path& path) {
    Metadata meta;
    if (fs::exists(sidecar_path(path))) meta = parse_metadata(read_file(sidecar_path(path)));
    return decode_bursts_binary(read_file(path), meta);
}

std::string encode_bursts_csv(const BurstEnsemble& ens) {
    std::string out = fmt::format("# tmburst n={} N={} M={} tau={}\ni,l", ens.dim, ens.num_points, ens.samples_per_point,
                                  format_double(ens.tau));
    for (std::size_t k = 1; k <= ens.dim; ++k) out += fmt::format(",y_{}", k);
    out += '\n';
    for (std::size_t i = 0; i < ens.num_points; ++i) {
        out += fmt::format("{},-1,", i);
        append_row(out, {ens.points.row(i).data(), ens.dim});
        out += '\n';
    }
    for (std::size_t i = 0; i < ens.num_points; ++i)
        for (std::size_t l = 0; l < ens.samples_per_point; ++l) {
            out += fmt::format("{},{},", i, l);
            append_row(out, ens.sample(i, l));
            out += '\n';
        }
    return out;
}

BurstEnsemble decode_bursts_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.size() < 2) throw ValidationError("burst CSV: missing header");
    const auto header = parse_header(lines[0], "tmburst");
    BurstEnsemble ens;
    ens.dim = parse_count(require(header, "n", "burst CSV"));
    if (ens.dim == 0) throw ValidationError("burst CSV: n must be positive");
    ens.tau = header.count("tau") ? parse_double(header.at("tau")) : 0.0;

    // Rows may arrive in any order; N and M come from the header when present, otherwise
    // from the largest indices seen.
    struct Row {
        std::size_t i;
        long l;
        std::vector<double> y;
    };
    std::vector<Row> rows;
    std::size_t max_i = 0;
    long max_l = -1;
    for (std::size_t ln = 2; ln < lines.size(); ++ln) {
        if (lines[ln].front() == '#') continue;
        const auto cells = split(lines[ln], ',');
        if (cells.size() != ens.dim + 2)
            throw ValidationError(fmt::format("burst CSV line {}: expected {} columns, got {}", ln + 1, ens.dim + 2, cells.size()));
        Row row{parse_count(cells[0]), parse_long(cells[1]), {}};
        if (row.l < -1) throw ValidationError(fmt::format("burst CSV line {}: sample index must be >= -1", ln + 1));
        for (std::size_t k = 0; k < ens.dim; ++k) row.y.push_back(parse_double(cells[k + 2]));
        max_i = std::max(max_i, row.i);
        max_l = std::max(max_l, row.l);
        rows.push_back(std::move(row));
    }
    ens.num_points = header.count("N") ? parse_count(header.at("N")) : max_i + 1;
    ens.samples_per_point = header.count("M") ? parse_count(header.at("M")) : static_cast<std::size_t>(max_l + 1);
    ens.samples.assign(ens.num_points * ens.samples_per_point * ens.dim, std::numeric_limits<double>::quiet_NaN());
    ens.points = RowMatrix::Constant(static_cast<Eigen::Index>(ens.num_points), static_cast<Eigen::Index>(ens.dim),
                                     std::numeric_limits<double>::quiet_NaN());
    std::vector<char> have_point(ens.num_points, 0);
    for (const auto& row : rows) {
        if (row.i >= ens.num_points || row.l >= static_cast<long>(ens.samples_per_point))
            throw ValidationError(fmt::format("burst CSV: index (i={}, l={}) outside N={}, M={}", row.i, row.l,
                                              ens.num_points, ens.samples_per_point));
        if (row.l < 0) {
            for (std::size_t k = 0; k < ens.dim; ++k) ens.points(row.i, k) = row.y[k];
            have_point[row.i] = 1;
        } else {
            std::copy(row.y.begin(), row.y.end(),
                      ens.samples.begin() + static_cast<std::ptrdiff_t>((row.i * ens.samples_per_point + row.l) * ens.dim));
        }
    }
    for (std::size_t idx = 0; idx < ens.samples.size(); ++idx)
        if (std::isnan(ens.samples[idx]))
            throw ValidationError(fmt::format("burst CSV: missing sample (i={}, l={})", idx / (ens.samples_per_point * ens.dim),
                                              (idx / ens.dim) % ens.samples_per_point));
    const bool all_points = std::all_of(have_point.begin(), have_point.end(), [](char c) { return c != 0; });
    if (!all_points) {
        const RowMatrix means = ens.burst_means();
        for (std::size_t i = 0; i < ens.num_points; ++i)
            if (!have_point[i]) ens.points.row(i) = means.row(i);
    }
    ens.meta.source = "external";
    ens.validate();
    return ens;
}

void write_bursts_csv(const fs::path& path, const BurstEnsemble& ens) { write_file_atomic(path, encode_bursts_csv(ens)); }

BurstEnsemble read_bursts_csv(const fs::path& path) { return decode_bursts_csv(read_file(path)); }

BurstEnsemble read_bursts(const fs::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), burst_magic, 4) == 0) {
        Metadata meta;
        if (fs::exists(sidecar_path(path))) meta = parse_metadata(read_file(sidecar_path(path)));
        return decode_bursts_binary(bytes, meta);
    }
    return decode_bursts_csv(bytes);
}

// ---------------------------------------------------------------------------
// Matrices

std::string encode_matrix_csv(const SymmetricMatrix& m) {
    std::string out = fmt::format("# tmkernel-matrix kind={} n={}\n", to_string(m.kind()), m.size());
    std::vector<double> row(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) row[j] = m(i, j);
        append_row(out, row);
        out += '\n';
    }
    return out;
}

SymmetricMatrix decode_matrix_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ValidationError("matrix CSV: empty file");
    const auto header = parse_header(lines[0], "tmkernel-matrix");
    const auto kind = matrix_kind_from_string(require(header, "kind", "matrix CSV"));
    const std::size_t n = parse_count(require(header, "n", "matrix CSV"));
    if (lines.size() != n + 1) throw ValidationError(fmt::format("matrix CSV: n={} but {} data rows", n, lines.size() - 1));
    Matrix dense(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cells = split(lines[i + 1], ',');
        if (cells.size() != n) throw ValidationError(fmt::format("matrix CSV row {}: expected {} values, got {}", i, n, cells.size()));
        for (std::size_t j = 0; j < n; ++j) dense(i, j) = parse_double(cells[j]);
    }
    return SymmetricMatrix::from_dense(dense, kind, 0.0);
}

std::string encode_matrix_binary(const SymmetricMatrix& m) {
    std::string out(matrix_magic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.size()));
    for (double v : m.lower()) put<double>(out, v);
    return out;
}

SymmetricMatrix decode_matrix_binary(const std::string& bytes, MatrixKind kind) {
    Reader r(bytes, "TMM1 matrix file");
    r.expect_magic(matrix_magic);
    const std::size_t n = r.get<std::uint32_t>();
    const std::size_t count = n * (n + 1) / 2;
    if (bytes.size() != 8 + count * 8)
        throw ValidationError(fmt::format("TMM1 matrix file: {} bytes, N={} implies {}", bytes.size(), n, 8 + count * 8));
    std::vector<double> lower(count);
    for (double& v : lower) v = r.get<double>();
    r.expect_end();
    return SymmetricMatrix(n, kind, std::move(lower));
}

void write_matrix(const fs::path& path, const SymmetricMatrix& m) {
    if (path.extension() == ".tmm") {
        write_file_atomic(path, encode_matrix_binary(m));
        write_file_atomic(sidecar_path(path), format_metadata({{"format", "TMM1"},
                                                               {"kind", std::string(to_string(m.kind()))},
                                                               {"n", std::to_string(m.size())}}));
    } else {
        write_file_atomic(path, encode_matrix_csv(m));
    }
}

SymmetricMatrix read_matrix(const fs::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), matrix_magic, 4) == 0) {
        MatrixKind kind = MatrixKind::distance;
        if (fs::exists(sidecar_path(path))) {
            const auto meta = parse_metadata(read_file(sidecar_path(path)));
            if (auto it = meta.find("kind"); it != meta.end()) kind = matrix_kind_from_string(it->second);
        }
        return decode_matrix_binary(bytes, kind);
    }
    return decode_matrix_csv(bytes);
}

// ---------------------------------------------------------------------------
// Coordinates and feature matrices

std::string encode_coords_csv(const RowMatrix& coords, const std::string& prefix) {
    std::string out = "i";
    for (Eigen::Index k = 1; k <= coords.cols(); ++k) out += fmt::format(",{}_{}", prefix, k);
    out += '\n';
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        out += fmt::format("{}", i);
        for (Eigen::Index k = 0; k < coords.cols(); ++k) out += ',' + format_double(coords(i, k));
        out += '\n';
    }
    return out;
}

RowMatrix decode_coords_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ValidationError("coordinate CSV: empty file");
    const std::size_t cols = split(lines[0], ',').size() - 1;
    RowMatrix out(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split(lines[r], ',');
        if (cells.size() != cols + 1)
            throw ValidationError(fmt::format("coordinate CSV line {}: expected {} columns, got {}", r + 1, cols + 1, cells.size()));
        if (parse_count(cells[0]) != r - 1) throw ValidationError(fmt::format("coordinate CSV line {}: rows must be in index order", r + 1));
        for (std::size_t k = 0; k < cols; ++k) out(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(k)) = parse_double(cells[k + 1]);
    }
    return out;
}

void write_coords_csv(const fs::path& path, const RowMatrix& coords, const std::string& prefix) {
    write_file_atomic(path, encode_coords_csv(coords, prefix));
}

RowMatrix read_coords_csv(const fs::path& path) { return decode_coords_csv(read_file(path)); }

std::string encode_feature_matrix_csv(const FeatureMatrix& f) {
    std::string out = fmt::format("# tmfeatures r={} n={} provenance={}", f.r, f.a.cols(), f.provenance.label);
    if (f.provenance.random)
        out += fmt::format(" distribution={} seed={}", to_string(f.provenance.distribution), f.provenance.seed);
    out += '\n';
    for (Eigen::Index i = 0; i < f.a.rows(); ++i) {
        append_row(out, {f.a.row(i).data(), static_cast<std::size_t>(f.a.cols())});
        out += '\n';
    }
    return out;
}

FeatureMatrix decode_feature_matrix_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ValidationError("feature CSV: empty file");
    const auto header = parse_header(lines[0], "tmfeatures");
    const int r = static_cast<int>(parse_long(require(header, "r", "feature CSV")));
    const std::size_t n = parse_count(require(header, "n", "feature CSV"));
    if (lines.size() != static_cast<std::size_t>(2 * r + 2))
        throw ValidationError(fmt::format("feature CSV: r={} requires {} rows, got {}", r, 2 * r + 1, lines.size() - 1));
    FeatureMatrix f;
    f.r = r;
    f.a.resize(2 * r + 1, static_cast<Eigen::Index>(n));
    for (int i = 0; i < 2 * r + 1; ++i) {
        const auto cells = split(lines[static_cast<std::size_t>(i) + 1], ',');
        if (cells.size() != n) throw ValidationError(fmt::format("feature CSV row {}: expected {} values", i, n));
        for (std::size_t k = 0; k < n; ++k) f.a(i, static_cast<Eigen::Index>(k)) = parse_double(cells[k]);
    }
    f.provenance.label = header.count("provenance") ? header.at("provenance") : "explicit";
    if (header.count("distribution")) {
        f.provenance.random = true;
        f.provenance.distribution = feature_distribution_from_string(header.at("distribution"));
        f.provenance.seed = std::stoull(require(header, "seed", "feature CSV"));
    }
    f.validate();
    return f;
}

void write_feature_matrix_csv(const fs::path& path, const FeatureMatrix& f) {
    write_file_atomic(path, encode_feature_matrix_csv(f));
}

FeatureMatrix read_feature_matrix_csv(const fs::path& path) { return decode_feature_matrix_csv(read_file(path)); }

// ---------------------------------------------------------------------------
// Embeddings and grids

std::string encode_spectrum_csv(const Vector& eigenvalues) {
    std::string out = "k,eigenvalue\n";
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) out += fmt::format("{},{}\n", k, format_double(eigenvalues[k]));
    return out;
}

void write_embedding(const fs::path& coords_path, const fs::path& spectrum_path, const EmbeddingResult& e) {
    write_file_atomic(coords_path, encode_coords_csv(e.coords, "xi"));
    write_file_atomic(spectrum_path, encode_spectrum_csv(e.eigenvalues));
}

std::string encode_grid_csv(const GridField& f) {
    const Grid& g = f.grid;
    std::string shape;
    std::string lo;
    std::string hi;
    for (std::size_t k = 0; k < g.dim(); ++k) {
        shape += (k ? "x" : "") + std::to_string(g.shape[k]);
        lo += (k ? "," : "") + format_double(g.box.lo[k]);
        hi += (k ? "," : "") + format_double(g.box.hi[k]);
    }
    std::string out = fmt::format("# tmgrid kind={} dim={} shape={} lo={} hi={}\n", to_string(f.kind), g.dim(), shape, lo, hi);
    for (std::size_t k = 1; k <= g.dim(); ++k) out += fmt::format("c_{},", k);
    out += "value\n";
    for (std::size_t c = 0; c < g.cells(); ++c) {
        for (auto idx : g.unflatten(c)) out += fmt::format("{},", idx);
        out += format_double(f.values[c]) + '\n';
    }
    return out;
}

GridField decode_grid_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.size() < 2) throw ValidationError("grid CSV: missing header");
    const auto header = parse_header(lines[0], "tmgrid");
    const std::size_t dim = parse_count(require(header, "dim", "grid CSV"));
    Box box;
    std::vector<std::size_t> shape;
    for (auto s : split(require(header, "shape", "grid CSV"), 'x')) shape.push_back(parse_count(s));
    for (auto s : split(require(header, "lo", "grid CSV"), ',')) box.lo.push_back(parse_double(s));
    for (auto s : split(require(header, "hi", "grid CSV"), ',')) box.hi.push_back(parse_double(s));
    if (shape.size() != dim || box.dim() != dim) throw ValidationError("grid CSV: header dimensions disagree");
    GridField f{Grid(box, shape), {}, field_kind_from_string(require(header, "kind", "grid CSV"))};
    f.values.assign(f.grid.cells(), std::numeric_limits<double>::quiet_NaN());
    if (lines.size() != f.grid.cells() + 2)
        throw ValidationError(fmt::format("grid CSV: {} cells but {} data rows", f.grid.cells(), lines.size() - 2));
    std::vector<std::size_t> idx(dim);
    for (std::size_t r = 2; r < lines.size(); ++r) {
        const auto cells = split(lines[r], ',');
        if (cells.size() != dim + 1) throw ValidationError(fmt::format("grid CSV line {}: expected {} columns", r + 1, dim + 1));
        for (std::size_t k = 0; k < dim; ++k) {
            idx[k] = parse_count(cells[k]);
            if (idx[k] >= shape[k]) throw ValidationError(fmt::format("grid CSV line {}: cell index out of range", r + 1));
        }
        f.values[f.grid.flatten(idx)] = parse_double(cells[dim]);
    }
    for (double v : f.values)
        if (std::isnan(v)) throw ValidationError("grid CSV: some cells have no value");
    return f;
}

void write_grid_csv(const fs::path& path, const GridField& f) { write_file_atomic(path, encode_grid_csv(f)); }

GridField read_grid_csv(const fs::path& path) { return decode_grid_csv(read_file(path)); }

// ---------------------------------------------------------------------------
// Reports

std::string encode_distortion_csv(const std::vector<std::pair<std::string, DistortionReport>>& rows) {
    std::string out =
        "label,contraction,expansion,distortion,contraction_i,contraction_j,expansion_i,expansion_j,pairs_used,pairs_skipped,floor\n";
    for (const auto& [label, r] : rows)
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", label, format_double(r.contraction),
                           format_double(r.expansion), format_double(r.distortion), r.contraction_pair.first,
                           r.contraction_pair.second, r.expansion_pair.first, r.expansion_pair.second, r.pairs_used,
                           r.pairs_skipped, format_double(r.floor));
    return out;
}

std::string encode_sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "sigma,distortion_l2_inv_rho,distortion_l2,contraction_l2_inv_rho,expansion_l2_inv_rho,contraction_l2,expansion_l2\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{},{}\n", format_double(r.sigma), format_double(r.weighted.distortion),
                           format_double(r.plain.distortion), format_double(r.weighted.contraction),
                           format_double(r.weighted.expansion), format_double(r.plain.contraction),
                           format_double(r.plain.expansion));
    return out;
}

std::string encode_values_csv(const std::string& header, const std::vector<std::vector<double>>& columns) {
    std::string out = header + '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        out += std::to_string(r);
        for (const auto& c : columns) out += ',' + format_double(c[r]);
        out += '\n';
    }
    return out;
}

}  // namespace tmkernel::io
