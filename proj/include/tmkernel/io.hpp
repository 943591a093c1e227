#pragma once

#include "tmkernel/diagnostics.hpp"
#include "tmkernel/dynamics.hpp"
#include "tmkernel/manifold.hpp"
#include "tmkernel/oracle.hpp"
#include "tmkernel/symmetric_matrix.hpp"
#include "tmkernel/whitney.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tmkernel::io {

namespace fs = std::filesystem;

/// Writes `contents` to a temporary file next to `path` and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

/// Sidecar "key = value" metadata, one entry per line, keys sorted.
using Metadata = std::map<std::string, std::string>;
std::string format_metadata(const Metadata& meta);
Metadata parse_metadata(const std::string& text);
fs::path sidecar_path(const fs::path& path);

// Burst ensembles.
// Binary "TMB1": magic, u32 N, u32 M, u32 n, f64 tau, N*M*n f64 endpoints ((i*M + l)*n + k),
// N*n f64 test points; all little-endian. Provenance lives in the "<path>.meta" sidecar.
std::string encode_bursts_binary(const BurstEnsemble& ens);
BurstEnsemble decode_bursts_binary(const std::string& bytes, const Metadata& meta = {});
void write_bursts_binary(const fs::path& path, const BurstEnsemble& ens);
BurstEnsemble read_bursts_binary(const fs::path& path);

// CSV: "# tmburst n=<n> N=<N> M=<M> tau=<tau>", a column header "i,l,y_1,...,y_n", then
// test-point rows (l = -1, optional on input) followed by one row per sample. Ingested data
// without test-point rows gets the burst means as points and source "external".
std::string encode_bursts_csv(const BurstEnsemble& ens);
BurstEnsemble decode_bursts_csv(const std::string& text);
void write_bursts_csv(const fs::path& path, const BurstEnsemble& ens);
BurstEnsemble read_bursts_csv(const fs::path& path);

/// Dispatches on the file's leading bytes.
BurstEnsemble read_bursts(const fs::path& path);

// Matrices.
// CSV: "# tmkernel-matrix kind=<gram|distance> n=<N>", then N rows of N values.
// Binary "TMM1": magic, u32 N, lower triangle row by row (f64 LE); kind in the sidecar.
std::string encode_matrix_csv(const SymmetricMatrix& m);
SymmetricMatrix decode_matrix_csv(const std::string& text);
std::string encode_matrix_binary(const SymmetricMatrix& m);
SymmetricMatrix decode_matrix_binary(const std::string& bytes, MatrixKind kind);
void write_matrix(const fs::path& path, const SymmetricMatrix& m);  // ".tmm" -> binary, else CSV
SymmetricMatrix read_matrix(const fs::path& path);

// Per-point coordinates: header "i,<prefix>_1,...", one row per point.
std::string encode_coords_csv(const RowMatrix& coords, const std::string& prefix);
RowMatrix decode_coords_csv(const std::string& text);
void write_coords_csv(const fs::path& path, const RowMatrix& coords, const std::string& prefix = "z");
RowMatrix read_coords_csv(const fs::path& path);

// Feature matrices: "# tmfeatures r=<r> n=<n> provenance=<label> [distribution=.. seed=..]"
// followed by 2r+1 rows of n values.
std::string encode_feature_matrix_csv(const FeatureMatrix& f);
FeatureMatrix decode_feature_matrix_csv(const std::string& text);
void write_feature_matrix_csv(const fs::path& path, const FeatureMatrix& f);
FeatureMatrix read_feature_matrix_csv(const fs::path& path);

// Embeddings: "i,xi_1,...,xi_r" plus a spectrum file "k,eigenvalue".
void write_embedding(const fs::path& coords_path, const fs::path& spectrum_path, const EmbeddingResult& e);
std::string encode_spectrum_csv(const Vector& eigenvalues);

// Grid fields: "# tmgrid kind=<kind> dim=<n> shape=<m1>x<m2> lo=<a>,<b> hi=<c>,<d>", a header
// "c_1,...,c_n,value", then one row per cell (flat order).
std::string encode_grid_csv(const GridField& f);
GridField decode_grid_csv(const std::string& text);
void write_grid_csv(const fs::path& path, const GridField& f);
GridField read_grid_csv(const fs::path& path);

// Reports.
std::string encode_distortion_csv(const std::vector<std::pair<std::string, DistortionReport>>& rows);
std::string encode_sweep_csv(const std::vector<SweepRow>& rows);
std::string encode_values_csv(const std::string& header, const std::vector<std::vector<double>>& columns);

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace tmkernel::io
