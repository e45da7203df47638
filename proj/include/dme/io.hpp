#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dme/esd.hpp"
#include "dme/experiments.hpp"
#include "dme/laws.hpp"
#include "dme/matrix.hpp"
#include "dme/spectra.hpp"

/// Text formats. Doubles are written in shortest round-trip form, so every
/// reader below recovers the exact bits, and equal inputs give equal bytes.
namespace dme::io {

using Json = nlohmann::json;

/// Shortest representation that parses back to the same double; integral
/// values keep a trailing ".0" ("1.0", not "1").
std::string format_double(double x);
/// Strict parse of a full token; ParameterError on trailing garbage.
double parse_double(std::string_view token);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Plain numeric table: a header line of column names, then one comma
/// separated row per line. Lines starting with '#' are comments.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
std::string table_to_csv(const Table& t, const std::string& comment = "");
Table table_from_csv(std::string_view text);

/// Row-major matrix with the `# dme n=<n> seed=<s>` header and no column line.
std::string matrix_to_csv(const Matrix& m, std::uint64_t seed);
Matrix matrix_from_csv(std::string_view text);
Json matrix_to_json(const Matrix& m, std::uint64_t seed, std::uint64_t stream);
Matrix matrix_from_json(const Json& j);

std::string spectrum_to_csv(const ComplexSpectrum& s);  ///< columns re,im
ComplexSpectrum spectrum_from_csv(std::string_view text);
std::string singular_to_csv(const SingularSpectrum& s);  ///< column s
SingularSpectrum singular_from_csv(std::string_view text);
Json spectrum_to_json(const EigenResult& r, double residual);
Json singular_to_json(const SingularSpectrum& s);

std::string values_to_csv(const std::vector<double>& v, const std::string& column = "value");
std::vector<double> values_from_csv(std::string_view text);

std::string histogram_to_csv(const Histogram& h);  ///< columns edge_lo,edge_hi,count
Histogram histogram_from_csv(std::string_view text);

std::string artifact_to_csv(const Artifact& a);
Artifact artifact_from_csv(const std::string& file, std::string_view text);

Json law_to_json(const ReferenceLaw& law);
ReferenceLaw law_from_json(const Json& j);
/// Evenly spaced table of "pdf", "cdf" or "quantile" over the support (the
/// radial range for Circle, [0, q(0.999)] for Exponential).
Table law_table(const ReferenceLaw& law, const std::string& what, std::size_t points);

/// Report as JSON. `threads` and `wall_time` are left out so that the text
/// depends only on the configuration.
Json report_to_json(const ExperimentReport& r);
/// Reads back everything report_to_json writes (artifacts by file name only).
ExperimentReport report_from_json(const Json& j);

/// Overlays n, reps, seed, threads, name and the "extra" object of `j` on
/// `base`. ParameterError for any other key or a value of the wrong type.
ExperimentConfig config_from_json(const Json& j, ExperimentConfig base = {});

/// Writes report.json, every artifact CSV and manifest.json (file names with
/// their FNV-1a-64 hashes) into `dir`, creating it if needed. Returns the
/// paths written, manifest last.
std::vector<std::filesystem::path> write_experiment(const ExperimentReport& r, const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace dme::io
