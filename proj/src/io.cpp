#include "dme/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dme/error.hpp"

namespace dme::io {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Non-empty, non-comment lines.
std::vector<std::string_view> data_lines(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        out.push_back(line);
    }
    return out;
}

std::vector<double> parse_row(std::string_view line) {
    std::vector<double> row;
    for (auto tok : split(line, ',')) row.push_back(parse_double(trim(tok)));
    return row;
}

void expect_columns(const Table& t, const std::vector<std::string>& columns, const char* what) {
    if (t.columns != columns) throw ParameterError(std::string("unexpected columns for ") + what);
}

double number_or_nan(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw ParameterError("expected a number in JSON");
    return j.get<double>();
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

double parse_double(std::string_view token) {
    if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (token == "inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = token.data();
    if (!token.empty() && token.front() == '+') ++first;
    const auto res = std::from_chars(first, token.data() + token.size(), v);
    if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw ParameterError("malformed number '" + std::string(token) + "'");
    return v;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return s;
}

// ---------------------------------------------------------------------------

std::string table_to_csv(const Table& t, const std::string& comment) {
    std::string out;
    if (!comment.empty()) out += "# " + comment + "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw ParameterError("row width does not match the column count");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

Table table_from_csv(std::string_view text) {
    const auto lines = data_lines(text);
    if (lines.empty()) throw ParameterError("CSV has no header line");
    Table t;
    for (auto col : split(lines[0], ',')) t.columns.emplace_back(trim(col));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto row = parse_row(lines[i]);
        if (row.size() != t.columns.size())
            throw ParameterError("CSV line " + std::to_string(i + 1) + " has " + std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(t.columns.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------

std::string matrix_to_csv(const Matrix& m, std::uint64_t seed) {
    std::string out = "# dme n=" + std::to_string(m.rows()) + " seed=" + std::to_string(seed) + "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

Matrix matrix_from_csv(std::string_view text) {
    const auto lines = data_lines(text);
    if (lines.empty()) throw ParameterError("matrix CSV is empty");
    std::vector<double> data;
    std::size_t cols = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto row = parse_row(lines[i]);
        if (i == 0) cols = row.size();
        if (row.size() != cols) throw ParameterError("matrix CSV rows have different lengths");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(lines.size(), cols, std::move(data));
}

Json matrix_to_json(const Matrix& m, std::uint64_t seed, std::uint64_t stream) {
    Json entries = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) entries.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    return Json{{"n", m.rows()}, {"seed", seed}, {"stream", stream}, {"entries", std::move(entries)}};
}

Matrix matrix_from_json(const Json& j) {
    const auto n = j.at("n").get<std::size_t>();
    const auto& entries = j.at("entries");
    if (!entries.is_array() || entries.size() != n) throw ParameterError("matrix JSON: entries must have n rows");
    std::vector<double> data;
    data.reserve(n * n);
    for (const auto& row : entries) {
        if (!row.is_array() || row.size() != n) throw ParameterError("matrix JSON: every row must have n entries");
        for (const auto& v : row) data.push_back(v.get<double>());
    }
    return Matrix(n, n, std::move(data));
}

// ---------------------------------------------------------------------------

std::string spectrum_to_csv(const ComplexSpectrum& s) {
    Table t{{"re", "im"}, {}};
    for (const auto& z : s.values()) t.rows.push_back({z.real(), z.imag()});
    return table_to_csv(t);
}

ComplexSpectrum spectrum_from_csv(std::string_view text) {
    const auto t = table_from_csv(text);
    expect_columns(t, {"re", "im"}, "spectrum");
    std::vector<Complex> v;
    for (const auto& row : t.rows) v.emplace_back(row[0], row[1]);
    return ComplexSpectrum(std::move(v));
}

std::string singular_to_csv(const SingularSpectrum& s) {
    return values_to_csv(std::vector<double>(s.values().begin(), s.values().end()), "s");
}

SingularSpectrum singular_from_csv(std::string_view text) {
    const auto t = table_from_csv(text);
    expect_columns(t, {"s"}, "singular values");
    std::vector<double> v;
    for (const auto& row : t.rows) v.push_back(row[0]);
    return SingularSpectrum(std::move(v));
}

Json spectrum_to_json(const EigenResult& r, double residual) {
    Json values = Json::array();
    for (const auto& z : r.spectrum.values()) values.push_back({z.real(), z.imag()});
    return Json{{"n", r.spectrum.size()}, {"iterations", r.iterations}, {"residual", residual}, {"eigenvalues", std::move(values)}};
}

Json singular_to_json(const SingularSpectrum& s) {
    return Json{{"n", s.size()}, {"rank", s.rank()}, {"singular_values", std::vector<double>(s.values().begin(), s.values().end())}};
}

std::string values_to_csv(const std::vector<double>& v, const std::string& column) {
    Table t{{column}, {}};
    for (double x : v) t.rows.push_back({x});
    return table_to_csv(t);
}

std::vector<double> values_from_csv(std::string_view text) {
    const auto t = table_from_csv(text);
    if (t.columns.size() != 1) throw ParameterError("expected a single-column CSV");
    std::vector<double> v;
    for (const auto& row : t.rows) v.push_back(row[0]);
    return v;
}

std::string histogram_to_csv(const Histogram& h) {
    Table t{{"edge_lo", "edge_hi", "count"}, {}};
    for (std::size_t b = 0; b < h.bins(); ++b) t.rows.push_back({h.edges()[b], h.edges()[b + 1], static_cast<double>(h.counts()[b])});
    return table_to_csv(t);
}

Histogram histogram_from_csv(std::string_view text) {
    const auto t = table_from_csv(text);
    expect_columns(t, {"edge_lo", "edge_hi", "count"}, "histogram");
    if (t.rows.empty()) throw ParameterError("histogram CSV has no bins");
    std::vector<double> edges{t.rows[0][0]};
    std::vector<std::size_t> counts;
    for (const auto& row : t.rows) {
        if (row[0] != edges.back()) throw ParameterError("histogram bins are not contiguous");
        if (!(row[2] >= 0.0) || row[2] != std::floor(row[2])) throw ParameterError("histogram count is not a non-negative integer");
        edges.push_back(row[1]);
        counts.push_back(static_cast<std::size_t>(row[2]));
    }
    return Histogram(std::move(edges), std::move(counts));
}

std::string artifact_to_csv(const Artifact& a) { return table_to_csv(Table{a.columns, a.rows}); }

Artifact artifact_from_csv(const std::string& file, std::string_view text) {
    auto t = table_from_csv(text);
    return Artifact{file, std::move(t.columns), std::move(t.rows)};
}

// ---------------------------------------------------------------------------

Json law_to_json(const ReferenceLaw& law) {
    Json j{{"kind", law.name()}};
    switch (law.kind()) {
        case LawKind::Exponential: break;
        case LawKind::Beta:
            j["alpha"] = law.alpha();
            j["beta"] = law.beta_param();
            break;
        default: j["sigma"] = law.sigma();
    }
    return j;
}

ReferenceLaw law_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ParameterError("law JSON needs a \"kind\"");
    const auto kind = j.at("kind").get<std::string>();
    return ReferenceLaw::from_name(kind, j.value("sigma", 1.0), j.value("alpha", 1.0), j.value("beta", 1.0));
}

Table law_table(const ReferenceLaw& law, const std::string& what, std::size_t points) {
    if (points < 2) throw ParameterError("a law table needs at least 2 points");
    const double last = static_cast<double>(points - 1);
    Table t;
    if (what == "quantile") {
        if (law.is_complex()) throw DomainError("the circle law has no quantile function");
        t.columns = {"u", "quantile"};
        for (std::size_t i = 0; i < points; ++i) {
            const double u = static_cast<double>(i) / last;
            t.rows.push_back({u, quantile(law, u)});
        }
        return t;
    }
    if (what != "pdf" && what != "cdf") throw ParameterError("unknown table '" + what + "' (pdf, cdf or quantile)");
    auto [lo, hi] = law.support();
    if (std::isinf(hi)) hi = quantile(law, 0.999);
    const bool radial = law.is_complex();
    t.columns = {radial ? "r" : "x", what};
    for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / last;
        double y;
        if (radial) {
            // Radial law of the disc: density 2r / sigma^2.
            y = what == "cdf" ? radial_cdf(law, x) : 2.0 * x / (law.sigma() * law.sigma());
        } else {
            y = what == "cdf" ? cdf(law, x) : pdf(law, x);
        }
        t.rows.push_back({x, y});
    }
    return t;
}

// ---------------------------------------------------------------------------

Json report_to_json(const ExperimentReport& r) {
    Json extra = Json::object();
    for (const auto& [k, v] : r.config.extra) extra[k] = v;
    Json config{{"name", r.config.name}, {"n", r.config.n}, {"reps", r.config.reps}, {"seed", r.config.seed}, {"extra", extra}};

    Json stats = Json::object();
    for (const auto& [k, v] : r.statistics) stats[k] = v;

    Json criteria = Json::array();
    for (const auto& c : r.criteria) {
        Json thresholds = Json::object();
        for (const auto& key : c.thresholds) {
            if (auto it = r.config.extra.find(key); it != r.config.extra.end()) {
                thresholds[key] = it->second;
            } else if (auto st = r.statistics.find(key); st != r.statistics.end()) {
                thresholds[key] = st->second;
            } else {
                throw InvariantError("criterion '" + c.name + "' references unknown threshold '" + key + "'");
            }
        }
        criteria.push_back(Json{{"name", c.name},
                                {"value", c.value},
                                {"relation", c.relation},
                                {"thresholds", std::move(thresholds)},
                                {"pass", c.pass},
                                {"hard", c.hard}});
    }
    Json artifacts = Json::array();
    for (const auto& a : r.artifacts) artifacts.push_back(a.file);
    return Json{{"experiment", r.config.name}, {"config", std::move(config)}, {"statistics", std::move(stats)},
                {"criteria", std::move(criteria)}, {"passed", r.passed()},           {"artifacts", std::move(artifacts)},
                {"failures", r.failures}};
}

ExperimentReport report_from_json(const Json& j) {
    ExperimentReport r;
    r.config = config_from_json(j.at("config"));
    for (const auto& [k, v] : j.at("statistics").items()) r.statistics[k] = number_or_nan(v);
    for (const auto& c : j.at("criteria")) {
        Criterion cr;
        cr.name = c.at("name").get<std::string>();
        cr.value = number_or_nan(c.at("value"));
        cr.relation = c.at("relation").get<std::string>();
        for (const auto& [k, v] : c.at("thresholds").items()) cr.thresholds.push_back(k);
        cr.pass = c.at("pass").get<bool>();
        cr.hard = c.at("hard").get<bool>();
        r.criteria.push_back(std::move(cr));
    }
    for (const auto& f : j.at("artifacts")) r.artifacts.push_back(Artifact{f.get<std::string>(), {}, {}});
    r.failures = j.at("failures").get<std::vector<std::string>>();
    return r;
}

ExperimentConfig config_from_json(const Json& j, ExperimentConfig base) {
    if (!j.is_object()) throw ParameterError("config JSON must be an object");
    auto count = [](const Json& v, const std::string& key) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ParameterError("config \"" + key + "\" must be a non-negative integer");
        return v.get<std::uint64_t>();
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "name") {
            if (!v.is_string()) throw ParameterError("config \"name\" must be a string");
            base.name = v.get<std::string>();
        } else if (key == "n") {
            base.n = count(v, key);
        } else if (key == "reps") {
            base.reps = count(v, key);
        } else if (key == "seed") {
            base.seed = count(v, key);
        } else if (key == "threads") {
            base.threads = static_cast<unsigned>(count(v, key));
        } else if (key == "extra") {
            if (!v.is_object()) throw ParameterError("config \"extra\" must be an object");
            for (const auto& [k, x] : v.items()) {
                if (!x.is_number()) throw ParameterError("config extra \"" + k + "\" must be a number");
                base.extra[k] = x.get<double>();
            }
        } else {
            throw ParameterError("unknown config key \"" + key + "\"");
        }
    }
    return base;
}

// ---------------------------------------------------------------------------

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParameterError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ParameterError("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::filesystem::path> write_experiment(const ExperimentReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    Json files = Json::array();
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        written.push_back(dir / name);
        files.push_back(Json{{"file", name}, {"bytes", text.size()}, {"fnv1a64", hex64(fnv1a64(text))}});
    };
    emit("report.json", report_to_json(r).dump(2) + "\n");
    for (const auto& a : r.artifacts) emit(a.file, artifact_to_csv(a));
    const Json manifest{{"experiment", r.config.name}, {"files", std::move(files)}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    written.push_back(dir / "manifest.json");
    return written;
}

}  // namespace dme::io
