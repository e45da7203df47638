// Command-line front end: sample, spectrum, singvals, perron, experiment, laws.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dme/error.hpp"
#include "dme/experiments.hpp"
#include "dme/io.hpp"
#include "dme/laws.hpp"
#include "dme/sampler.hpp"
#include "dme/spectra.hpp"

namespace {

using namespace dme;

enum Exit : int { kOk = 0, kUsage = 1, kNumerical = 2, kCriterion = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int fail(const char* kind, std::string msg, int code) {
    for (char& c : msg)
        if (c == '\n' || c == '\r') c = ' ';
    std::cerr << "dme: error[" << kind << "]: " << msg << "\n";
    return code;
}

void emit(const std::optional<std::string>& out, const std::string& text) {
    if (out) {
        io::write_text(*out, text);
    } else {
        std::cout << text;
    }
}

/// Matrix source shared by spectrum, singvals and perron.
struct MatrixSource {
    std::optional<std::string> in;
    std::optional<std::size_t> n;
    std::uint64_t seed = 0;
    bool recursive = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--in", in, "Matrix CSV to read");
        cmd->add_option("--n", n, "Sample a DME matrix of this size instead")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Seed for inline sampling")->envname("DME_SEED");
        cmd->add_flag("--recursive", recursive, "Use the stick-breaking construction");
    }

    Matrix load() const {
        if (in && n) throw UsageError("--in and --n are mutually exclusive");
        if (in) return io::matrix_from_csv(io::read_text(*in));
        if (n) return sample(*n).matrix();
        throw UsageError("give a matrix with --in FILE or sample one with --n N");
    }

    MarkovMatrix sample(std::size_t size) const {
        const RngStream rng(seed, 0);
        return recursive ? sample_dme_recursive(size, rng) : sample_dme(size, rng);
    }
};

std::pair<std::string, double> parse_assignment(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
    return {s.substr(0, eq), io::parse_double(s.substr(eq + 1))};
}

int run(int argc, char** argv) {
    CLI::App app{"Dirichlet Markov Ensemble toolkit", "dme"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    // sample
    auto* sample = app.add_subcommand("sample", "Sample a DME matrix and write it as CSV");
    std::size_t sample_n = 0;
    MatrixSource sample_src;
    std::optional<std::string> sample_out;
    bool sample_json = false;
    sample->add_option("--n", sample_n, "Dimension")->required()->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_src.seed, "Seed (default $DME_SEED or 0)")->envname("DME_SEED");
    sample->add_flag("--recursive", sample_src.recursive, "Use the stick-breaking construction");
    sample->add_option("--out", sample_out, "Output file (default stdout)");
    sample->add_flag("--json", sample_json, "Write the JSON envelope instead of CSV");

    // spectrum / singvals / perron
    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of a matrix as re,im CSV");
    auto* singvals = app.add_subcommand("singvals", "Singular values of a matrix as CSV");
    auto* perron = app.add_subcommand("perron", "Perron-Frobenius vector of a Markov matrix");
    MatrixSource spec_src, sv_src, perron_src;
    std::optional<std::string> spec_out, sv_out, perron_out;
    bool spec_json = false, sv_json = false;
    spec_src.attach(spectrum);
    spectrum->add_option("--out", spec_out, "Output file (default stdout)");
    spectrum->add_flag("--json", spec_json, "Write the JSON envelope with solver diagnostics");
    sv_src.attach(singvals);
    singvals->add_option("--out", sv_out, "Output file (default stdout)");
    singvals->add_flag("--json", sv_json, "Write a JSON envelope");
    perron_src.attach(perron);
    perron->add_option("--out", perron_out, "Output file (default stdout)");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run a registered experiment");
    std::string exp_name;
    std::optional<std::size_t> exp_n, exp_reps;
    std::optional<std::uint64_t> exp_seed;
    std::optional<std::string> exp_config, exp_out;
    std::vector<std::string> exp_set;
    unsigned exp_threads = 1;
    experiment->add_option("name", exp_name, "Experiment name")->required()->check(CLI::IsMember(experiment_names()));
    experiment->add_option("--n", exp_n, "Dimension")->check(CLI::PositiveNumber);
    experiment->add_option("--reps", exp_reps, "Replicas")->check(CLI::PositiveNumber);
    experiment->add_option("--seed", exp_seed, "Seed (default $DME_SEED or 0)")->envname("DME_SEED");
    experiment->add_option("--config", exp_config, "JSON config file (n, reps, seed, threads, extra)");
    experiment->add_option("--set", exp_set, "Override an extra parameter, key=value")->take_all();
    experiment->add_option("--threads", exp_threads, "Worker threads")->check(CLI::PositiveNumber);
    experiment->add_option("--out", exp_out, "Output directory (default: report JSON on stdout)");

    // laws
    auto* laws = app.add_subcommand("laws", "Reference law descriptors and tables");
    std::string law_name;
    double law_sigma = 1.0, law_alpha = 1.0, law_beta = 1.0;
    std::optional<std::string> law_dump, law_out;
    std::size_t law_points = 201;
    laws->add_option("--law", law_name, "C, W, Q, P, circle, semicircle, quarter_circle, marchenko_pastur, arcsine, exponential, beta")
        ->required();
    laws->add_option("--sigma", law_sigma, "Scale");
    laws->add_option("--alpha", law_alpha, "Beta law first parameter");
    laws->add_option("--beta", law_beta, "Beta law second parameter");
    laws->add_option("--dump", law_dump, "Table to write")->check(CLI::IsMember({"cdf", "pdf", "quantile"}));
    laws->add_option("--points", law_points, "Table size")->check(CLI::Range(2, 1000000));
    laws->add_option("--out", law_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), kUsage);
    }

    if (sample->parsed()) {
        const auto m = sample_src.sample(sample_n);
        emit(sample_out, sample_json ? io::matrix_to_json(m.matrix(), sample_src.seed, 0).dump(2) + "\n"
                                     : io::matrix_to_csv(m.matrix(), sample_src.seed));
    } else if (spectrum->parsed()) {
        const Matrix a = spec_src.load();
        const auto r = eigen_solve(a);
        if (spec_json) {
            emit(spec_out, io::spectrum_to_json(r, real_schur(a).residual).dump(2) + "\n");
        } else {
            emit(spec_out, io::spectrum_to_csv(r.spectrum));
        }
    } else if (singvals->parsed()) {
        const auto s = singular_values(sv_src.load());
        emit(sv_out, sv_json ? io::singular_to_json(s).dump(2) + "\n" : io::singular_to_csv(s));
    } else if (perron->parsed()) {
        const auto pi = perron_vector(MarkovMatrix(perron_src.load()));
        emit(perron_out, io::values_to_csv(std::vector<double>(pi.values().begin(), pi.values().end()), "pi"));
    } else if (experiment->parsed()) {
        ExperimentConfig c;
        if (exp_config) c = io::config_from_json(io::Json::parse(io::read_text(*exp_config)));
        c.name = exp_name;
        if (exp_n) c.n = *exp_n;
        if (exp_reps) c.reps = *exp_reps;
        if (exp_seed) c.seed = *exp_seed;
        if (experiment->count("--threads") || !exp_config) c.threads = exp_threads;
        for (const auto& s : exp_set) c.extra.insert_or_assign(parse_assignment(s).first, parse_assignment(s).second);
        const auto report = run_experiment(c);
        if (exp_out) {
            io::write_experiment(report, *exp_out);
        } else {
            std::cout << io::report_to_json(report).dump(2) << "\n";
        }
        if (!report.passed()) {
            std::string failed;
            for (const auto& cr : report.criteria)
                if (cr.hard && !cr.pass) failed += (failed.empty() ? "" : ",") + cr.name;
            return fail("criterion", "hard criteria failed: " + failed, kCriterion);
        }
    } else if (laws->parsed()) {
        const auto law = ReferenceLaw::from_name(law_name, law_sigma, law_alpha, law_beta);
        if (law_dump) {
            emit(law_out, io::table_to_csv(io::law_table(law, *law_dump, law_points), io::law_to_json(law).dump()));
        } else {
            emit(law_out, io::law_to_json(law).dump() + "\n");
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        return fail("usage", e.what(), kUsage);
    } catch (const dme::ParameterError& e) {
        return fail("parameter", e.what(), kUsage);
    } catch (const dme::InvariantError& e) {
        return fail("invariant", e.what(), kUsage);
    } catch (const nlohmann::json::exception& e) {
        return fail("parameter", e.what(), kUsage);
    } catch (const dme::NumericalError& e) {
        return fail("numerical", e.what(), kNumerical);
    } catch (const dme::DomainError& e) {
        return fail("domain", e.what(), kNumerical);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), kNumerical);
    }
}
