#include "dme/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <optional>
#include <thread>

#include "dme/error.hpp"
#include "dme/esd.hpp"
#include "dme/laws.hpp"
#include "dme/spectra.hpp"
#include "dme/summation.hpp"

namespace dme {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; callers write results into per-index slots, so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

/// Replica driver. Numerical failures abort only their replica and are
/// listed in `failures` in replica order; any other exception is rethrown.
template <typename R>
std::vector<std::optional<R>> run_replicas(std::size_t reps, unsigned threads, std::vector<std::string>& failures,
                                           const std::function<R(std::size_t)>& body) {
    std::vector<std::optional<R>> out(reps);
    std::vector<std::string> errors(reps);
    std::vector<std::exception_ptr> fatal(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        try {
            out[r] = body(r);
        } catch (const NumericalError& e) {
            errors[r] = e.what();
        } catch (const InvariantError& e) {
            errors[r] = e.what();
        } catch (...) {
            fatal[r] = std::current_exception();
        }
    });
    for (std::size_t r = 0; r < reps; ++r) {
        if (fatal[r]) std::rethrow_exception(fatal[r]);
        if (!errors[r].empty()) failures.push_back("replica " + std::to_string(r) + ": " + errors[r]);
    }
    return out;
}

template <typename R>
std::vector<R> successful(std::vector<std::optional<R>>& results) {
    std::vector<R> ok;
    for (auto& r : results)
        if (r) ok.push_back(std::move(*r));
    return ok;
}

double mean(const std::vector<double>& x) {
    CompensatedSum s;
    for (double v : x) s += v;
    return x.empty() ? std::nan("") : s.value() / static_cast<double>(x.size());
}

/// Unbiased sample covariance; the two-pass form.
double covariance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) return std::nan("");
    const double mx = mean(x), my = mean(y);
    CompensatedSum s;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s.value() / static_cast<double>(x.size() - 1);
}

double variance(const std::vector<double>& x) { return covariance(x, x); }

/// Standard error of the sample covariance: sd of the centred products / sqrt(N).
double covariance_se(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean(x), my = mean(y);
    std::vector<double> prod(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
    return std::sqrt(variance(prod) / static_cast<double>(x.size()));
}

double max_of(const std::vector<double>& x) { return x.empty() ? std::nan("") : *std::max_element(x.begin(), x.end()); }
double min_of(const std::vector<double>& x) { return x.empty() ? std::nan("") : *std::min_element(x.begin(), x.end()); }

void apply_defaults(ExperimentConfig& c, const char* name, std::size_t n, std::size_t reps) {
    c.name = name;
    if (c.n == 0) c.n = n;
    if (c.reps == 0) c.reps = reps;
}

Criterion make_criterion(std::string name, double value, std::string relation, std::vector<std::string> keys, bool pass,
                         bool hard = true) {
    Criterion c;
    c.name = std::move(name);
    c.value = value;
    c.relation = std::move(relation);
    c.thresholds = std::move(keys);
    c.pass = pass;
    c.hard = hard;
    return c;
}

/// A threshold check evaluated on every replica. With a single replica the
/// criterion value is the statistic itself; with several it is the fraction of
/// replicas that pass, compared with min_pass_fraction.
Criterion replica_criterion(ExperimentConfig& c, std::string name, const std::vector<double>& values,
                            const std::string& relation, std::vector<std::string> keys,
                            const std::function<bool(double)>& ok, bool hard = true) {
    if (values.size() == 1) return make_criterion(std::move(name), values[0], relation, std::move(keys), ok(values[0]), hard);
    const double min_fraction = c.param("min_pass_fraction", 0.9);
    std::size_t good = 0;
    for (double v : values) good += ok(v) ? 1 : 0;
    const double fraction = values.empty() ? 0.0 : static_cast<double>(good) / static_cast<double>(values.size());
    keys.push_back("min_pass_fraction");
    return make_criterion(std::move(name), fraction, "fraction(" + relation + ") >=", std::move(keys),
                          fraction >= min_fraction, hard);
}

Artifact histogram_artifact(std::string file, const Histogram& h) {
    Artifact a{std::move(file), {"edge_lo", "edge_hi", "count"}, {}};
    for (std::size_t b = 0; b < h.bins(); ++b) {
        a.rows.push_back({h.edges()[b], h.edges()[b + 1], static_cast<double>(h.counts()[b])});
    }
    return a;
}

Artifact column_artifact(std::string file, std::string column, const std::vector<double>& values) {
    Artifact a{std::move(file), {std::move(column)}, {}};
    a.rows.reserve(values.size());
    for (double v : values) a.rows.push_back({v});
    return a;
}

void finish(ExperimentReport& report, Clock::time_point start) {
    report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t count_param(ExperimentConfig& c, const std::string& key, double fallback) {
    const double v = c.param(key, fallback);
    if (!(v >= 0.0) || v != std::floor(v)) throw ParameterError(key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

double ExperimentConfig::param(const std::string& key, double fallback) {
    return extra.emplace(key, fallback).first->second;
}

bool ExperimentReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass || !c.hard; });
}

const Criterion* ExperimentReport::criterion(const std::string& name) const {
    for (const auto& c : criteria)
        if (c.name == name) return &c;
    return nullptr;
}

RngStream experiment_stream(const std::string& name, std::uint64_t seed, std::size_t n, std::size_t replica) {
    return RngStream(seed, replica_stream(fnv1a(name), n, replica));
}

std::vector<std::string> experiment_names() {
    return {"quarter_circle", "circle_law",     "spectral_gap",  "marginals",         "translation",
            "row_asymptotics", "generic_mp", "symmetric_part", "kernel_convergence"};
}

ExperimentReport run_experiment(ExperimentConfig config) {
    const std::string& n = config.name;
    if (n == "quarter_circle") return exp_quarter_circle(std::move(config));
    if (n == "circle_law") return exp_circle_law(std::move(config));
    if (n == "spectral_gap") return exp_spectral_gap(std::move(config));
    if (n == "marginals") return exp_marginals(std::move(config));
    if (n == "translation") return exp_translation(std::move(config));
    if (n == "row_asymptotics") return exp_row_asymptotics(std::move(config));
    if (n == "generic_mp") return exp_generic_mp(std::move(config));
    if (n == "symmetric_part") return exp_symmetric_part(std::move(config));
    if (n == "kernel_convergence") return exp_kernel_convergence(std::move(config));
    throw ParameterError("unknown experiment '" + n + "'");
}

// ---------------------------------------------------------------------------

ExperimentReport exp_quarter_circle(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "quarter_circle", 300, 1);
    const double ks_max = c.param("ks_max", 0.1);
    const double w1_max = c.param("w1_max", 0.05);
    const double edge_max = c.param("edge_fraction_max", 0.05);
    const double s1_floor = c.param("s1_floor", 1.0 - 1e-9);
    const std::size_t bins = count_param(c, "bins", 40);
    const std::size_t n = c.n;
    const double root_n = std::sqrt(static_cast<double>(n));
    const auto q1 = ReferenceLaw::quarter_circle(1.0);
    const auto p1 = ReferenceLaw::marchenko_pastur(1.0);

    struct R {
        double ks_all, ks_excl, w1, ks_mp, edge_fraction, s1;
        std::vector<double> scaled;
    };
    ExperimentReport report;
    auto results = run_replicas<R>(c.reps, c.threads, report.failures, [&](std::size_t rep) {
        const auto m = sample_dme(n, experiment_stream(c.name, c.seed, n, rep));
        const auto sv = singular_values(m.matrix());
        std::vector<double> scaled(sv.values().begin(), sv.values().end());
        for (double& s : scaled) s *= root_n;
        std::vector<double> rest(scaled.begin() + 1, scaled.end());
        std::vector<double> squares(rest);
        for (double& s : squares) s *= s;
        R r;
        r.s1 = sv[0];
        r.ks_all = ks_distance(Esd1D(scaled), q1);
        r.ks_excl = rest.empty() ? 0.0 : ks_distance(Esd1D(rest), q1);
        r.w1 = rest.empty() ? 0.0 : wasserstein(Esd1D(rest), q1, 1);
        r.ks_mp = squares.empty() ? 0.0 : ks_distance(Esd1D(squares), p1);
        r.edge_fraction = static_cast<double>(std::count_if(scaled.begin(), scaled.end(), [](double s) { return s > 2.0; })) /
                          static_cast<double>(n);
        if (rep == 0) r.scaled = std::move(scaled);
        return r;
    });
    const bool have_first = results.front().has_value();
    std::vector<double> first_scaled;
    if (have_first) first_scaled = results.front()->scaled;
    auto ok = successful(results);

    std::vector<double> ks_all, ks_excl, w1, ks_mp, edge, s1;
    for (const auto& r : ok) {
        ks_all.push_back(r.ks_all);
        ks_excl.push_back(r.ks_excl);
        w1.push_back(r.w1);
        ks_mp.push_back(r.ks_mp);
        edge.push_back(r.edge_fraction);
        s1.push_back(r.s1);
    }
    auto& st = report.statistics;
    st["replicas_ok"] = static_cast<double>(ok.size());
    st["ks_all"] = mean(ks_all);
    st["ks_excl_s1"] = mean(ks_excl);
    st["ks_excl_s1_max"] = max_of(ks_excl);
    st["w1_excl_s1"] = mean(w1);
    st["w1_excl_s1_max"] = max_of(w1);
    st["ks_mp_excl_top"] = mean(ks_mp);
    st["edge_fraction"] = mean(edge);
    st["s1_min"] = min_of(s1);
    st["s1_mean"] = mean(s1);

    report.criteria.push_back(replica_criterion(c, "ks_excl_s1", ks_excl, "<", {"ks_max"}, [&](double v) { return v < ks_max; }));
    report.criteria.push_back(replica_criterion(c, "w1_excl_s1", w1, "<", {"w1_max"}, [&](double v) { return v < w1_max; }));
    report.criteria.push_back(replica_criterion(c, "ks_mp_excl_top", ks_mp, "<", {"ks_max"}, [&](double v) { return v < ks_max; }));
    report.criteria.push_back(
        replica_criterion(c, "edge_fraction", edge, "<", {"edge_fraction_max"}, [&](double v) { return v < edge_max; }));
    report.criteria.push_back(make_criterion("s1_at_least_one", min_of(s1), ">=", {"s1_floor"}, !ok.empty() && min_of(s1) >= s1_floor));

    if (have_first) {
        report.artifacts.push_back(column_artifact("singvals.csv", "s", first_scaled));
        if (first_scaled.size() > 1) {
            std::vector<double> rest(first_scaled.begin() + 1, first_scaled.end());
            report.artifacts.push_back(histogram_artifact("singvals_hist.csv", histogram(Esd1D(rest), bins)));
        }
    }
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

namespace {

struct CircleRun {
    std::vector<CircleLawStats> stats;
    std::vector<double> lambda1_error;
    std::vector<double> lambda1;
    bool conjugate_closed = true;
    std::vector<Complex> first_points;
};

CircleRun circle_run(const ExperimentConfig& c, std::size_t n, std::size_t exclude_top, std::vector<std::string>& failures) {
    const double root_n = std::sqrt(static_cast<double>(n));
    struct R {
        CircleLawStats st;
        double lambda1;
        bool closed;
        std::vector<Complex> points;
    };
    auto results = run_replicas<R>(c.reps, c.threads, failures, [&](std::size_t rep) {
        const auto m = sample_dme(n, experiment_stream(c.name, c.seed, n, rep));
        const auto ev = eigenvalues(m.matrix());
        const Esd2D esd = Esd2D::from_spectrum(ev, root_n);
        R r;
        r.st = circle_law_stats(esd, exclude_top);
        r.lambda1 = root_n * ev[0].real();
        r.closed = conjugate_closed(ev.values());
        if (rep == 0) r.points.assign(esd.points().begin(), esd.points().end());
        return r;
    });
    CircleRun run;
    if (results.front()) run.first_points = results.front()->points;
    for (auto& r : results) {
        if (!r) continue;
        run.stats.push_back(r->st);
        run.lambda1.push_back(r->lambda1);
        run.lambda1_error.push_back(std::abs(r->lambda1 - root_n));
        run.conjugate_closed = run.conjugate_closed && r->closed;
    }
    return run;
}

}  // namespace

ExperimentReport exp_circle_law(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "circle_law", 81, 1);
    const std::size_t exclude_top = count_param(c, "exclude_top", 1);
    const double lambda1_tol = c.param("lambda1_tol", 1e-8);
    const double radial_max = c.param("radial_ks_max", 0.1);
    const double angular_max = c.param("angular_ks_max", 0.1);
    const std::size_t compare_n = count_param(c, "compare_n", 100);

    ExperimentReport report;
    const CircleRun run = circle_run(c, c.n, exclude_top, report.failures);
    std::vector<double> radial, angular, maxmod;
    for (const auto& s : run.stats) {
        radial.push_back(s.radial_ks);
        angular.push_back(s.angular_ks);
        maxmod.push_back(s.max_modulus);
    }
    auto& st = report.statistics;
    st["replicas_ok"] = static_cast<double>(run.stats.size());
    st["lambda1"] = run.lambda1.empty() ? std::nan("") : run.lambda1.front();
    st["lambda1_error_max"] = max_of(run.lambda1_error);
    st["radial_ks"] = mean(radial);
    st["angular_ks"] = mean(angular);
    st["max_modulus"] = mean(maxmod);
    st["conjugate_closed"] = run.conjugate_closed ? 1.0 : 0.0;

    report.criteria.push_back(make_criterion("lambda1_is_sqrt_n", max_of(run.lambda1_error), "<=", {"lambda1_tol"},
                                             !run.stats.empty() && max_of(run.lambda1_error) <= lambda1_tol));
    report.criteria.push_back(make_criterion("conjugate_closed", st["conjugate_closed"], "==", {}, run.conjugate_closed));
    report.criteria.push_back(make_criterion("radial_ks", st["radial_ks"], "<", {"radial_ks_max"}, st["radial_ks"] < radial_max, false));
    report.criteria.push_back(
        make_criterion("angular_ks", st["angular_ks"], "<", {"angular_ks_max"}, st["angular_ks"] < angular_max, false));

    if (compare_n > exclude_top && compare_n < c.n) {
        const CircleRun small = circle_run(c, compare_n, exclude_top, report.failures);
        std::vector<double> small_radial;
        for (const auto& s : small.stats) small_radial.push_back(s.radial_ks);
        st["radial_ks_compare"] = mean(small_radial);
        report.criteria.push_back(make_criterion("radial_ks_decreases", st["radial_ks"], "<", {"radial_ks_compare"},
                                                 st["radial_ks"] < st["radial_ks_compare"], false));
    }

    if (!run.first_points.empty()) {
        Artifact scatter{"spectrum_scatter.csv", {"re", "im"}, {}};
        for (const auto& z : run.first_points) scatter.rows.push_back({z.real(), z.imag()});
        report.artifacts.push_back(std::move(scatter));
    }
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport exp_spectral_gap(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "spectral_gap", 300, 1000);
    if (c.n < 2) throw ParameterError("spectral_gap needs n >= 2");
    if (c.reps < 2) throw ParameterError("spectral_gap needs reps >= 2");
    const double mean_lo = c.param("mean_lo", 0.8);
    const double mean_hi = c.param("mean_hi", 1.2);
    const double real_floor = c.param("real_fraction_floor", 0.0);
    const double modulus_tol = c.param("modulus_tol", 1e-9);
    const std::size_t bins = count_param(c, "bins", 30);
    const std::size_t n = c.n;
    const double root_n = std::sqrt(static_cast<double>(n));

    ExperimentReport report;
    auto results = run_replicas<Complex>(c.reps, c.threads, report.failures, [&](std::size_t rep) {
        const auto m = sample_dme(n, experiment_stream(c.name, c.seed, n, rep));
        return eigenvalues(m.matrix())[1];
    });
    const auto l2 = successful(results);

    std::vector<double> scaled_mod, abs_phase, modulus;
    std::size_t real_count = 0;
    Artifact scatter{"lambda2_scatter.csv", {"re", "abs_im"}, {}};
    Artifact samples{"lambda2_samples.csv", {"re", "im"}, {}};
    for (const auto& z : l2) {
        modulus.push_back(std::abs(z));
        scaled_mod.push_back(root_n * std::abs(z));
        abs_phase.push_back(std::abs(std::arg(z)));
        if (z.imag() == 0.0) ++real_count;
        scatter.rows.push_back({root_n * z.real(), root_n * std::abs(z.imag())});
        samples.rows.push_back({root_n * z.real(), root_n * z.imag()});
    }
    const double real_fraction = l2.empty() ? 0.0 : static_cast<double>(real_count) / static_cast<double>(l2.size());
    auto& st = report.statistics;
    st["replicas_ok"] = static_cast<double>(l2.size());
    st["scaled_modulus_mean"] = mean(scaled_mod);
    st["scaled_modulus_sd"] = std::sqrt(variance(scaled_mod));
    st["scaled_modulus_min"] = min_of(scaled_mod);
    st["scaled_modulus_max"] = max_of(scaled_mod);
    st["real_fraction"] = real_fraction;
    st["spectral_gap_mean"] = 1.0 - mean(modulus);
    st["modulus_max"] = max_of(modulus);

    const double m = st["scaled_modulus_mean"];
    report.criteria.push_back(make_criterion("scaled_modulus_mean", m, "in", {"mean_lo", "mean_hi"}, m >= mean_lo && m <= mean_hi, false));
    report.criteria.push_back(make_criterion("real_fraction_positive", real_fraction, ">", {"real_fraction_floor"},
                                             real_fraction > real_floor, false));
    report.criteria.push_back(make_criterion("inside_unit_disc", st["modulus_max"], "<=", {"modulus_tol"},
                                             !l2.empty() && st["modulus_max"] <= 1.0 + modulus_tol));

    if (!l2.empty()) {
        report.artifacts.push_back(histogram_artifact("lambda2_modulus_hist.csv", histogram(Esd1D(scaled_mod), bins)));
        std::vector<double> edges(bins + 1);
        for (std::size_t b = 0; b <= bins; ++b) edges[b] = std::numbers::pi * static_cast<double>(b) / static_cast<double>(bins);
        edges[bins] = std::numbers::pi;
        report.artifacts.push_back(histogram_artifact("lambda2_phase_hist.csv", histogram(Esd1D(abs_phase), std::move(edges))));
        report.artifacts.push_back(std::move(scatter));
        report.artifacts.push_back(std::move(samples));
    }
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport exp_marginals(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "marginals", 100, 10000);
    if (c.n < 3) throw ParameterError("marginals needs n >= 3");
    if (c.reps < 3) throw ParameterError("marginals needs reps >= 3");
    const double se_mult = c.param("se_mult", 3.0);
    const double var_rel_tol = c.param("var_rel_tol", 0.15);
    const double ks_max = c.param("ks_max", 0.02);
    const std::size_t bins = count_param(c, "bins", 40);
    const std::size_t n = c.n;
    const double nd = static_cast<double>(n);

    struct R {
        double m11, m12, m13, m21;
    };
    ExperimentReport report;
    auto results = run_replicas<R>(c.reps, c.threads, report.failures, [&](std::size_t rep) {
        const RngStream rng = experiment_stream(c.name, c.seed, n, rep);
        const auto row0 = sample_dme_row(n, 0, rng);
        const auto row1 = sample_dme_row(n, 1, rng);
        return R{row0[0], row0[1], row0[2], row1[0]};
    });
    std::vector<double> m11, m12, m13, m21;
    for (auto& r : results) {
        if (!r) continue;
        m11.push_back(r->m11);
        m12.push_back(r->m12);
        m13.push_back(r->m13);
        m21.push_back(r->m21);
    }
    const double count = static_cast<double>(m11.size());
    const double mean_target = 1.0 / nd;
    const double var_target = (nd - 1.0) / (nd * nd * (nd + 1.0));
    const double cov_target = -1.0 / (nd * nd * (nd + 1.0));

    auto& st = report.statistics;
    st["replicas_ok"] = count;
    st["mean_m11"] = mean(m11);
    st["mean_target"] = mean_target;
    st["mean_se"] = std::sqrt(variance(m11) / count);
    st["var_m11"] = variance(m11);
    st["var_target"] = var_target;
    st["cov_same_row"] = covariance(m11, m12);
    st["cov_same_row_se"] = covariance_se(m11, m12);
    st["cov_same_row_23"] = covariance(m12, m13);
    st["cov_same_row_23_se"] = covariance_se(m12, m13);
    st["cov_same_row_target"] = cov_target;
    st["cov_cross_row"] = covariance(m11, m21);
    st["cov_cross_row_se"] = covariance_se(m11, m21);
    const Esd1D esd(m11);
    st["ks_beta"] = ks_distance(esd, ReferenceLaw::beta(1.0, nd - 1.0));

    auto within = [&](const std::string& name, double value, double target, double se) {
        report.criteria.push_back(
            make_criterion(name, value - target, "within", {"se_mult"}, std::abs(value - target) <= se_mult * se));
    };
    within("mean_m11", st["mean_m11"], mean_target, st["mean_se"]);
    const double var_rel = st["var_m11"] / var_target - 1.0;
    report.criteria.push_back(make_criterion("var_m11", var_rel, "within", {"var_rel_tol"}, std::abs(var_rel) <= var_rel_tol));
    within("cov_same_row", st["cov_same_row"], cov_target, st["cov_same_row_se"]);
    within("cov_same_row_23", st["cov_same_row_23"], cov_target, st["cov_same_row_23_se"]);
    within("cov_cross_row", st["cov_cross_row"], 0.0, st["cov_cross_row_se"]);
    report.criteria.push_back(make_criterion("ks_beta", st["ks_beta"], "<", {"ks_max"}, st["ks_beta"] < ks_max));

    if (!m11.empty()) report.artifacts.push_back(histogram_artifact("m11_hist.csv", histogram(esd, bins)));
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport exp_translation(ExperimentConfig c) {
    apply_defaults(c, "translation", 10, 10000);
    const auto kind = count_param(c, "t_kind", 1);
    switch (kind) {
        case 0: return exp_translation(std::move(c), MarkovMatrix::identity(c.n));
        case 1: {
            std::vector<std::size_t> perm(c.n);
            for (std::size_t i = 0; i < c.n; ++i) perm[i] = (i + 1) % c.n;
            return exp_translation(std::move(c), MarkovMatrix::permutation(perm));
        }
        case 2: return exp_translation(std::move(c), MarkovMatrix::wedderburn(c.n));
        default: throw ParameterError("t_kind must be 0 (identity), 1 (permutation) or 2 (Wedderburn)");
    }
}

ExperimentReport exp_translation(ExperimentConfig c, const MarkovMatrix& t) {
    const auto start = Clock::now();
    apply_defaults(c, "translation", t.n(), 10000);
    if (t.n() != c.n) throw ParameterError("translation matrix dimension does not match n");
    if (c.reps < 3) throw ParameterError("translation needs reps >= 3");
    const double se_mult = c.param("se_mult", 3.0);
    const double invariance_tol = c.param("invariance_tol", 1e-12);
    const std::size_t n = c.n;

    struct R {
        double translated, plain;
    };
    ExperimentReport report;
    auto results = run_replicas<R>(c.reps, c.threads, report.failures, [&](std::size_t rep) {
        const auto m = sample_dme(n, experiment_stream(c.name, c.seed, n, rep));
        const auto tm = left_translate(t, m);
        return R{tm(0, 0), m(0, 0)};
    });
    std::vector<double> x, y;
    for (auto& r : results) {
        if (!r) continue;
        x.push_back(r->translated);
        y.push_back(r->plain);
    }
    double analytic = 0.0;
    for (double v : t.row(0)) analytic += v * v;
    bool invariant = true;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : t.row(i)) s += v * v;
        invariant = invariant && std::abs(s - 1.0) <= invariance_tol;
    }

    // Delta method for the ratio of two sample variances on the same replicas.
    const double count = static_cast<double>(x.size());
    const double mx = mean(x), my = mean(y);
    std::vector<double> a(x.size()), b(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        a[i] = (x[i] - mx) * (x[i] - mx);
        b[i] = (y[i] - my) * (y[i] - my);
    }
    const double va = variance(x), vb = variance(y);
    const double ratio = va / vb;
    const double ratio_var = (variance(a) - 2.0 * ratio * covariance(a, b) + ratio * ratio * variance(b)) / (count * vb * vb);
    const double ratio_se = std::sqrt(std::max(ratio_var, 0.0));

    auto& st = report.statistics;
    st["replicas_ok"] = count;
    st["analytic_ratio"] = analytic;
    st["empirical_ratio"] = ratio;
    st["ratio_se"] = ratio_se;
    st["var_translated"] = va;
    st["var_m11"] = vb;
    st["invariant"] = invariant ? 1.0 : 0.0;

    report.criteria.push_back(
        make_criterion("ratio_matches", ratio - analytic, "within", {"se_mult"}, std::abs(ratio - analytic) <= se_mult * ratio_se));
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport exp_row_asymptotics(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "row_asymptotics", 5000, 1);
    const std::size_t ladder_start = count_param(c, "ladder_start", 250);
    const double m1_tol = c.param("m1_tol", 1e-12);
    const double m2_lo = c.param("m2_lo", 1.9);
    const double m2_hi = c.param("m2_hi", 2.1);
    const double w1_max = c.param("w1_max", 0.1);
    if (ladder_start == 0) throw ParameterError("ladder_start must be >= 1");

    std::vector<std::size_t> ladder;
    for (std::size_t k = ladder_start; k < c.n; k *= 2) ladder.push_back(k);
    ladder.push_back(c.n);

    struct R {
        double sum_dev, m1, m2, m3, w1;
    };
    const auto exp1 = ReferenceLaw::exponential();
    ExperimentReport report;
    // One replica per rung; rows are generated and discarded one at a time.
    auto results = run_replicas<R>(ladder.size(), c.threads, report.failures, [&](std::size_t idx) {
        const std::size_t n = ladder[idx];
        const double nd = static_cast<double>(n);
        const RngStream rng = experiment_stream(c.name, c.seed, n, 0);
        R r{0.0, 0.0, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x = exp_row(n, i, rng);
            CompensatedSum total;
            for (double v : x) total += v;
            const double s = total.value();
            r.sum_dev = std::max(r.sum_dev, std::abs(nd / s - 1.0));
            if (i == 0) {
                for (double& v : x) v /= s;
                r.m1 = row_moment(x, 1);
                r.m2 = row_moment(x, 2);
                r.m3 = row_moment(x, 3);
                for (double& v : x) v *= nd;
                r.w1 = wasserstein(Esd1D(x), exp1, 1);
            }
        }
        return r;
    });

    auto& st = report.statistics;
    Artifact table{"ladder.csv", {"n", "sum_dev", "m1", "m2", "m3", "w1"}, {}};
    double m1_err = 0.0;
    for (std::size_t idx = 0; idx < ladder.size(); ++idx) {
        if (!results[idx]) continue;
        const R& r = *results[idx];
        const std::string p = "n" + std::to_string(ladder[idx]) + "_";
        st[p + "sum_dev"] = r.sum_dev;
        st[p + "m1"] = r.m1;
        st[p + "m2"] = r.m2;
        st[p + "m3"] = r.m3;
        st[p + "w1"] = r.w1;
        m1_err = std::max(m1_err, std::abs(r.m1 - 1.0));
        table.rows.push_back({static_cast<double>(ladder[idx]), r.sum_dev, r.m1, r.m2, r.m3, r.w1});
    }
    const bool complete = report.failures.empty();
    const R* first = results.front() ? &*results.front() : nullptr;
    const R* last = results.back() ? &*results.back() : nullptr;
    st["sum_dev_first"] = first ? first->sum_dev : std::nan("");
    st["sum_dev_final"] = last ? last->sum_dev : std::nan("");

    report.criteria.push_back(make_criterion("sum_dev_decreases", st["sum_dev_final"], "<", {"sum_dev_first"},
                                             complete && ladder.size() > 1 && last->sum_dev < first->sum_dev));
    report.criteria.push_back(make_criterion("m1_exact", m1_err, "<=", {"m1_tol"}, complete && m1_err <= m1_tol));
    const double m2 = last ? last->m2 : std::nan("");
    report.criteria.push_back(make_criterion("m2_final", m2, "in", {"m2_lo", "m2_hi"}, m2 >= m2_lo && m2 <= m2_hi));
    const double w1 = last ? last->w1 : std::nan("");
    report.criteria.push_back(make_criterion("w1_final", w1, "<", {"w1_max"}, w1 < w1_max));

    report.artifacts.push_back(std::move(table));
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport exp_generic_mp(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "generic_mp", 400, 1);
    if (c.n < 2) throw ParameterError("generic_mp needs n >= 2");
    const double ks_max = c.param("ks_max", 0.1);
    const double s2_max = c.param("s2_max", 4.0);
    const double s1_lo = c.param("s1_centered_lo", 1.8);
    const double s1_hi = c.param("s1_centered_hi", 2.3);
    const std::size_t n = c.n;
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));
    const auto q1 = ReferenceLaw::quarter_circle(1.0);

    struct R {
        double ks_excl, s1, s2, s1_centered, ks_centered;
        std::vector<double> sv, svc;
    };
    ExperimentReport report;
    auto results = run_replicas<R>(c.reps, c.threads, report.failures, [&](std::size_t rep) {
        const RngStream rng = experiment_stream(c.name, c.seed, n, rep);
        Matrix x(n, n), centered(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = exp_row(n, i, rng);
            for (std::size_t j = 0; j < n; ++j) {
                x(i, j) = row[j] * inv_root_n;
                centered(i, j) = (row[j] - 1.0) * inv_root_n;
            }
        }
        const auto sv = singular_values(x);
        const auto svc = singular_values(centered);
        R r;
        r.s1 = sv[0];
        r.s2 = sv[1];
        r.s1_centered = svc[0];
        r.ks_excl = ks_distance(Esd1D(std::vector<double>(sv.values().begin() + 1, sv.values().end())), q1);
        r.ks_centered = ks_distance(Esd1D(std::vector<double>(svc.values().begin(), svc.values().end())), q1);
        if (rep == 0) {
            r.sv.assign(sv.values().begin(), sv.values().end());
            r.svc.assign(svc.values().begin(), svc.values().end());
        }
        return r;
    });
    std::vector<double> first_sv, first_svc;
    if (results.front()) {
        first_sv = results.front()->sv;
        first_svc = results.front()->svc;
    }
    auto ok = successful(results);
    std::vector<double> ks_excl, s1, s2, s1c, ksc;
    for (const auto& r : ok) {
        ks_excl.push_back(r.ks_excl);
        s1.push_back(r.s1);
        s2.push_back(r.s2);
        s1c.push_back(r.s1_centered);
        ksc.push_back(r.ks_centered);
    }
    auto& st = report.statistics;
    st["replicas_ok"] = static_cast<double>(ok.size());
    st["ks_excl_s1"] = mean(ks_excl);
    st["s1"] = mean(s1);
    st["s2"] = mean(s2);
    st["s2_max"] = max_of(s2);
    st["s1_centered"] = mean(s1c);
    st["ks_centered"] = mean(ksc);

    report.criteria.push_back(replica_criterion(c, "ks_excl_s1", ks_excl, "<", {"ks_max"}, [&](double v) { return v < ks_max; }));
    report.criteria.push_back(replica_criterion(c, "s2_bounded", s2, "<=", {"s2_max"}, [&](double v) { return v <= s2_max; }));
    report.criteria.push_back(replica_criterion(c, "s1_centered", s1c, "in", {"s1_centered_lo", "s1_centered_hi"},
                                                [&](double v) { return v >= s1_lo && v <= s1_hi; }));

    if (!first_sv.empty()) {
        report.artifacts.push_back(column_artifact("singvals_exponential.csv", "s", first_sv));
        report.artifacts.push_back(column_artifact("singvals_centered.csv", "s", first_svc));
    }
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

namespace {

struct SymmetricRun {
    double asymmetry = 0.0;
    double sigma_fit = 0.0, ks_fit = 0.0, ks_unit = 0.0;
    double top_uncentered = 0.0, bulk_edge_uncentered = 0.0;
    std::vector<double> eigs;
};

SymmetricRun symmetric_run(const ExperimentConfig& c, std::size_t n, std::size_t rep, double scale, double center) {
    const auto m = sample_dme(n, experiment_stream(c.name, c.seed, n, rep));
    const double nd = static_cast<double>(n);
    const double factor = scale * std::sqrt(nd);
    Matrix plain = symmetrize(m.matrix());
    plain *= factor;
    Matrix centered = plain;
    for (double& v : centered.data()) v -= factor * center / nd;

    SymmetricRun r;
    r.asymmetry = asymmetry(centered) / std::max(frobenius_norm(centered), std::numeric_limits<double>::min());
    r.eigs = symmetric_eigenvalues(centered);
    CompensatedSum second;
    for (double v : r.eigs) second += v * v;
    r.sigma_fit = std::sqrt(second.value() / nd);
    const Esd1D esd(r.eigs);
    r.ks_fit = ks_distance(esd, ReferenceLaw::semicircle(r.sigma_fit));
    r.ks_unit = ks_distance(esd, ReferenceLaw::semicircle(1.0));

    const auto uncentered = symmetric_eigenvalues(plain);
    r.top_uncentered = uncentered.front();
    r.bulk_edge_uncentered = n > 1 ? std::max(std::abs(uncentered[1]), std::abs(uncentered.back())) : 0.0;
    return r;
}

}  // namespace

ExperimentReport exp_symmetric_part(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "symmetric_part", 400, 1);
    if (c.n < 2) throw ParameterError("symmetric_part needs n >= 2");
    const double scale = c.param("scale", std::sqrt(2.0));
    const double center = c.param("center", 1.0);
    const double sym_tol = c.param("symmetry_tol", 1e-12);
    const double ks_max = c.param("ks_max", 0.1);
    const double sep_min = c.param("separation_min", 2.0);
    const std::size_t compare_n = count_param(c, "compare_n", 100);

    ExperimentReport report;
    auto results = run_replicas<SymmetricRun>(c.reps, c.threads, report.failures,
                                              [&](std::size_t rep) { return symmetric_run(c, c.n, rep, scale, center); });
    std::vector<double> first_eigs;
    if (results.front()) first_eigs = results.front()->eigs;
    auto ok = successful(results);
    std::vector<double> asym, sigma, ks_fit, ks_unit, sep;
    for (const auto& r : ok) {
        asym.push_back(r.asymmetry);
        sigma.push_back(r.sigma_fit);
        ks_fit.push_back(r.ks_fit);
        ks_unit.push_back(r.ks_unit);
        sep.push_back(r.top_uncentered / r.bulk_edge_uncentered);
    }
    auto& st = report.statistics;
    st["replicas_ok"] = static_cast<double>(ok.size());
    st["asymmetry_max"] = max_of(asym);
    st["sigma_fit"] = mean(sigma);
    st["ks_fit"] = mean(ks_fit);
    st["ks_unit"] = mean(ks_unit);
    st["separation"] = mean(sep);
    st["separation_min_observed"] = min_of(sep);

    report.criteria.push_back(make_criterion("symmetric", st["asymmetry_max"], "<=", {"symmetry_tol"},
                                             !ok.empty() && st["asymmetry_max"] <= sym_tol));
    report.criteria.push_back(make_criterion("top_separated", min_of(sep), ">=", {"separation_min"}, !ok.empty() && min_of(sep) >= sep_min));
    report.criteria.push_back(make_criterion("ks_fit", st["ks_fit"], "<", {"ks_max"}, st["ks_fit"] < ks_max, false));

    if (compare_n >= 2 && compare_n < c.n) {
        auto small = run_replicas<SymmetricRun>(c.reps, c.threads, report.failures,
                                                [&](std::size_t rep) { return symmetric_run(c, compare_n, rep, scale, center); });
        std::vector<double> small_ks;
        for (auto& r : small)
            if (r) small_ks.push_back(r->ks_fit);
        st["ks_fit_compare"] = mean(small_ks);
        report.criteria.push_back(
            make_criterion("ks_decreases", st["ks_fit"], "<", {"ks_fit_compare"}, st["ks_fit"] < st["ks_fit_compare"], false));
    }
    if (!first_eigs.empty()) report.artifacts.push_back(column_artifact("symmetric_eigs.csv", "value", first_eigs));
    report.config = c;
    finish(report, start);
    return report;
}

// ---------------------------------------------------------------------------

std::vector<double> kernel_distances(const MarkovMatrix& m, const SimplexVector& pi, const std::vector<unsigned>& powers) {
    if (pi.size() != m.n()) throw ParameterError("Perron vector dimension mismatch");
    std::vector<double> out;
    out.reserve(powers.size());
    for (unsigned k : powers) {
        const auto p = matrix_power(m, k);
        double worst = 0.0;
        for (std::size_t i = 0; i < m.n(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < m.n(); ++j) row += std::abs(p(i, j) - pi[j]);
            worst = std::max(worst, row);
        }
        out.push_back(worst);
    }
    return out;
}

double geometric_rate(const std::vector<unsigned>& powers, const std::vector<double>& distances, double floor) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        if (!(distances[i] > floor)) continue;
        const double x = powers[i], y = std::log(distances[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return 0.0;
    const double cn = static_cast<double>(count);
    const double slope = (cn * sxy - sx * sy) / (cn * sxx - sx * sx);
    return std::exp(slope);
}

ExperimentReport exp_kernel_convergence(ExperimentConfig c) {
    const auto start = Clock::now();
    apply_defaults(c, "kernel_convergence", 20, 1);
    if (c.n < 2) throw ParameterError("kernel_convergence needs n >= 2");
    const std::size_t k_max = count_param(c, "k_max", 64);
    const double perron_tol = c.param("perron_tol", 1e-12);
    const double final_max = c.param("final_max", 1e-8);
    const double rate_tol = c.param("rate_rel_tol", 0.2);
    const double floor = c.param("fit_floor", 1e-12);
    if (k_max < 2) throw ParameterError("k_max must be >= 2");
    std::vector<unsigned> powers;
    for (unsigned k = 2; k <= k_max; k += 2) powers.push_back(k);
    const std::size_t n = c.n;

    struct R {
        double residual, final_distance, rate, lambda2;
        std::vector<double> distances;
    };
    ExperimentReport report;
    auto results = run_replicas<R>(c.reps, c.threads, report.failures, [&](std::size_t rep) {
        const auto m = sample_dme(n, experiment_stream(c.name, c.seed, n, rep));
        const auto pi = perron_vector(m);
        R r;
        r.residual = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += pi[i] * m(i, j);
            r.residual += std::abs(s - pi[j]);
        }
        r.distances = kernel_distances(m, pi, powers);
        r.final_distance = r.distances.back();
        r.rate = geometric_rate(powers, r.distances, floor);
        r.lambda2 = std::abs(subdominant(m.matrix()));
        return r;
    });
    std::vector<double> first_distances;
    if (results.front()) first_distances = results.front()->distances;
    auto ok = successful(results);
    std::vector<double> residual, final_d, rate, l2, rel;
    for (const auto& r : ok) {
        residual.push_back(r.residual);
        final_d.push_back(r.final_distance);
        rate.push_back(r.rate);
        l2.push_back(r.lambda2);
        rel.push_back(std::abs(r.rate / r.lambda2 - 1.0));
    }
    auto& st = report.statistics;
    st["replicas_ok"] = static_cast<double>(ok.size());
    st["perron_residual_max"] = max_of(residual);
    st["final_distance_max"] = max_of(final_d);
    st["decay_rate"] = mean(rate);
    st["lambda2_modulus"] = mean(l2);
    st["rate_rel_error_max"] = max_of(rel);

    const bool any = !ok.empty();
    report.criteria.push_back(
        make_criterion("perron_fixed_point", st["perron_residual_max"], "<=", {"perron_tol"}, any && st["perron_residual_max"] <= perron_tol));
    report.criteria.push_back(
        make_criterion("kernel_reached", st["final_distance_max"], "<=", {"final_max"}, any && st["final_distance_max"] <= final_max));
    report.criteria.push_back(
        make_criterion("rate_matches_lambda2", st["rate_rel_error_max"], "<=", {"rate_rel_tol"}, any && st["rate_rel_error_max"] <= rate_tol));

    if (!first_distances.empty()) {
        Artifact a{"kernel_distances.csv", {"k", "distance"}, {}};
        for (std::size_t i = 0; i < powers.size(); ++i) a.rows.push_back({static_cast<double>(powers[i]), first_distances[i]});
        report.artifacts.push_back(std::move(a));
    }
    report.config = c;
    finish(report, start);
    return report;
}

}  // namespace dme
